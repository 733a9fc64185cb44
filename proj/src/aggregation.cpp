#include "relrep/aggregation.hpp"

#include <string>

namespace relrep {
namespace {

std::vector<std::span<const double>> const_blocks(const std::vector<std::span<double>>& blocks) {
    std::vector<std::span<const double>> out;
    out.reserve(blocks.size());
    for (auto b : blocks) out.emplace_back(b.data(), b.size());
    return out;
}

void check_space(const AggregatorParams& params, const ProductSpace& space) {
    require(space.size() == params.space_count(), ErrorCode::BadShape,
            "aggregator expects " + std::to_string(params.space_count()) + " subspaces, got " +
                std::to_string(space.size()));
    for (const auto& c : space.components) {
        require(c.data.cols() == params.anchor_count, ErrorCode::BadShape,
                "aggregator expects " + std::to_string(params.anchor_count) + " anchors, got " +
                    std::to_string(c.data.cols()));
        require(c.data.rows() == space.rows(), ErrorCode::BadShape, "subspaces disagree on sample count");
    }
}

double accuracy_of(const Matrix& logits, const std::vector<int>& labels) {
    const auto pred = argmax_rows(logits);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == labels[i];
    return pred.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(pred.size());
}

} // namespace

std::string_view aggregator_name(AggregatorKind kind) noexcept {
    switch (kind) {
    case AggregatorKind::Concat: return "concat";
    case AggregatorKind::MlpSum: return "mlp_sum";
    case AggregatorKind::SelfAttention: return "self_attention";
    case AggregatorKind::MlpSelfAttention: return "mlp_self_attention";
    }
    return "unknown";
}

AggregatorKind parse_aggregator(std::string_view name) {
    for (auto kind : {AggregatorKind::Concat, AggregatorKind::MlpSum, AggregatorKind::SelfAttention,
                      AggregatorKind::MlpSelfAttention}) {
        if (aggregator_name(kind) == name) return kind;
    }
    fail(ErrorCode::UnknownName, "unknown aggregator '" + std::string(name) + "'");
}

bool uses_attention(AggregatorKind kind) noexcept {
    return kind == AggregatorKind::SelfAttention || kind == AggregatorKind::MlpSelfAttention;
}

Index AggregatorParams::output_width() const noexcept {
    return kind == AggregatorKind::Concat ? static_cast<Index>(per_space.size()) * anchor_count : anchor_count;
}

std::vector<std::span<double>> AggregatorParams::parameter_blocks() {
    std::vector<std::span<double>> out;
    for (auto& s : per_space) {
        out.emplace_back(s.norm.gain.data(), static_cast<std::size_t>(s.norm.gain.size()));
        out.emplace_back(s.norm.bias.data(), static_cast<std::size_t>(s.norm.bias.size()));
        if (s.linear) {
            out.emplace_back(s.linear->weight.data(), static_cast<std::size_t>(s.linear->weight.size()));
            out.emplace_back(s.linear->bias.data(), static_cast<std::size_t>(s.linear->bias.size()));
        }
    }
    for (auto b : qkv_blocks()) out.push_back(b);
    return out;
}

std::vector<std::span<const double>> AggregatorParams::parameter_blocks() const {
    return const_blocks(const_cast<AggregatorParams*>(this)->parameter_blocks());
}

std::vector<std::span<double>> AggregatorParams::qkv_blocks() {
    std::vector<std::span<double>> out;
    if (attention) {
        for (Matrix* m : {&attention->query, &attention->key, &attention->value})
            out.emplace_back(m->data(), static_cast<std::size_t>(m->size()));
    }
    return out;
}

std::vector<std::span<const double>> AggregatorParams::frozen_blocks() const {
    auto all = parameter_blocks();
    all.resize(all.size() - (attention ? 3 : 0));
    return all;
}

std::size_t AggregatorParams::parameter_count() const {
    std::size_t total = 0;
    for (auto b : parameter_blocks()) total += b.size();
    return total;
}

AggregatorParams init_aggregator(AggregatorKind kind, std::size_t space_count, Index anchor_count,
                                 std::uint64_t seed) {
    require(space_count >= 1 && anchor_count >= 1, ErrorCode::BadShape,
            "aggregator needs at least one subspace and one anchor");
    AggregatorParams params;
    params.kind = kind;
    params.anchor_count = anchor_count;
    Rng rng(seed);
    const bool mlp = kind == AggregatorKind::MlpSum || kind == AggregatorKind::MlpSelfAttention;
    for (std::size_t i = 0; i < space_count; ++i) {
        SpaceBlock block{make_layer_norm(anchor_count), std::nullopt};
        if (mlp) block.linear = make_linear(anchor_count, anchor_count, rng);
        params.per_space.push_back(std::move(block));
    }
    if (uses_attention(kind)) params.attention = make_attention(anchor_count, rng);
    return params;
}

Matrix aggregate(const AggregatorParams& params, const ProductSpace& space, AggregatorCache* cache) {
    check_space(params, space);
    const Index n = space.rows();
    const Index a = params.anchor_count;
    const auto n_spaces = static_cast<Index>(params.space_count());
    if (cache) {
        cache->spaces.assign(params.space_count(), {});
        cache->rows = n;
    }

    // Per-space preprocessing, written side by side into one n x (N*A) block.
    Matrix stacked(n, n_spaces * a);
    for (std::size_t i = 0; i < params.space_count(); ++i) {
        const SpaceBlock& block = params.per_space[i];
        AggregatorCache::Space* c = cache ? &cache->spaces[i] : nullptr;
        Matrix h = layer_norm_forward(block.norm, space.components[i].data, c ? &c->norm : nullptr);
        if (block.linear) {
            h = linear_forward(*block.linear, h, c ? &c->linear : nullptr);
            h = tanh_forward(h, c ? &c->tanh : nullptr);
        }
        stacked.middleCols(static_cast<Index>(i) * a, a) = h;
    }

    switch (params.kind) {
    case AggregatorKind::Concat: return stacked;
    case AggregatorKind::MlpSum: {
        Matrix sum = Matrix::Zero(n, a);
        for (Index i = 0; i < n_spaces; ++i) sum += stacked.middleCols(i * a, a);
        return sum;
    }
    case AggregatorKind::SelfAttention:
    case AggregatorKind::MlpSelfAttention: {
        require(params.attention.has_value(), ErrorCode::BadShape, "attention aggregator without attention head");
        const Matrix mixed = attention_forward(*params.attention, stacked, cache ? &cache->attention : nullptr);
        Matrix pooled = Matrix::Zero(n, a);
        for (Index i = 0; i < n_spaces; ++i) pooled += mixed.middleCols(i * a, a);
        return pooled / static_cast<double>(n_spaces);
    }
    }
    fail(ErrorCode::WrongKind, "unknown aggregator kind");
}

AggregatorParams aggregate_backward(const AggregatorParams& params, const AggregatorCache& cache,
                                    const Matrix& upstream) {
    require(cache.spaces.size() == params.space_count() && cache.rows == upstream.rows(), ErrorCode::MissingCache,
            "aggregate_backward called without a matching forward cache");
    require(upstream.cols() == params.output_width(), ErrorCode::DimensionMismatch, "upstream width mismatch");
    const Index a = params.anchor_count;
    const auto n_spaces = static_cast<Index>(params.space_count());

    AggregatorParams grad = params;
    Matrix d_stacked(upstream.rows(), n_spaces * a);
    switch (params.kind) {
    case AggregatorKind::Concat: d_stacked = upstream; break;
    case AggregatorKind::MlpSum:
        for (Index i = 0; i < n_spaces; ++i) d_stacked.middleCols(i * a, a) = upstream;
        break;
    case AggregatorKind::SelfAttention:
    case AggregatorKind::MlpSelfAttention: {
        Matrix d_mixed(upstream.rows(), n_spaces * a);
        const Matrix share = upstream / static_cast<double>(n_spaces);
        for (Index i = 0; i < n_spaces; ++i) d_mixed.middleCols(i * a, a) = share;
        d_stacked = attention_backward(*params.attention, cache.attention, d_mixed, *grad.attention);
        break;
    }
    }

    for (std::size_t i = 0; i < params.space_count(); ++i) {
        const SpaceBlock& block = params.per_space[i];
        const auto& c = cache.spaces[i];
        Matrix g = d_stacked.middleCols(static_cast<Index>(i) * a, a);
        if (block.linear) {
            g = tanh_backward(c.tanh, g);
            g = linear_backward(*block.linear, c.linear, g, *grad.per_space[i].linear);
        }
        layer_norm_backward(block.norm, c.norm, g, grad.per_space[i].norm);
    }
    return grad;
}

Matrix attention_weights(const AggregatorParams& params, const ProductSpace& space) {
    require(uses_attention(params.kind) && params.attention, ErrorCode::WrongKind,
            "attention weights need an attention aggregator, got " + std::string(aggregator_name(params.kind)));
    AggregatorCache cache;
    aggregate(params, space, &cache);
    const auto n_spaces = static_cast<Index>(params.space_count());
    Matrix mean = Matrix::Zero(n_spaces, n_spaces);
    for (const Matrix& p : cache.attention.probs) mean += p;
    return mean / static_cast<double>(cache.attention.probs.size());
}

FinetuneResult finetune_qkv(const AggregatorParams& params, const Network& head, const ProductSpace& space,
                            const std::vector<int>& labels, const TrainConfig& cfg) {
    require(uses_attention(params.kind) && params.attention, ErrorCode::WrongKind,
            "QKV fine-tuning needs an attention aggregator, got " + std::string(aggregator_name(params.kind)));
    cfg.validate();
    require(static_cast<Index>(labels.size()) == space.rows(), ErrorCode::DimensionMismatch,
            "label count does not match samples");
    FinetuneResult result{params, {}};
    AggregatorParams& tuned = result.params;
    const auto n = static_cast<std::size_t>(space.rows());
    std::size_t qkv_count = 0;
    for (auto b : tuned.qkv_blocks()) qkv_count += b.size();
    Adam adam(qkv_count, cfg.learning_rate, cfg.adam);
    Rng rng(cfg.seed);

    auto evaluate = [&] { return accuracy_of(predict(head, aggregate(tuned, space)), labels); };
    result.accuracy_trace.push_back(evaluate());
    const std::size_t batch = cfg.batch_size == 0 ? n : std::min(cfg.batch_size, n);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto order = epoch_order(n, cfg, rng);
        for (std::size_t start = 0; start < n; start += batch) {
            const std::vector<std::size_t> rows(order.begin() + static_cast<std::ptrdiff_t>(start),
                                                order.begin() + static_cast<std::ptrdiff_t>(std::min(n, start + batch)));
            const ProductSpace part = rows.size() == n ? space : select_rows(space, rows);
            std::vector<int> part_labels;
            part_labels.reserve(rows.size());
            for (auto r : rows) part_labels.push_back(labels[r]);

            AggregatorCache cache;
            const Matrix features = aggregate(tuned, part, &cache);
            ForwardResult fwd = forward(head, features);
            const LossResult l = cross_entropy(fwd.output, part_labels);
            const NetworkGradients head_grads = backward(head, fwd.cache, l.gradient);
            AggregatorParams grads = aggregate_backward(tuned, cache, head_grads.input);
            adam.step(tuned.qkv_blocks(), const_blocks(grads.qkv_blocks()));
        }
        result.accuracy_trace.push_back(evaluate());
    }
    return result;
}

} // namespace relrep
