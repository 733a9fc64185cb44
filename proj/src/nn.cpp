#include "relrep/nn.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <string>

#include <openssl/evp.h>

namespace relrep {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};

std::span<double> block(Matrix& m) { return {m.data(), static_cast<std::size_t>(m.size())}; }
std::span<double> block(Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }
std::span<const double> block(const Matrix& m) { return {m.data(), static_cast<std::size_t>(m.size())}; }
std::span<const double> block(const Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

void fill_uniform(Matrix& m, double bound, Rng& rng) {
    // Row-major fill order so the stream-to-entry mapping is easy to state.
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j) m(i, j) = rng.uniform(-bound, bound);
}

Index token_count(const SelfAttentionHead& head, Index width) {
    const Index m = head.width();
    require(m > 0 && width % m == 0, ErrorCode::DimensionMismatch,
            "attention input width " + std::to_string(width) + " is not a multiple of token width " +
                std::to_string(m));
    return width / m;
}

void softmax_rows_inplace(Matrix& s) {
    for (Index i = 0; i < s.rows(); ++i) {
        const double peak = s.row(i).maxCoeff();
        s.row(i) = (s.row(i).array() - peak).exp().matrix();
        s.row(i) /= s.row(i).sum();
    }
}

} // namespace

Linear make_linear(Index in, Index out, Rng& rng) {
    require(in >= 1 && out >= 1, ErrorCode::BadShape, "linear layer dimensions must be positive");
    Linear layer{Matrix(out, in), Vector::Zero(out)};
    fill_uniform(layer.weight, 1.0 / std::sqrt(static_cast<double>(in)), rng);
    return layer;
}

LayerNorm make_layer_norm(Index width, double eps) {
    require(width >= 1, ErrorCode::BadShape, "layer norm width must be positive");
    require(eps > 0.0, ErrorCode::BadConfig, "layer norm eps must be positive");
    return LayerNorm{Vector::Ones(width), Vector::Zero(width), eps};
}

SelfAttentionHead make_attention(Index width, Rng& rng) {
    require(width >= 1, ErrorCode::BadShape, "attention width must be positive");
    SelfAttentionHead head{Matrix(width, width), Matrix(width, width), Matrix(width, width)};
    const double bound = 1.0 / std::sqrt(static_cast<double>(width));
    fill_uniform(head.query, bound, rng);
    fill_uniform(head.key, bound, rng);
    fill_uniform(head.value, bound, rng);
    return head;
}

std::vector<std::span<double>> parameter_blocks(Layer& layer) {
    return std::visit(Overloaded{
                          [](Linear& l) { return std::vector<std::span<double>>{block(l.weight), block(l.bias)}; },
                          [](LayerNorm& l) { return std::vector<std::span<double>>{block(l.gain), block(l.bias)}; },
                          [](Tanh&) { return std::vector<std::span<double>>{}; },
                          [](SelfAttentionHead& h) {
                              return std::vector<std::span<double>>{block(h.query), block(h.key), block(h.value)};
                          },
                      },
                      layer);
}

std::vector<std::span<const double>> parameter_blocks(const Layer& layer) {
    auto& mutable_layer = const_cast<Layer&>(layer);
    std::vector<std::span<const double>> out;
    for (auto b : parameter_blocks(mutable_layer)) out.emplace_back(b.data(), b.size());
    return out;
}

Layer zeros_like(const Layer& layer) {
    Layer out = layer;
    for (auto b : parameter_blocks(out)) std::fill(b.begin(), b.end(), 0.0);
    return out;
}

Matrix linear_forward(const Linear& layer, const Matrix& x, LinearCache* cache) {
    require(x.cols() == layer.weight.cols(), ErrorCode::DimensionMismatch,
            "linear layer expects width " + std::to_string(layer.weight.cols()) + ", got " +
                std::to_string(x.cols()));
    Matrix y = x * layer.weight.transpose();
    y.rowwise() += layer.bias.transpose();
    if (cache) cache->input = x;
    return y;
}

Matrix linear_backward(const Linear& layer, const LinearCache& cache, const Matrix& upstream, Linear& grad) {
    require(cache.input.rows() == upstream.rows(), ErrorCode::MissingCache, "linear cache does not match upstream");
    grad.weight = upstream.transpose() * cache.input;
    grad.bias = upstream.colwise().sum().transpose();
    return upstream * layer.weight;
}

Matrix layer_norm_forward(const LayerNorm& layer, const Matrix& x, LayerNormCache* cache) {
    require(x.cols() == layer.gain.size(), ErrorCode::DimensionMismatch,
            "layer norm expects width " + std::to_string(layer.gain.size()) + ", got " + std::to_string(x.cols()));
    const double width = static_cast<double>(x.cols());
    Matrix normalized(x.rows(), x.cols());
    Vector inv_std(x.rows());
    for (Index i = 0; i < x.rows(); ++i) {
        const double mean = x.row(i).mean();
        const RowVector centered = x.row(i).array() - mean;
        const double var = centered.squaredNorm() / width;
        inv_std(i) = 1.0 / std::sqrt(var + layer.eps);
        normalized.row(i) = centered * inv_std(i);
    }
    Matrix y = normalized.array().rowwise() * layer.gain.transpose().array();
    y.rowwise() += layer.bias.transpose();
    if (cache) {
        cache->normalized = std::move(normalized);
        cache->inv_std = std::move(inv_std);
    }
    return y;
}

Matrix layer_norm_backward(const LayerNorm& layer, const LayerNormCache& cache, const Matrix& upstream,
                           LayerNorm& grad) {
    require(cache.normalized.rows() == upstream.rows() && cache.normalized.cols() == upstream.cols(),
            ErrorCode::MissingCache, "layer norm cache does not match upstream");
    grad.gain = (upstream.array() * cache.normalized.array()).colwise().sum().transpose();
    grad.bias = upstream.colwise().sum().transpose();
    const Matrix dxhat = upstream.array().rowwise() * layer.gain.transpose().array();
    Matrix dx(upstream.rows(), upstream.cols());
    for (Index i = 0; i < upstream.rows(); ++i) {
        const double mean_d = dxhat.row(i).mean();
        const double mean_dx = dxhat.row(i).dot(cache.normalized.row(i)) / static_cast<double>(upstream.cols());
        dx.row(i) = cache.inv_std(i) *
                    (dxhat.row(i).array() - mean_d - cache.normalized.row(i).array() * mean_dx).matrix();
    }
    return dx;
}

Matrix tanh_forward(const Matrix& x, TanhCache* cache) {
    Matrix y = x.array().tanh().matrix();
    if (cache) cache->output = y;
    return y;
}

Matrix tanh_backward(const TanhCache& cache, const Matrix& upstream) {
    require(cache.output.rows() == upstream.rows() && cache.output.cols() == upstream.cols(),
            ErrorCode::MissingCache, "tanh cache does not match upstream");
    return (upstream.array() * (1.0 - cache.output.array().square())).matrix();
}

Matrix attention_forward(const SelfAttentionHead& head, const Matrix& x, AttentionCache* cache) {
    const Index m = head.width();
    const Index n_tokens = token_count(head, x.cols());
    const Index n = x.rows();
    const double scale = 1.0 / std::sqrt(static_cast<double>(m));

    // Sample-major token stack: row s*N + t holds token t of sample s.
    Matrix tokens(n * n_tokens, m);
    for (Index s = 0; s < n; ++s)
        for (Index t = 0; t < n_tokens; ++t) tokens.row(s * n_tokens + t) = x.block(s, t * m, 1, m);

    Matrix q = tokens * head.query.transpose();
    Matrix k = tokens * head.key.transpose();
    Matrix v = tokens * head.value.transpose();

    Matrix y(n, x.cols());
    std::vector<Matrix> probs;
    if (cache) probs.reserve(static_cast<std::size_t>(n));
    for (Index s = 0; s < n; ++s) {
        Matrix p = scale * q.middleRows(s * n_tokens, n_tokens) * k.middleRows(s * n_tokens, n_tokens).transpose();
        softmax_rows_inplace(p);
        const Matrix out = p * v.middleRows(s * n_tokens, n_tokens);
        for (Index t = 0; t < n_tokens; ++t) y.block(s, t * m, 1, m) = out.row(t);
        if (cache) probs.push_back(std::move(p));
    }
    if (cache) {
        cache->tokens = std::move(tokens);
        cache->query = std::move(q);
        cache->key = std::move(k);
        cache->value = std::move(v);
        cache->probs = std::move(probs);
    }
    return y;
}

Matrix attention_backward(const SelfAttentionHead& head, const AttentionCache& cache, const Matrix& upstream,
                          SelfAttentionHead& grad) {
    const Index m = head.width();
    const Index n_tokens = token_count(head, upstream.cols());
    const Index n = upstream.rows();
    require(static_cast<Index>(cache.probs.size()) == n && cache.tokens.rows() == n * n_tokens,
            ErrorCode::MissingCache, "attention cache does not match upstream");
    const double scale = 1.0 / std::sqrt(static_cast<double>(m));

    Matrix dq(n * n_tokens, m), dk(n * n_tokens, m), dv(n * n_tokens, m);
    Matrix d_out(n_tokens, m);
    for (Index s = 0; s < n; ++s) {
        for (Index t = 0; t < n_tokens; ++t) d_out.row(t) = upstream.block(s, t * m, 1, m);
        const Matrix& p = cache.probs[static_cast<std::size_t>(s)];
        const auto v = cache.value.middleRows(s * n_tokens, n_tokens);
        const Matrix dp = d_out * v.transpose();
        dv.middleRows(s * n_tokens, n_tokens) = p.transpose() * d_out;
        // Softmax Jacobian applied row by row.
        const Vector row_dot = (dp.array() * p.array()).rowwise().sum();
        const Matrix ds = (p.array() * (dp.array().colwise() - row_dot.array())).matrix() * scale;
        dq.middleRows(s * n_tokens, n_tokens) = ds * cache.key.middleRows(s * n_tokens, n_tokens);
        dk.middleRows(s * n_tokens, n_tokens) = ds.transpose() * cache.query.middleRows(s * n_tokens, n_tokens);
    }
    grad.query = dq.transpose() * cache.tokens;
    grad.key = dk.transpose() * cache.tokens;
    grad.value = dv.transpose() * cache.tokens;
    const Matrix d_tokens = dq * head.query + dk * head.key + dv * head.value;

    Matrix dx(n, upstream.cols());
    for (Index s = 0; s < n; ++s)
        for (Index t = 0; t < n_tokens; ++t) dx.block(s, t * m, 1, m) = d_tokens.row(s * n_tokens + t);
    return dx;
}

std::vector<Matrix> attention_probabilities(const SelfAttentionHead& head, const Matrix& x) {
    AttentionCache cache;
    attention_forward(head, x, &cache);
    return std::move(cache.probs);
}

Matrix layer_forward(const Layer& layer, const Matrix& x, LayerCache* cache) {
    return std::visit(Overloaded{
                          [&](const Linear& l) {
                              if (!cache) return linear_forward(l, x);
                              LinearCache c;
                              Matrix y = linear_forward(l, x, &c);
                              *cache = std::move(c);
                              return y;
                          },
                          [&](const LayerNorm& l) {
                              if (!cache) return layer_norm_forward(l, x);
                              LayerNormCache c;
                              Matrix y = layer_norm_forward(l, x, &c);
                              *cache = std::move(c);
                              return y;
                          },
                          [&](const Tanh&) {
                              if (!cache) return tanh_forward(x);
                              TanhCache c;
                              Matrix y = tanh_forward(x, &c);
                              *cache = std::move(c);
                              return y;
                          },
                          [&](const SelfAttentionHead& h) {
                              if (!cache) return attention_forward(h, x);
                              AttentionCache c;
                              Matrix y = attention_forward(h, x, &c);
                              *cache = std::move(c);
                              return y;
                          },
                      },
                      layer);
}

Matrix layer_backward(const Layer& layer, const LayerCache& cache, const Matrix& upstream, Layer& grad) {
    auto cache_of = [&]<class C>(std::type_identity<C>) -> const C& {
        const C* c = std::get_if<C>(&cache);
        require(c != nullptr, ErrorCode::MissingCache, "cache type does not match layer");
        return *c;
    };
    if (grad.index() != layer.index()) grad = zeros_like(layer);
    return std::visit(Overloaded{
                          [&](const Linear& l) {
                              return linear_backward(l, cache_of(std::type_identity<LinearCache>{}), upstream,
                                                     std::get<Linear>(grad));
                          },
                          [&](const LayerNorm& l) {
                              return layer_norm_backward(l, cache_of(std::type_identity<LayerNormCache>{}),
                                                         upstream, std::get<LayerNorm>(grad));
                          },
                          [&](const Tanh&) {
                              return tanh_backward(cache_of(std::type_identity<TanhCache>{}), upstream);
                          },
                          [&](const SelfAttentionHead& h) {
                              return attention_backward(h, cache_of(std::type_identity<AttentionCache>{}),
                                                        upstream, std::get<SelfAttentionHead>(grad));
                          },
                      },
                      layer);
}

Network::Network(Index input_dim, std::vector<Layer> layers) : input_dim_(input_dim), layers_(std::move(layers)) {
    require(input_dim >= 1, ErrorCode::BadShape, "network input dimension must be positive");
    Index width = input_dim;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const std::string where = "layer " + std::to_string(i);
        std::visit(Overloaded{
                       [&](const Linear& l) {
                           require(l.weight.cols() == width && l.bias.size() == l.weight.rows(),
                                   ErrorCode::DimensionMismatch, where + ": linear shape does not chain");
                           width = l.weight.rows();
                       },
                       [&](const LayerNorm& l) {
                           require(l.gain.size() == width && l.bias.size() == width, ErrorCode::DimensionMismatch,
                                   where + ": layer norm width does not chain");
                           require(l.eps > 0.0, ErrorCode::BadConfig, where + ": eps must be positive");
                       },
                       [](const Tanh&) {},
                       [&](const SelfAttentionHead& h) {
                           require(h.query.rows() == h.query.cols() && h.key.rows() == h.query.rows() &&
                                       h.key.cols() == h.query.rows() && h.value.rows() == h.query.rows() &&
                                       h.value.cols() == h.query.rows(),
                                   ErrorCode::BadShape, where + ": attention matrices must be square and equal");
                           token_count(h, width);
                       },
                   },
                   layers_[i]);
    }
    output_dim_ = width;
}

std::vector<std::span<double>> Network::parameter_blocks() {
    std::vector<std::span<double>> out;
    for (auto& layer : layers_)
        for (auto b : relrep::parameter_blocks(layer)) out.push_back(b);
    return out;
}

std::vector<std::span<const double>> Network::parameter_blocks() const {
    std::vector<std::span<const double>> out;
    for (const auto& layer : layers_)
        for (auto b : relrep::parameter_blocks(layer)) out.push_back(b);
    return out;
}

std::size_t Network::parameter_count() const {
    std::size_t total = 0;
    for (auto b : parameter_blocks()) total += b.size();
    return total;
}

Network make_mlp(const std::vector<Index>& dims, bool final_tanh, std::uint64_t seed) {
    require(dims.size() >= 2, ErrorCode::BadShape, "an MLP needs at least input and output sizes");
    Rng rng(seed);
    std::vector<Layer> layers;
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
        layers.emplace_back(make_linear(dims[i], dims[i + 1], rng));
        if (i + 2 < dims.size() || final_tanh) layers.emplace_back(Tanh{});
    }
    return Network(dims.front(), std::move(layers));
}

std::vector<std::span<const double>> NetworkGradients::parameter_blocks() const {
    std::vector<std::span<const double>> out;
    for (const auto& layer : layers)
        for (auto b : relrep::parameter_blocks(layer)) out.push_back(b);
    return out;
}

Matrix predict(const Network& net, const Matrix& x) {
    require(x.cols() == net.input_dim(), ErrorCode::DimensionMismatch,
            "network expects width " + std::to_string(net.input_dim()) + ", got " + std::to_string(x.cols()));
    Matrix h = x;
    for (const auto& layer : net.layers()) h = layer_forward(layer, h);
    return h;
}

ForwardResult forward(const Network& net, const Matrix& x) {
    require(x.cols() == net.input_dim(), ErrorCode::DimensionMismatch,
            "network expects width " + std::to_string(net.input_dim()) + ", got " + std::to_string(x.cols()));
    ForwardResult result;
    result.cache.layers.resize(net.layers().size());
    Matrix h = x;
    for (std::size_t i = 0; i < net.layers().size(); ++i) h = layer_forward(net.layers()[i], h, &result.cache.layers[i]);
    result.output = std::move(h);
    return result;
}

NetworkGradients backward(const Network& net, const NetworkCache& cache, const Matrix& upstream) {
    require(cache.layers.size() == net.layers().size(), ErrorCode::MissingCache,
            "backward called without a matching forward cache");
    require(upstream.cols() == net.output_dim(), ErrorCode::DimensionMismatch, "upstream gradient width mismatch");
    NetworkGradients grads;
    grads.layers.reserve(net.layers().size());
    for (const auto& layer : net.layers()) grads.layers.push_back(zeros_like(layer));
    Matrix g = upstream;
    for (std::size_t i = net.layers().size(); i-- > 0;) {
        g = layer_backward(net.layers()[i], cache.layers[i], g, grads.layers[i]);
    }
    grads.input = std::move(g);
    return grads;
}

LossResult cross_entropy(const Matrix& logits, const std::vector<int>& labels) {
    require(static_cast<Index>(labels.size()) == logits.rows(), ErrorCode::DimensionMismatch,
            "label count does not match prediction rows");
    require(logits.rows() >= 1, ErrorCode::BadShape, "empty prediction");
    const double n = static_cast<double>(logits.rows());
    LossResult r;
    r.gradient.resize(logits.rows(), logits.cols());
    for (Index i = 0; i < logits.rows(); ++i) {
        const int y = labels[static_cast<std::size_t>(i)];
        require(y >= 0 && y < logits.cols(), ErrorCode::BadLabel,
                "label " + std::to_string(y) + " outside [0, " + std::to_string(logits.cols()) + ")");
        const double peak = logits.row(i).maxCoeff();
        const RowVector e = (logits.row(i).array() - peak).exp().matrix();
        const double total = e.sum();
        r.value += std::log(total) + peak - logits(i, y);
        r.gradient.row(i) = e / total;
        r.gradient(i, y) -= 1.0;
    }
    r.value /= n;
    r.gradient /= n;
    return r;
}

LossResult regression_loss(LossKind kind, const Matrix& pred, const Matrix& target) {
    require(pred.rows() == target.rows() && pred.cols() == target.cols(), ErrorCode::DimensionMismatch,
            "prediction and target shapes differ");
    require(kind != LossKind::CrossEntropy, ErrorCode::WrongKind, "cross entropy needs class labels");
    require(pred.size() >= 1, ErrorCode::BadShape, "empty prediction");
    const double count = static_cast<double>(pred.size());
    const Matrix diff = pred - target;
    LossResult r;
    if (kind == LossKind::MeanSquaredError) {
        r.value = diff.squaredNorm() / count;
        r.gradient = 2.0 * diff / count;
    } else {
        r.value = diff.cwiseAbs().sum() / count;
        r.gradient = diff.unaryExpr([](double d) { return static_cast<double>((d > 0.0) - (d < 0.0)); }) / count;
    }
    return r;
}

LossResult loss(LossKind kind, const Matrix& pred, const Targets& target) {
    if (kind == LossKind::CrossEntropy) {
        const auto* labels = std::get_if<std::vector<int>>(&target);
        require(labels != nullptr, ErrorCode::BadLabel, "cross entropy needs class labels");
        return cross_entropy(pred, *labels);
    }
    const auto* dense = std::get_if<Matrix>(&target);
    require(dense != nullptr, ErrorCode::DimensionMismatch, "regression losses need a target matrix");
    return regression_loss(kind, pred, *dense);
}

std::vector<int> argmax_rows(const Matrix& m) {
    std::vector<int> out(static_cast<std::size_t>(m.rows()));
    for (Index i = 0; i < m.rows(); ++i) {
        Index best = 0;
        m.row(i).maxCoeff(&best);
        out[static_cast<std::size_t>(i)] = static_cast<int>(best);
    }
    return out;
}

Adam::Adam(std::size_t parameter_count, double learning_rate, AdamConfig config)
    : learning_rate_(learning_rate), config_(config), first_(parameter_count, 0.0), second_(parameter_count, 0.0) {
    require(learning_rate > 0.0, ErrorCode::BadConfig, "learning rate must be positive");
}

void Adam::step(const std::vector<std::span<double>>& params, const std::vector<std::span<const double>>& grads) {
    require(params.size() == grads.size(), ErrorCode::BadShape, "parameter and gradient block counts differ");
    ++steps_;
    const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(steps_));
    const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(steps_));
    std::size_t offset = 0;
    for (std::size_t b = 0; b < params.size(); ++b) {
        require(params[b].size() == grads[b].size(), ErrorCode::BadShape, "parameter block size mismatch");
        require(offset + params[b].size() <= first_.size(), ErrorCode::BadShape, "more parameters than Adam state");
        for (std::size_t i = 0; i < params[b].size(); ++i, ++offset) {
            const double g = grads[b][i];
            first_[offset] = config_.beta1 * first_[offset] + (1.0 - config_.beta1) * g;
            second_[offset] = config_.beta2 * second_[offset] + (1.0 - config_.beta2) * g * g;
            const double m_hat = first_[offset] / c1;
            const double v_hat = second_[offset] / c2;
            params[b][i] -= learning_rate_ * m_hat / (std::sqrt(v_hat) + config_.epsilon);
        }
    }
}

void TrainConfig::validate() const {
    require(learning_rate > 0.0 && std::isfinite(learning_rate), ErrorCode::BadConfig, "learning_rate must be > 0");
    require(epochs >= 0, ErrorCode::BadConfig, "epochs must be >= 0");
}

std::vector<std::size_t> epoch_order(std::size_t n, const TrainConfig& cfg, Rng& rng) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (cfg.batch_size == 0 || cfg.batch_size >= n) return order;
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[static_cast<std::size_t>(rng.below(i))]);
    return order;
}

TrainResult train(Network net, const Matrix& data, const Targets& targets, LossKind kind, const TrainConfig& cfg) {
    cfg.validate();
    require(all_finite(data), ErrorCode::NonFinite, "training data contains non-finite values");
    const auto n = static_cast<std::size_t>(data.rows());
    Adam adam(net.parameter_count(), cfg.learning_rate, cfg.adam);
    Rng rng(cfg.seed);

    auto subset_targets = [&](const std::vector<std::size_t>& rows) -> Targets {
        if (const auto* labels = std::get_if<std::vector<int>>(&targets)) {
            std::vector<int> out;
            out.reserve(rows.size());
            for (auto r : rows) out.push_back(labels->at(r));
            return out;
        }
        return gather_rows(std::get<Matrix>(targets), rows);
    };

    TrainResult result;
    result.loss_curve.push_back(loss(kind, predict(net, data), targets).value);
    const std::size_t batch = cfg.batch_size == 0 ? n : std::min(cfg.batch_size, n);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto order = epoch_order(n, cfg, rng);
        for (std::size_t start = 0; start < n; start += batch) {
            const std::vector<std::size_t> rows(order.begin() + static_cast<std::ptrdiff_t>(start),
                                                order.begin() + static_cast<std::ptrdiff_t>(std::min(n, start + batch)));
            const bool whole = rows.size() == n && batch == n;
            const Matrix x = whole ? data : gather_rows(data, rows);
            ForwardResult fwd = forward(net, x);
            const LossResult l = whole ? loss(kind, fwd.output, targets) : loss(kind, fwd.output, subset_targets(rows));
            const NetworkGradients grads = backward(net, fwd.cache, l.gradient);
            adam.step(net.parameter_blocks(), grads.parameter_blocks());
        }
        result.loss_curve.push_back(loss(kind, predict(net, data), targets).value);
    }
    result.network = std::move(net);
    return result;
}

std::string parameter_digest(const std::vector<std::span<const double>>& blocks) {
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    require(ctx != nullptr, ErrorCode::IoError, "cannot allocate digest context");
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    for (auto b : blocks) {
        const std::uint64_t size = b.size();
        EVP_DigestUpdate(ctx, &size, sizeof size);
        EVP_DigestUpdate(ctx, b.data(), b.size() * sizeof(double));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    EVP_DigestFinal_ex(ctx, digest, &length);
    EVP_MD_CTX_free(ctx);
    std::ostringstream hex;
    for (unsigned int i = 0; i < length; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return hex.str();
}

} // namespace relrep
