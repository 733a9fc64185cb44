#include "relrep/stitching.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

namespace relrep {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};

/// Runs fn(i) for i in [0, count) on up to `jobs` threads. Results must be
/// written to per-index slots so the outcome does not depend on scheduling.
template <class F>
void parallel_for(std::size_t count, int jobs, F&& fn) {
    if (jobs <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    const auto workers = std::min<std::size_t>(count, static_cast<std::size_t>(jobs));
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

std::vector<std::span<const double>> transform_blocks(const TransformSpec& spec) {
    auto span_of = [](const auto& m) { return std::span<const double>(m.data(), static_cast<std::size_t>(m.size())); };
    return std::visit(Overloaded{
                          [&](const IsotropicScale& s) { return std::vector{std::span<const double>(&s.factor, 1)}; },
                          [&](const Orthogonal& o) { return std::vector{span_of(o.q)}; },
                          [&](const Translation& t) { return std::vector{span_of(t.shift)}; },
                          [&](const Permutation&) { return std::vector<std::span<const double>>{}; },
                          [&](const Affine& a) { return std::vector{span_of(a.a), span_of(a.b)}; },
                          [&](const LinearMap& a) { return std::vector{span_of(a.a)}; },
                          [&](const SwissRollIsometry&) { return std::vector<std::span<const double>>{}; },
                      },
                      spec);
}

Index task_output_dim(const Task& task) {
    return std::visit(Overloaded{[](const Classify& c) { return static_cast<Index>(c.classes); },
                                 [](const Reconstruct& r) { return r.dim; }},
                      task);
}

LossKind task_loss(const Task& task) {
    return std::holds_alternative<Classify>(task) ? LossKind::CrossEntropy : LossKind::MeanSquaredError;
}

Targets subset(const Targets& targets, const std::vector<std::size_t>& rows) {
    if (const auto* labels = std::get_if<std::vector<int>>(&targets)) {
        std::vector<int> out;
        out.reserve(rows.size());
        for (auto r : rows) out.push_back(labels->at(r));
        return out;
    }
    return gather_rows(std::get<Matrix>(targets), rows);
}

std::vector<std::span<const double>> const_blocks(const std::vector<std::span<double>>& blocks) {
    std::vector<std::span<const double>> out;
    for (auto b : blocks) out.emplace_back(b.data(), b.size());
    return out;
}

std::vector<int> labels_at(const SyntheticDataset& data, const std::vector<std::size_t>& rows) {
    require(data.labels.has_value(), ErrorCode::BadLabel, "dataset has no labels");
    std::vector<int> out;
    out.reserve(rows.size());
    for (auto r : rows) out.push_back(data.labels->at(r));
    return out;
}

std::vector<std::size_t> anchors_in_train(const std::vector<std::size_t>& train_rows, std::size_t count,
                                          std::uint64_t seed) {
    const auto picks = select_anchors(train_rows.size(), count, seed);
    std::vector<std::size_t> out;
    out.reserve(picks.size());
    for (auto p : picks) out.push_back(train_rows[p]);
    return out;
}

int class_count(const SyntheticDataset& data) {
    require(data.labels.has_value() && !data.labels->empty(), ErrorCode::BadLabel, "dataset has no labels");
    return *std::max_element(data.labels->begin(), data.labels->end()) + 1;
}

constexpr std::uint64_t kDecoderStream = 0xdec0de;

} // namespace

LatentMatrix EncoderSpec::encode(const LatentMatrix& x) const {
    return std::visit(Overloaded{
                          [&](const TransformedOracle& o) { return apply_transform(o.transform, x); },
                          [&](const TrainedMlp& m) { return LatentMatrix(predict(m.network, x.data())); },
                      },
                      model);
}

std::string EncoderSpec::digest() const {
    return std::visit(Overloaded{
                          [](const TransformedOracle& o) {
                              auto blocks = transform_blocks(o.transform);
                              std::vector<double> perm;
                              if (const auto* p = std::get_if<Permutation>(&o.transform)) {
                                  for (auto v : p->map) perm.push_back(static_cast<double>(v));
                                  blocks.emplace_back(perm.data(), perm.size());
                              }
                              return parameter_digest(blocks);
                          },
                          [](const TrainedMlp& m) { return parameter_digest(m.network.parameter_blocks()); },
                      },
                      model);
}

std::vector<EncoderSpec> train_encoders(const SyntheticDataset& data, const std::vector<std::size_t>& train_rows,
                                        const std::vector<std::uint64_t>& seeds, const EncoderArch& arch) {
    require(seeds.size() >= 2, ErrorCode::BadConfig, "at least two encoder seeds are required");
    const int classes = class_count(data);
    const Matrix x = gather_rows(data.points.data(), train_rows);
    const std::vector<int> y = labels_at(data, train_rows);

    std::vector<EncoderSpec> encoders;
    for (std::uint64_t seed : seeds) {
        std::vector<Index> dims{data.points.cols()};
        dims.insert(dims.end(), arch.hidden.begin(), arch.hidden.end());
        dims.push_back(arch.latent);
        Network encoder = make_mlp(dims, arch.final_tanh, seed);
        std::vector<Layer> layers = encoder.layers();
        Rng probe_rng(mix_seed(seed, 1));
        layers.emplace_back(make_linear(arch.latent, classes, probe_rng));
        TrainConfig cfg = arch.train;
        cfg.seed = mix_seed(seed, 2 + arch.train.seed);
        TrainResult trained = train(Network(data.points.cols(), std::move(layers)), x, y, LossKind::CrossEntropy, cfg);

        std::vector<Layer> kept = trained.network.layers();
        kept.pop_back();
        encoders.push_back({"mlp_seed" + std::to_string(seed),
                            TrainedMlp{Network(data.points.cols(), std::move(kept)), seed}});
    }
    return encoders;
}

std::vector<EncoderSpec> oracle_encoders(const std::vector<TransformSpec>& transforms) {
    std::vector<EncoderSpec> out;
    for (std::size_t i = 0; i < transforms.size(); ++i) {
        out.push_back({"oracle" + std::to_string(i) + "_" + std::string(transform_code(transform_class_of(transforms[i]))),
                       TransformedOracle{transforms[i]}});
    }
    return out;
}

double linear_probe_accuracy(const EncoderSpec& encoder, const SyntheticDataset& data,
                             const std::vector<std::size_t>& rows, const TrainConfig& cfg) {
    const LatentMatrix z = encoder.encode(LatentMatrix(gather_rows(data.points.data(), rows)));
    const std::vector<int> y = labels_at(data, rows);
    Rng rng(cfg.seed);
    Network probe(z.cols(), {make_linear(z.cols(), class_count(data), rng)});
    const TrainResult trained = train(std::move(probe), z.data(), y, LossKind::CrossEntropy, cfg);
    return accuracy(argmax_rows(predict(trained.network, z.data())), y);
}

std::string RelativeDecoder::digest() const {
    auto blocks = aggregator.parameter_blocks();
    for (auto b : head.parameter_blocks()) blocks.push_back(b);
    std::vector<double> ids(anchor_indices.begin(), anchor_indices.end());
    blocks.emplace_back(ids.data(), ids.size());
    return parameter_digest(blocks);
}

ProductSpace encode_relative(const EncoderSpec& encoder, const LatentMatrix& inputs,
                             const std::vector<std::size_t>& anchor_indices, const std::vector<SimilarityKind>& kinds,
                             const std::vector<std::size_t>& rows) {
    const LatentMatrix z = encoder.encode(inputs);
    const AnchorSet anchors = make_anchor_set(z, anchor_indices);
    return product_projection(LatentMatrix(gather_rows(z.data(), rows)), anchors, kinds);
}

void fit_decoder(RelativeDecoder& decoder, const ProductSpace& space, const Targets& targets,
                 const TrainConfig& cfg) {
    cfg.validate();
    const LossKind kind = task_loss(decoder.task);
    const auto n = static_cast<std::size_t>(space.rows());
    Adam adam(decoder.aggregator.parameter_count() + decoder.head.parameter_count(), cfg.learning_rate, cfg.adam);
    Rng rng(cfg.seed);

    auto params = [&] {
        auto blocks = decoder.aggregator.parameter_blocks();
        for (auto b : decoder.head.parameter_blocks()) blocks.push_back(b);
        return blocks;
    };
    auto full_loss = [&] { return loss(kind, decoder_output(decoder, space), targets).value; };

    decoder.loss_curve.assign(1, full_loss());
    const std::size_t batch = cfg.batch_size == 0 ? n : std::min(cfg.batch_size, n);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto order = epoch_order(n, cfg, rng);
        for (std::size_t start = 0; start < n; start += batch) {
            const std::vector<std::size_t> rows(order.begin() + static_cast<std::ptrdiff_t>(start),
                                                order.begin() + static_cast<std::ptrdiff_t>(std::min(n, start + batch)));
            const bool whole = rows.size() == n;
            const ProductSpace part = whole ? space : select_rows(space, rows);
            AggregatorCache cache;
            const Matrix features = aggregate(decoder.aggregator, part, &cache);
            ForwardResult fwd = forward(decoder.head, features);
            const LossResult l = loss(kind, fwd.output, whole ? targets : subset(targets, rows));
            const NetworkGradients head_grads = backward(decoder.head, fwd.cache, l.gradient);
            AggregatorParams agg_grads = aggregate_backward(decoder.aggregator, cache, head_grads.input);
            auto grads = const_blocks(agg_grads.parameter_blocks());
            for (auto b : head_grads.parameter_blocks()) grads.push_back(b);
            adam.step(params(), grads);
        }
        decoder.loss_curve.push_back(full_loss());
    }
}

Matrix decoder_output(const RelativeDecoder& decoder, const ProductSpace& space) {
    return predict(decoder.head, aggregate(decoder.aggregator, space));
}

RelativeDecoder train_relative_decoder(const EncoderSpec& encoder, const SyntheticDataset& data,
                                       const std::vector<std::size_t>& train_rows,
                                       const std::vector<std::size_t>& anchor_indices,
                                       const std::vector<SimilarityKind>& kinds, const Task& task,
                                       const DecoderConfig& cfg, std::uint64_t seed) {
    RelativeDecoder decoder;
    decoder.kinds = canonical_kinds(kinds);
    decoder.anchor_indices = anchor_indices;
    decoder.task = task;
    decoder.id = encoder.id + "/" + projection_name(decoder.kinds) + "/" + std::string(aggregator_name(cfg.aggregator));
    const auto anchor_count = static_cast<Index>(anchor_indices.size());
    decoder.aggregator = init_aggregator(cfg.aggregator, decoder.kinds.size(), anchor_count, mix_seed(seed, 1));
    std::vector<Index> dims{decoder.aggregator.output_width()};
    dims.insert(dims.end(), cfg.head_hidden.begin(), cfg.head_hidden.end());
    dims.push_back(task_output_dim(task));
    decoder.head = make_mlp(dims, false, mix_seed(seed, 2));

    const ProductSpace space = encode_relative(encoder, data.points, anchor_indices, decoder.kinds, train_rows);
    TrainConfig train_cfg = cfg.train;
    train_cfg.seed = mix_seed(seed, 3 + cfg.train.seed);
    fit_decoder(decoder, space, task_targets(task, data, train_rows), train_cfg);
    return decoder;
}

TaskScore score_output(const Task& task, const Matrix& output, const Targets& targets) {
    TaskScore s;
    if (std::holds_alternative<Classify>(task)) {
        s.score = accuracy(argmax_rows(output), std::get<std::vector<int>>(targets));
        return s;
    }
    const Matrix& target = std::get<Matrix>(targets);
    s.mse = regression_loss(LossKind::MeanSquaredError, output, target).value;
    s.l1 = regression_loss(LossKind::L1, output, target).value;
    s.score = s.mse;
    return s;
}

Targets task_targets(const Task& task, const SyntheticDataset& data, const std::vector<std::size_t>& rows) {
    if (std::holds_alternative<Classify>(task)) return labels_at(data, rows);
    const Matrix target = gather_rows(data.points.data(), rows);
    require(target.cols() == std::get<Reconstruct>(task).dim, ErrorCode::DimensionMismatch,
            "reconstruction dimension does not match the data");
    return target;
}

StitchOutcome zero_shot_stitch(const EncoderSpec& encoder, const RelativeDecoder& decoder,
                               const SyntheticDataset& data, const std::vector<std::size_t>& eval_rows) {
    // Only the anchor count has to agree: the relative projection erases the
    // latent dimension.
    const ProductSpace space = encode_relative(encoder, data.points, decoder.anchor_indices, decoder.kinds, eval_rows);
    require(static_cast<Index>(space.anchor_count()) == decoder.aggregator.anchor_count, ErrorCode::DimensionMismatch,
            "anchor count differs from the decoder's");
    StitchOutcome outcome;
    outcome.output = decoder_output(decoder, space);
    outcome.score = score_output(decoder.task, outcome.output, task_targets(decoder.task, data, eval_rows));
    return outcome;
}

std::string projection_name(const std::vector<SimilarityKind>& kinds) {
    std::string name;
    for (const auto& k : canonical_kinds(kinds)) {
        if (!name.empty()) name += "+";
        name += kind_to_string(k);
    }
    return name;
}

const ProjectionSummary& StitchReport::summary(const std::string& projection) const {
    for (const auto& s : summaries)
        if (s.projection == projection) return s;
    fail(ErrorCode::UnknownName, "no projection '" + projection + "' in report");
}

StitchReport stitch_matrix(const std::vector<EncoderSpec>& encoders, const std::vector<DecoderFamily>& families,
                           const SyntheticDataset& data, const std::vector<std::size_t>& eval_rows,
                           bool include_diagonal, int jobs) {
    StitchReport report;
    report.include_diagonal = include_diagonal;
    for (const auto& e : encoders) report.encoder_ids.push_back(e.id);

    std::vector<StitchCell> cells;
    for (const auto& family : families) {
        require(family.decoders.size() == family.end_to_end.size(), ErrorCode::BadShape,
                "decoder family without end-to-end scores");
        for (std::size_t d = 0; d < family.decoders.size(); ++d)
            for (std::size_t e = 0; e < encoders.size(); ++e) cells.push_back({family.projection, e, d, {}, 0.0, 0.0});
    }
    std::vector<std::size_t> family_of;
    for (std::size_t f = 0; f < families.size(); ++f)
        family_of.insert(family_of.end(), families[f].decoders.size() * encoders.size(), f);

    parallel_for(cells.size(), jobs, [&](std::size_t i) {
        StitchCell& cell = cells[i];
        const DecoderFamily& family = families[family_of[i]];
        cell.stitched = zero_shot_stitch(encoders[cell.encoder], family.decoders[cell.decoder], data, eval_rows).score;
        cell.end_to_end = family.end_to_end[cell.decoder];
        cell.index = stitching_index(cell.stitched.score, cell.end_to_end);
    });
    report.cells = std::move(cells);

    for (const auto& family : families) {
        ProjectionSummary s{family.projection};
        std::vector<double> scores;
        double index_total = 0.0;
        for (const auto& c : report.cells) {
            if (c.projection != family.projection || (!include_diagonal && c.encoder == c.decoder)) continue;
            scores.push_back(c.stitched.score);
            index_total += c.index;
        }
        s.cells = scores.size();
        if (!scores.empty()) {
            s.mean_score = std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
            double var = 0.0;
            for (double v : scores) var += (v - s.mean_score) * (v - s.mean_score);
            s.std_score = std::sqrt(var / static_cast<double>(scores.size()));
            s.mean_index = index_total / static_cast<double>(scores.size());
        }
        s.mean_end_to_end = family.end_to_end.empty()
                                ? 0.0
                                : std::accumulate(family.end_to_end.begin(), family.end_to_end.end(), 0.0) /
                                      static_cast<double>(family.end_to_end.size());
        report.summaries.push_back(std::move(s));
    }
    return report;
}

std::vector<std::vector<SimilarityKind>> default_projections() {
    return {{Cosine{}}, {Euclidean{}}, {Manhattan{}}, {Chebyshev{}}, {Cosine{}, Euclidean{}, Manhattan{}, Chebyshev{}}};
}

void split_rows(std::size_t n, double eval_fraction, std::vector<std::size_t>& train, std::vector<std::size_t>& eval) {
    require(eval_fraction > 0.0 && eval_fraction < 1.0, ErrorCode::BadConfig, "eval_fraction must lie in (0, 1)");
    const auto n_eval = static_cast<std::size_t>(std::llround(eval_fraction * static_cast<double>(n)));
    require(n_eval >= 1 && n_eval < n, ErrorCode::BadSize, "split leaves an empty train or eval set");
    train.resize(n - n_eval);
    eval.resize(n_eval);
    std::iota(train.begin(), train.end(), std::size_t{0});
    std::iota(eval.begin(), eval.end(), n - n_eval);
}

ExperimentData prepare_data(const StitchExperiment& exp) {
    ExperimentData prepared{make_dataset(exp.dataset, exp.dataset_seed), {}, {}};
    split_rows(static_cast<std::size_t>(prepared.data.points.rows()), exp.eval_fraction, prepared.train_rows,
               prepared.eval_rows);
    return prepared;
}

StitchReport run_stitch_experiment(const StitchExperiment& exp) {
    const ExperimentData prepared = prepare_data(exp);
    const auto encoders = train_encoders(prepared.data, prepared.train_rows, exp.seeds, exp.encoder);
    return run_stitch_experiment(exp, prepared, encoders);
}

StitchReport run_stitch_experiment(const StitchExperiment& exp, const ExperimentData& prepared,
                                   const std::vector<EncoderSpec>& encoders) {
    const auto projections = exp.projections.empty() ? default_projections() : exp.projections;
    const auto anchors = anchors_in_train(prepared.train_rows, exp.anchor_count, exp.anchor_seed);
    const Task task = Classify{class_count(prepared.data)};

    std::vector<DecoderFamily> families(projections.size());
    for (std::size_t p = 0; p < projections.size(); ++p) {
        families[p].projection = projection_name(projections[p]);
        families[p].decoders.resize(encoders.size());
        families[p].end_to_end.resize(encoders.size());
    }
    const std::size_t jobs_total = projections.size() * encoders.size();
    parallel_for(jobs_total, exp.jobs, [&](std::size_t i) {
        const std::size_t p = i / encoders.size();
        const std::size_t e = i % encoders.size();
        const std::uint64_t seed = mix_seed(exp.seeds.at(e), kDecoderStream);
        RelativeDecoder decoder = train_relative_decoder(encoders[e], prepared.data, prepared.train_rows, anchors,
                                                         projections[p], task, exp.decoder, seed);
        families[p].end_to_end[e] = zero_shot_stitch(encoders[e], decoder, prepared.data, prepared.eval_rows).score.score;
        families[p].decoders[e] = std::move(decoder);
    });

    StitchReport report =
        stitch_matrix(encoders, families, prepared.data, prepared.eval_rows, exp.include_diagonal, exp.jobs);
    report.task = "classify";
    report.aggregator = std::string(aggregator_name(exp.decoder.aggregator));
    report.anchor_count = exp.anchor_count;
    report.anchor_seed = exp.anchor_seed;
    report.seeds = exp.seeds;
    return report;
}

AnchorAblationReport anchor_ablation(const std::vector<std::size_t>& counts, const StitchExperiment& exp) {
    require(!counts.empty(), ErrorCode::BadConfig, "no anchor counts given");
    require(std::is_sorted(counts.begin(), counts.end()) &&
                std::adjacent_find(counts.begin(), counts.end()) == counts.end(),
            ErrorCode::BadConfig, "anchor counts must be strictly ascending");
    const ExperimentData prepared = prepare_data(exp);
    require(counts.back() <= prepared.train_rows.size(), ErrorCode::TooManyAnchors,
            std::to_string(counts.back()) + " anchors requested from " + std::to_string(prepared.train_rows.size()) +
                " training samples");
    const auto encoders = train_encoders(prepared.data, prepared.train_rows, exp.seeds, exp.encoder);
    AnchorAblationReport out;
    out.counts = counts;
    for (std::size_t count : counts) {
        StitchExperiment at = exp;
        at.anchor_count = count;
        out.reports.push_back(run_stitch_experiment(at, prepared, encoders));
    }
    return out;
}

ProductSpace inject_noise(ProductSpace space, const std::string& family, std::uint64_t seed) {
    for (auto& c : space.components) {
        if (family_name(c.kind) != family) continue;
        Rng rng(seed);
        c.data = rng.normal_matrix(c.data.rows(), c.data.cols());
        return space;
    }
    fail(ErrorCode::UnknownName, "product space has no '" + family + "' component");
}

QkvReport run_qkv_experiment(const QkvExperiment& exp) {
    const ExperimentData prepared = prepare_data(exp.base);
    const auto encoders = train_encoders(prepared.data, prepared.train_rows, exp.base.seeds, exp.base.encoder);
    require(exp.encoder < encoders.size() && exp.decoder < encoders.size(), ErrorCode::BadIndex,
            "encoder/decoder index outside the seed list");
    const auto kinds = canonical_kinds(exp.kinds.empty()
                                           ? std::vector<SimilarityKind>{Cosine{}, Euclidean{}, Manhattan{}, Chebyshev{}}
                                           : exp.kinds);
    const auto anchors = anchors_in_train(prepared.train_rows, exp.base.anchor_count, exp.base.anchor_seed);
    const Task task = Classify{class_count(prepared.data)};
    const std::uint64_t seed = mix_seed(exp.base.seeds.at(exp.decoder), kDecoderStream);
    const EncoderSpec& source = encoders[exp.decoder];
    const EncoderSpec& target = encoders[exp.encoder];

    DecoderConfig attention_cfg = exp.base.decoder;
    attention_cfg.aggregator = AggregatorKind::SelfAttention;
    DecoderConfig sum_cfg = exp.base.decoder;
    sum_cfg.aggregator = AggregatorKind::MlpSum;
    const RelativeDecoder attention =
        train_relative_decoder(source, prepared.data, prepared.train_rows, anchors, kinds, task, attention_cfg, seed);
    const RelativeDecoder summed =
        train_relative_decoder(source, prepared.data, prepared.train_rows, anchors, kinds, task, sum_cfg, seed);

    const ProductSpace stitched_train = inject_noise(
        encode_relative(target, prepared.data.points, anchors, kinds, prepared.train_rows), exp.noise_family,
        exp.noise_seed);
    const ProductSpace stitched_eval = inject_noise(
        encode_relative(target, prepared.data.points, anchors, kinds, prepared.eval_rows), exp.noise_family,
        mix_seed(exp.noise_seed, 1));
    const std::vector<int> train_labels = labels_at(prepared.data, prepared.train_rows);
    const std::vector<int> eval_labels = labels_at(prepared.data, prepared.eval_rows);
    auto eval_accuracy = [&](const AggregatorParams& agg, const Network& head) {
        return accuracy(argmax_rows(predict(head, aggregate(agg, stitched_eval))), eval_labels);
    };

    QkvReport report;
    for (const auto& k : kinds) report.spaces.emplace_back(family_name(k));
    report.noise_space = static_cast<std::size_t>(
        std::find(report.spaces.begin(), report.spaces.end(), exp.noise_family) - report.spaces.begin());
    report.end_to_end = zero_shot_stitch(source, attention, prepared.data, prepared.eval_rows).score.score;
    report.mlp_sum_zero_shot = eval_accuracy(summed.aggregator, summed.head);
    report.attention_zero_shot = eval_accuracy(attention.aggregator, attention.head);
    report.weights_before = attention_weights(attention.aggregator, stitched_eval);
    report.head_digest_before = parameter_digest(attention.head.parameter_blocks());
    report.frozen_digest_before = parameter_digest(attention.aggregator.frozen_blocks());

    const FinetuneResult tuned = finetune_qkv(attention.aggregator, attention.head, stitched_train, train_labels,
                                              exp.finetune);
    report.attention_finetuned = eval_accuracy(tuned.params, attention.head);
    report.weights_after = attention_weights(tuned.params, stitched_eval);
    report.accuracy_trace = tuned.accuracy_trace;
    report.head_digest_after = parameter_digest(attention.head.parameter_blocks());
    report.frozen_digest_after = parameter_digest(tuned.params.frozen_blocks());
    return report;
}

} // namespace relrep
