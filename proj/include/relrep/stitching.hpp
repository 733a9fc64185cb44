#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "relrep/aggregation.hpp"
#include "relrep/metrics.hpp"
#include "relrep/nn.hpp"
#include "relrep/synthetic.hpp"

namespace relrep {

/// Fixed transform of the ground-truth features (fully controlled setting).
struct TransformedOracle {
    TransformSpec transform;
};

/// MLP trained on the dataset; only the encoder part is kept.
struct TrainedMlp {
    Network network;
    std::uint64_t seed = 0;
};

struct EncoderSpec {
    std::string id;
    std::variant<TransformedOracle, TrainedMlp> model;

    LatentMatrix encode(const LatentMatrix& x) const;
    std::string digest() const;
};

struct EncoderArch {
    std::vector<Index> hidden{32};
    Index latent = 16;
    bool final_tanh = true;
    /// train.seed is mixed with each model seed to pick the shuffle stream.
    TrainConfig train{1e-3, 30, 64, 0, {}};
};

/// Trains one classifier per seed (encoder MLP followed by a linear probe on
/// the training rows) and keeps the encoders.
std::vector<EncoderSpec> train_encoders(const SyntheticDataset& data, const std::vector<std::size_t>& train_rows,
                                        const std::vector<std::uint64_t>& seeds, const EncoderArch& arch);

std::vector<EncoderSpec> oracle_encoders(const std::vector<TransformSpec>& transforms);

/// Accuracy of a fresh linear probe trained on top of a frozen encoder.
double linear_probe_accuracy(const EncoderSpec& encoder, const SyntheticDataset& data,
                             const std::vector<std::size_t>& rows, const TrainConfig& cfg);

struct Classify {
    int classes = 2;
};
struct Reconstruct {
    Index dim = 1;
};
using Task = std::variant<Classify, Reconstruct>;

struct DecoderConfig {
    AggregatorKind aggregator = AggregatorKind::MlpSum;
    std::vector<Index> head_hidden;  // empty = linear head
    /// train.seed is mixed with each decoder seed to pick the shuffle stream.
    TrainConfig train{1e-3, 30, 64, 0, {}};
};

/// Relative representation -> aggregation -> head. Anchors are stored as
/// dataset indices and re-encoded by whichever encoder feeds the decoder.
struct RelativeDecoder {
    std::string id;
    std::vector<SimilarityKind> kinds;
    std::vector<std::size_t> anchor_indices;
    AggregatorParams aggregator;
    Network head;
    Task task;
    std::vector<double> loss_curve;

    std::string digest() const;
};

/// Product space of `rows` of the dataset as seen through `encoder`.
ProductSpace encode_relative(const EncoderSpec& encoder, const LatentMatrix& inputs,
                             const std::vector<std::size_t>& anchor_indices, const std::vector<SimilarityKind>& kinds,
                             const std::vector<std::size_t>& rows);

RelativeDecoder train_relative_decoder(const EncoderSpec& encoder, const SyntheticDataset& data,
                                       const std::vector<std::size_t>& train_rows,
                                       const std::vector<std::size_t>& anchor_indices,
                                       const std::vector<SimilarityKind>& kinds, const Task& task,
                                       const DecoderConfig& cfg, std::uint64_t seed);

/// Trains aggregator + head of `decoder` on a precomputed product space.
/// Exposed for callers that manipulate the space (noise injection, tests).
void fit_decoder(RelativeDecoder& decoder, const ProductSpace& space, const Targets& targets,
                 const TrainConfig& cfg);

Matrix decoder_output(const RelativeDecoder& decoder, const ProductSpace& space);

struct TaskScore {
    double score = 0.0;  // accuracy (Classify) or MSE (Reconstruct)
    double mse = 0.0;
    double l1 = 0.0;

    bool operator==(const TaskScore&) const = default;
};

TaskScore score_output(const Task& task, const Matrix& output, const Targets& targets);

/// Targets of the task restricted to `rows` (labels or input features).
Targets task_targets(const Task& task, const SyntheticDataset& data, const std::vector<std::size_t>& rows);

struct StitchOutcome {
    Matrix output;
    TaskScore score;
};

/// Frozen encoder B feeding frozen decoder A. Nothing is trained or modified.
StitchOutcome zero_shot_stitch(const EncoderSpec& encoder, const RelativeDecoder& decoder,
                               const SyntheticDataset& data, const std::vector<std::size_t>& eval_rows);

struct StitchCell {
    std::string projection;
    std::size_t encoder = 0;
    std::size_t decoder = 0;
    TaskScore stitched;
    double end_to_end = 0.0;
    double index = 0.0;

    bool operator==(const StitchCell&) const = default;
};

struct ProjectionSummary {
    std::string projection;
    double mean_score = 0.0;        // over off-diagonal (stitched) cells
    double std_score = 0.0;
    double mean_index = 0.0;
    double mean_end_to_end = 0.0;   // over diagonal cells
    std::size_t cells = 0;

    bool operator==(const ProjectionSummary&) const = default;
};

struct StitchReport {
    std::string task;
    std::string aggregator;
    std::size_t anchor_count = 0;
    std::uint64_t anchor_seed = 0;
    std::vector<std::uint64_t> seeds;
    std::vector<std::string> encoder_ids;
    std::vector<StitchCell> cells;
    std::vector<ProjectionSummary> summaries;
    bool include_diagonal = false;

    const ProjectionSummary& summary(const std::string& projection) const;
    bool operator==(const StitchReport&) const = default;
};

/// Name of a projection set, e.g. "cosine+euclidean".
std::string projection_name(const std::vector<SimilarityKind>& kinds);

/// One trained decoder per encoder for one projection set, with the decoder's
/// end-to-end score on the evaluation rows.
struct DecoderFamily {
    std::string projection;
    std::vector<RelativeDecoder> decoders;
    std::vector<double> end_to_end;
};

/// Every (encoder, decoder) pair of every family. Diagonal cells are always
/// stored; `include_diagonal` only controls whether they enter the averages.
StitchReport stitch_matrix(const std::vector<EncoderSpec>& encoders, const std::vector<DecoderFamily>& families,
                           const SyntheticDataset& data, const std::vector<std::size_t>& eval_rows,
                           bool include_diagonal, int jobs = 1);

struct StitchExperiment {
    BlobsSpec dataset{2000, 5, 8, 0.5, 1.0};
    std::uint64_t dataset_seed = 0;
    double eval_fraction = 0.2;
    EncoderArch encoder;
    std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
    std::vector<std::vector<SimilarityKind>> projections;
    DecoderConfig decoder;
    std::size_t anchor_count = 64;
    std::uint64_t anchor_seed = 0;
    bool include_diagonal = false;
    int jobs = 1;
};

/// Projection sets used when an experiment lists none: each of cosine,
/// euclidean, manhattan, chebyshev alone and all four together.
std::vector<std::vector<SimilarityKind>> default_projections();

struct ExperimentData {
    SyntheticDataset data;
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> eval_rows;
};

ExperimentData prepare_data(const StitchExperiment& exp);
/// Train rows first, eval rows last, in dataset order.
void split_rows(std::size_t n, double eval_fraction, std::vector<std::size_t>& train, std::vector<std::size_t>& eval);

StitchReport run_stitch_experiment(const StitchExperiment& exp);
/// Same, reusing already trained encoders.
StitchReport run_stitch_experiment(const StitchExperiment& exp, const ExperimentData& prepared,
                                   const std::vector<EncoderSpec>& encoders);

struct AnchorAblationReport {
    std::vector<std::size_t> counts;
    std::vector<StitchReport> reports;  // one per count
};

/// Stitch experiment per anchor count with encoders and seeds shared.
AnchorAblationReport anchor_ablation(const std::vector<std::size_t>& counts, const StitchExperiment& exp);

/// Harder task than the stitching default (more classes, overlapping blobs)
/// so that a noise subspace costs accuracy.
inline StitchExperiment qkv_base_experiment() {
    StitchExperiment base;
    base.dataset = BlobsSpec{2000, 20, 8, 0.8, 1.0};
    return base;
}

struct QkvExperiment {
    StitchExperiment base = qkv_base_experiment();
    std::vector<SimilarityKind> kinds;  // default: cosine, euclidean, manhattan, chebyshev
    std::string noise_family = "chebyshev";
    std::uint64_t noise_seed = 99;
    std::size_t encoder = 1;  // stitched encoder
    std::size_t decoder = 0;  // decoder trained with encoder `decoder`
    TrainConfig finetune{3e-3, 40, 64, 7, {}};
};

struct QkvReport {
    std::vector<std::string> spaces;
    std::size_t noise_space = 0;
    double end_to_end = 0.0;
    double mlp_sum_zero_shot = 0.0;
    double attention_zero_shot = 0.0;
    double attention_finetuned = 0.0;
    Matrix weights_before;
    Matrix weights_after;
    std::vector<double> accuracy_trace;
    std::string head_digest_before;
    std::string head_digest_after;
    std::string frozen_digest_before;
    std::string frozen_digest_after;
};

/// Stitch-time space selection: the stitched encoder's `noise_family`
/// subspace is replaced by Gaussian noise; the attention projections of the
/// decoder are then tuned on the training rows and evaluated on the eval rows.
QkvReport run_qkv_experiment(const QkvExperiment& exp);

/// Replaces the component of the given family with N(0, 1) noise.
ProductSpace inject_noise(ProductSpace space, const std::string& family, std::uint64_t seed);

} // namespace relrep
