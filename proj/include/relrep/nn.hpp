#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "relrep/linalg.hpp"

namespace relrep {

// Layers map a batch (one sample per row) to a batch. Weight matrices follow
// the out x in convention: y = x W^T + b.

struct Linear {
    Matrix weight;
    Vector bias;
};

struct LayerNorm {
    Vector gain;
    Vector bias;
    double eps = 1e-5;
};

struct Tanh {};

/// Single-head scaled dot-product self-attention. Each input row of width
/// N*m is read as N tokens of width m, where m is the size of the square
/// projection matrices. No residual and no output projection.
struct SelfAttentionHead {
    Matrix query;
    Matrix key;
    Matrix value;

    Index width() const noexcept { return query.rows(); }
};

using Layer = std::variant<Linear, LayerNorm, Tanh, SelfAttentionHead>;

Linear make_linear(Index in, Index out, Rng& rng);
LayerNorm make_layer_norm(Index width, double eps = 1e-5);
SelfAttentionHead make_attention(Index width, Rng& rng);

/// Parameter storage as flat blocks, in a fixed order per layer type.
std::vector<std::span<double>> parameter_blocks(Layer& layer);
std::vector<std::span<const double>> parameter_blocks(const Layer& layer);
/// A layer of the same shape with every parameter set to zero.
Layer zeros_like(const Layer& layer);

// Per-layer forward/backward primitives. The caches hold exactly what the
// matching backward needs.

struct LinearCache {
    Matrix input;
};
struct LayerNormCache {
    Matrix normalized;
    Vector inv_std;
};
struct TanhCache {
    Matrix output;
};
struct AttentionCache {
    Matrix tokens;  // (n*N) x m, sample-major
    Matrix query;
    Matrix key;
    Matrix value;
    std::vector<Matrix> probs;  // n matrices of N x N
};
using LayerCache = std::variant<LinearCache, LayerNormCache, TanhCache, AttentionCache>;

Matrix linear_forward(const Linear& layer, const Matrix& x, LinearCache* cache = nullptr);
Matrix linear_backward(const Linear& layer, const LinearCache& cache, const Matrix& upstream, Linear& grad);

Matrix layer_norm_forward(const LayerNorm& layer, const Matrix& x, LayerNormCache* cache = nullptr);
Matrix layer_norm_backward(const LayerNorm& layer, const LayerNormCache& cache, const Matrix& upstream,
                           LayerNorm& grad);

Matrix tanh_forward(const Matrix& x, TanhCache* cache = nullptr);
Matrix tanh_backward(const TanhCache& cache, const Matrix& upstream);

Matrix attention_forward(const SelfAttentionHead& head, const Matrix& x, AttentionCache* cache = nullptr);
Matrix attention_backward(const SelfAttentionHead& head, const AttentionCache& cache, const Matrix& upstream,
                          SelfAttentionHead& grad);
/// Softmax weights (N x N) for every sample of `x`.
std::vector<Matrix> attention_probabilities(const SelfAttentionHead& head, const Matrix& x);

Matrix layer_forward(const Layer& layer, const Matrix& x, LayerCache* cache = nullptr);
/// Writes parameter gradients into `grad` (same alternative as `layer`) and
/// returns the input gradient.
Matrix layer_backward(const Layer& layer, const LayerCache& cache, const Matrix& upstream, Layer& grad);

/// Ordered layer stack with validated, compatible dimensions.
class Network {
public:
    Network() = default;
    Network(Index input_dim, std::vector<Layer> layers);

    Index input_dim() const noexcept { return input_dim_; }
    Index output_dim() const noexcept { return output_dim_; }
    const std::vector<Layer>& layers() const noexcept { return layers_; }
    std::vector<Layer>& mutable_layers() noexcept { return layers_; }

    std::vector<std::span<double>> parameter_blocks();
    std::vector<std::span<const double>> parameter_blocks() const;
    std::size_t parameter_count() const;

private:
    Index input_dim_ = 0;
    Index output_dim_ = 0;
    std::vector<Layer> layers_;
};

/// Linear layers of sizes dims[0]->dims[1]->...; Tanh between consecutive
/// Linear layers and, when `final_tanh`, after the last one.
Network make_mlp(const std::vector<Index>& dims, bool final_tanh, std::uint64_t seed);

struct NetworkCache {
    std::vector<LayerCache> layers;
};

struct ForwardResult {
    Matrix output;
    NetworkCache cache;
};

struct NetworkGradients {
    std::vector<Layer> layers;
    Matrix input;

    std::vector<std::span<const double>> parameter_blocks() const;
};

Matrix predict(const Network& net, const Matrix& x);
ForwardResult forward(const Network& net, const Matrix& x);
NetworkGradients backward(const Network& net, const NetworkCache& cache, const Matrix& upstream);

enum class LossKind { CrossEntropy, MeanSquaredError, L1 };

struct LossResult {
    double value = 0.0;
    Matrix gradient;  // same shape as the prediction
};

/// Mean over samples of softmax cross-entropy; labels index the columns of
/// `logits`.
LossResult cross_entropy(const Matrix& logits, const std::vector<int>& labels);
/// Mean over all entries of squared or absolute error.
LossResult regression_loss(LossKind kind, const Matrix& pred, const Matrix& target);

/// Either class labels (CrossEntropy) or a dense target matrix.
using Targets = std::variant<std::vector<int>, Matrix>;
LossResult loss(LossKind kind, const Matrix& pred, const Targets& target);

std::vector<int> argmax_rows(const Matrix& m);

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

class Adam {
public:
    Adam(std::size_t parameter_count, double learning_rate, AdamConfig config = {});

    /// One update; `params` and `grads` must list matching blocks in the same
    /// order on every call.
    void step(const std::vector<std::span<double>>& params, const std::vector<std::span<const double>>& grads);

private:
    double learning_rate_;
    AdamConfig config_;
    std::vector<double> first_;
    std::vector<double> second_;
    std::uint64_t steps_ = 0;
};

struct TrainConfig {
    double learning_rate = 1e-3;
    int epochs = 100;
    std::size_t batch_size = 0;  // 0 = full batch
    std::uint64_t seed = 0;
    AdamConfig adam;

    void validate() const;
};

/// Row order for one epoch: identity for full batch, seeded shuffle otherwise.
std::vector<std::size_t> epoch_order(std::size_t n, const TrainConfig& cfg, Rng& rng);

struct TrainResult {
    Network network;
    /// Entry 0 is the loss before training, entry e the full-data loss after
    /// epoch e.
    std::vector<double> loss_curve;
};

TrainResult train(Network net, const Matrix& data, const Targets& targets, LossKind kind, const TrainConfig& cfg);

/// Hex SHA-256 over the raw bytes of the given parameter blocks.
std::string parameter_digest(const std::vector<std::span<const double>>& blocks);

} // namespace relrep
