#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "relrep/nn.hpp"
#include "relrep/relative.hpp"

namespace relrep {

/// How the components of a product space are merged into one representation.
///  - Concat: per-space LayerNorm, then concatenation (width N*A).
///  - MlpSum: per-space LayerNorm -> Linear -> Tanh, then sum (width A).
///  - SelfAttention: per-space LayerNorm, the N rows become N tokens mixed by
///    one attention head, mean-pooled (width A).
///  - MlpSelfAttention: MlpSum's per-space preprocessing, then the attention
///    block of SelfAttention.
enum class AggregatorKind { Concat, MlpSum, SelfAttention, MlpSelfAttention };

std::string_view aggregator_name(AggregatorKind kind) noexcept;
AggregatorKind parse_aggregator(std::string_view name);
bool uses_attention(AggregatorKind kind) noexcept;

struct SpaceBlock {
    LayerNorm norm;
    std::optional<Linear> linear;  // followed by Tanh when present
};

struct AggregatorParams {
    AggregatorKind kind = AggregatorKind::MlpSum;
    Index anchor_count = 0;
    std::vector<SpaceBlock> per_space;
    std::optional<SelfAttentionHead> attention;

    std::size_t space_count() const noexcept { return per_space.size(); }
    Index output_width() const noexcept;

    std::vector<std::span<double>> parameter_blocks();
    std::vector<std::span<const double>> parameter_blocks() const;
    /// Attention projections only (query, key, value).
    std::vector<std::span<double>> qkv_blocks();
    /// Everything except the attention projections.
    std::vector<std::span<const double>> frozen_blocks() const;
    std::size_t parameter_count() const;
};

AggregatorParams init_aggregator(AggregatorKind kind, std::size_t space_count, Index anchor_count,
                                 std::uint64_t seed);

struct AggregatorCache {
    struct Space {
        LayerNormCache norm;
        LinearCache linear;
        TanhCache tanh;
    };
    std::vector<Space> spaces;
    AttentionCache attention;
    Index rows = 0;
};

Matrix aggregate(const AggregatorParams& params, const ProductSpace& space, AggregatorCache* cache = nullptr);

/// Gradient wrt every parameter, returned in an AggregatorParams of the same
/// shape as `params`.
AggregatorParams aggregate_backward(const AggregatorParams& params, const AggregatorCache& cache,
                                    const Matrix& upstream);

/// N x N softmax weights averaged over all samples; entry (i, j) is how much
/// token (space) i attends to space j.
Matrix attention_weights(const AggregatorParams& params, const ProductSpace& space);

struct FinetuneResult {
    AggregatorParams params;
    /// Accuracy on the tuning data before training and after each epoch.
    std::vector<double> accuracy_trace;
};

/// Trains only the attention projections through a frozen head with
/// cross-entropy. Every other parameter is left untouched.
FinetuneResult finetune_qkv(const AggregatorParams& params, const Network& head, const ProductSpace& space,
                            const std::vector<int>& labels, const TrainConfig& cfg);

} // namespace relrep
