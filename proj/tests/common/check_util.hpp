#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "relrep/aggregation.hpp"
#include "relrep/nn.hpp"

namespace relrep::testing {

inline Matrix random_matrix(Index rows, Index cols, std::uint64_t seed, double stddev = 1.0) {
    Rng rng(seed);
    return rng.normal_matrix(rows, cols, stddev);
}

/// ||a - b||_F / max(||a||_F, ||b||_F), 0 when both vanish.
inline double relative_error(std::span<const double> a, std::span<const double> b) {
    double diff = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff += (a[i] - b[i]) * (a[i] - b[i]);
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    const double scale = std::sqrt(std::max(na, nb));
    return scale == 0.0 ? 0.0 : std::sqrt(diff) / scale;
}

inline double relative_error(const Matrix& a, const Matrix& b) {
    return relative_error(std::span<const double>(a.data(), static_cast<std::size_t>(a.size())),
                          std::span<const double>(b.data(), static_cast<std::size_t>(b.size())));
}

/// Central differences of `objective` with respect to every entry of `values`,
/// perturbed in place and restored.
inline std::vector<double> numeric_gradient(const std::function<double()>& objective, std::span<double> values,
                                            double h = 1e-5) {
    std::vector<double> grad(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double keep = values[i];
        values[i] = keep + h;
        const double up = objective();
        values[i] = keep - h;
        const double down = objective();
        values[i] = keep;
        grad[i] = (up - down) / (2.0 * h);
    }
    return grad;
}

/// Sum of output * weights, the scalar whose gradient wrt the output is `weights`.
inline double contract(const Matrix& output, const Matrix& weights) { return output.cwiseProduct(weights).sum(); }

struct GradCheck {
    double worst = 0.0;  // largest relative error over every block checked
    void add(std::span<const double> analytic, const std::vector<double>& numeric) {
        worst = std::max(worst, relative_error(analytic, numeric));
    }
};

/// Checks input and parameter gradients of one layer on x.
inline GradCheck check_layer(Layer layer, Matrix x, std::uint64_t seed) {
    Matrix probe = layer_forward(layer, x);
    const Matrix weights = random_matrix(probe.rows(), probe.cols(), seed);
    LayerCache cache;
    layer_forward(layer, x, &cache);
    Layer grad = zeros_like(layer);
    const Matrix dx = layer_backward(layer, cache, weights, grad);

    GradCheck out;
    auto objective = [&] { return contract(layer_forward(layer, x), weights); };
    out.add(std::span<const double>(dx.data(), static_cast<std::size_t>(dx.size())),
            numeric_gradient(objective, std::span<double>(x.data(), static_cast<std::size_t>(x.size()))));
    const auto analytic = parameter_blocks(std::as_const(grad));
    auto params = parameter_blocks(layer);
    for (std::size_t b = 0; b < params.size(); ++b) out.add(analytic[b], numeric_gradient(objective, params[b]));
    return out;
}

/// Checks every parameter gradient of an aggregator on a product space.
inline GradCheck check_aggregator(AggregatorParams params, const ProductSpace& space, std::uint64_t seed) {
    const Matrix probe = aggregate(params, space);
    const Matrix weights = random_matrix(probe.rows(), probe.cols(), seed);
    AggregatorCache cache;
    aggregate(params, space, &cache);
    const AggregatorParams grad = aggregate_backward(params, cache, weights);

    GradCheck out;
    auto objective = [&] { return contract(aggregate(params, space), weights); };
    const auto analytic = grad.parameter_blocks();
    auto blocks = params.parameter_blocks();
    for (std::size_t b = 0; b < blocks.size(); ++b) out.add(analytic[b], numeric_gradient(objective, blocks[b]));
    return out;
}

inline ProductSpace random_space(std::size_t spaces, Index rows, Index anchors, std::uint64_t seed) {
    static const SimilarityKind kinds[] = {Cosine{}, Euclidean{}, Manhattan{}, Chebyshev{}, Geodesic{}};
    ProductSpace space;
    for (std::size_t i = 0; i < spaces; ++i)
        space.components.push_back({random_matrix(rows, anchors, mix_seed(seed, i)), kinds[i % 5]});
    return space;
}

/// Worst relative error per layer or aggregator over `configs` random
/// shapes and parameter draws.
struct SuiteEntry {
    std::string name;
    double worst = 0.0;
    int configs = 0;
};

inline std::vector<SuiteEntry> gradient_suite(int configs, std::uint64_t seed = 0) {
    std::vector<SuiteEntry> out{{"linear"}, {"layer_norm"}, {"tanh"}, {"attention"}, {"mlp_sum"},
                                {"self_attention"}, {"concat"}, {"mlp_self_attention"}};
    for (int c = 0; c < configs; ++c) {
        Rng shape(mix_seed(seed, static_cast<std::uint64_t>(c)));
        const auto pick = [&](Index lo, Index hi) { return lo + static_cast<Index>(shape.below(hi - lo + 1)); };
        const Index rows = pick(1, 6), in = pick(1, 7), out_w = pick(1, 7);
        const std::uint64_t s = shape.next();

        Rng init(s);
        Linear lin = make_linear(in, out_w, init);
        lin.bias = init.normal_matrix(out_w, 1);
        out[0].worst = std::max(out[0].worst, check_layer(lin, random_matrix(rows, in, s + 1), s + 2).worst);

        LayerNorm norm = make_layer_norm(pick(2, 7));
        norm.gain = init.normal_matrix(norm.gain.size(), 1);
        norm.bias = init.normal_matrix(norm.bias.size(), 1);
        out[1].worst =
            std::max(out[1].worst, check_layer(norm, random_matrix(rows, norm.gain.size(), s + 3), s + 4).worst);

        out[2].worst = std::max(out[2].worst, check_layer(Tanh{}, random_matrix(rows, in, s + 5), s + 6).worst);

        const Index m = pick(1, 4), tokens = pick(1, 4);
        SelfAttentionHead head = make_attention(m, init);
        out[3].worst =
            std::max(out[3].worst, check_layer(head, random_matrix(rows, m * tokens, s + 7), s + 8).worst);

        const std::size_t spaces = static_cast<std::size_t>(pick(1, 4));
        const Index anchors = pick(2, 6);
        const ProductSpace space = random_space(spaces, rows + 1, anchors, s + 9);
        const AggregatorKind kinds[] = {AggregatorKind::MlpSum, AggregatorKind::SelfAttention, AggregatorKind::Concat,
                                        AggregatorKind::MlpSelfAttention};
        for (std::size_t k = 0; k < 4; ++k) {
            AggregatorParams params = init_aggregator(kinds[k], spaces, anchors, s + 10 + k);
            // Non-trivial LayerNorm parameters so their gradients are exercised.
            for (auto& block : params.per_space) {
                block.norm.gain = init.normal_matrix(anchors, 1);
                block.norm.bias = init.normal_matrix(anchors, 1);
                if (block.linear) block.linear->bias = init.normal_matrix(anchors, 1, 0.3);
            }
            out[4 + k].worst = std::max(out[4 + k].worst, check_aggregator(params, space, s + 20 + k).worst);
        }
    }
    for (auto& e : out) e.configs = configs;
    return out;
}

} // namespace relrep::testing
