#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "relrep/linalg.hpp"

namespace relrep {

struct Cosine {
    bool operator==(const Cosine&) const = default;
};
struct Euclidean {
    bool operator==(const Euclidean&) const = default;
};
struct Manhattan {
    bool operator==(const Manhattan&) const = default;
};
/// L-infinity distance. `p` unset means the exact max; a finite p >= 2 selects
/// the smooth power-sum approximation.
struct Chebyshev {
    std::optional<double> p;
    bool operator==(const Chebyshev&) const = default;
};
/// Shortest-path distance on a union-kNN graph.
struct Geodesic {
    int k = 10;
    bool normalize = true;
    bool operator==(const Geodesic&) const = default;
};

/// Alternative order is the canonical product-space order.
using SimilarityKind = std::variant<Cosine, Euclidean, Manhattan, Chebyshev, Geodesic>;

/// Family name without parameters: "cosine", "euclidean", "manhattan",
/// "chebyshev" or "geodesic".
std::string_view family_name(const SimilarityKind& kind) noexcept;
/// Round-trippable spelling, e.g. "chebyshev:p=64" or "geodesic:k=5,normalize=0".
std::string kind_to_string(const SimilarityKind& kind);
/// Parses `name[:key=value,...]`. Accepts "l1" and "linf" as aliases.
SimilarityKind parse_kind(std::string_view text);
std::vector<SimilarityKind> parse_kind_list(std::string_view comma_separated);
void validate_kind(const SimilarityKind& kind);

/// Similarity (cosine) or distance between two vectors. Geodesic kinds are
/// rejected since they need a graph.
double score(const SimilarityKind& kind, std::span<const double> u, std::span<const double> v);

/// Entry (i, j) is score(kind, X_i, Y_j).
Matrix pairwise_scores(const SimilarityKind& kind, const LatentMatrix& x, const LatentMatrix& y);

class GeodesicGraph {
public:
    struct Edge {
        std::size_t to;
        double weight;
    };

    std::size_t node_count() const noexcept { return adjacency_.size(); }
    int k() const noexcept { return k_; }
    const std::vector<Edge>& neighbors(std::size_t node) const { return adjacency_.at(node); }
    std::size_t edge_count() const noexcept;

    /// Single-source shortest paths from `source` to every node.
    std::vector<double> shortest_paths(std::size_t source) const;

private:
    friend GeodesicGraph build_geodesic_graph(const LatentMatrix& points, int k);
    std::vector<std::vector<Edge>> adjacency_;
    int k_ = 0;
};

/// Union kNN graph (an edge when either endpoint lists the other among its k
/// nearest), Euclidean edge weights, ties broken by lower index.
GeodesicGraph build_geodesic_graph(const LatentMatrix& points, int k);

/// |sources| x |targets| shortest-path distances. With `normalize`, each row
/// is divided by its mean.
Matrix geodesic_distances(const GeodesicGraph& graph, const std::vector<std::size_t>& sources,
                          const std::vector<std::size_t>& targets, bool normalize);

/// Divides every row by its mean; rows with zero mean are rejected.
void normalize_rows_by_mean(Matrix& m);

} // namespace relrep
