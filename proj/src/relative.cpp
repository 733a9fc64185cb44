#include "relrep/relative.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <string>

namespace relrep {

AnchorSet make_anchor_set(const LatentMatrix& z, std::vector<std::size_t> indices, std::uint64_t seed) {
    require(!indices.empty(), ErrorCode::BadSize, "anchor set must not be empty");
    require(std::set<std::size_t>(indices.begin(), indices.end()).size() == indices.size(), ErrorCode::BadIndex,
            "anchor indices must be distinct");
    LatentMatrix embeddings(gather_rows(z.data(), indices));
    return AnchorSet{std::move(indices), std::move(embeddings), seed};
}

std::vector<std::size_t> select_anchors(std::size_t n_samples, std::size_t anchor_count, std::uint64_t seed) {
    require(anchor_count >= 1, ErrorCode::BadSize, "anchor count must be >= 1");
    require(anchor_count <= n_samples, ErrorCode::TooManyAnchors,
            std::to_string(anchor_count) + " anchors requested from " + std::to_string(n_samples) + " samples");
    // Partial Fisher-Yates over a lazily materialized identity permutation.
    std::vector<std::size_t> pool(n_samples);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    Rng rng(seed);
    for (std::size_t i = 0; i < anchor_count; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(n_samples - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(anchor_count);
    return pool;
}

RelativeMatrix relative_projection(const LatentMatrix& z, const AnchorSet& anchors, const SimilarityKind& kind) {
    validate_kind(kind);
    require(z.cols() == anchors.embeddings.cols(), ErrorCode::DimensionMismatch,
            "samples have dimension " + std::to_string(z.cols()) + " but anchors have " +
                std::to_string(anchors.embeddings.cols()));
    const auto* geodesic = std::get_if<Geodesic>(&kind);
    if (!geodesic) return RelativeMatrix{pairwise_scores(kind, z, anchors.embeddings), kind};

    // One graph over anchors followed by samples. Distances are computed from
    // each anchor (|A| Dijkstra runs) and transposed.
    const Index a = anchors.embeddings.rows();
    Matrix stacked(a + z.rows(), z.cols());
    stacked.topRows(a) = anchors.embeddings.data();
    stacked.bottomRows(z.rows()) = z.data();
    const GeodesicGraph graph = build_geodesic_graph(LatentMatrix(std::move(stacked)), geodesic->k);

    std::vector<std::size_t> anchor_nodes(static_cast<std::size_t>(a));
    std::iota(anchor_nodes.begin(), anchor_nodes.end(), std::size_t{0});
    std::vector<std::size_t> sample_nodes(static_cast<std::size_t>(z.rows()));
    std::iota(sample_nodes.begin(), sample_nodes.end(), static_cast<std::size_t>(a));
    Matrix data = geodesic_distances(graph, anchor_nodes, sample_nodes, false).transpose();
    if (geodesic->normalize) normalize_rows_by_mean(data);
    return RelativeMatrix{std::move(data), kind};
}

std::vector<SimilarityKind> canonical_kinds(std::vector<SimilarityKind> kinds) {
    require(!kinds.empty(), ErrorCode::BadSize, "at least one similarity kind is required");
    std::stable_sort(kinds.begin(), kinds.end(),
                     [](const SimilarityKind& l, const SimilarityKind& r) { return l.index() < r.index(); });
    for (std::size_t i = 1; i < kinds.size(); ++i) {
        require(kinds[i].index() != kinds[i - 1].index(), ErrorCode::DuplicateKind,
                "similarity family '" + std::string(family_name(kinds[i])) + "' listed twice");
    }
    return kinds;
}

ProductSpace product_projection(const LatentMatrix& z, const AnchorSet& anchors,
                                const std::vector<SimilarityKind>& kinds) {
    ProductSpace space;
    for (const auto& kind : canonical_kinds(kinds)) space.components.push_back(relative_projection(z, anchors, kind));
    return space;
}

ProductSpace select_rows(const ProductSpace& space, const std::vector<std::size_t>& rows) {
    ProductSpace out;
    for (const auto& c : space.components) out.components.push_back({gather_rows(c.data, rows), c.kind});
    return out;
}

} // namespace relrep
