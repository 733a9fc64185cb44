#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "relrep/similarity.hpp"

namespace relrep {

/// Anchor samples: indices into the training set (in sampled order) together
/// with their embeddings under one particular encoder. Row i of `embeddings`
/// is the encoding of sample `indices[i]`.
struct AnchorSet {
    std::vector<std::size_t> indices;
    LatentMatrix embeddings;
    std::uint64_t seed = 0;

    std::size_t size() const noexcept { return indices.size(); }
};

/// Builds an AnchorSet by encoding-free lookup: takes rows `indices` of `z`.
AnchorSet make_anchor_set(const LatentMatrix& z, std::vector<std::size_t> indices, std::uint64_t seed = 0);

/// `anchor_count` distinct indices in [0, n_samples), uniformly sampled without
/// replacement. The first m indices drawn for count c are the same for every
/// count >= m, so growing the count only appends anchors.
std::vector<std::size_t> select_anchors(std::size_t n_samples, std::size_t anchor_count, std::uint64_t seed);

/// n x |A| relative representation under one similarity. Column j always
/// refers to anchor j.
struct RelativeMatrix {
    Matrix data;
    SimilarityKind kind;

    Index rows() const noexcept { return data.rows(); }
    std::size_t anchor_count() const noexcept { return static_cast<std::size_t>(data.cols()); }
};

RelativeMatrix relative_projection(const LatentMatrix& z, const AnchorSet& anchors, const SimilarityKind& kind);

/// Ordered collection of relative matrices over the same samples and anchors,
/// one per similarity family, in canonical family order.
struct ProductSpace {
    std::vector<RelativeMatrix> components;

    std::size_t size() const noexcept { return components.size(); }
    Index rows() const { return components.empty() ? 0 : components.front().rows(); }
    std::size_t anchor_count() const { return components.empty() ? 0 : components.front().anchor_count(); }
};

/// Sorts kinds into canonical family order and rejects repeated families.
std::vector<SimilarityKind> canonical_kinds(std::vector<SimilarityKind> kinds);

ProductSpace product_projection(const LatentMatrix& z, const AnchorSet& anchors,
                                const std::vector<SimilarityKind>& kinds);

/// Rows `rows` of every component.
ProductSpace select_rows(const ProductSpace& space, const std::vector<std::size_t>& rows);

} // namespace relrep
