#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "relrep/relative.hpp"

namespace relrep {

// Transformations applied to a whole latent space (rows are samples).

struct IsotropicScale {
    double factor = 1.0;
};
struct Orthogonal {
    Matrix q;  // applied as Z Q^T
};
struct Translation {
    Vector shift;
};
/// Output column i is input column map[i].
struct Permutation {
    std::vector<std::size_t> map;
};
struct Affine {
    Matrix a;  // applied as Z A^T + 1 b^T
    Vector b;
};
struct LinearMap {
    Matrix a;  // applied as Z A^T
};
/// Unrolls a noise-free swiss roll (x, y, z) = (t cos t, h, t sin t) onto its
/// flat chart (arc length of the spiral at t, h), an exact isometry of the
/// roll's intrinsic metric.
struct SwissRollIsometry {};

using TransformSpec =
    std::variant<IsotropicScale, Orthogonal, Translation, Permutation, Affine, LinearMap, SwissRollIsometry>;

enum class TransformClass { IsotropicScaling, Orthogonal, Translation, Permutation, Affine, Linear, ManifoldIsometry };

inline constexpr TransformClass kAllTransformClasses[] = {
    TransformClass::IsotropicScaling, TransformClass::Orthogonal, TransformClass::Translation,
    TransformClass::Permutation,      TransformClass::Affine,     TransformClass::Linear,
    TransformClass::ManifoldIsometry};

/// Short column code: IS, OT, TR, PT, AT, LT, MIS.
std::string_view transform_code(TransformClass cls) noexcept;
TransformClass parse_transform_class(std::string_view code);
TransformClass transform_class_of(const TransformSpec& spec) noexcept;

LatentMatrix apply_transform(const TransformSpec& spec, const LatentMatrix& z);

/// Seeded random member of a class, rejection-resampled until it is at least
/// 1e-3 away from the identity. dim is ignored for ManifoldIsometry.
TransformSpec random_transform(TransformClass cls, Index dim, std::uint64_t seed);

/// Arc length of the spiral r = t from 0 to t.
double spiral_arc_length(double t);

struct GridSpec {
    int rows = 10;
    int cols = 10;
};
struct BlobsSpec {
    int n = 300;
    int classes = 3;
    int dim = 8;
    double spread = 0.2;
    double center_scale = 1.0;  // class means ~ N(0, center_scale^2) per coordinate
};
struct SwissRollSpec {
    int n = 500;
    double noise = 0.0;
    double height = 10.0;
};
using DatasetSpec = std::variant<GridSpec, BlobsSpec, SwissRollSpec>;

struct SyntheticDataset {
    LatentMatrix points;
    std::optional<std::vector<int>> labels;
    /// Flat 2D chart coordinates (swiss roll only).
    std::optional<Matrix> chart;
    std::string descriptor;
    std::uint64_t seed = 0;
};

/// Grid: integer lattice [0, cols-1] x [0, rows-1], no labels.
/// Blobs: sample i has label i mod classes, so every prefix is balanced.
/// SwissRoll: t = 1.5 pi (1 + 2u), h = height * v, optional Gaussian noise.
SyntheticDataset make_dataset(const DatasetSpec& spec, std::uint64_t seed);

/// Membership of the reference invariance table: true where the similarity
/// family is invariant to the class.
bool reference_invariance(const SimilarityKind& kind, TransformClass cls);

enum class Verdict { Invariant, NotInvariant, Inconclusive };
std::string_view verdict_name(Verdict v) noexcept;

struct InvarianceCell {
    SimilarityKind kind;
    TransformClass cls;
    Verdict verdict = Verdict::Inconclusive;
    Verdict expected = Verdict::Inconclusive;
    double max_dev = 0.0;
    double min_dev = 0.0;
    int trials = 0;
    int above_threshold = 0;
};

struct InvarianceReport {
    std::vector<InvarianceCell> cells;
    double tol_eq = 1e-8;
    double tol_neq = 1e-3;
    double tol_manifold = 0.05;
    std::uint64_t seed = 0;

    bool matches_reference() const;
};

struct InvarianceOptions {
    int trials = 100;
    double tol_eq = 1e-8;
    double tol_neq = 1e-3;
    /// Relative (Frobenius) deviation bound for manifold isometry, which is
    /// only preserved up to graph discretization.
    double tol_manifold = 0.05;
    std::uint64_t seed = 0;
    Index samples = 20;
    Index anchors = 8;
    Index dim = 6;
    int roll_points = 1000;
    int roll_anchors = 16;
};

/// Runs the joint (samples and anchors) transformation check for every
/// (kind, class) pair. A cell is Invariant when every trial deviates less than
/// tol_eq, NotInvariant when at least 95% of trials exceed tol_neq.
InvarianceReport verify_invariance_table(const std::vector<SimilarityKind>& kinds,
                                         const std::vector<TransformClass>& classes, const InvarianceOptions& options);

/// Deviation of one trial: max |RR(T Z; T A) - RR(Z; A)|.
double invariance_deviation(const SimilarityKind& kind, const TransformSpec& spec, const LatentMatrix& z,
                            const LatentMatrix& anchors);

} // namespace relrep
