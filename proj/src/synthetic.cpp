#include "relrep/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace relrep {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};

constexpr double kIdentityGap = 1e-3;

double distance_from_identity(const Matrix& a) {
    return (a - Matrix::Identity(a.rows(), a.cols())).cwiseAbs().maxCoeff();
}

Matrix random_orthogonal(Index dim, Rng& rng) {
    const Matrix g = rng.normal_matrix(dim, dim);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(dim, dim);
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index j = 0; j < dim; ++j) {
        if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    }
    return q;
}

Matrix random_well_conditioned(Index dim, Rng& rng) {
    for (;;) {
        Matrix a = rng.normal_matrix(dim, dim);
        Eigen::JacobiSVD<Matrix> svd(a);
        const auto& s = svd.singularValues();
        const double smallest = s(s.size() - 1);
        if (smallest <= 0.0 || s(0) / smallest >= 1e4) continue;
        if (std::abs(a.determinant()) <= 1e-8 || distance_from_identity(a) < kIdentityGap) continue;
        return a;
    }
}

Vector random_unit(Index dim, Rng& rng) {
    for (;;) {
        Vector t = rng.normal_matrix(dim, 1);
        const double norm = t.norm();
        if (norm > 1e-6) return t / norm;
    }
}

void check_dim(Index expected, Index actual, const char* what) {
    require(expected == actual, ErrorCode::DimensionMismatch,
            std::string(what) + " has dimension " + std::to_string(expected) + " but data has " +
                std::to_string(actual));
}

double relative_frobenius(const Matrix& a, const Matrix& reference) {
    const double denom = reference.norm();
    require(denom > 0.0, ErrorCode::DegenerateInput, "reference representation is identically zero");
    return (a - reference).norm() / denom;
}

} // namespace

std::string_view transform_code(TransformClass cls) noexcept {
    switch (cls) {
    case TransformClass::IsotropicScaling: return "IS";
    case TransformClass::Orthogonal: return "OT";
    case TransformClass::Translation: return "TR";
    case TransformClass::Permutation: return "PT";
    case TransformClass::Affine: return "AT";
    case TransformClass::Linear: return "LT";
    case TransformClass::ManifoldIsometry: return "MIS";
    }
    return "?";
}

TransformClass parse_transform_class(std::string_view code) {
    for (auto cls : kAllTransformClasses) {
        if (transform_code(cls) == code) return cls;
    }
    fail(ErrorCode::UnknownName, "unknown transform class '" + std::string(code) + "'");
}

TransformClass transform_class_of(const TransformSpec& spec) noexcept {
    return static_cast<TransformClass>(spec.index());
}

LatentMatrix apply_transform(const TransformSpec& spec, const LatentMatrix& z) {
    const Matrix& x = z.data();
    const Index d = z.cols();
    Matrix out = std::visit(
        Overloaded{
            [&](const IsotropicScale& s) -> Matrix {
                require(s.factor > 0.0 && std::isfinite(s.factor), ErrorCode::BadConfig, "scale must be positive");
                return s.factor * x;
            },
            [&](const Orthogonal& o) -> Matrix {
                check_dim(o.q.rows(), d, "orthogonal matrix");
                require(o.q.cols() == d, ErrorCode::DimensionMismatch, "orthogonal matrix must be square");
                require(distance_from_identity(o.q.transpose() * o.q) < 1e-10, ErrorCode::BadConfig,
                        "matrix is not orthogonal");
                return x * o.q.transpose();
            },
            [&](const Translation& t) -> Matrix {
                check_dim(t.shift.size(), d, "translation");
                return x.rowwise() + t.shift.transpose();
            },
            [&](const Permutation& p) -> Matrix {
                check_dim(static_cast<Index>(p.map.size()), d, "permutation");
                std::vector<std::size_t> sorted = p.map;
                std::sort(sorted.begin(), sorted.end());
                for (std::size_t i = 0; i < sorted.size(); ++i) {
                    require(sorted[i] == i, ErrorCode::BadConfig, "permutation is not a bijection");
                }
                Matrix y(x.rows(), d);
                for (Index i = 0; i < d; ++i) y.col(i) = x.col(static_cast<Index>(p.map[static_cast<std::size_t>(i)]));
                return y;
            },
            [&](const Affine& a) -> Matrix {
                check_dim(a.a.cols(), d, "affine matrix");
                require(a.a.rows() == d, ErrorCode::DimensionMismatch, "affine matrix must be square");
                check_dim(a.b.size(), d, "affine offset");
                require(std::abs(a.a.determinant()) > 1e-8, ErrorCode::SingularMatrix, "affine matrix is singular");
                Matrix y = x * a.a.transpose();
                y.rowwise() += a.b.transpose();
                return y;
            },
            [&](const LinearMap& a) -> Matrix {
                check_dim(a.a.cols(), d, "linear matrix");
                require(a.a.rows() == d, ErrorCode::DimensionMismatch, "linear matrix must be square");
                require(std::abs(a.a.determinant()) > 1e-8, ErrorCode::SingularMatrix, "linear matrix is singular");
                return x * a.a.transpose();
            },
            [&](const SwissRollIsometry&) -> Matrix {
                check_dim(3, d, "swiss roll isometry");
                Matrix y(x.rows(), 2);
                for (Index i = 0; i < x.rows(); ++i) {
                    const double t = std::hypot(x(i, 0), x(i, 2));
                    y(i, 0) = spiral_arc_length(t);
                    y(i, 1) = x(i, 1);
                }
                return y;
            },
        },
        spec);
    return LatentMatrix(std::move(out));
}

TransformSpec random_transform(TransformClass cls, Index dim, std::uint64_t seed) {
    if (cls == TransformClass::ManifoldIsometry) return SwissRollIsometry{};
    require(dim >= 2, ErrorCode::BadDim, "random transforms need dim >= 2");
    Rng rng(seed);
    switch (cls) {
    case TransformClass::IsotropicScaling:
        for (;;) {
            const double s = rng.uniform(0.5, 2.0);
            if (std::abs(s - 1.0) >= 0.05) return IsotropicScale{s};
        }
    case TransformClass::Orthogonal:
        for (;;) {
            Matrix q = random_orthogonal(dim, rng);
            if (distance_from_identity(q) >= kIdentityGap) return Orthogonal{std::move(q)};
        }
    case TransformClass::Translation: return Translation{random_unit(dim, rng)};
    case TransformClass::Permutation: {
        std::vector<std::size_t> map(static_cast<std::size_t>(dim));
        std::iota(map.begin(), map.end(), std::size_t{0});
        const auto identity = map;
        while (map == identity) {
            for (std::size_t i = map.size(); i > 1; --i) std::swap(map[i - 1], map[rng.below(i)]);
        }
        return Permutation{std::move(map)};
    }
    case TransformClass::Affine: {
        Matrix a = random_well_conditioned(dim, rng);
        Vector b = rng.normal_matrix(dim, 1);
        return Affine{std::move(a), std::move(b)};
    }
    case TransformClass::Linear: return LinearMap{random_well_conditioned(dim, rng)};
    case TransformClass::ManifoldIsometry: break;
    }
    return SwissRollIsometry{};
}

double spiral_arc_length(double t) { return 0.5 * (t * std::sqrt(1.0 + t * t) + std::asinh(t)); }

SyntheticDataset make_dataset(const DatasetSpec& spec, std::uint64_t seed) {
    Rng rng(seed);
    return std::visit(
        Overloaded{
            [&](const GridSpec& g) {
                require(g.rows >= 1 && g.cols >= 1, ErrorCode::BadSize, "grid sizes must be positive");
                Matrix pts(static_cast<Index>(g.rows) * g.cols, 2);
                for (int r = 0; r < g.rows; ++r)
                    for (int c = 0; c < g.cols; ++c) pts.row(static_cast<Index>(r) * g.cols + c) << c, r;
                return SyntheticDataset{LatentMatrix(std::move(pts)), std::nullopt, std::nullopt,
                                        "grid(" + std::to_string(g.rows) + "," + std::to_string(g.cols) + ")", seed};
            },
            [&](const BlobsSpec& b) {
                require(b.n >= 1 && b.classes >= 1 && b.dim >= 1 && b.classes <= b.n, ErrorCode::BadSize,
                        "blob sizes must be positive with classes <= n");
                require(b.spread > 0.0 && b.center_scale > 0.0, ErrorCode::BadSize, "blob spread must be positive");
                const Matrix centers = rng.normal_matrix(b.classes, b.dim, b.center_scale);
                Matrix pts(b.n, b.dim);
                std::vector<int> labels(static_cast<std::size_t>(b.n));
                for (int i = 0; i < b.n; ++i) {
                    const int label = i % b.classes;
                    labels[static_cast<std::size_t>(i)] = label;
                    for (int j = 0; j < b.dim; ++j) pts(i, j) = centers(label, j) + b.spread * rng.normal();
                }
                return SyntheticDataset{LatentMatrix(std::move(pts)), std::move(labels), std::nullopt,
                                        "blobs(" + std::to_string(b.n) + "," + std::to_string(b.classes) + "," +
                                            std::to_string(b.dim) + ")",
                                        seed};
            },
            [&](const SwissRollSpec& s) {
                require(s.n >= 1 && s.noise >= 0.0 && s.height > 0.0, ErrorCode::BadSize,
                        "swiss roll needs n >= 1, noise >= 0, height > 0");
                Matrix pts(s.n, 3);
                Matrix chart(s.n, 2);
                for (int i = 0; i < s.n; ++i) {
                    const double t = 1.5 * std::numbers::pi * (1.0 + 2.0 * rng.uniform());
                    const double h = s.height * rng.uniform();
                    pts.row(i) << t * std::cos(t), h, t * std::sin(t);
                    chart.row(i) << spiral_arc_length(t), h;
                }
                if (s.noise > 0.0) pts += rng.normal_matrix(s.n, 3, s.noise);
                return SyntheticDataset{LatentMatrix(std::move(pts)), std::nullopt, std::move(chart),
                                        "swiss_roll(" + std::to_string(s.n) + ")", seed};
            },
        },
        spec);
}

bool reference_invariance(const SimilarityKind& kind, TransformClass cls) {
    using C = TransformClass;
    switch (kind.index()) {
    case 0:  // cosine
        return cls == C::IsotropicScaling || cls == C::Orthogonal || cls == C::Permutation;
    case 1:  // euclidean
        return cls == C::Orthogonal || cls == C::Translation || cls == C::Permutation;
    case 2:  // manhattan
    case 3:  // chebyshev
        return cls == C::Translation || cls == C::Permutation;
    case 4:  // geodesic
        return cls != C::Affine && cls != C::Linear;
    }
    return false;
}

std::string_view verdict_name(Verdict v) noexcept {
    switch (v) {
    case Verdict::Invariant: return "invariant";
    case Verdict::NotInvariant: return "not_invariant";
    case Verdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

bool InvarianceReport::matches_reference() const {
    return std::all_of(cells.begin(), cells.end(), [](const InvarianceCell& c) { return c.verdict == c.expected; });
}

double invariance_deviation(const SimilarityKind& kind, const TransformSpec& spec, const LatentMatrix& z,
                            const LatentMatrix& anchors) {
    std::vector<std::size_t> ids(static_cast<std::size_t>(anchors.rows()));
    std::iota(ids.begin(), ids.end(), std::size_t{0});
    const AnchorSet original{ids, anchors, 0};
    const AnchorSet moved{ids, apply_transform(spec, anchors), 0};
    const Matrix before = relative_projection(z, original, kind).data;
    const Matrix after = relative_projection(apply_transform(spec, z), moved, kind).data;
    return (after - before).cwiseAbs().maxCoeff();
}

InvarianceReport verify_invariance_table(const std::vector<SimilarityKind>& kinds,
                                         const std::vector<TransformClass>& classes, const InvarianceOptions& options) {
    require(options.trials >= 1, ErrorCode::BadConfig, "at least one trial is required");
    InvarianceReport report;
    report.tol_eq = options.tol_eq;
    report.tol_neq = options.tol_neq;
    report.tol_manifold = options.tol_manifold;
    report.seed = options.seed;

    for (std::size_t ki = 0; ki < kinds.size(); ++ki) {
        const SimilarityKind& kind = kinds[ki];
        validate_kind(kind);
        for (TransformClass cls : classes) {
            InvarianceCell cell{kind, cls};
            cell.expected = reference_invariance(kind, cls) ? Verdict::Invariant : Verdict::NotInvariant;
            cell.trials = options.trials;
            cell.min_dev = std::numeric_limits<double>::infinity();
            const bool manifold = cls == TransformClass::ManifoldIsometry;
            const double eq = manifold ? options.tol_manifold : options.tol_eq;
            const double neq = manifold ? options.tol_manifold : options.tol_neq;
            bool all_below = true;
            for (int trial = 0; trial < options.trials; ++trial) {
                // Same data and transform stream for every kind, so cells in a
                // column are directly comparable.
                const std::uint64_t trial_seed =
                    mix_seed(options.seed, static_cast<std::uint64_t>(cls) * 1'000'003ULL + static_cast<std::uint64_t>(trial));
                double dev = 0.0;
                if (manifold) {
                    const auto roll = make_dataset(SwissRollSpec{options.roll_points, 0.0, 10.0}, trial_seed);
                    auto anchor_ids = select_anchors(static_cast<std::size_t>(options.roll_points),
                                                     static_cast<std::size_t>(options.roll_anchors),
                                                     mix_seed(trial_seed, 1));
                    std::vector<bool> is_anchor(static_cast<std::size_t>(options.roll_points), false);
                    for (auto a : anchor_ids) is_anchor[a] = true;
                    std::vector<std::size_t> sample_ids;
                    for (std::size_t i = 0; i < is_anchor.size(); ++i)
                        if (!is_anchor[i]) sample_ids.push_back(i);
                    const LatentMatrix flat = apply_transform(SwissRollIsometry{}, roll.points);
                    const auto on_roll = relative_projection(LatentMatrix(gather_rows(roll.points.data(), sample_ids)),
                                                             make_anchor_set(roll.points, anchor_ids), kind);
                    const auto on_chart = relative_projection(LatentMatrix(gather_rows(flat.data(), sample_ids)),
                                                              make_anchor_set(flat, anchor_ids), kind);
                    dev = relative_frobenius(on_roll.data, on_chart.data);
                } else {
                    Rng rng(trial_seed);
                    const LatentMatrix z(rng.normal_matrix(options.samples, options.dim));
                    const LatentMatrix anchors(rng.normal_matrix(options.anchors, options.dim));
                    const TransformSpec spec = random_transform(cls, options.dim, mix_seed(trial_seed, 2));
                    dev = invariance_deviation(kind, spec, z, anchors);
                }
                cell.max_dev = std::max(cell.max_dev, dev);
                cell.min_dev = std::min(cell.min_dev, dev);
                if (!(dev < eq)) all_below = false;
                if (dev > neq) ++cell.above_threshold;
            }
            if (all_below) {
                cell.verdict = Verdict::Invariant;
            } else if (cell.above_threshold * 100 >= 95 * options.trials) {
                cell.verdict = Verdict::NotInvariant;
            } else {
                cell.verdict = Verdict::Inconclusive;
            }
            report.cells.push_back(std::move(cell));
        }
    }
    return report;
}

} // namespace relrep
