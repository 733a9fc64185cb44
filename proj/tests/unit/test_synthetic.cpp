#include <algorithm>
#include <cmath>
#include <map>

#include "check_util.hpp"
#include "doctest.h"
#include "relrep/synthetic.hpp"

using namespace relrep;
using relrep::testing::random_matrix;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode{0};
}

const TransformClass kFlatClasses[] = {TransformClass::IsotropicScaling, TransformClass::Orthogonal,
                                       TransformClass::Translation,      TransformClass::Permutation,
                                       TransformClass::Affine,           TransformClass::Linear};

} // namespace

TEST_CASE("transform conventions") {
    Matrix row(1, 3);
    row << 1, 2, 3;
    const LatentMatrix z(row);
    const Matrix p = apply_transform(Permutation{{2, 0, 1}}, z).data();
    CHECK(p(0, 0) == 3);
    CHECK(p(0, 1) == 1);
    CHECK(p(0, 2) == 2);
    CHECK(apply_transform(IsotropicScale{1.0}, z) == z);

    const LatentMatrix x(random_matrix(10, 4, 1));
    const Matrix q = std::get<Orthogonal>(random_transform(TransformClass::Orthogonal, 4, 2)).q;
    const LatentMatrix back = apply_transform(Orthogonal{q.transpose()}, apply_transform(Orthogonal{q}, x));
    CHECK((back.data() - x.data()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((apply_transform(Orthogonal{q}, x).data() - x.data() * q.transpose()).cwiseAbs().maxCoeff() == 0.0);

    const Vector t = random_matrix(4, 1, 3).col(0);
    CHECK(apply_transform(Translation{t}, x).data() == x.data().rowwise() + t.transpose());

    const Affine aff = std::get<Affine>(random_transform(TransformClass::Affine, 4, 5));
    const LatentMatrix two_step = apply_transform(Translation{aff.b}, apply_transform(LinearMap{aff.a}, x));
    CHECK((apply_transform(aff, x).data() - two_step.data()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("transform validation") {
    const LatentMatrix x(random_matrix(3, 3, 1));
    CHECK(code_of([&] { apply_transform(Translation{Vector::Zero(2)}, x); }) == ErrorCode::DimensionMismatch);
    CHECK(code_of([&] { apply_transform(LinearMap{Matrix::Zero(3, 3)}, x); }) == ErrorCode::SingularMatrix);
    CHECK(code_of([&] { apply_transform(Permutation{{0, 0, 1}}, x); }) == ErrorCode::BadConfig);
    CHECK(code_of([] { random_transform(TransformClass::Orthogonal, 1, 0); }) == ErrorCode::BadDim);
    CHECK(code_of([] { parse_transform_class("XX"); }) == ErrorCode::UnknownName);
}

TEST_CASE("random transforms") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Matrix q = std::get<Orthogonal>(random_transform(TransformClass::Orthogonal, 6, seed)).q;
        CHECK((q.transpose() * q - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-10);
        CHECK(std::abs(std::get<Affine>(random_transform(TransformClass::Affine, 6, seed)).a.determinant()) > 1e-8);
        const Matrix l = std::get<LinearMap>(random_transform(TransformClass::Linear, 6, seed)).a;
        Eigen::JacobiSVD<Matrix> svd(l);
        CHECK(svd.singularValues()(0) / svd.singularValues()(5) < 1e4);
        const double s = std::get<IsotropicScale>(random_transform(TransformClass::IsotropicScaling, 6, seed)).factor;
        CHECK(s >= 0.5);
        CHECK(s <= 2.0);
        const auto map = std::get<Permutation>(random_transform(TransformClass::Permutation, 6, seed)).map;
        std::vector<std::size_t> identity{0, 1, 2, 3, 4, 5};
        CHECK(map != identity);
        CHECK(std::is_permutation(map.begin(), map.end(), identity.begin()));
    }
    for (TransformClass cls : kFlatClasses) {
        const LatentMatrix x(random_matrix(5, 4, 9));
        CHECK(apply_transform(random_transform(cls, 4, 3), x) == apply_transform(random_transform(cls, 4, 3), x));
        CHECK(transform_class_of(random_transform(cls, 4, 3)) == cls);
        CHECK(parse_transform_class(transform_code(cls)) == cls);
    }
}

TEST_CASE("datasets") {
    SUBCASE("grid") {
        const auto g = make_dataset(GridSpec{3, 3}, 0);
        CHECK(g.points.rows() == 9);
        CHECK(g.points.data().minCoeff() == 0.0);
        CHECK(g.points.data().maxCoeff() == 2.0);
        CHECK_FALSE(g.labels.has_value());
    }
    SUBCASE("blobs are balanced") {
        const auto b = make_dataset(BlobsSpec{300, 3, 8, 0.2, 1.0}, 4);
        REQUIRE(b.labels.has_value());
        std::map<int, int> counts;
        for (int l : *b.labels) ++counts[l];
        CHECK(counts == std::map<int, int>{{0, 100}, {1, 100}, {2, 100}});
        CHECK(b.points.cols() == 8);
        CHECK(make_dataset(BlobsSpec{300, 3, 8, 0.2, 1.0}, 4).points == b.points);
        CHECK_FALSE(make_dataset(BlobsSpec{300, 3, 8, 0.2, 1.0}, 5).points == b.points);
    }
    SUBCASE("sizes must be positive") {
        CHECK(code_of([] { make_dataset(GridSpec{0, 3}, 0); }) == ErrorCode::BadSize);
        CHECK(code_of([] { make_dataset(BlobsSpec{2, 3, 8, 0.2, 1.0}, 0); }) == ErrorCode::BadSize);
        CHECK(code_of([] { make_dataset(SwissRollSpec{10, -1.0, 10.0}, 0); }) == ErrorCode::BadSize);
    }
}

TEST_CASE("swiss roll graph geodesics track the flat chart") {
    const auto roll = make_dataset(SwissRollSpec{500, 0.0, 10.0}, 1);
    REQUIRE(roll.chart.has_value());
    CHECK((apply_transform(SwissRollIsometry{}, roll.points).data() - *roll.chart).cwiseAbs().maxCoeff() < 1e-9);

    const auto graph = build_geodesic_graph(roll.points, 10);
    std::vector<double> errors;
    for (std::size_t s = 0; s < 500; s += 10) {
        const auto d = graph.shortest_paths(s);
        for (std::size_t j = 0; j < 500; ++j) {
            if (j == s) continue;
            const double flat = (roll.chart->row(static_cast<Index>(s)) - roll.chart->row(static_cast<Index>(j))).norm();
            errors.push_back(std::abs(d[j] - flat) / flat);
        }
    }
    std::nth_element(errors.begin(), errors.begin() + static_cast<std::ptrdiff_t>(errors.size() / 2), errors.end());
    CHECK(errors[errors.size() / 2] < 0.05);
}

TEST_CASE("spiral arc length") {
    CHECK(spiral_arc_length(0.0) == 0.0);
    // Midpoint rule on sqrt(1 + t^2).
    double integral = 0.0;
    const int steps = 200000;
    for (int i = 0; i < steps; ++i) {
        const double t = 5.0 * (i + 0.5) / steps;
        integral += std::sqrt(1.0 + t * t) * 5.0 / steps;
    }
    CHECK(spiral_arc_length(5.0) == doctest::Approx(integral).epsilon(1e-9));
}

TEST_CASE("reference table membership") {
    CHECK(reference_invariance(Cosine{}, TransformClass::IsotropicScaling));
    CHECK_FALSE(reference_invariance(Euclidean{}, TransformClass::IsotropicScaling));
    CHECK(reference_invariance(Manhattan{}, TransformClass::Translation));
    CHECK_FALSE(reference_invariance(Manhattan{}, TransformClass::Orthogonal));
    CHECK(reference_invariance(Geodesic{}, TransformClass::ManifoldIsometry));
    CHECK_FALSE(reference_invariance(Cosine{}, TransformClass::ManifoldIsometry));
}

TEST_CASE("invariance verdicts for single cells") {
    InvarianceOptions opt;
    opt.trials = 20;
    const auto report = verify_invariance_table(
        {Cosine{}, Euclidean{}, Manhattan{}},
        {TransformClass::IsotropicScaling, TransformClass::Translation}, opt);
    REQUIRE(report.cells.size() == 6);
    std::map<std::pair<std::string, std::string>, Verdict> got;
    for (const auto& c : report.cells)
        got[{std::string(family_name(c.kind)), std::string(transform_code(c.cls))}] = c.verdict;
    CHECK(got[{"cosine", "IS"}] == Verdict::Invariant);
    CHECK(got[{"euclidean", "IS"}] == Verdict::NotInvariant);
    CHECK(got[{"manhattan", "TR"}] == Verdict::Invariant);
    CHECK(got[{"cosine", "TR"}] == Verdict::NotInvariant);
    CHECK(report.matches_reference());

    const LatentMatrix z(random_matrix(20, 6, 1)), a(random_matrix(8, 6, 2));
    CHECK(invariance_deviation(Euclidean{}, IsotropicScale{2.0}, z, a) > 1e-3);
    CHECK(invariance_deviation(Euclidean{}, IsotropicScale{1.0}, z, a) == 0.0);
    CHECK(code_of([] {
              InvarianceOptions bad;
              bad.trials = 0;
              verify_invariance_table({Cosine{}}, {TransformClass::Orthogonal}, bad);
          }) == ErrorCode::BadConfig);
}
