#include <cmath>

#include "check_util.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "relrep/metrics.hpp"
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

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Index>(v.size()));
    Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

AnchorSet all_rows(const LatentMatrix& a) {
    std::vector<std::size_t> ids(static_cast<std::size_t>(a.rows()));
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
    return AnchorSet{ids, a, 0};
}

} // namespace

TEST_CASE("linear CKA matches the Gram-form oracle") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const Matrix x = random_matrix(6 + static_cast<Index>(seed % 5), 3, seed);
        const Matrix y = random_matrix(x.rows(), 2 + static_cast<Index>(seed % 4), seed + 1000);
        CHECK(std::abs(linear_cka(x, y) - relrep::testing::cka_gram_oracle(x, y)) < 1e-12);
    }
}

TEST_CASE("linear CKA invariances") {
    const Matrix x = random_matrix(30, 5, 1);
    CHECK(linear_cka(x, x) == doctest::Approx(1.0).epsilon(1e-14));
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Matrix q = std::get<Orthogonal>(random_transform(TransformClass::Orthogonal, 5, seed)).q;
        Rng rng(seed);
        const double s = rng.uniform(0.1, 10.0);
        const RowVector t = rng.normal_matrix(1, 5, 3.0);
        const Matrix moved = (s * x * q).rowwise() + t;
        CHECK(std::abs(linear_cka(x, moved) - 1.0) < 1e-8);
    }
    const Matrix y = random_matrix(30, 4, 2);
    CHECK(linear_cka(x, y) == doctest::Approx(linear_cka(y, x)).epsilon(1e-14));
    Matrix swapped = y;
    swapped.col(0).swap(swapped.col(3));
    CHECK(linear_cka(x, swapped) == doctest::Approx(linear_cka(x, y)).epsilon(1e-13));

    CHECK(code_of([] { linear_cka(Matrix::Ones(5, 2), random_matrix(5, 2, 0)); }) == ErrorCode::DegenerateInput);
    CHECK(code_of([] { linear_cka(random_matrix(2, 2, 0), random_matrix(2, 2, 1)); }) == ErrorCode::DegenerateInput);
    CHECK(code_of([] { linear_cka(random_matrix(4, 2, 0), random_matrix(5, 2, 1)); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("correlation examples") {
    CHECK(pearson(vec({1, 2, 3}), vec({2, 4, 6})) == doctest::Approx(1.0));
    CHECK(pearson(vec({1, 2, 3}), vec({3, 2, 1})) == doctest::Approx(-1.0));
    CHECK(spearman(vec({1, 2, 3}), vec({1, 8, 27})) == doctest::Approx(1.0));
    CHECK(average_ranks(vec({10, 20, 20, 5})) == vec({2, 3.5, 3.5, 1}));
    CHECK(code_of([] { pearson(vec({1, 1, 1}), vec({1, 2, 3})); }) == ErrorCode::DegenerateInput);
    CHECK(code_of([] { spearman(vec({1, 2}), vec({1, 2})); }) == ErrorCode::DegenerateInput);
}

TEST_CASE("pearson and spearman against brute-force oracles") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Vector u = random_matrix(100, 1, seed).col(0), v = random_matrix(100, 1, seed + 500).col(0);
        if (seed % 2 == 1) {
            // Coarse values to force ties.
            u = u.array().round();
            v = (2.0 * v.array()).round();
        }
        using namespace relrep::testing;
        CHECK(std::abs(pearson(u, v) - pearson_oracle(widen(u), widen(v))) < 1e-12);
        CHECK(std::abs(spearman(u, v) - spearman_oracle(u, v)) < 1e-12);
        CHECK(pearson(u, v) == doctest::Approx(pearson(v, u)).epsilon(1e-15));
        CHECK(spearman(u, v) == doctest::Approx(spearman(v, u)).epsilon(1e-15));
    }
}

TEST_CASE("cross-space similarity") {
    const LatentMatrix z(random_matrix(40, 5, 3)), a(random_matrix(10, 5, 4));
    const RelativeMatrix r = relative_projection(z, all_rows(a), Euclidean{});
    const SimilarityMetric metrics[] = {SimilarityMetric::LinearCka, SimilarityMetric::Pearson,
                                        SimilarityMetric::Spearman};

    SUBCASE("identical") {
        for (auto m : metrics) CHECK(cross_space_similarity(m, r, r).value == doctest::Approx(1.0).epsilon(1e-14));
    }
    SUBCASE("orthogonal map leaves the euclidean space unchanged") {
        const TransformSpec q = random_transform(TransformClass::Orthogonal, 5, 8);
        const RelativeMatrix r2 =
            relative_projection(apply_transform(q, z), all_rows(apply_transform(q, a)), Euclidean{});
        for (auto m : metrics) {
            CHECK(std::abs(cross_space_similarity(m, r, r2).value - 1.0) < 1e-8);
            CHECK(std::abs(cross_space_similarity(m, r, r2, CorrelationMode::RowAverage).value - 1.0) < 1e-8);
        }
    }
    SUBCASE("anisotropic affine map changes it") {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const TransformSpec t = random_transform(TransformClass::Affine, 5, seed);
            const RelativeMatrix r2 =
                relative_projection(apply_transform(t, z), all_rows(apply_transform(t, a)), Euclidean{});
            CHECK(cross_space_similarity(SimilarityMetric::Pearson, r, r2).value < 1.0 - 1e-3);
        }
    }
    SUBCASE("operands must agree") {
        const RelativeMatrix c = relative_projection(z, all_rows(a), Cosine{});
        CHECK(code_of([&] { cross_space_similarity(SimilarityMetric::Pearson, r, c); }) ==
              ErrorCode::MismatchedOperands);
    }
    SUBCASE("report fields") {
        const auto rep = cross_space_similarity(SimilarityMetric::Spearman, r, r);
        CHECK(rep.kind == "euclidean");
        CHECK(metric_name(rep.metric) == "spearman");
        CHECK(parse_metric("linear_cka") == SimilarityMetric::LinearCka);
    }
}

TEST_CASE("index and accuracy") {
    CHECK(stitching_index(0.77, 0.77) == doctest::Approx(1.0));
    CHECK(stitching_index(0.0, 0.5) == 0.0);
    CHECK(stitching_index(0.9, 0.6) == doctest::Approx(1.5));
    CHECK(code_of([] { stitching_index(0.5, 0.0); }) == ErrorCode::ZeroEndToEnd);
    CHECK(accuracy({1, 2, 3}, {1, 2, 3}) == 1.0);
    CHECK(accuracy({1, 0, 3, 3}, {1, 2, 3, 0}) == 0.5);
    CHECK(code_of([] { accuracy({1}, {1, 2}); }) == ErrorCode::DimensionMismatch);
}
