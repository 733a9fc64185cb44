#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "check_util.hpp"
#include "doctest.h"
#include "relrep/similarity.hpp"

using namespace relrep;
using relrep::testing::random_matrix;

namespace {

std::span<const double> as_span(const std::vector<double>& v) { return {v.data(), v.size()}; }

LatentMatrix points(std::initializer_list<std::initializer_list<double>> rows) {
    Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.begin()->size()));
    Index i = 0;
    for (const auto& r : rows) {
        Index j = 0;
        for (double v : r) m(i, j++) = v;
        ++i;
    }
    return LatentMatrix(m);
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode{0};
}

} // namespace

TEST_CASE("3-4-5 values for every closed-form kind") {
    const std::vector<double> u{3.0, 0.0}, v{0.0, 4.0};
    CHECK(score(Cosine{}, as_span(u), as_span(v)) == doctest::Approx(0.0));
    CHECK(score(Euclidean{}, as_span(u), as_span(v)) == doctest::Approx(5.0));
    CHECK(score(Manhattan{}, as_span(u), as_span(v)) == doctest::Approx(7.0));
    CHECK(score(Chebyshev{}, as_span(u), as_span(v)) == doctest::Approx(4.0));

    const std::vector<double> a{1.0, 1.0}, b{2.0, 2.0};
    CHECK(score(Cosine{}, as_span(a), as_span(b)) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("smooth chebyshev against a long double oracle") {
    const std::vector<double> u{3.0, 0.0}, v{0.0, 4.0};
    const long double p = 64;
    const long double oracle = std::pow(std::pow(3.0L, p) + std::pow(4.0L, p), 1.0L / p);
    const double got = score(Chebyshev{64.0}, as_span(u), as_span(v));
    CHECK(std::abs(got - static_cast<double>(oracle)) < 1e-12);
    CHECK(got > 4.0);
    CHECK(got < 4.0 + 1e-8);
}

TEST_CASE("smooth chebyshev decreases toward the exact max as p grows") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Matrix m = random_matrix(2, 7, seed);
        const std::vector<double> u(m.row(0).begin(), m.row(0).end()), v(m.row(1).begin(), m.row(1).end());
        const double exact = score(Chebyshev{}, as_span(u), as_span(v));
        double previous = std::numeric_limits<double>::infinity();
        for (double p : {2.0, 8.0, 32.0, 128.0}) {
            const double s = score(Chebyshev{p}, as_span(u), as_span(v));
            CHECK(s >= exact - 1e-12);
            CHECK(s <= previous + 1e-12);
            previous = s;
        }
        CHECK(previous - exact < 0.05 * exact);
    }
}

TEST_CASE("cosine rejects a zero vector, shapes must agree") {
    const std::vector<double> z{0.0, 0.0}, u{1.0, 2.0}, w{1.0, 2.0, 3.0};
    CHECK(code_of([&] { score(Cosine{}, as_span(z), as_span(u)); }) == ErrorCode::ZeroNormVector);
    CHECK(code_of([&] { score(Euclidean{}, as_span(u), as_span(w)); }) == ErrorCode::DimensionMismatch);
    CHECK(code_of([&] { score(Geodesic{}, as_span(u), as_span(u)); }) == ErrorCode::WrongKind);
    const std::vector<double> bad{1.0, std::nan("")};
    CHECK(code_of([&] { score(Euclidean{}, as_span(u), as_span(bad)); }) == ErrorCode::NonFinite);
    CHECK(code_of([] { validate_kind(Chebyshev{1.5}); }) == ErrorCode::BadConfig);
}

TEST_CASE("pairwise examples") {
    const LatentMatrix eye = points({{1, 0}, {0, 1}});
    const Matrix e = pairwise_scores(Euclidean{}, eye, eye);
    CHECK(e(0, 0) == 0.0);
    CHECK(e(0, 1) == doctest::Approx(std::sqrt(2.0)));
    CHECK(e(1, 0) == doctest::Approx(std::sqrt(2.0)));
    const LatentMatrix x(random_matrix(5, 3, 9));
    const Matrix c = pairwise_scores(Cosine{}, x, x);
    for (Index i = 0; i < 5; ++i) CHECK(c(i, i) == doctest::Approx(1.0).epsilon(1e-15));
    const Matrix m = pairwise_scores(Manhattan{}, points({{1, 1}}), points({{0, 0}, {2, 2}}));
    CHECK(m(0, 0) == 2.0);
    CHECK(m(0, 1) == 2.0);
}

TEST_CASE("pairwise scores equal a plain double loop bit for bit") {
    const LatentMatrix x(random_matrix(9, 5, 1)), y(random_matrix(6, 5, 2));
    for (const SimilarityKind& kind :
         std::vector<SimilarityKind>{Cosine{}, Euclidean{}, Manhattan{}, Chebyshev{}, Chebyshev{16.0}}) {
        const Matrix s = pairwise_scores(kind, x, y);
        REQUIRE(s.rows() == 9);
        REQUIRE(s.cols() == 6);
        for (Index i = 0; i < 9; ++i)
            for (Index j = 0; j < 6; ++j) {
                const std::vector<double> u(x.row(i).begin(), x.row(i).end()), v(y.row(j).begin(), y.row(j).end());
                CHECK(s(i, j) == score(kind, as_span(u), as_span(v)));
            }
    }
}

TEST_CASE("distances are symmetric, zero on the diagonal and satisfy the triangle inequality") {
    const LatentMatrix x(random_matrix(12, 4, 3));
    for (const SimilarityKind& kind : std::vector<SimilarityKind>{Euclidean{}, Manhattan{}, Chebyshev{}}) {
        const Matrix d = pairwise_scores(kind, x, x);
        for (Index i = 0; i < 12; ++i) {
            CHECK(d(i, i) == 0.0);
            for (Index j = 0; j < 12; ++j) {
                CHECK(d(i, j) == doctest::Approx(d(j, i)).epsilon(1e-14));
                for (Index k = 0; k < 12; ++k) CHECK(d(i, k) <= d(i, j) + d(j, k) + 1e-12);
            }
        }
    }
}

TEST_CASE("kind names round-trip and aliases parse") {
    for (const SimilarityKind& kind : std::vector<SimilarityKind>{
             Cosine{}, Euclidean{}, Manhattan{}, Chebyshev{}, Chebyshev{64.0}, Geodesic{5, false}, Geodesic{}}) {
        CHECK(parse_kind(kind_to_string(kind)) == kind);
    }
    CHECK(parse_kind("l1") == SimilarityKind{Manhattan{}});
    CHECK(parse_kind("linf") == SimilarityKind{Chebyshev{}});
    CHECK(family_name(Chebyshev{8.0}) == "chebyshev");
    CHECK(parse_kind_list("cosine,chebyshev:p=64").size() == 2);
    CHECK(code_of([] { parse_kind("hamming"); }) == ErrorCode::UnknownName);
}

TEST_CASE("collinear points with k=1") {
    const auto g = build_geodesic_graph(points({{0, 0}, {1, 0}, {3, 0}}), 1);
    CHECK(g.edge_count() == 2);
    CHECK(g.neighbors(1).size() == 2);
    const auto d = g.shortest_paths(0);
    CHECK(d[0] == 0.0);
    CHECK(d[1] == doctest::Approx(1.0));
    CHECK(d[2] == doctest::Approx(3.0));
}

TEST_CASE("geodesic graph validation") {
    const LatentMatrix three = points({{0, 0}, {1, 0}, {3, 0}});
    CHECK(code_of([&] { build_geodesic_graph(three, 0); }) == ErrorCode::BadK);
    CHECK(code_of([&] { build_geodesic_graph(three, 3); }) == ErrorCode::BadK);
    const LatentMatrix clusters = points({{0, 0}, {0.1, 0}, {0, 0.1}, {50, 50}, {50.1, 50}, {50, 50.1}});
    CHECK(code_of([&] { build_geodesic_graph(clusters, 1); }) == ErrorCode::DisconnectedGraph);
    CHECK(code_of([&] { build_geodesic_graph(clusters, 2); }) == ErrorCode::DisconnectedGraph);
    const auto g = build_geodesic_graph(three, 1);
    CHECK(code_of([&] { geodesic_distances(g, {0}, {5}, false); }) == ErrorCode::BadIndex);
}

TEST_CASE("dijkstra agrees with exhaustive path enumeration on small graphs") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Index n = 6 + static_cast<Index>(seed % 3);
        const LatentMatrix x(random_matrix(n, 3, 100 + seed));
        // Smallest k that connects this sample.
        int k = 2;
        while (code_of([&] { build_geodesic_graph(x, k); }) == ErrorCode::DisconnectedGraph) ++k;
        const auto g = build_geodesic_graph(x, k);
        const std::size_t nodes = g.node_count();

        // Best simple path length by depth-first enumeration of every path.
        std::vector<double> best(nodes, std::numeric_limits<double>::infinity());
        std::vector<bool> seen(nodes, false);
        auto dfs = [&](auto&& self, std::size_t at, double length) -> void {
            best[at] = std::min(best[at], length);
            seen[at] = true;
            for (const auto& e : g.neighbors(at))
                if (!seen[e.to]) self(self, e.to, length + e.weight);
            seen[at] = false;
        };
        dfs(dfs, 0, 0.0);
        const auto d = g.shortest_paths(0);
        for (std::size_t i = 0; i < nodes; ++i) CHECK(d[i] == doctest::Approx(best[i]).epsilon(1e-12));
    }
}

TEST_CASE("union kNN edges use euclidean weights") {
    const LatentMatrix x(random_matrix(15, 2, 7));
    const auto g = build_geodesic_graph(x, 3);
    for (std::size_t i = 0; i < g.node_count(); ++i) {
        CHECK(g.neighbors(i).size() >= 3);
        for (const auto& e : g.neighbors(i))
            CHECK(e.weight == doctest::Approx((x.row(static_cast<Index>(i)) - x.row(static_cast<Index>(e.to))).norm()));
    }
}

TEST_CASE("ten points on a circle: antipodal distance close to half the circumference") {
    Matrix m(10, 2);
    for (int i = 0; i < 10; ++i) {
        const double t = 2.0 * std::numbers::pi * i / 10.0;
        m(i, 0) = std::cos(t);
        m(i, 1) = std::sin(t);
    }
    const auto g = build_geodesic_graph(LatentMatrix(m), 2);
    const double d = g.shortest_paths(0)[5];
    CHECK(std::abs(d - std::numbers::pi) < 0.1 * std::numbers::pi);
}

TEST_CASE("normalized rows have unit mean") {
    const LatentMatrix x(random_matrix(30, 3, 11));
    const auto g = build_geodesic_graph(x, 5);
    const Matrix d = geodesic_distances(g, {0, 4, 9}, {1, 2, 3, 5, 6}, true);
    for (Index i = 0; i < d.rows(); ++i) CHECK(d.row(i).mean() == doctest::Approx(1.0).epsilon(1e-14));
    Matrix zero = Matrix::Zero(1, 3);
    CHECK(code_of([&] { normalize_rows_by_mean(zero); }) == ErrorCode::DegenerateInput);
}
