#include "relrep/similarity.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <sstream>

namespace relrep {
namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};

double cosine(std::span<const double> u, std::span<const double> v) {
    double dot = 0.0, uu = 0.0, vv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        uu += u[i] * u[i];
        vv += v[i] * v[i];
    }
    require(uu > 0.0 && vv > 0.0, ErrorCode::ZeroNormVector, "cosine similarity of a zero-norm vector");
    const double c = dot / (std::sqrt(uu) * std::sqrt(vv));
    return std::clamp(c, -1.0, 1.0);
}

double euclidean(std::span<const double> u, std::span<const double> v) {
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double d = u[i] - v[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

double manhattan(std::span<const double> u, std::span<const double> v) {
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) acc += std::abs(u[i] - v[i]);
    return acc;
}

double chebyshev(std::span<const double> u, std::span<const double> v, std::optional<double> p) {
    double peak = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) peak = std::max(peak, std::abs(u[i] - v[i]));
    if (!p || peak == 0.0) return peak;
    // Factor out the peak so large exponents cannot overflow.
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) acc += std::pow(std::abs(u[i] - v[i]) / peak, *p);
    return peak * std::pow(acc, 1.0 / *p);
}

bool parse_double(std::string_view s, double& out) {
    std::string tmp(s);
    std::istringstream in(tmp);
    in.imbue(std::locale::classic());
    in >> out;
    return in && in.peek() == std::char_traits<char>::eof();
}

bool parse_int(std::string_view s, int& out) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

std::string format_double(double v) {
    std::ostringstream out;
    out.imbue(std::locale::classic());
    out << v;
    return out.str();
}

} // namespace

std::string_view family_name(const SimilarityKind& kind) noexcept {
    static constexpr std::string_view names[] = {"cosine", "euclidean", "manhattan", "chebyshev", "geodesic"};
    return names[kind.index()];
}

std::string kind_to_string(const SimilarityKind& kind) {
    return std::visit(Overloaded{
                          [](const Chebyshev& c) {
                              return c.p ? "chebyshev:p=" + format_double(*c.p) : std::string("chebyshev");
                          },
                          [](const Geodesic& g) {
                              std::string s = "geodesic";
                              if (g.k != 10 || !g.normalize) {
                                  s += ":k=" + std::to_string(g.k);
                                  if (!g.normalize) s += ",normalize=0";
                              }
                              return s;
                          },
                          [&](const auto&) { return std::string(family_name(kind)); },
                      },
                      kind);
}

SimilarityKind parse_kind(std::string_view text) {
    const auto colon = text.find(':');
    const std::string_view name = text.substr(0, colon);
    std::vector<std::pair<std::string_view, std::string_view>> options;
    if (colon != std::string_view::npos) {
        std::string_view rest = text.substr(colon + 1);
        while (!rest.empty()) {
            const auto comma = rest.find(',');
            const std::string_view item = rest.substr(0, comma);
            const auto eq = item.find('=');
            require(eq != std::string_view::npos, ErrorCode::UnknownName,
                    "malformed similarity option '" + std::string(item) + "'");
            options.emplace_back(item.substr(0, eq), item.substr(eq + 1));
            rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
        }
    }
    auto bad_option = [&](std::string_view key) {
        fail(ErrorCode::UnknownName,
             "option '" + std::string(key) + "' is not valid for similarity '" + std::string(name) + "'");
    };

    SimilarityKind kind;
    if (name == "cosine") {
        kind = Cosine{};
    } else if (name == "euclidean") {
        kind = Euclidean{};
    } else if (name == "manhattan" || name == "l1") {
        kind = Manhattan{};
    } else if (name == "chebyshev" || name == "linf") {
        Chebyshev c;
        for (auto [key, value] : options) {
            double p = 0.0;
            if (key != "p") bad_option(key);
            if (value == "exact") continue;
            require(parse_double(value, p), ErrorCode::UnknownName, "bad chebyshev exponent");
            c.p = p;
        }
        options.clear();
        kind = c;
    } else if (name == "geodesic") {
        Geodesic g;
        for (auto [key, value] : options) {
            int v = 0;
            if (key == "k") {
                require(parse_int(value, v), ErrorCode::UnknownName, "bad geodesic k");
                g.k = v;
            } else if (key == "normalize") {
                require(parse_int(value, v) && (v == 0 || v == 1), ErrorCode::UnknownName,
                        "geodesic normalize must be 0 or 1");
                g.normalize = v == 1;
            } else {
                bad_option(key);
            }
        }
        options.clear();
        kind = g;
    } else {
        fail(ErrorCode::UnknownName, "unknown similarity '" + std::string(text) + "'");
    }
    if (!options.empty()) bad_option(options.front().first);
    validate_kind(kind);
    return kind;
}

std::vector<SimilarityKind> parse_kind_list(std::string_view comma_separated) {
    // Options use ',' as well, so split only where a new family name starts.
    std::vector<SimilarityKind> kinds;
    std::vector<std::string> pieces;
    std::string_view rest = comma_separated;
    while (!rest.empty()) {
        const auto comma = rest.find(',');
        pieces.emplace_back(rest.substr(0, comma));
        rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    }
    std::string current;
    for (const auto& piece : pieces) {
        const bool is_option = piece.find('=') != std::string::npos && piece.find(':') == std::string::npos;
        if (is_option && !current.empty()) {
            current += "," + piece;
        } else {
            if (!current.empty()) kinds.push_back(parse_kind(current));
            current = piece;
        }
    }
    if (!current.empty()) kinds.push_back(parse_kind(current));
    require(!kinds.empty(), ErrorCode::UnknownName, "empty similarity list");
    return kinds;
}

void validate_kind(const SimilarityKind& kind) {
    if (const auto* c = std::get_if<Chebyshev>(&kind); c && c->p) {
        require(std::isfinite(*c->p) && *c->p >= 2.0, ErrorCode::BadConfig,
                "chebyshev exponent must be finite and >= 2");
    }
    if (const auto* g = std::get_if<Geodesic>(&kind)) {
        require(g->k >= 1, ErrorCode::BadK, "geodesic neighbor count must be >= 1");
    }
}

double score(const SimilarityKind& kind, std::span<const double> u, std::span<const double> v) {
    require(u.size() == v.size(), ErrorCode::DimensionMismatch,
            "vectors of length " + std::to_string(u.size()) + " and " + std::to_string(v.size()));
    require(std::all_of(u.begin(), u.end(), [](double x) { return std::isfinite(x); }) &&
                std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); }),
            ErrorCode::NonFinite, "non-finite vector entry");
    return std::visit(Overloaded{
                          [&](const Cosine&) { return cosine(u, v); },
                          [&](const Euclidean&) { return euclidean(u, v); },
                          [&](const Manhattan&) { return manhattan(u, v); },
                          [&](const Chebyshev& c) {
                              validate_kind(kind);
                              return chebyshev(u, v, c.p);
                          },
                          [](const Geodesic&) -> double {
                              fail(ErrorCode::WrongKind, "geodesic scores need a graph");
                          },
                      },
                      kind);
}

Matrix pairwise_scores(const SimilarityKind& kind, const LatentMatrix& x, const LatentMatrix& y) {
    require(x.cols() == y.cols(), ErrorCode::DimensionMismatch,
            "latent dimensions " + std::to_string(x.cols()) + " and " + std::to_string(y.cols()));
    const RowMajor xr = x.data();
    const RowMajor yr = y.data();
    const auto d = static_cast<std::size_t>(x.cols());
    Matrix out(x.rows(), y.rows());
    for (Index i = 0; i < x.rows(); ++i) {
        const std::span<const double> u(xr.data() + i * x.cols(), d);
        for (Index j = 0; j < y.rows(); ++j) {
            out(i, j) = score(kind, u, std::span<const double>(yr.data() + j * y.cols(), d));
        }
    }
    return out;
}

std::size_t GeodesicGraph::edge_count() const noexcept {
    std::size_t twice = 0;
    for (const auto& list : adjacency_) twice += list.size();
    return twice / 2;
}

std::vector<double> GeodesicGraph::shortest_paths(std::size_t source) const {
    require(source < adjacency_.size(), ErrorCode::BadIndex, "source node " + std::to_string(source));
    std::vector<double> dist(adjacency_.size(), std::numeric_limits<double>::infinity());
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> frontier;
    dist[source] = 0.0;
    frontier.emplace(0.0, source);
    while (!frontier.empty()) {
        const auto [d, node] = frontier.top();
        frontier.pop();
        if (d > dist[node]) continue;
        for (const Edge& e : adjacency_[node]) {
            const double candidate = d + e.weight;
            if (candidate < dist[e.to]) {
                dist[e.to] = candidate;
                frontier.emplace(candidate, e.to);
            }
        }
    }
    return dist;
}

GeodesicGraph build_geodesic_graph(const LatentMatrix& points, int k) {
    const auto n = static_cast<std::size_t>(points.rows());
    require(k >= 1 && static_cast<std::size_t>(k) < n, ErrorCode::BadK,
            "k=" + std::to_string(k) + " must satisfy 1 <= k < " + std::to_string(n));
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> x = points.data();
    const auto d = static_cast<std::size_t>(x.cols());
    auto distance = [&](std::size_t a, std::size_t b) {
        const double* pa = x.data() + a * d;
        const double* pb = x.data() + b * d;
        double sum = 0.0;
        for (std::size_t c = 0; c < d; ++c) sum += (pa[c] - pb[c]) * (pa[c] - pb[c]);
        return std::sqrt(sum);
    };

    // Candidates are ordered by (distance, index), a strict total order, so
    // the selected neighbour set is unique.
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    edges.reserve(n * static_cast<std::size_t>(k));
    std::vector<std::pair<double, std::size_t>> candidates;
    candidates.reserve(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        candidates.clear();
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) candidates.emplace_back(distance(i, j), j);
        std::nth_element(candidates.begin(), candidates.begin() + (k - 1), candidates.end());
        for (int r = 0; r < k; ++r) {
            const std::size_t j = candidates[static_cast<std::size_t>(r)].second;
            edges.emplace_back(std::min(i, j), std::max(i, j));
        }
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    GeodesicGraph graph;
    graph.k_ = k;
    graph.adjacency_.resize(n);
    for (const auto& [a, b] : edges) {
        const double w = distance(a, b);
        graph.adjacency_[a].push_back({b, w});
        graph.adjacency_[b].push_back({a, w});
    }

    std::vector<bool> seen(n, false);
    std::vector<std::size_t> stack{0};
    seen[0] = true;
    std::size_t reached = 1;
    while (!stack.empty()) {
        const std::size_t node = stack.back();
        stack.pop_back();
        for (const auto& e : graph.adjacency_[node]) {
            if (!seen[e.to]) {
                seen[e.to] = true;
                ++reached;
                stack.push_back(e.to);
            }
        }
    }
    require(reached == n, ErrorCode::DisconnectedGraph,
            "kNN graph with k=" + std::to_string(k) + " reaches " + std::to_string(reached) + " of " +
                std::to_string(n) + " points");
    return graph;
}

Matrix geodesic_distances(const GeodesicGraph& graph, const std::vector<std::size_t>& sources,
                          const std::vector<std::size_t>& targets, bool normalize) {
    for (std::size_t t : targets) {
        require(t < graph.node_count(), ErrorCode::BadIndex, "target node " + std::to_string(t));
    }
    Matrix out(static_cast<Index>(sources.size()), static_cast<Index>(targets.size()));
    for (std::size_t s = 0; s < sources.size(); ++s) {
        const std::vector<double> dist = graph.shortest_paths(sources[s]);
        for (std::size_t t = 0; t < targets.size(); ++t) {
            out(static_cast<Index>(s), static_cast<Index>(t)) = dist[targets[t]];
        }
    }
    if (normalize) normalize_rows_by_mean(out);
    return out;
}

void normalize_rows_by_mean(Matrix& m) {
    for (Index i = 0; i < m.rows(); ++i) {
        const double mean = m.row(i).mean();
        require(mean > 0.0, ErrorCode::DegenerateInput,
                "row " + std::to_string(i) + " has zero mean distance and cannot be normalized");
        m.row(i) /= mean;
    }
}

} // namespace relrep
