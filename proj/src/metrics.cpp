#include "relrep/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace relrep {

double linear_cka(const Matrix& x, const Matrix& y) {
    require(x.rows() == y.rows(), ErrorCode::DimensionMismatch, "CKA operands have different sample counts");
    require(x.rows() >= 3, ErrorCode::DegenerateInput, "CKA needs at least 3 samples");
    require(all_finite(x) && all_finite(y), ErrorCode::NonFinite, "CKA operand contains non-finite values");
    const Matrix xc = x.rowwise() - x.colwise().mean();
    const Matrix yc = y.rowwise() - y.colwise().mean();
    const double cross = (yc.transpose() * xc).squaredNorm();
    const double xx = (xc.transpose() * xc).norm();
    const double yy = (yc.transpose() * yc).norm();
    require(xx > 0.0 && yy > 0.0, ErrorCode::DegenerateInput, "CKA operand has only constant columns");
    return cross / (xx * yy);
}

double pearson(const Vector& u, const Vector& v) {
    require(u.size() == v.size(), ErrorCode::DimensionMismatch, "correlation operands differ in length");
    require(u.size() >= 3, ErrorCode::DegenerateInput, "correlation needs at least 3 values");
    const Vector uc = u.array() - u.mean();
    const Vector vc = v.array() - v.mean();
    const double su = uc.norm();
    const double sv = vc.norm();
    require(su > 0.0 && sv > 0.0, ErrorCode::DegenerateInput, "correlation operand has zero variance");
    return std::clamp(uc.dot(vc) / (su * sv), -1.0, 1.0);
}

Vector average_ranks(const Vector& v) {
    const auto n = static_cast<std::size_t>(v.size());
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return v(static_cast<Index>(a)) < v(static_cast<Index>(b));
    });
    Vector ranks(v.size());
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && v(static_cast<Index>(order[j + 1])) == v(static_cast<Index>(order[i]))) ++j;
        const double shared = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks(static_cast<Index>(order[k])) = shared;
        i = j + 1;
    }
    return ranks;
}

double spearman(const Vector& u, const Vector& v) {
    require(u.size() == v.size(), ErrorCode::DimensionMismatch, "correlation operands differ in length");
    return pearson(average_ranks(u), average_ranks(v));
}

std::string metric_name(SimilarityMetric metric) {
    switch (metric) {
    case SimilarityMetric::LinearCka: return "linear_cka";
    case SimilarityMetric::Pearson: return "pearson";
    case SimilarityMetric::Spearman: return "spearman";
    }
    return "unknown";
}

SimilarityMetric parse_metric(const std::string& name) {
    for (auto m : {SimilarityMetric::LinearCka, SimilarityMetric::Pearson, SimilarityMetric::Spearman}) {
        if (metric_name(m) == name) return m;
    }
    if (name == "cka") return SimilarityMetric::LinearCka;
    fail(ErrorCode::UnknownName, "unknown similarity metric '" + name + "'");
}

SimilarityReport cross_space_similarity(SimilarityMetric metric, const RelativeMatrix& r1, const RelativeMatrix& r2,
                                        CorrelationMode mode) {
    require(r1.kind == r2.kind, ErrorCode::MismatchedOperands,
            "relative matrices use different similarities: " + kind_to_string(r1.kind) + " vs " +
                kind_to_string(r2.kind));
    require(r1.data.rows() == r2.data.rows() && r1.data.cols() == r2.data.cols(), ErrorCode::MismatchedOperands,
            "relative matrices have different shapes");
    SimilarityReport report{metric, 0.0, "", "", kind_to_string(r1.kind)};
    if (metric == SimilarityMetric::LinearCka) {
        report.value = linear_cka(r1.data, r2.data);
        return report;
    }
    auto correlate = [&](const Vector& a, const Vector& b) {
        return metric == SimilarityMetric::Pearson ? pearson(a, b) : spearman(a, b);
    };
    if (mode == CorrelationMode::Flattened) {
        const Vector a = Eigen::Map<const Vector>(r1.data.data(), r1.data.size());
        const Vector b = Eigen::Map<const Vector>(r2.data.data(), r2.data.size());
        report.value = correlate(a, b);
    } else {
        double total = 0.0;
        for (Index i = 0; i < r1.data.rows(); ++i) {
            total += correlate(r1.data.row(i).transpose(), r2.data.row(i).transpose());
        }
        report.value = total / static_cast<double>(r1.data.rows());
    }
    return report;
}

double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
    require(predicted.size() == truth.size(), ErrorCode::DimensionMismatch, "label vectors differ in length");
    require(!truth.empty(), ErrorCode::DegenerateInput, "accuracy of an empty label vector");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i];
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

double stitching_index(double stitch_score, double end_to_end_score) {
    require(end_to_end_score > 0.0, ErrorCode::ZeroEndToEnd, "end-to-end score must be positive");
    return stitch_score / end_to_end_score;
}

} // namespace relrep
