#pragma once

#include <string>
#include <vector>

#include "relrep/relative.hpp"

namespace relrep {

/// Linear centered kernel alignment between two sample-aligned
/// representations, computed in feature space:
///   ||Yc^T Xc||_F^2 / (||Xc^T Xc||_F ||Yc^T Yc||_F)
double linear_cka(const Matrix& x, const Matrix& y);

double pearson(const Vector& u, const Vector& v);
/// Pearson correlation of average ranks (ties share their mean rank).
double spearman(const Vector& u, const Vector& v);
/// 1-based average ranks.
Vector average_ranks(const Vector& v);

enum class SimilarityMetric { LinearCka, Pearson, Spearman };
std::string metric_name(SimilarityMetric metric);
SimilarityMetric parse_metric(const std::string& name);

/// How Pearson/Spearman reduce two matrices to one number.
enum class CorrelationMode {
    Flattened,   // correlate all entries at once
    RowAverage,  // mean of per-sample correlations
};

struct SimilarityReport {
    SimilarityMetric metric;
    double value = 0.0;
    std::string left;
    std::string right;
    std::string kind;
};

/// Compares two relative matrices built on the same samples and anchors.
SimilarityReport cross_space_similarity(SimilarityMetric metric, const RelativeMatrix& r1, const RelativeMatrix& r2,
                                        CorrelationMode mode = CorrelationMode::Flattened);

double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth);
/// stitched / end-to-end; may exceed 1.
double stitching_index(double stitch_score, double end_to_end_score);

} // namespace relrep
