#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "relrep/stitching.hpp"
#include "relrep/synthetic.hpp"

namespace relrep {

// Numbers are written with 17 significant digits in the "C" locale so every
// double survives a round trip.
std::string format_double(double v);

/// CSV with header dim_0,...,dim_{d-1}. `source` names the input in errors.
Matrix parse_matrix_csv(const std::string& text, const std::string& source = "<memory>");
std::string format_matrix_csv(const Matrix& m);
std::string format_matrix_csv(const Matrix& m, const std::vector<std::string>& header);
LatentMatrix load_matrix(const std::filesystem::path& path);
void save_matrix(const Matrix& m, const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

// Model parameters. Matrices are nested row-major arrays; the format carries
// a version tag.
std::string network_to_json(const Network& net);
Network network_from_json(const std::string& text);
std::string aggregator_to_json(const AggregatorParams& params);
AggregatorParams aggregator_from_json(const std::string& text);

std::string invariance_report_json(const InvarianceReport& report);
/// similarity,IS,OT,...: one row per kind with "invariant"/"not_invariant"/
/// "inconclusive" per class.
std::string invariance_table_csv(const InvarianceReport& report);

std::string stitch_report_json(const StitchReport& report);
StitchReport stitch_report_from_json(const std::string& text);
/// Long form: one row per (projection, encoder, decoder) cell.
std::string stitch_report_csv(const StitchReport& report);

std::string ablation_report_json(const AnchorAblationReport& report);
/// anchor_count,projection,mean_score,std_score,mean_index,mean_end_to_end
std::string ablation_summary_csv(const AnchorAblationReport& report);

std::string qkv_report_json(const QkvReport& report);

struct GeodesicDemoConfig {
    SwissRollSpec roll{1000, 0.0, 10.0};
    int k = 10;
    int anchors = 16;
};

struct SimilarityConfig {
    /// Encoder seeds of the two compared spaces.
    std::uint64_t first = 0;
    std::uint64_t second = 1;
};

/// Everything a command needs. `seed` feeds the dataset, the anchor draw and
/// the invariance trials; encoder and decoder seeds are listed separately.
struct ExperimentConfig {
    std::uint64_t seed = 0;
    StitchExperiment stitch;
    std::vector<std::size_t> ablation_counts{2, 8, 32, 64};
    QkvExperiment qkv;
    InvarianceOptions invariance;
    std::vector<SimilarityKind> kinds;  // project / aggregate / similarity / invariance
    GeodesicDemoConfig geodesic;
    SimilarityConfig similarity;

    /// Propagates `seed` into the nested experiment structs.
    void apply_seed(std::uint64_t s);
};

ExperimentConfig default_config();
/// Unknown keys and type errors are reported with their JSON path, e.g.
/// "$.stitch.decoder.train.epochs".
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<memory>");
ExperimentConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const ExperimentConfig& cfg);

} // namespace relrep
