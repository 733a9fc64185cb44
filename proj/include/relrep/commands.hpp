#pragma once

#include <string>
#include <utility>
#include <vector>

#include "relrep/io.hpp"

namespace relrep {

/// Named output files of one command, in emission order.
struct Artifacts {
    std::vector<std::pair<std::string, std::string>> files;

    void add(std::string name, std::string content) { files.emplace_back(std::move(name), std::move(content)); }
    const std::string& get(const std::string& name) const;
};

/// invariance, project, aggregate, similarity, stitch, ablate-anchors,
/// finetune-qkv, geodesic-demo.
const std::vector<std::string>& command_names();

/// Runs one command. `inputs` are optional latent matrices (project,
/// aggregate and similarity fall back to the configured dataset).
Artifacts run_command(const std::string& name, const ExperimentConfig& cfg, const std::vector<LatentMatrix>& inputs);

void write_artifacts(const Artifacts& artifacts, const std::filesystem::path& dir);

// Command-line overrides.
void override_kinds(ExperimentConfig& cfg, const std::vector<SimilarityKind>& kinds);
void override_anchor_count(ExperimentConfig& cfg, std::size_t count);
void override_aggregator(ExperimentConfig& cfg, AggregatorKind kind);
void override_jobs(ExperimentConfig& cfg, int jobs);

/// File-name safe form of a kind, e.g. "chebyshev_p_64".
std::string kind_file_stem(const SimilarityKind& kind);

} // namespace relrep
