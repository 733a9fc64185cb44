// Command-line front end over the C API.
//
//   relrep <command> [--config FILE] [--seed N] [--out DIR] [--kinds LIST]
//                    [--anchors N] [--aggregator NAME] [--jobs N] [--input CSV]...
//
// Exit status: 0 success, 1 validation failure, 2 I/O error.

#include <cstdio>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "relrep/relrep.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitIo = 2;

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out = "relrep_out";
    std::string kinds;
    std::optional<std::size_t> anchors;
    std::string aggregator;
    std::optional<int> jobs;
    std::vector<std::string> inputs;
};

int report(relrep_status status, const char* what) {
    std::fprintf(stderr, "relrep: %s failed: %s\n", what, relrep_last_error());
    return status == RELREP_IO_ERROR ? kExitIo : kExitInvalid;
}

struct ConfigDeleter {
    void operator()(relrep_config* c) const { relrep_config_destroy(c); }
};
struct MatrixDeleter {
    void operator()(relrep_matrix* m) const { relrep_matrix_destroy(m); }
};
struct ArtifactsDeleter {
    void operator()(relrep_artifacts* a) const { relrep_artifacts_destroy(a); }
};

int run(const std::string& command, const Options& opt) {
    relrep_config* raw_cfg = nullptr;
    relrep_status st = opt.config.empty() ? relrep_config_default(&raw_cfg)
                                          : relrep_config_load(opt.config.c_str(), &raw_cfg);
    if (st != RELREP_OK) return report(st, "loading the config");
    std::unique_ptr<relrep_config, ConfigDeleter> cfg(raw_cfg);

    if (opt.seed && (st = relrep_config_set_seed(cfg.get(), *opt.seed)) != RELREP_OK) return report(st, "--seed");
    if (!opt.kinds.empty() && (st = relrep_config_set_kinds(cfg.get(), opt.kinds.c_str())) != RELREP_OK)
        return report(st, "--kinds");
    if (opt.anchors && (st = relrep_config_set_anchor_count(cfg.get(), *opt.anchors)) != RELREP_OK)
        return report(st, "--anchors");
    if (!opt.aggregator.empty() && (st = relrep_config_set_aggregator(cfg.get(), opt.aggregator.c_str())) != RELREP_OK)
        return report(st, "--aggregator");
    if (opt.jobs && (st = relrep_config_set_jobs(cfg.get(), *opt.jobs)) != RELREP_OK) return report(st, "--jobs");

    std::vector<std::unique_ptr<relrep_matrix, MatrixDeleter>> owned;
    std::vector<const relrep_matrix*> inputs;
    for (const auto& path : opt.inputs) {
        relrep_matrix* m = nullptr;
        if ((st = relrep_matrix_load_csv(path.c_str(), &m)) != RELREP_OK) return report(st, ("reading " + path).c_str());
        owned.emplace_back(m);
        inputs.push_back(m);
    }

    relrep_artifacts* raw_out = nullptr;
    st = relrep_run(command.c_str(), cfg.get(), inputs.empty() ? nullptr : inputs.data(), inputs.size(), &raw_out);
    if (st != RELREP_OK) return report(st, command.c_str());
    std::unique_ptr<relrep_artifacts, ArtifactsDeleter> artifacts(raw_out);
    if ((st = relrep_artifacts_write(artifacts.get(), opt.out.c_str())) != RELREP_OK)
        return report(st, "writing artifacts");
    for (std::size_t i = 0; i < relrep_artifacts_count(artifacts.get()); ++i)
        std::printf("%s/%s\n", opt.out.c_str(), relrep_artifacts_name(artifacts.get(), i));
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Relative representations: invariance checks, projections and zero-shot stitching"};
    app.require_subcommand(1);
    app.set_version_flag("--version", relrep_version());

    Options opt;
    std::string selected;
    const std::vector<std::pair<std::string, std::string>> commands{
        {"invariance", "check every similarity against every transformation class"},
        {"project", "relative representation of a latent matrix, one CSV per similarity"},
        {"aggregate", "product-space projection followed by an aggregation function"},
        {"similarity", "CKA, Pearson and Spearman between two relative spaces"},
        {"stitch", "zero-shot stitching matrix over trained encoders"},
        {"ablate-anchors", "stitching experiment repeated for several anchor counts"},
        {"finetune-qkv", "attention-only fine-tuning against an injected noise subspace"},
        {"geodesic-demo", "kNN-graph geodesics on a swiss roll against its flat chart"},
    };
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", opt.config, "JSON experiment config");
        sub->add_option("--seed", opt.seed, "master seed (dataset, anchors, trials)");
        sub->add_option("--out", opt.out, "output directory")->capture_default_str();
        sub->add_option("--kinds", opt.kinds, "comma list, e.g. cosine,euclidean,chebyshev:p=64");
        sub->add_option("--anchors", opt.anchors, "anchor count");
        sub->add_option("--aggregator", opt.aggregator, "concat, mlp_sum, self_attention, mlp_self_attention");
        sub->add_option("--jobs", opt.jobs, "worker threads for independent stitch cells");
        sub->add_option("--input", opt.inputs, "latent matrix CSV (repeat for similarity)");
        sub->callback([&selected, name = name] { selected = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInvalid;
    }
    return run(selected, opt);
}
