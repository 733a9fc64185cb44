// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Criterion 9 drives the CLI binary whose path CMake passes in.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "check_util.hpp"
#include "oracles.hpp"
#include "relrep/commands.hpp"
#include "relrep/metrics.hpp"
#include "relrep/stitching.hpp"
#include "relrep/synthetic.hpp"

#ifndef RELREP_CLI_PATH
#error "RELREP_CLI_PATH must name the relrep executable"
#endif

using namespace relrep;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

const std::vector<SimilarityKind> kFlatKinds{Cosine{}, Euclidean{}, Manhattan{}, Chebyshev{}};
const std::vector<TransformClass> kFlatClasses{TransformClass::IsotropicScaling, TransformClass::Orthogonal,
                                               TransformClass::Translation,      TransformClass::Permutation,
                                               TransformClass::Affine,           TransformClass::Linear};
const std::string kProduct = "cosine+euclidean+manhattan+chebyshev";
const char* const kSingles[] = {"cosine", "euclidean", "manhattan", "chebyshev"};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1 ------------------------------------------------------------------------

Outcome invariance_table() {
    const auto t0 = std::chrono::steady_clock::now();
    const InvarianceOptions opt;  // 100 trials, 1e-8 / 1e-3, 5% manifold bound
    const InvarianceReport flat = verify_invariance_table(kFlatKinds, kFlatClasses, opt);
    const InvarianceReport geo = verify_invariance_table(
        {Geodesic{10, true}},
        {TransformClass::IsotropicScaling, TransformClass::Translation, TransformClass::Permutation,
         TransformClass::ManifoldIsometry},
        opt);
    const double elapsed = seconds_since(t0);

    int matched = 0;
    std::string mismatches;
    for (const auto& c : flat.cells) {
        if (c.verdict == c.expected) {
            ++matched;
        } else {
            mismatches += " " + std::string(family_name(c.kind)) + "/" + std::string(transform_code(c.cls));
        }
    }
    double mis_dev = 0.0;
    for (const auto& c : geo.cells) {
        if (c.verdict == Verdict::Invariant) {
            ++matched;
        } else {
            mismatches += " geodesic/" + std::string(transform_code(c.cls));
        }
        if (c.cls == TransformClass::ManifoldIsometry) mis_dev = c.max_dev;
    }
    const bool ok = flat.cells.size() == 24 && matched == 28 && elapsed < 30.0;
    return {ok, fmt("%d/28 cells (24 flat + 4 geodesic), worst swiss-roll deviation %.4f, %.1f s < 30 s%s", matched,
                    mis_dev, elapsed, mismatches.empty() ? "" : (" mismatches:" + mismatches).c_str())};
}

// 2 ------------------------------------------------------------------------

Outcome gradient_integrity() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto suite = testing::gradient_suite(20, 2024);
    const double elapsed = seconds_since(t0);
    bool ok = elapsed < 10.0;
    std::string detail;
    for (const auto& e : suite) {
        ok = ok && e.worst < 1e-4;
        detail += fmt("%s %.1e, ", e.name.c_str(), e.worst);
    }
    return {ok, detail + fmt("20 configs each, %.2f s < 10 s", elapsed)};
}

// 3 ------------------------------------------------------------------------

Outcome metric_oracles() {
    double cka_err = 0.0, pearson_err = 0.0, spearman_err = 0.0, invariance_err = 0.0;
    for (std::uint64_t s = 0; s < 50; ++s) {
        Rng rng(mix_seed(7, s));
        const Index n = 5 + static_cast<Index>(rng.below(20));
        const Matrix x = rng.normal_matrix(n, 1 + static_cast<Index>(rng.below(6)));
        const Matrix y = rng.normal_matrix(n, 1 + static_cast<Index>(rng.below(6)));
        cka_err = std::max(cka_err, std::abs(linear_cka(x, y) - testing::cka_gram_oracle(x, y)));

        Vector u = rng.normal_matrix(100, 1).col(0), v = rng.normal_matrix(100, 1).col(0);
        if (s % 2 == 1) {
            u = (3.0 * u.array()).round();
            v = (3.0 * v.array()).round();
        }
        pearson_err = std::max(pearson_err, std::abs(pearson(u, v) - testing::pearson_oracle(testing::widen(u),
                                                                                            testing::widen(v))));
        spearman_err = std::max(spearman_err, std::abs(spearman(u, v) - testing::spearman_oracle(u, v)));

        const Index d = 2 + static_cast<Index>(rng.below(5));
        const Matrix base = rng.normal_matrix(n, d);
        const Matrix q = std::get<Orthogonal>(random_transform(TransformClass::Orthogonal, d, mix_seed(11, s))).q;
        const double scale = rng.uniform(0.1, 10.0);
        const RowVector t = rng.normal_matrix(1, d, 5.0);
        const Matrix moved = (scale * base * q).rowwise() + t;
        invariance_err = std::max(invariance_err, std::abs(linear_cka(base, moved) - 1.0));
    }
    const bool ok = cka_err < 1e-12 && pearson_err < 1e-12 && spearman_err < 1e-12 && invariance_err < 1e-8;
    return {ok, fmt("CKA vs Gram oracle %.1e, Pearson %.1e, Spearman %.1e (< 1e-12); |CKA(X, sXQ+1t^T) - 1| %.1e "
                    "(< 1e-8); 50 instances each",
                    cka_err, pearson_err, spearman_err, invariance_err)};
}

// 4 ------------------------------------------------------------------------

struct CellTally {
    double worst = 0.0;
    int cells = 0;
    std::string failures;
};

std::vector<std::size_t> anchor_rows(const StitchExperiment& exp, const ExperimentData& d) {
    std::vector<std::size_t> anchors;
    for (auto i : select_anchors(d.train_rows.size(), exp.anchor_count, exp.anchor_seed))
        anchors.push_back(d.train_rows[i]);
    return anchors;
}

// Every checked (kind, transform) cell: stitching a transformed copy of the
// reference encoder must reproduce the end-to-end score.
void invariant_cells(const StitchExperiment& exp, const std::vector<SimilarityKind>& kinds, std::size_t seed_offset,
                     CellTally& tally) {
    const ExperimentData d = prepare_data(exp);
    const auto anchors = anchor_rows(exp, d);
    const Task task = Classify{exp.dataset.classes};
    const EncoderSpec reference = oracle_encoders({IsotropicScale{1.0}})[0];
    for (std::size_t k = 0; k < kinds.size(); ++k) {
        const RelativeDecoder decoder = train_relative_decoder(reference, d.data, d.train_rows, anchors, {kinds[k]},
                                                               task, exp.decoder, seed_offset + k);
        const double e2e = zero_shot_stitch(reference, decoder, d.data, d.eval_rows).score.score;
        for (std::size_t c = 0; c < kFlatClasses.size(); ++c) {
            if (!reference_invariance(kinds[k], kFlatClasses[c])) continue;
            const EncoderSpec moved =
                oracle_encoders({random_transform(kFlatClasses[c], exp.dataset.dim, 100 + c)})[0];
            const double stitched = zero_shot_stitch(moved, decoder, d.data, d.eval_rows).score.score;
            const double gap = std::abs(stitched - e2e);
            tally.worst = std::max(tally.worst, gap);
            ++tally.cells;
            if (!(gap <= 1e-6))
                tally.failures +=
                    " " + std::string(family_name(kinds[k])) + "/" + std::string(transform_code(kFlatClasses[c]));
        }
    }
}

Outcome exact_stitch() {
    const StitchExperiment exp;
    CellTally tally;
    invariant_cells(exp, kFlatKinds, 0, tally);
    // The default blobs are far apart, so a k=10 graph splits into one
    // component per class. Geodesic cells use overlapping blobs instead.
    StitchExperiment overlapping = exp;
    overlapping.dataset.spread = 0.8;
    invariant_cells(overlapping, {Geodesic{10, true}}, kFlatKinds.size(), tally);
    const double worst = tally.worst;
    const int cells = tally.cells;
    const std::string& failures = tally.failures;

    const ExperimentData d = prepare_data(exp);
    const auto anchors = anchor_rows(exp, d);
    const Task task = Classify{exp.dataset.classes};

    // Identity stitch with a trained encoder: the stitched pipeline and a
    // hand-assembled end-to-end pass agree bit for bit.
    const auto encoders = train_encoders(d.data, d.train_rows, {0, 1}, exp.encoder);
    const RelativeDecoder decoder = train_relative_decoder(encoders[0], d.data, d.train_rows, anchors, kFlatKinds, task,
                                                           exp.decoder, 3);
    const StitchOutcome stitched = zero_shot_stitch(encoders[0], decoder, d.data, d.eval_rows);
    const Matrix direct =
        decoder_output(decoder, encode_relative(encoders[0], d.data.points, anchors, decoder.kinds, d.eval_rows));
    const TaskScore direct_score = score_output(task, direct, task_targets(task, d.data, d.eval_rows));
    const bool identical = stitched.output == direct && stitched.score == direct_score;

    const bool ok = failures.empty() && identical && cells > 0;
    return {ok, fmt("%d invariant (kind, transform) cells, worst |stitched - end2end| %.1e (<= 1e-6); identity stitch "
                    "%s%s",
                    cells, worst, identical ? "bit-identical" : "DIFFERS",
                    failures.empty() ? "" : (" failing:" + failures).c_str())};
}

// 5, 6 ---------------------------------------------------------------------

struct Shared {
    StitchExperiment exp;
    ExperimentData data;
    std::vector<EncoderSpec> encoders;
};

Outcome product_superiority(Shared& shared) {
    const auto t0 = std::chrono::steady_clock::now();
    shared.data = prepare_data(shared.exp);
    shared.encoders = train_encoders(shared.data.data, shared.data.train_rows, shared.exp.seeds, shared.exp.encoder);
    const StitchReport report = run_stitch_experiment(shared.exp, shared.data, shared.encoders);
    const double elapsed = seconds_since(t0);

    double best = 0.0;
    std::string detail;
    for (const char* p : kSingles) {
        best = std::max(best, report.summary(p).mean_index);
        detail += fmt("%s %.4f, ", p, report.summary(p).mean_index);
    }
    const double product = report.summary(kProduct).mean_index;
    const bool ok = product >= best - 0.02 && product >= 0.90 && elapsed < 120.0;
    return {ok, fmt("mean index product %.4f vs best single %.4f (", product, best) + detail +
                    fmt("%zu encoders, |A|=%zu), %.1f s < 120 s", shared.encoders.size(), shared.exp.anchor_count,
                        elapsed)};
}

Outcome aggregator_ordering(const Shared& shared) {
    std::map<AggregatorKind, double> score;
    for (AggregatorKind kind : {AggregatorKind::MlpSum, AggregatorKind::Concat, AggregatorKind::SelfAttention,
                                AggregatorKind::MlpSelfAttention}) {
        StitchExperiment exp = shared.exp;
        exp.projections = {kFlatKinds};
        exp.decoder.aggregator = kind;
        score[kind] = run_stitch_experiment(exp, shared.data, shared.encoders).summary(kProduct).mean_score;
    }
    const double sum = score[AggregatorKind::MlpSum];
    bool ok = true;
    std::string detail;
    for (const auto& [kind, s] : score) {
        if (kind != AggregatorKind::MlpSum) ok = ok && sum >= s - 0.02;
        detail += fmt("%s %.4f, ", std::string(aggregator_name(kind)).c_str(), s);
    }
    return {ok, "mean stitched accuracy " + detail + "mlp_sum must be >= each other - 0.02"};
}

// 7 ------------------------------------------------------------------------

Outcome anchor_monotonicity() {
    const StitchExperiment exp;
    const AnchorAblationReport r = anchor_ablation({2, 8, 32, 64}, exp);
    bool ok = r.reports.size() == 4;
    std::string detail;
    double previous = -1.0;
    for (std::size_t i = 0; i < r.reports.size(); ++i) {
        const double product = r.reports[i].summary(kProduct).mean_score;
        if (previous >= 0.0) ok = ok && product >= previous - 0.02;
        previous = product;
        double best = 0.0;
        for (const char* p : kSingles) best = std::max(best, r.reports[i].summary(p).mean_score);
        ok = ok && product >= best - 0.02;
        detail += fmt("|A|=%zu product %.4f best single %.4f; ", r.counts[i], product, best);
    }
    return {ok, detail + "non-decreasing and product >= singles, both within 0.02"};
}

// 8 ------------------------------------------------------------------------

Outcome qkv_finetune() {
    const QkvExperiment exp;
    const QkvReport r = run_qkv_experiment(exp);
    const double n = static_cast<double>(r.spaces.size());
    const double noise_weight = r.weights_after.col(static_cast<Index>(r.noise_space)).mean();
    const double noise_before = r.weights_before.col(static_cast<Index>(r.noise_space)).mean();
    const double gain = r.attention_finetuned - r.attention_zero_shot;
    const bool frozen = r.head_digest_before == r.head_digest_after && r.frozen_digest_before == r.frozen_digest_after;
    const bool ok = gain >= 0.05 && frozen && noise_weight < 1.0 / n;
    return {ok, fmt("attention zero-shot %.4f -> tuned %.4f (gain %.4f >= 0.05; mlp_sum zero-shot %.4f); non-QKV "
                    "hashes %s; noise-space weight %.4f -> %.4f (< 1/N = %.4f)",
                    r.attention_zero_shot, r.attention_finetuned, gain, r.mlp_sum_zero_shot,
                    frozen ? "unchanged" : "CHANGED", noise_before, noise_weight, 1.0 / n)};
}

// 9 ------------------------------------------------------------------------

std::map<std::string, std::string> read_dir(const fs::path& dir) {
    std::map<std::string, std::string> out;
    if (!fs::exists(dir)) return out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        std::ifstream in(entry.path(), std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        out[entry.path().filename().string()] = ss.str();
    }
    return out;
}

Outcome cli_determinism() {
    const fs::path root = fs::temp_directory_path() / "relrep_acceptance_cli";
    fs::remove_all(root);
    fs::create_directories(root);
    const std::string cli = RELREP_CLI_PATH;

    // The two runs of each command execute concurrently as separate processes.
    std::vector<std::string> failures;
    std::size_t files = 0;
    for (const auto& command : command_names()) {
        int status[2] = {-1, -1};
        std::vector<std::thread> runs;
        for (int r = 0; r < 2; ++r) {
            runs.emplace_back([&, r] {
                const fs::path out = root / (command + "_" + std::to_string(r));
                const std::string line = "\"" + cli + "\" " + command + " --seed 0 --out \"" + out.string() +
                                         "\" > \"" + out.string() + ".log\" 2>&1";
                status[r] = std::system(line.c_str());
            });
        }
        for (auto& t : runs) t.join();
        const auto a = read_dir(root / (command + "_0"));
        const auto b = read_dir(root / (command + "_1"));
        if (status[0] != 0 || status[1] != 0 || a.empty() || a != b) failures.push_back(command);
        files += a.size();
    }
    std::string detail = fmt("%zu commands x 2 runs, %zu artifact files compared byte for byte", command_names().size(),
                             files);
    for (const auto& f : failures) detail += " FAILED:" + f;
    return {failures.empty(), detail};
}

} // namespace

int main() {
    Shared shared;
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"invariance table", invariance_table},
        {"gradient integrity", gradient_integrity},
        {"metric oracles", metric_oracles},
        {"exact stitch", exact_stitch},
        {"product-space superiority", [&] { return product_superiority(shared); }},
        {"aggregator ordering", [&] { return aggregator_ordering(shared); }},
        {"anchor monotonicity", anchor_monotonicity},
        {"qkv fine-tuning", qkv_finetune},
        {"cli determinism", cli_determinism},
    };

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("%s  %zu %-26s %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    o.detail.c_str(), seconds_since(t0));
        std::fflush(stdout);
    }
    std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
    return failed == 0 ? 0 : 1;
}
