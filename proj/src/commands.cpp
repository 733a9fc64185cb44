#include "relrep/commands.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace relrep {
namespace {

using ordered = nlohmann::ordered_json;

std::string dump(const ordered& j) { return j.dump(2) + "\n"; }

std::vector<SimilarityKind> configured_kinds(const ExperimentConfig& cfg) {
    return canonical_kinds(cfg.kinds.empty() ? std::vector<SimilarityKind>{Cosine{}, Euclidean{}, Manhattan{}, Chebyshev{}}
                                             : cfg.kinds);
}

std::vector<std::string> anchor_header(const std::vector<std::size_t>& anchors) {
    std::vector<std::string> header;
    for (auto a : anchors) header.push_back("anchor_" + std::to_string(a));
    return header;
}

std::string index_csv(const std::string& column, const std::vector<std::size_t>& values) {
    std::string out = column + "\n";
    for (auto v : values) out += std::to_string(v) + "\n";
    return out;
}

LatentMatrix primary_input(const ExperimentConfig& cfg, const std::vector<LatentMatrix>& inputs) {
    if (!inputs.empty()) return inputs.front();
    return make_dataset(cfg.stitch.dataset, cfg.stitch.dataset_seed).points;
}

struct Projected {
    std::vector<std::size_t> anchors;
    ProductSpace space;
};

Projected project_input(const ExperimentConfig& cfg, const LatentMatrix& z) {
    Projected p;
    p.anchors = select_anchors(static_cast<std::size_t>(z.rows()), cfg.stitch.anchor_count, cfg.stitch.anchor_seed);
    p.space = product_projection(z, make_anchor_set(z, p.anchors, cfg.stitch.anchor_seed), configured_kinds(cfg));
    return p;
}

Artifacts cmd_invariance(const ExperimentConfig& cfg) {
    std::vector<TransformClass> classes(std::begin(kAllTransformClasses), std::end(kAllTransformClasses));
    const InvarianceReport report = verify_invariance_table(configured_kinds(cfg), classes, cfg.invariance);
    Artifacts a;
    a.add("invariance.json", invariance_report_json(report));
    a.add("invariance.csv", invariance_table_csv(report));
    return a;
}

Artifacts cmd_project(const ExperimentConfig& cfg, const std::vector<LatentMatrix>& inputs) {
    const Projected p = project_input(cfg, primary_input(cfg, inputs));
    Artifacts a;
    a.add("anchors.csv", index_csv("index", p.anchors));
    for (const auto& c : p.space.components)
        a.add("relative_" + kind_file_stem(c.kind) + ".csv", format_matrix_csv(c.data, anchor_header(p.anchors)));
    return a;
}

Artifacts cmd_aggregate(const ExperimentConfig& cfg, const std::vector<LatentMatrix>& inputs) {
    const Projected p = project_input(cfg, primary_input(cfg, inputs));
    const AggregatorParams params =
        init_aggregator(cfg.stitch.decoder.aggregator, p.space.size(), static_cast<Index>(p.anchors.size()),
                        mix_seed(cfg.seed, 0xa66));
    Artifacts a;
    a.add("anchors.csv", index_csv("index", p.anchors));
    a.add("aggregated.csv", format_matrix_csv(aggregate(params, p.space)));
    a.add("aggregator.json", aggregator_to_json(params));
    if (uses_attention(params.kind)) {
        std::vector<std::string> header;
        for (const auto& c : p.space.components) header.push_back(kind_to_string(c.kind));
        a.add("attention_weights.csv", format_matrix_csv(attention_weights(params, p.space), header));
    }
    return a;
}

Artifacts cmd_similarity(const ExperimentConfig& cfg, const std::vector<LatentMatrix>& inputs) {
    require(inputs.empty() || inputs.size() == 2, ErrorCode::BadConfig, "similarity takes zero or two inputs");
    LatentMatrix first = inputs.empty() ? LatentMatrix() : inputs[0];
    LatentMatrix second = inputs.empty() ? LatentMatrix() : inputs[1];
    std::string source = "inputs";
    if (inputs.empty()) {
        const ExperimentData prepared = prepare_data(cfg.stitch);
        const auto encoders = train_encoders(prepared.data, prepared.train_rows,
                                             {cfg.similarity.first, cfg.similarity.second}, cfg.stitch.encoder);
        const LatentMatrix eval(gather_rows(prepared.data.points.data(), prepared.eval_rows));
        first = encoders[0].encode(eval);
        second = encoders[1].encode(eval);
        source = "encoders " + encoders[0].id + " and " + encoders[1].id;
    }
    require(first.rows() == second.rows(), ErrorCode::DimensionMismatch, "compared spaces have different sample counts");
    const auto anchors =
        select_anchors(static_cast<std::size_t>(first.rows()), cfg.stitch.anchor_count, cfg.stitch.anchor_seed);
    const auto kinds = configured_kinds(cfg);
    const ProductSpace s1 = product_projection(first, make_anchor_set(first, anchors), kinds);
    const ProductSpace s2 = product_projection(second, make_anchor_set(second, anchors), kinds);

    ordered rows = ordered::array();
    for (std::size_t i = 0; i < kinds.size(); ++i) {
        ordered row{{"kind", kind_to_string(kinds[i])}};
        for (auto m : {SimilarityMetric::LinearCka, SimilarityMetric::Pearson, SimilarityMetric::Spearman})
            row[metric_name(m)] = cross_space_similarity(m, s1.components[i], s2.components[i]).value;
        rows.push_back(std::move(row));
    }
    ordered doc{{"format", "relrep.similarity"},
                {"version", 1},
                {"source", source},
                {"samples", first.rows()},
                {"anchor_count", anchors.size()},
                {"correlation_mode", "flattened"},
                {"relative", rows}};
    doc["absolute_linear_cka"] = linear_cka(first.data(), second.data());
    Artifacts a;
    a.add("similarity.json", dump(doc));
    return a;
}

Artifacts cmd_stitch(const ExperimentConfig& cfg) {
    const StitchReport report = run_stitch_experiment(cfg.stitch);
    Artifacts a;
    a.add("stitch.json", stitch_report_json(report));
    a.add("stitch.csv", stitch_report_csv(report));
    AnchorAblationReport single{{report.anchor_count}, {report}};
    a.add("summary.csv", ablation_summary_csv(single));
    return a;
}

Artifacts cmd_ablate(const ExperimentConfig& cfg) {
    const AnchorAblationReport report = anchor_ablation(cfg.ablation_counts, cfg.stitch);
    std::string cells = "anchor_count,encoder_id,decoder_id,kinds,aggregator,score,end2end,index\n";
    for (std::size_t i = 0; i < report.counts.size(); ++i) {
        const std::string body = stitch_report_csv(report.reports[i]);
        std::size_t pos = body.find('\n') + 1;
        while (pos < body.size()) {
            const auto end = body.find('\n', pos);
            cells += std::to_string(report.counts[i]) + "," + body.substr(pos, end - pos + 1);
            pos = end + 1;
        }
    }
    Artifacts a;
    a.add("ablation.json", ablation_report_json(report));
    a.add("ablation.csv", cells);
    a.add("ablation_summary.csv", ablation_summary_csv(report));
    return a;
}

Artifacts cmd_qkv(const ExperimentConfig& cfg) {
    const QkvReport report = run_qkv_experiment(cfg.qkv);
    Artifacts a;
    a.add("qkv.json", qkv_report_json(report));
    a.add("attention_before.csv", format_matrix_csv(report.weights_before, report.spaces));
    a.add("attention_after.csv", format_matrix_csv(report.weights_after, report.spaces));
    std::string trace = "epoch,accuracy\n";
    for (std::size_t i = 0; i < report.accuracy_trace.size(); ++i)
        trace += std::to_string(i) + "," + format_double(report.accuracy_trace[i]) + "\n";
    a.add("accuracy_trace.csv", trace);
    return a;
}

Artifacts cmd_geodesic(const ExperimentConfig& cfg) {
    const auto& g = cfg.geodesic;
    const SyntheticDataset roll = make_dataset(g.roll, cfg.seed);
    const auto n = static_cast<std::size_t>(roll.points.rows());
    const auto anchors = select_anchors(n, static_cast<std::size_t>(g.anchors), mix_seed(cfg.seed, 0x9e0));
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    const GeodesicGraph graph = build_geodesic_graph(roll.points, g.k);
    const Matrix graph_dist = geodesic_distances(graph, anchors, all, false).transpose();

    const Matrix& chart = *roll.chart;
    Matrix chart_dist(static_cast<Index>(n), static_cast<Index>(anchors.size()));
    std::vector<double> rel_errors;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < anchors.size(); ++j) {
            const double d = (chart.row(static_cast<Index>(i)) - chart.row(static_cast<Index>(anchors[j]))).norm();
            chart_dist(static_cast<Index>(i), static_cast<Index>(j)) = d;
            if (d > 0.0) rel_errors.push_back(std::abs(graph_dist(static_cast<Index>(i), static_cast<Index>(j)) - d) / d);
        }
    }
    std::sort(rel_errors.begin(), rel_errors.end());
    const double median = rel_errors.empty() ? 0.0 : rel_errors[rel_errors.size() / 2];
    const double p90 = rel_errors.empty() ? 0.0 : rel_errors[rel_errors.size() * 9 / 10];

    Matrix points(static_cast<Index>(n), 5);
    points << roll.points.data(), chart;
    Artifacts a;
    a.add("points.csv", format_matrix_csv(points, {"x", "y", "z", "chart_u", "chart_v"}));
    a.add("anchors.csv", index_csv("index", anchors));
    a.add("geodesic_graph.csv", format_matrix_csv(graph_dist, anchor_header(anchors)));
    a.add("geodesic_chart.csv", format_matrix_csv(chart_dist, anchor_header(anchors)));
    a.add("geodesic.json", dump({{"format", "relrep.geodesic_demo"},
                                 {"version", 1},
                                 {"points", n},
                                 {"k", g.k},
                                 {"edges", graph.edge_count()},
                                 {"anchors", anchors.size()},
                                 {"median_relative_error", median},
                                 {"p90_relative_error", p90}}));
    return a;
}

} // namespace

const std::string& Artifacts::get(const std::string& name) const {
    for (const auto& [n, content] : files)
        if (n == name) return content;
    fail(ErrorCode::UnknownName, "no artifact named '" + name + "'");
}

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"invariance", "project",      "aggregate",    "similarity",
                                                "stitch",     "ablate-anchors", "finetune-qkv", "geodesic-demo"};
    return names;
}

Artifacts run_command(const std::string& name, const ExperimentConfig& cfg, const std::vector<LatentMatrix>& inputs) {
    const bool takes_inputs = name == "project" || name == "aggregate" || name == "similarity";
    require(takes_inputs || inputs.empty(), ErrorCode::BadConfig, "command '" + name + "' takes no input matrices");
    if (name == "invariance") return cmd_invariance(cfg);
    if (name == "project") return cmd_project(cfg, inputs);
    if (name == "aggregate") return cmd_aggregate(cfg, inputs);
    if (name == "similarity") return cmd_similarity(cfg, inputs);
    if (name == "stitch") return cmd_stitch(cfg);
    if (name == "ablate-anchors") return cmd_ablate(cfg);
    if (name == "finetune-qkv") return cmd_qkv(cfg);
    if (name == "geodesic-demo") return cmd_geodesic(cfg);
    fail(ErrorCode::UnknownName, "unknown command '" + name + "'");
}

void write_artifacts(const Artifacts& artifacts, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    require(!ec, ErrorCode::IoError, "cannot create '" + dir.string() + "': " + ec.message());
    for (const auto& [name, content] : artifacts.files) write_text(dir / name, content);
}

void override_kinds(ExperimentConfig& cfg, const std::vector<SimilarityKind>& kinds) {
    require(!kinds.empty(), ErrorCode::BadConfig, "empty kind list");
    const auto sorted = canonical_kinds(kinds);
    cfg.kinds = sorted;
    cfg.qkv.kinds = sorted;
    cfg.stitch.projections.clear();
    for (const auto& k : sorted) cfg.stitch.projections.push_back({k});
    if (sorted.size() > 1) cfg.stitch.projections.push_back(sorted);
}

void override_anchor_count(ExperimentConfig& cfg, std::size_t count) {
    require(count >= 1, ErrorCode::BadConfig, "anchor count must be positive");
    cfg.stitch.anchor_count = count;
    cfg.qkv.base.anchor_count = count;
}

void override_aggregator(ExperimentConfig& cfg, AggregatorKind kind) { cfg.stitch.decoder.aggregator = kind; }

void override_jobs(ExperimentConfig& cfg, int jobs) {
    require(jobs >= 1, ErrorCode::BadConfig, "jobs must be at least 1");
    cfg.stitch.jobs = jobs;
    cfg.qkv.base.jobs = jobs;
}

std::string kind_file_stem(const SimilarityKind& kind) {
    std::string s = kind_to_string(kind);
    for (char& c : s)
        if (c == ':' || c == '=' || c == ',' || c == '.') c = '_';
    return s;
}

} // namespace relrep
