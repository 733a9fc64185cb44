#include "relrep/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace relrep {

using nlohmann::json;
using ordered = nlohmann::ordered_json;

std::string format_double(double v) {
    require(std::isfinite(v), ErrorCode::NonFinite, "refusing to format a non-finite value");
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

namespace {

std::string at_line(const std::string& source, std::size_t line, std::size_t column) {
    return source + ":" + std::to_string(line) + ":" + std::to_string(column);
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) return out;
        start = comma + 1;
    }
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

ordered matrix_json(const Matrix& m) {
    ordered rows = ordered::array();
    for (Index i = 0; i < m.rows(); ++i) {
        ordered row = ordered::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

ordered vector_json(const Vector& v) {
    ordered out = ordered::array();
    for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

/// Typed access into a JSON document that reports failures with the path of
/// the offending value and rejects keys nobody asked for.
class Reader {
public:
    Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {}

    const std::string& path() const { return path_; }
    const json& node() const { return node_; }

    bool has(const std::string& key) {
        expect_object();
        seen_.insert(key);
        return node_.contains(key);
    }

    Reader child(const std::string& key) {
        require(has(key), ErrorCode::BadConfig, path_ + "." + key + ": missing");
        return Reader(node_.at(key), path_ + "." + key);
    }

    template <class T>
    void read(const std::string& key, T& out) {
        if (has(key)) out = Reader(node_.at(key), path_ + "." + key).as<T>();
    }

    template <class T>
    T as() const {
        try {
            if constexpr (std::is_same_v<T, bool>) {
                check(node_.is_boolean(), "expected a boolean");
            } else if constexpr (std::is_integral_v<T>) {
                check(node_.is_number_integer(), "expected an integer");
                if constexpr (std::is_unsigned_v<T>) check(node_.is_number_unsigned(), "expected a non-negative integer");
            } else if constexpr (std::is_floating_point_v<T>) {
                check(node_.is_number(), "expected a number");
            } else if constexpr (std::is_same_v<T, std::string>) {
                check(node_.is_string(), "expected a string");
            }
            if constexpr (requires { typename T::value_type; } && !std::is_same_v<T, std::string>) {
                check(node_.is_array(), "expected an array");
                T out;
                for (std::size_t i = 0; i < node_.size(); ++i)
                    out.push_back(Reader(node_[i], path_ + "[" + std::to_string(i) + "]").as<typename T::value_type>());
                return out;
            } else {
                return node_.get<T>();
            }
        } catch (const json::exception& e) {
            fail(ErrorCode::BadConfig, path_ + ": " + e.what());
        }
    }

    void check(bool ok, const std::string& what) const { require(ok, ErrorCode::BadConfig, path_ + ": " + what); }

    /// Call after reading every key of an object.
    void done() const {
        if (!node_.is_object()) return;
        for (const auto& item : node_.items())
            require(seen_.count(item.key()) > 0, ErrorCode::BadConfig, path_ + "." + item.key() + ": unknown key");
    }

private:
    void expect_object() const { check(node_.is_object(), "expected an object"); }

    const json& node_;
    std::string path_;
    std::set<std::string> seen_;
};

Matrix read_matrix(const json& j, const std::string& what) {
    require(j.is_array(), ErrorCode::ParseError, what + ": expected nested arrays");
    const auto rows = static_cast<Index>(j.size());
    const Index cols = rows == 0 ? 0 : static_cast<Index>(j[0].size());
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        const json& row = j[static_cast<std::size_t>(i)];
        require(row.is_array() && static_cast<Index>(row.size()) == cols, ErrorCode::RaggedRows,
                what + ": row " + std::to_string(i) + " has the wrong width");
        for (Index c = 0; c < cols; ++c) m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    return m;
}

Vector read_vector(const json& j, const std::string& what) {
    require(j.is_array(), ErrorCode::ParseError, what + ": expected an array");
    Vector v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = j[i].get<double>();
    return v;
}

ordered layer_json(const Layer& layer) {
    return std::visit(
        [](const auto& l) -> ordered {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, Linear>) {
                return {{"type", "linear"}, {"weight", matrix_json(l.weight)}, {"bias", vector_json(l.bias)}};
            } else if constexpr (std::is_same_v<T, LayerNorm>) {
                return {{"type", "layer_norm"}, {"gain", vector_json(l.gain)}, {"bias", vector_json(l.bias)},
                        {"eps", l.eps}};
            } else if constexpr (std::is_same_v<T, Tanh>) {
                return {{"type", "tanh"}};
            } else {
                return {{"type", "attention"},
                        {"query", matrix_json(l.query)},
                        {"key", matrix_json(l.key)},
                        {"value", matrix_json(l.value)}};
            }
        },
        layer);
}

Layer layer_from_json(const json& j) {
    const auto type = j.at("type").get<std::string>();
    if (type == "linear") return Linear{read_matrix(j.at("weight"), "weight"), read_vector(j.at("bias"), "bias")};
    if (type == "layer_norm")
        return LayerNorm{read_vector(j.at("gain"), "gain"), read_vector(j.at("bias"), "bias"), j.at("eps").get<double>()};
    if (type == "tanh") return Tanh{};
    if (type == "attention")
        return SelfAttentionHead{read_matrix(j.at("query"), "query"), read_matrix(j.at("key"), "key"),
                                 read_matrix(j.at("value"), "value")};
    fail(ErrorCode::ParseError, "unknown layer type '" + type + "'");
}

json parse_json(const std::string& text, const std::string& source) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        fail(ErrorCode::ParseError, source + ": " + e.what());
    }
}

void check_format(const json& j, const std::string& format) {
    require(j.is_object() && j.value("format", std::string{}) == format, ErrorCode::ParseError,
            "document is not a " + format + " file");
    require(j.value("version", 0) == 1, ErrorCode::ParseError, "unsupported " + format + " version");
}

ordered summary_json(const ProjectionSummary& s) {
    return {{"projection", s.projection},     {"mean_score", s.mean_score},
            {"std_score", s.std_score},       {"mean_index", s.mean_index},
            {"mean_end_to_end", s.mean_end_to_end}, {"cells", s.cells}};
}

ordered stitch_json(const StitchReport& r) {
    ordered cells = ordered::array();
    for (const auto& c : r.cells) {
        cells.push_back({{"projection", c.projection},
                         {"encoder", c.encoder},
                         {"decoder", c.decoder},
                         {"score", c.stitched.score},
                         {"mse", c.stitched.mse},
                         {"l1", c.stitched.l1},
                         {"end_to_end", c.end_to_end},
                         {"index", c.index}});
    }
    ordered summaries = ordered::array();
    for (const auto& s : r.summaries) summaries.push_back(summary_json(s));
    return {{"format", "relrep.stitch_report"},
            {"version", 1},
            {"task", r.task},
            {"aggregator", r.aggregator},
            {"anchor_count", r.anchor_count},
            {"anchor_seed", r.anchor_seed},
            {"seeds", r.seeds},
            {"encoder_ids", r.encoder_ids},
            {"include_diagonal", r.include_diagonal},
            {"summaries", summaries},
            {"cells", cells}};
}

std::string csv_cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string dump(const ordered& j) { return j.dump(2) + "\n"; }

ordered train_json(const TrainConfig& t) {
    return {{"learning_rate", t.learning_rate},
            {"epochs", t.epochs},
            {"batch_size", t.batch_size},
            {"seed", t.seed},
            {"adam", {{"beta1", t.adam.beta1}, {"beta2", t.adam.beta2}, {"epsilon", t.adam.epsilon}}}};
}

void read_train(Reader r, TrainConfig& t) {
    r.read("learning_rate", t.learning_rate);
    r.read("epochs", t.epochs);
    r.read("batch_size", t.batch_size);
    r.read("seed", t.seed);
    if (r.has("adam")) {
        Reader a = r.child("adam");
        a.read("beta1", t.adam.beta1);
        a.read("beta2", t.adam.beta2);
        a.read("epsilon", t.adam.epsilon);
        a.done();
    }
    r.done();
    try {
        t.validate();
    } catch (const Error& e) {
        fail(ErrorCode::BadConfig, r.path() + ": " + e.what());
    }
}

ordered blobs_json(const BlobsSpec& b) {
    return {{"n", b.n}, {"classes", b.classes}, {"dim", b.dim}, {"spread", b.spread}, {"center_scale", b.center_scale}};
}

void read_blobs(Reader r, BlobsSpec& b) {
    r.read("n", b.n);
    r.read("classes", b.classes);
    r.read("dim", b.dim);
    r.read("spread", b.spread);
    r.read("center_scale", b.center_scale);
    r.done();
    r.check(b.n > 0 && b.classes >= 2 && b.dim >= 1 && b.spread >= 0.0 && b.center_scale > 0.0,
            "blobs need n > 0, classes >= 2, dim >= 1, spread >= 0, center_scale > 0");
}

std::vector<SimilarityKind> read_kinds(Reader r) {
    r.check(r.node().is_array() || r.node().is_string(), "expected a kind list");
    std::string where = r.path();
    try {
        if (r.node().is_string()) return parse_kind_list(r.node().get<std::string>());
        std::vector<SimilarityKind> out;
        for (std::size_t i = 0; i < r.node().size(); ++i) {
            where = r.path() + "[" + std::to_string(i) + "]";
            out.push_back(parse_kind(r.node()[i].get<std::string>()));
        }
        return out;
    } catch (const Error& e) {
        fail(ErrorCode::BadConfig, where + ": " + e.what());
    } catch (const json::exception& e) {
        fail(ErrorCode::BadConfig, where + ": " + e.what());
    }
}

ordered kinds_json(const std::vector<SimilarityKind>& kinds) {
    ordered out = ordered::array();
    for (const auto& k : kinds) out.push_back(kind_to_string(k));
    return out;
}

ordered experiment_json(const StitchExperiment& e) {
    ordered projections = ordered::array();
    for (const auto& p : e.projections) projections.push_back(kinds_json(p));
    return {{"dataset", blobs_json(e.dataset)},
            {"eval_fraction", e.eval_fraction},
            {"encoder",
             {{"hidden", e.encoder.hidden},
              {"latent", e.encoder.latent},
              {"final_tanh", e.encoder.final_tanh},
              {"train", train_json(e.encoder.train)}}},
            {"encoder_seeds", e.seeds},
            {"projections", projections},
            {"decoder",
             {{"aggregator", std::string(aggregator_name(e.decoder.aggregator))},
              {"head_hidden", e.decoder.head_hidden},
              {"train", train_json(e.decoder.train)}}},
            {"anchor_count", e.anchor_count},
            {"include_diagonal", e.include_diagonal},
            {"jobs", e.jobs}};
}

void read_experiment(Reader r, StitchExperiment& e) {
    if (r.has("dataset")) read_blobs(r.child("dataset"), e.dataset);
    r.read("eval_fraction", e.eval_fraction);
    r.check(e.eval_fraction > 0.0 && e.eval_fraction < 1.0, "eval_fraction must lie in (0, 1)");
    if (r.has("encoder")) {
        Reader enc = r.child("encoder");
        enc.read("hidden", e.encoder.hidden);
        enc.read("latent", e.encoder.latent);
        enc.read("final_tanh", e.encoder.final_tanh);
        if (enc.has("train")) read_train(enc.child("train"), e.encoder.train);
        enc.done();
        enc.check(e.encoder.latent >= 1, "latent must be positive");
    }
    r.read("encoder_seeds", e.seeds);
    r.check(e.seeds.size() >= 2, "encoder_seeds needs at least two entries");
    if (r.has("projections")) {
        Reader p = r.child("projections");
        p.check(p.node().is_array(), "expected an array of kind lists");
        e.projections.clear();
        for (std::size_t i = 0; i < p.node().size(); ++i)
            e.projections.push_back(read_kinds(Reader(p.node()[i], p.path() + "[" + std::to_string(i) + "]")));
    }
    if (r.has("decoder")) {
        Reader d = r.child("decoder");
        if (d.has("aggregator")) {
            Reader a = d.child("aggregator");
            try {
                e.decoder.aggregator = parse_aggregator(a.as<std::string>());
            } catch (const Error& err) {
                fail(ErrorCode::BadConfig, a.path() + ": " + err.what());
            }
        }
        d.read("head_hidden", e.decoder.head_hidden);
        if (d.has("train")) read_train(d.child("train"), e.decoder.train);
        d.done();
    }
    r.read("anchor_count", e.anchor_count);
    r.check(e.anchor_count >= 1, "anchor_count must be positive");
    r.read("include_diagonal", e.include_diagonal);
    r.read("jobs", e.jobs);
    r.check(e.jobs >= 1, "jobs must be at least 1");
    r.done();
}

} // namespace

Matrix parse_matrix_csv(const std::string& text, const std::string& source) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) break;
    }
    require(line_no > 0 && !trim(line).empty(), ErrorCode::ParseError, at_line(source, line_no, 1) + ": empty file");
    {
        const auto header = split_fields(trim(line));
        width = header.size();
        for (std::size_t c = 0; c < header.size(); ++c) {
            require(trim(header[c]) == "dim_" + std::to_string(c), ErrorCode::ParseError,
                    at_line(source, line_no, c + 1) + ": expected header field dim_" + std::to_string(c));
        }
    }
    std::vector<double> values;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto content = trim(line);
        if (content.empty()) continue;
        const auto fields = split_fields(content);
        require(fields.size() == width, ErrorCode::RaggedRows,
                at_line(source, line_no, 1) + ": expected " + std::to_string(width) + " fields, found " +
                    std::to_string(fields.size()));
        for (std::size_t c = 0; c < fields.size(); ++c) {
            const auto f = trim(fields[c]);
            double v = 0.0;
            const auto* begin = f.data();
            const auto* end = f.data() + f.size();
            if (begin != end && *begin == '+') ++begin;
            const auto res = std::from_chars(begin, end, v);
            require(res.ec == std::errc() && res.ptr == end && begin != end, ErrorCode::ParseError,
                    at_line(source, line_no, c + 1) + ": '" + std::string(f) + "' is not a number");
            require(std::isfinite(v), ErrorCode::NonFinite, at_line(source, line_no, c + 1) + ": non-finite value");
            values.push_back(v);
        }
        ++rows;
    }
    require(rows > 0, ErrorCode::ParseError, source + ": no data rows");
    Matrix m(static_cast<Index>(rows), static_cast<Index>(width));
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < width; ++j) m(static_cast<Index>(i), static_cast<Index>(j)) = values[i * width + j];
    return m;
}

std::string format_matrix_csv(const Matrix& m, const std::vector<std::string>& header) {
    require(static_cast<Index>(header.size()) == m.cols(), ErrorCode::DimensionMismatch,
            "header width does not match the matrix");
    std::string out;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (j) out += ',';
        out += csv_cell(header[j]);
    }
    out += '\n';
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) {
            if (j) out += ',';
            out += format_double(m(i, j));
        }
        out += '\n';
    }
    return out;
}

std::string format_matrix_csv(const Matrix& m) {
    std::vector<std::string> header;
    for (Index j = 0; j < m.cols(); ++j) header.push_back("dim_" + std::to_string(j));
    return format_matrix_csv(m, header);
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorCode::IoError, "cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    require(!in.bad(), ErrorCode::IoError, "failed reading '" + path.string() + "'");
    return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
    out << text;
    out.flush();
    require(static_cast<bool>(out), ErrorCode::IoError, "failed writing '" + path.string() + "'");
}

LatentMatrix load_matrix(const std::filesystem::path& path) {
    return LatentMatrix(parse_matrix_csv(read_text(path), path.string()));
}

void save_matrix(const Matrix& m, const std::filesystem::path& path) { write_text(path, format_matrix_csv(m)); }

std::string network_to_json(const Network& net) {
    ordered layers = ordered::array();
    for (const auto& l : net.layers()) layers.push_back(layer_json(l));
    return dump({{"format", "relrep.network"}, {"version", 1}, {"input_dim", net.input_dim()}, {"layers", layers}});
}

Network network_from_json(const std::string& text) {
    const json j = parse_json(text, "network");
    check_format(j, "relrep.network");
    try {
        std::vector<Layer> layers;
        for (const auto& l : j.at("layers")) layers.push_back(layer_from_json(l));
        return Network(j.at("input_dim").get<Index>(), std::move(layers));
    } catch (const json::exception& e) {
        fail(ErrorCode::ParseError, std::string("network: ") + e.what());
    }
}

std::string aggregator_to_json(const AggregatorParams& params) {
    ordered spaces = ordered::array();
    for (const auto& s : params.per_space) {
        ordered block{{"norm", layer_json(s.norm)}};
        if (s.linear) block["linear"] = layer_json(*s.linear);
        spaces.push_back(std::move(block));
    }
    ordered j{{"format", "relrep.aggregator"},
              {"version", 1},
              {"kind", std::string(aggregator_name(params.kind))},
              {"anchor_count", params.anchor_count},
              {"spaces", spaces}};
    if (params.attention) j["attention"] = layer_json(*params.attention);
    return dump(j);
}

AggregatorParams aggregator_from_json(const std::string& text) {
    const json j = parse_json(text, "aggregator");
    check_format(j, "relrep.aggregator");
    try {
        AggregatorParams p;
        p.kind = parse_aggregator(j.at("kind").get<std::string>());
        p.anchor_count = j.at("anchor_count").get<Index>();
        for (const auto& s : j.at("spaces")) {
            SpaceBlock block{std::get<LayerNorm>(layer_from_json(s.at("norm"))), std::nullopt};
            if (s.contains("linear")) block.linear = std::get<Linear>(layer_from_json(s.at("linear")));
            p.per_space.push_back(std::move(block));
        }
        if (j.contains("attention")) p.attention = std::get<SelfAttentionHead>(layer_from_json(j.at("attention")));
        require(uses_attention(p.kind) == p.attention.has_value(), ErrorCode::ParseError,
                "aggregator: attention block does not match the kind");
        return p;
    } catch (const json::exception& e) {
        fail(ErrorCode::ParseError, std::string("aggregator: ") + e.what());
    } catch (const std::bad_variant_access&) {
        fail(ErrorCode::ParseError, "aggregator: layer of the wrong type");
    }
}

std::string invariance_report_json(const InvarianceReport& report) {
    ordered cells = ordered::array();
    for (const auto& c : report.cells) {
        cells.push_back({{"similarity", kind_to_string(c.kind)},
                         {"transform", std::string(transform_code(c.cls))},
                         {"verdict", std::string(verdict_name(c.verdict))},
                         {"expected", std::string(verdict_name(c.expected))},
                         {"match", c.verdict == c.expected},
                         {"max_dev", c.max_dev},
                         {"min_dev", c.min_dev},
                         {"trials", c.trials},
                         {"above_threshold", c.above_threshold}});
    }
    return dump({{"format", "relrep.invariance_report"},
                 {"version", 1},
                 {"seed", report.seed},
                 {"tol_eq", report.tol_eq},
                 {"tol_neq", report.tol_neq},
                 {"tol_manifold", report.tol_manifold},
                 {"matches_reference", report.matches_reference()},
                 {"cells", cells}});
}

std::string invariance_table_csv(const InvarianceReport& report) {
    std::vector<TransformClass> classes;
    std::vector<std::string> kinds;
    for (const auto& c : report.cells) {
        if (std::find(classes.begin(), classes.end(), c.cls) == classes.end()) classes.push_back(c.cls);
        const auto name = kind_to_string(c.kind);
        if (std::find(kinds.begin(), kinds.end(), name) == kinds.end()) kinds.push_back(name);
    }
    std::sort(classes.begin(), classes.end());
    std::string out = "similarity";
    for (auto cls : classes) out += "," + std::string(transform_code(cls));
    out += '\n';
    for (const auto& k : kinds) {
        out += csv_cell(k);
        for (auto cls : classes) {
            out += ',';
            for (const auto& c : report.cells)
                if (c.cls == cls && kind_to_string(c.kind) == k) out += verdict_name(c.verdict);
        }
        out += '\n';
    }
    return out;
}

std::string stitch_report_json(const StitchReport& report) { return dump(stitch_json(report)); }

StitchReport stitch_report_from_json(const std::string& text) {
    const json j = parse_json(text, "stitch report");
    check_format(j, "relrep.stitch_report");
    try {
        StitchReport r;
        r.task = j.at("task").get<std::string>();
        r.aggregator = j.at("aggregator").get<std::string>();
        r.anchor_count = j.at("anchor_count").get<std::size_t>();
        r.anchor_seed = j.at("anchor_seed").get<std::uint64_t>();
        r.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        r.encoder_ids = j.at("encoder_ids").get<std::vector<std::string>>();
        r.include_diagonal = j.at("include_diagonal").get<bool>();
        for (const auto& s : j.at("summaries")) {
            r.summaries.push_back({s.at("projection").get<std::string>(), s.at("mean_score").get<double>(),
                                   s.at("std_score").get<double>(), s.at("mean_index").get<double>(),
                                   s.at("mean_end_to_end").get<double>(), s.at("cells").get<std::size_t>()});
        }
        for (const auto& c : j.at("cells")) {
            r.cells.push_back({c.at("projection").get<std::string>(),
                               c.at("encoder").get<std::size_t>(),
                               c.at("decoder").get<std::size_t>(),
                               {c.at("score").get<double>(), c.at("mse").get<double>(), c.at("l1").get<double>()},
                               c.at("end_to_end").get<double>(),
                               c.at("index").get<double>()});
        }
        return r;
    } catch (const json::exception& e) {
        fail(ErrorCode::ParseError, std::string("stitch report: ") + e.what());
    }
}

std::string stitch_report_csv(const StitchReport& report) {
    std::string out = "encoder_id,decoder_id,kinds,aggregator,score,end2end,index\n";
    for (const auto& c : report.cells) {
        out += csv_cell(report.encoder_ids.at(c.encoder)) + "," + csv_cell(report.encoder_ids.at(c.decoder)) + "," +
               csv_cell(c.projection) + "," + csv_cell(report.aggregator) + "," + format_double(c.stitched.score) +
               "," + format_double(c.end_to_end) + "," + format_double(c.index) + "\n";
    }
    return out;
}

std::string ablation_report_json(const AnchorAblationReport& report) {
    ordered runs = ordered::array();
    for (std::size_t i = 0; i < report.counts.size(); ++i)
        runs.push_back({{"anchor_count", report.counts[i]}, {"report", stitch_json(report.reports.at(i))}});
    return dump({{"format", "relrep.anchor_ablation"}, {"version", 1}, {"counts", report.counts}, {"runs", runs}});
}

std::string ablation_summary_csv(const AnchorAblationReport& report) {
    std::string out = "anchor_count,projection,mean_score,std_score,mean_index,mean_end_to_end\n";
    for (std::size_t i = 0; i < report.counts.size(); ++i) {
        for (const auto& s : report.reports.at(i).summaries) {
            out += std::to_string(report.counts[i]) + "," + csv_cell(s.projection) + "," + format_double(s.mean_score) +
                   "," + format_double(s.std_score) + "," + format_double(s.mean_index) + "," +
                   format_double(s.mean_end_to_end) + "\n";
        }
    }
    return out;
}

std::string qkv_report_json(const QkvReport& r) {
    const Vector before = r.weights_before.colwise().mean().transpose();
    const Vector after = r.weights_after.colwise().mean().transpose();
    return dump({{"format", "relrep.qkv_report"},
                 {"version", 1},
                 {"spaces", r.spaces},
                 {"noise_space", r.noise_space},
                 {"end_to_end", r.end_to_end},
                 {"mlp_sum_zero_shot", r.mlp_sum_zero_shot},
                 {"attention_zero_shot", r.attention_zero_shot},
                 {"attention_finetuned", r.attention_finetuned},
                 {"space_weight_before", vector_json(before)},
                 {"space_weight_after", vector_json(after)},
                 {"accuracy_trace", r.accuracy_trace},
                 {"head_digest_before", r.head_digest_before},
                 {"head_digest_after", r.head_digest_after},
                 {"frozen_digest_before", r.frozen_digest_before},
                 {"frozen_digest_after", r.frozen_digest_after}});
}

void ExperimentConfig::apply_seed(std::uint64_t s) {
    seed = s;
    stitch.dataset_seed = s;
    stitch.anchor_seed = s;
    qkv.base.dataset_seed = s;
    qkv.base.anchor_seed = s;
    invariance.seed = s;
}

ExperimentConfig default_config() {
    ExperimentConfig cfg;
    cfg.stitch.projections = default_projections();
    cfg.kinds = {Cosine{}, Euclidean{}, Manhattan{}, Chebyshev{}};
    cfg.qkv.kinds = cfg.kinds;
    cfg.apply_seed(0);
    return cfg;
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
    const json root = parse_json(text, source);
    ExperimentConfig cfg = default_config();
    Reader r(root, "$");
    r.check(root.is_object(), "expected an object");
    std::uint64_t seed = cfg.seed;
    r.read("seed", seed);
    if (r.has("kinds")) cfg.kinds = read_kinds(r.child("kinds"));
    if (r.has("stitch")) read_experiment(r.child("stitch"), cfg.stitch);
    r.read("ablation_counts", cfg.ablation_counts);
    if (r.has("qkv")) {
        Reader q = r.child("qkv");
        if (q.has("base")) read_experiment(q.child("base"), cfg.qkv.base);
        if (q.has("kinds")) cfg.qkv.kinds = read_kinds(q.child("kinds"));
        q.read("noise_family", cfg.qkv.noise_family);
        q.read("noise_seed", cfg.qkv.noise_seed);
        q.read("encoder", cfg.qkv.encoder);
        q.read("decoder", cfg.qkv.decoder);
        if (q.has("finetune")) read_train(q.child("finetune"), cfg.qkv.finetune);
        q.done();
    }
    if (r.has("invariance")) {
        Reader v = r.child("invariance");
        auto& o = cfg.invariance;
        v.read("trials", o.trials);
        v.read("tol_eq", o.tol_eq);
        v.read("tol_neq", o.tol_neq);
        v.read("tol_manifold", o.tol_manifold);
        v.read("samples", o.samples);
        v.read("anchors", o.anchors);
        v.read("dim", o.dim);
        v.read("roll_points", o.roll_points);
        v.read("roll_anchors", o.roll_anchors);
        v.done();
        v.check(o.trials >= 1 && o.samples >= 1 && o.anchors >= 1 && o.dim >= 2 && o.roll_anchors >= 1 &&
                    o.roll_points > o.roll_anchors,
                "invariance sizes out of range");
    }
    if (r.has("geodesic")) {
        Reader g = r.child("geodesic");
        auto& d = cfg.geodesic;
        g.read("n", d.roll.n);
        g.read("noise", d.roll.noise);
        g.read("height", d.roll.height);
        g.read("k", d.k);
        g.read("anchors", d.anchors);
        g.done();
        g.check(d.roll.n > d.anchors && d.anchors >= 1 && d.k >= 1 && d.roll.noise >= 0.0 && d.roll.height > 0.0,
                "geodesic demo sizes out of range");
    }
    if (r.has("similarity")) {
        Reader s = r.child("similarity");
        s.read("first", cfg.similarity.first);
        s.read("second", cfg.similarity.second);
        s.done();
    }
    r.done();
    cfg.apply_seed(seed);
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) { return parse_config(read_text(path), path.string()); }

std::string config_to_json(const ExperimentConfig& cfg) {
    ordered qkv_base = experiment_json(cfg.qkv.base);
    const auto& o = cfg.invariance;
    return dump({{"seed", cfg.seed},
                 {"kinds", kinds_json(cfg.kinds)},
                 {"stitch", experiment_json(cfg.stitch)},
                 {"ablation_counts", cfg.ablation_counts},
                 {"qkv",
                  {{"base", qkv_base},
                   {"kinds", kinds_json(cfg.qkv.kinds)},
                   {"noise_family", cfg.qkv.noise_family},
                   {"noise_seed", cfg.qkv.noise_seed},
                   {"encoder", cfg.qkv.encoder},
                   {"decoder", cfg.qkv.decoder},
                   {"finetune", train_json(cfg.qkv.finetune)}}},
                 {"invariance",
                  {{"trials", o.trials},
                   {"tol_eq", o.tol_eq},
                   {"tol_neq", o.tol_neq},
                   {"tol_manifold", o.tol_manifold},
                   {"samples", o.samples},
                   {"anchors", o.anchors},
                   {"dim", o.dim},
                   {"roll_points", o.roll_points},
                   {"roll_anchors", o.roll_anchors}}},
                 {"geodesic",
                  {{"n", cfg.geodesic.roll.n},
                   {"noise", cfg.geodesic.roll.noise},
                   {"height", cfg.geodesic.roll.height},
                   {"k", cfg.geodesic.k},
                   {"anchors", cfg.geodesic.anchors}}},
                 {"similarity", {{"first", cfg.similarity.first}, {"second", cfg.similarity.second}}}});
}

} // namespace relrep
