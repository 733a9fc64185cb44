#include "relrep/relrep.h"

#include <cstring>
#include <memory>
#include <new>
#include <string>

#include "relrep/commands.hpp"

struct relrep_matrix {
    relrep::Matrix data;
};

struct relrep_config {
    relrep::ExperimentConfig cfg;
};

struct relrep_artifacts {
    relrep::Artifacts artifacts;
};

namespace {

thread_local std::string last_error;

struct InvalidArgument : std::runtime_error {
    using std::runtime_error::runtime_error;
};

template <class T>
void need(const T* p, const char* what) {
    if (p == nullptr) throw InvalidArgument(std::string(what) + " is null");
}

/// Runs fn and converts any exception into a status plus thread-local message.
template <class F>
relrep_status call(F&& fn) noexcept {
    try {
        fn();
        last_error.clear();
        return RELREP_OK;
    } catch (const InvalidArgument& e) {
        last_error = e.what();
        return RELREP_INVALID_ARGUMENT;
    } catch (const relrep::Error& e) {
        last_error = e.what();
        return static_cast<relrep_status>(static_cast<int>(e.code()));
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return RELREP_INTERNAL;
    } catch (const std::exception& e) {
        last_error = std::string("internal: ") + e.what();
        return RELREP_INTERNAL;
    } catch (...) {
        last_error = "internal: unknown exception";
        return RELREP_INTERNAL;
    }
}

} // namespace

extern "C" {

const char* relrep_version(void) { return "1.0.0"; }

const char* relrep_status_name(relrep_status status) {
    switch (status) {
    case RELREP_OK: return "Ok";
    case RELREP_INVALID_ARGUMENT: return "InvalidArgument";
    case RELREP_INTERNAL: return "Internal";
    default: break;
    }
    const int code = static_cast<int>(status);
    if (code >= 1 && code <= 23) return relrep::error_code_name(static_cast<relrep::ErrorCode>(code)).data();
    return "Unknown";
}

const char* relrep_last_error(void) { return last_error.c_str(); }

relrep_status relrep_matrix_create(size_t rows, size_t cols, const double* data, relrep_matrix** out) {
    return call([&] {
        need(out, "out");
        need(data, "data");
        relrep::require(rows > 0 && cols > 0, relrep::ErrorCode::BadShape, "matrix must be non-empty");
        auto m = std::make_unique<relrep_matrix>();
        m->data = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            data, static_cast<relrep::Index>(rows), static_cast<relrep::Index>(cols));
        *out = m.release();
    });
}

void relrep_matrix_destroy(relrep_matrix* m) { delete m; }

size_t relrep_matrix_rows(const relrep_matrix* m) { return m ? static_cast<size_t>(m->data.rows()) : 0; }

size_t relrep_matrix_cols(const relrep_matrix* m) { return m ? static_cast<size_t>(m->data.cols()) : 0; }

relrep_status relrep_matrix_copy(const relrep_matrix* m, double* out) {
    return call([&] {
        need(m, "matrix");
        need(out, "out");
        Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(out, m->data.rows(),
                                                                                          m->data.cols()) = m->data;
    });
}

relrep_status relrep_matrix_load_csv(const char* path, relrep_matrix** out) {
    return call([&] {
        need(path, "path");
        need(out, "out");
        auto m = std::make_unique<relrep_matrix>();
        m->data = relrep::load_matrix(path).data();
        *out = m.release();
    });
}

relrep_status relrep_matrix_save_csv(const relrep_matrix* m, const char* path) {
    return call([&] {
        need(m, "matrix");
        need(path, "path");
        relrep::save_matrix(m->data, path);
    });
}

relrep_status relrep_score(const char* kind, const double* u, const double* v, size_t dim, double* out) {
    return call([&] {
        need(kind, "kind");
        need(u, "u");
        need(v, "v");
        need(out, "out");
        *out = relrep::score(relrep::parse_kind(kind), std::span<const double>(u, dim), std::span<const double>(v, dim));
    });
}

relrep_status relrep_relative_projection(const relrep_matrix* z, const relrep_matrix* anchors, const char* kind,
                                         relrep_matrix** out) {
    return call([&] {
        need(z, "z");
        need(anchors, "anchors");
        need(kind, "kind");
        need(out, "out");
        const relrep::LatentMatrix a(anchors->data);
        std::vector<std::size_t> ids(static_cast<std::size_t>(a.rows()));
        for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
        auto m = std::make_unique<relrep_matrix>();
        m->data = relrep::relative_projection(relrep::LatentMatrix(z->data), relrep::AnchorSet{ids, a, 0},
                                              relrep::parse_kind(kind))
                      .data;
        *out = m.release();
    });
}

relrep_status relrep_linear_cka(const relrep_matrix* x, const relrep_matrix* y, double* out) {
    return call([&] {
        need(x, "x");
        need(y, "y");
        need(out, "out");
        *out = relrep::linear_cka(x->data, y->data);
    });
}

relrep_status relrep_config_default(relrep_config** out) {
    return call([&] {
        need(out, "out");
        *out = new relrep_config{relrep::default_config()};
    });
}

relrep_status relrep_config_load(const char* path, relrep_config** out) {
    return call([&] {
        need(path, "path");
        need(out, "out");
        *out = new relrep_config{relrep::load_config(path)};
    });
}

relrep_status relrep_config_parse(const char* json, relrep_config** out) {
    return call([&] {
        need(json, "json");
        need(out, "out");
        *out = new relrep_config{relrep::parse_config(json)};
    });
}

void relrep_config_destroy(relrep_config* cfg) { delete cfg; }

relrep_status relrep_config_to_json(const relrep_config* cfg, char** out) {
    return call([&] {
        need(cfg, "config");
        need(out, "out");
        const std::string text = relrep::config_to_json(cfg->cfg);
        char* buf = new char[text.size() + 1];
        std::memcpy(buf, text.c_str(), text.size() + 1);
        *out = buf;
    });
}

void relrep_string_free(char* s) { delete[] s; }

relrep_status relrep_config_set_seed(relrep_config* cfg, uint64_t seed) {
    return call([&] {
        need(cfg, "config");
        cfg->cfg.apply_seed(seed);
    });
}

relrep_status relrep_config_set_kinds(relrep_config* cfg, const char* comma_separated) {
    return call([&] {
        need(cfg, "config");
        need(comma_separated, "kinds");
        relrep::override_kinds(cfg->cfg, relrep::parse_kind_list(comma_separated));
    });
}

relrep_status relrep_config_set_anchor_count(relrep_config* cfg, size_t count) {
    return call([&] {
        need(cfg, "config");
        relrep::override_anchor_count(cfg->cfg, count);
    });
}

relrep_status relrep_config_set_aggregator(relrep_config* cfg, const char* name) {
    return call([&] {
        need(cfg, "config");
        need(name, "name");
        relrep::override_aggregator(cfg->cfg, relrep::parse_aggregator(name));
    });
}

relrep_status relrep_config_set_jobs(relrep_config* cfg, int jobs) {
    return call([&] {
        need(cfg, "config");
        relrep::override_jobs(cfg->cfg, jobs);
    });
}

size_t relrep_command_count(void) { return relrep::command_names().size(); }

const char* relrep_command_name(size_t i) {
    const auto& names = relrep::command_names();
    return i < names.size() ? names[i].c_str() : nullptr;
}

relrep_status relrep_run(const char* command, const relrep_config* cfg, const relrep_matrix* const* inputs,
                         size_t input_count, relrep_artifacts** out) {
    return call([&] {
        need(command, "command");
        need(cfg, "config");
        need(out, "out");
        if (input_count > 0) need(inputs, "inputs");
        std::vector<relrep::LatentMatrix> latents;
        for (size_t i = 0; i < input_count; ++i) {
            need(inputs[i], "input matrix");
            latents.emplace_back(inputs[i]->data);
        }
        auto a = std::make_unique<relrep_artifacts>();
        a->artifacts = relrep::run_command(command, cfg->cfg, latents);
        *out = a.release();
    });
}

size_t relrep_artifacts_count(const relrep_artifacts* a) { return a ? a->artifacts.files.size() : 0; }

const char* relrep_artifacts_name(const relrep_artifacts* a, size_t i) {
    if (!a || i >= a->artifacts.files.size()) return nullptr;
    return a->artifacts.files[i].first.c_str();
}

const char* relrep_artifacts_data(const relrep_artifacts* a, size_t i, size_t* size) {
    if (!a || i >= a->artifacts.files.size()) {
        if (size) *size = 0;
        return nullptr;
    }
    const auto& content = a->artifacts.files[i].second;
    if (size) *size = content.size();
    return content.data();
}

relrep_status relrep_artifacts_write(const relrep_artifacts* a, const char* dir) {
    return call([&] {
        need(a, "artifacts");
        need(dir, "dir");
        relrep::write_artifacts(a->artifacts, dir);
    });
}

void relrep_artifacts_destroy(relrep_artifacts* a) { delete a; }

} // extern "C"
