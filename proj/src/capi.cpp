#include "palmtrack.h"

#include <algorithm>
#include <cstring>
#include <exception>
#include <new>
#include <string>
#include <vector>

#include "palm/error.hpp"
#include "palm/eval.hpp"
#include "palm/runner.hpp"

struct pt_config {
    palm::config::RunConfig cfg;
};

struct pt_mc_result {
    palm::runner::McResult mc;
};

namespace {

thread_local std::string last_error;

pt_status map_code(palm::ErrorCode code) {
    switch (code) {
        case palm::ErrorCode::InvalidConfig:
            return PT_ERR_CONFIG;
        case palm::ErrorCode::IoError:
            return PT_ERR_IO;
        case palm::ErrorCode::InvalidArgument:
            return PT_ERR_INVALID_ARGUMENT;
        default:
            return PT_ERR_NUMERIC;
    }
}

template <class Fn>
pt_status guarded(Fn&& fn) {
    try {
        fn();
        last_error.clear();
        return PT_OK;
    } catch (const palm::Error& e) {
        last_error = e.what();
        return map_code(e.code());
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return PT_ERR_RUNTIME;
    } catch (const std::exception& e) {
        last_error = e.what();
        return PT_ERR_RUNTIME;
    } catch (...) {
        last_error = "unknown failure";
        return PT_ERR_RUNTIME;
    }
}

pt_status null_argument(const char* name) {
    last_error = std::string("null argument: ") + name;
    return PT_ERR_INVALID_ARGUMENT;
}

std::string out_or_default(const pt_config* cfg, const char* out_dir) {
    return out_dir ? std::string(out_dir) : cfg->cfg.out_dir;
}

pt_status copy_text(const std::string& text, char* buf, size_t cap, size_t* needed) {
    if (needed) *needed = text.size() + 1;
    if (cap == 0) return PT_OK;
    if (!buf) return null_argument("buf");
    const size_t n = std::min(cap - 1, text.size());
    std::memcpy(buf, text.data(), n);
    buf[n] = '\0';
    return PT_OK;
}

const palm::eval::Aggregate* find_aggregate(const pt_mc_result* result, size_t cell, const char* extractor) {
    if (!result || !extractor || cell >= result->mc.cells.size()) return nullptr;
    const auto& aggs = result->mc.cells[cell].aggregates;
    const auto it = aggs.find(extractor);
    return it == aggs.end() ? nullptr : &it->second;
}

}  // namespace

extern "C" {

const char* pt_last_error(void) { return last_error.c_str(); }

const char* pt_status_name(pt_status status) {
    switch (status) {
        case PT_OK:
            return "ok";
        case PT_ERR_INVALID_ARGUMENT:
            return "invalid argument";
        case PT_ERR_CONFIG:
            return "config error";
        case PT_ERR_IO:
            return "i/o error";
        case PT_ERR_NUMERIC:
            return "numeric error";
        case PT_ERR_RUNTIME:
            return "runtime error";
    }
    return "unknown status";
}

const char* pt_version(void) { return "0.1.0"; }

pt_status pt_config_create(pt_config** out) {
    if (!out) return null_argument("out");
    return guarded([&] { *out = new pt_config(); });
}

void pt_config_destroy(pt_config* cfg) { delete cfg; }

pt_status pt_config_load_file(pt_config* cfg, const char* path) {
    if (!cfg) return null_argument("cfg");
    if (!path) return null_argument("path");
    return guarded([&] {
        // Apply on a copy so a malformed file leaves cfg untouched.
        auto merged = cfg->cfg;
        palm::config::apply_config(merged, palm::config::read_config_file(path));
        cfg->cfg = std::move(merged);
    });
}

pt_status pt_config_set(pt_config* cfg, const char* key, const char* value) {
    if (!cfg) return null_argument("cfg");
    if (!key || !value) return null_argument("key/value");
    return guarded([&] { cfg->cfg.set(key, value); });
}

pt_status pt_config_validate(const pt_config* cfg) {
    if (!cfg) return null_argument("cfg");
    return guarded([&] { cfg->cfg.validate(); });
}

pt_status pt_config_hash(const pt_config* cfg, uint64_t* out) {
    if (!cfg) return null_argument("cfg");
    if (!out) return null_argument("out");
    return guarded([&] { *out = cfg->cfg.hash(); });
}

pt_status pt_config_get(const pt_config* cfg, const char* key, char* buf, size_t cap, size_t* needed) {
    if (!cfg) return null_argument("cfg");
    if (!key) return null_argument("key");
    pt_status status = PT_OK;
    const pt_status g = guarded([&] { status = copy_text(cfg->cfg.get(key), buf, cap, needed); });
    return g == PT_OK ? status : g;
}

pt_status pt_config_text(const pt_config* cfg, char* buf, size_t cap, size_t* needed) {
    if (!cfg) return null_argument("cfg");
    pt_status status = PT_OK;
    const pt_status g = guarded([&] { status = copy_text(cfg->cfg.canonical_text(), buf, cap, needed); });
    return g == PT_OK ? status : g;
}

pt_status pt_simulate(const pt_config* cfg, const char* out_dir) {
    if (!cfg) return null_argument("cfg");
    return guarded([&] { palm::runner::cmd_simulate(cfg->cfg, out_or_default(cfg, out_dir)); });
}

pt_status pt_track(const pt_config* cfg, const char* scans_csv, const char* truth_csv, const char* out_dir) {
    if (!cfg) return null_argument("cfg");
    if (!scans_csv) return null_argument("scans_csv");
    return guarded([&] {
        (void)palm::runner::cmd_track(cfg->cfg, scans_csv, truth_csv ? truth_csv : "", out_or_default(cfg, out_dir));
    });
}

pt_status pt_monte_carlo(const pt_config* cfg, const char* out_dir, pt_mc_result** out) {
    if (!cfg) return null_argument("cfg");
    return guarded([&] {
        auto mc = palm::runner::cmd_mc(cfg->cfg, out_or_default(cfg, out_dir));
        if (out) *out = new pt_mc_result{std::move(mc)};
    });
}

size_t pt_mc_result_cell_count(const pt_mc_result* result) { return result ? result->mc.cells.size() : 0; }

pt_status pt_mc_result_cell(const pt_mc_result* result, size_t cell, double* detect_prob, double* clutter_mean) {
    if (!result) return null_argument("result");
    if (cell >= result->mc.cells.size()) {
        last_error = "cell index out of range";
        return PT_ERR_INVALID_ARGUMENT;
    }
    if (detect_prob) *detect_prob = result->mc.cells[cell].detect_prob;
    if (clutter_mean) *clutter_mean = result->mc.cells[cell].clutter_mean;
    return PT_OK;
}

pt_status pt_mc_result_scenario_mospa(const pt_mc_result* result, size_t cell, const char* extractor, double* mean,
                                      double* stderr_out) {
    const auto* agg = find_aggregate(result, cell, extractor);
    if (!agg) {
        last_error = "no such cell or extractor";
        return PT_ERR_INVALID_ARGUMENT;
    }
    if (mean) *mean = agg->scenario_mospa;
    if (stderr_out) *stderr_out = agg->scenario_mospa_stderr;
    return PT_OK;
}

pt_status pt_mc_result_mean_tracks(const pt_mc_result* result, size_t cell, const char* extractor, double* buf,
                                   size_t cap, size_t* scans) {
    const auto* agg = find_aggregate(result, cell, extractor);
    if (!agg) {
        last_error = "no such cell or extractor";
        return PT_ERR_INVALID_ARGUMENT;
    }
    if (scans) *scans = agg->mean_tracks.size();
    if (cap > 0 && !buf) return null_argument("buf");
    for (size_t i = 0; i < cap && i < agg->mean_tracks.size(); ++i) buf[i] = agg->mean_tracks[i];
    return PT_OK;
}

void pt_mc_result_destroy(pt_mc_result* result) { delete result; }

pt_status pt_report(const char* dir, char* buf, size_t cap, size_t* needed) {
    if (!dir) return null_argument("dir");
    pt_status status = PT_OK;
    const pt_status g = guarded([&] { status = copy_text(palm::runner::cmd_report(dir), buf, cap, needed); });
    return g == PT_OK ? status : g;
}

pt_status pt_ospa(const double* truth_xy, size_t n_truth, const double* est_xy, size_t n_est, double order,
                  double cutoff, double* out) {
    if (!out) return null_argument("out");
    if ((n_truth && !truth_xy) || (n_est && !est_xy)) return null_argument("points");
    if (!(order >= 1.0) || !(cutoff > 0.0)) {
        last_error = "OSPA needs order >= 1 and cutoff > 0";
        return PT_ERR_INVALID_ARGUMENT;
    }
    return guarded([&] {
        std::vector<palm::MeasVec> t, e;
        for (size_t i = 0; i < n_truth; ++i) t.emplace_back(truth_xy[2 * i], truth_xy[2 * i + 1]);
        for (size_t i = 0; i < n_est; ++i) e.emplace_back(est_xy[2 * i], est_xy[2 * i + 1]);
        *out = palm::eval::ospa(t, e, {order, cutoff});
    });
}

}  // extern "C"
