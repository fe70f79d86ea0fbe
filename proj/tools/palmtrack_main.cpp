#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "palmtrack.h"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

int exit_code(pt_status status) {
    if (status == PT_OK) return 0;
    if (status == PT_ERR_CONFIG || status == PT_ERR_INVALID_ARGUMENT) return kExitConfig;
    return kExitRuntime;
}

int fail(pt_status status, const char* what) {
    std::fprintf(stderr, "palmtrack: %s: %s (%s)\n", what, pt_last_error(), pt_status_name(status));
    return exit_code(status);
}

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> runs;
    std::optional<int> workers;
    std::optional<std::string> out;
    std::optional<std::string> filter;
    std::optional<std::string> extractor;
    std::string scans;
    std::string truth;
};

class Config {
public:
    Config() {
        if (pt_config_create(&cfg_) != PT_OK) cfg_ = nullptr;
    }
    ~Config() { pt_config_destroy(cfg_); }
    Config(const Config&) = delete;
    Config& operator=(const Config&) = delete;

    pt_config* get() const { return cfg_; }

private:
    pt_config* cfg_ = nullptr;
};

// Config file first, then command-line overrides, then validation.
pt_status build_config(const Options& o, pt_config* cfg) {
    if (!cfg) return PT_ERR_RUNTIME;
    pt_status st = PT_OK;
    if (!o.config.empty() && (st = pt_config_load_file(cfg, o.config.c_str())) != PT_OK) return st;
    auto set = [&](const char* key, const std::string& value) {
        if (st == PT_OK) st = pt_config_set(cfg, key, value.c_str());
    };
    if (o.seed) set("seed", std::to_string(*o.seed));
    if (o.runs) set("runs", std::to_string(*o.runs));
    if (o.workers) set("workers", std::to_string(*o.workers));
    if (o.out) set("out", *o.out);
    if (o.filter) set("filter", *o.filter);
    if (o.extractor) set("extractor", *o.extractor);
    if (st != PT_OK) return st;
    return pt_config_validate(cfg);
}

std::string read_report(const char* dir, pt_status& st) {
    size_t needed = 0;
    st = pt_report(dir, nullptr, 0, &needed);
    if (st != PT_OK) return {};
    std::string text(needed, '\0');
    st = pt_report(dir, text.data(), text.size(), &needed);
    text.resize(needed > 0 ? needed - 1 : 0);
    return text;
}

const char* out_arg(const Options& o) { return o.out ? o.out->c_str() : nullptr; }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-target tracking with Gaussian-mixture and particle PHD filters"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", pt_version());

    Options o;
    app.add_option("--config", o.config, "key = value config file")->check(CLI::ExistingFile);
    app.add_option("--seed", o.seed, "master seed");
    app.add_option("--runs", o.runs, "Monte Carlo runs per sweep cell")->check(CLI::PositiveNumber);
    app.add_option("--workers", o.workers, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--out", o.out, "output directory (input directory for report)");
    app.add_option("--filter", o.filter, "PHD filter")->check(CLI::IsMember({"gm", "smc"}));
    app.add_option("--extractor", o.extractor, "state extractor")->check(CLI::IsMember({"baseline", "palm"}));

    auto* simulate = app.add_subcommand("simulate", "write truth.csv and scans.csv for one run");
    auto* track = app.add_subcommand("track", "run a filter over a scan file");
    track->add_option("--scans", o.scans, "scan CSV written by simulate")->required()->check(CLI::ExistingFile);
    track->add_option("--truth", o.truth, "truth CSV (default: regenerate from config)")->check(CLI::ExistingFile);
    auto* mc = app.add_subcommand("mc", "Monte Carlo sweep");
    auto* report = app.add_subcommand("report", "summarize a Monte Carlo output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    if (report->parsed()) {
        pt_status st = PT_OK;
        const std::string text = read_report(o.out ? o.out->c_str() : "out", st);
        if (st != PT_OK) return fail(st, "report");
        std::fputs(text.c_str(), stdout);
        return 0;
    }

    Config cfg;
    pt_status st = build_config(o, cfg.get());
    if (st != PT_OK) return fail(st, "config");

    if (simulate->parsed()) {
        st = pt_simulate(cfg.get(), out_arg(o));
        if (st != PT_OK) return fail(st, "simulate");
    } else if (track->parsed()) {
        st = pt_track(cfg.get(), o.scans.c_str(), o.truth.empty() ? nullptr : o.truth.c_str(), out_arg(o));
        if (st != PT_OK) return fail(st, "track");
    } else if (mc->parsed()) {
        st = pt_monte_carlo(cfg.get(), out_arg(o), nullptr);
        if (st != PT_OK) return fail(st, "mc");
        size_t needed = 0;
        std::vector<char> buf;
        // Echo the summary of what was just written.
        std::string dir = o.out ? *o.out : std::string();
        if (dir.empty()) {
            st = pt_config_get(cfg.get(), "out", nullptr, 0, &needed);
            if (st != PT_OK) return fail(st, "mc");
            buf.resize(needed);
            st = pt_config_get(cfg.get(), "out", buf.data(), buf.size(), &needed);
            if (st != PT_OK) return fail(st, "mc");
            dir = buf.data();
        }
        const std::string text = read_report(dir.c_str(), st);
        if (st != PT_OK) return fail(st, "report");
        std::fputs(text.c_str(), stdout);
    }
    return 0;
}
