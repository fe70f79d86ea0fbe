#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "palm/gm_phd.hpp"
#include "palm/models.hpp"
#include "palm/palm_extract.hpp"
#include "palm/scenario.hpp"
#include "palm/smc_phd.hpp"

namespace palm::config {

/// Every setting of a simulation or Monte Carlo sweep. Parsed from flat
/// `key = value` text; '#' starts a comment. Defaults reproduce the
/// two-target crossing scenario at P^D = 0.98 with 10 false alarms per scan.
struct RunConfig {
    std::uint64_t seed = 1;
    int runs = 200;
    int workers = 1;
    std::string out_dir = "out";

    std::string filter = "gm";         // gm | smc
    std::string extractor = "both";    // baseline | palm | both
    std::string cardinality = "rounded_expected";  // rounded_expected | map

    double detect_prob = 0.98;
    double clutter_mean = 10.0;
    std::vector<double> pd_list;       // empty: {detect_prob}
    std::vector<double> clutter_list;  // empty: {clutter_mean}

    double sigma_p = 5.0;
    double sigma_m = 25.0;
    double fov_half_width = 2000.0;
    double clutter_floor = 1e-15;
    double scan_interval = 1.0;
    double turn_rate_deg = 3.0;
    double segment_seconds = 30.0;
    int scan_count = 91;
    int init_scans = 10;
    StateVec target1 = StateVec(-1700.0, 0.0, 1000.0, -50.0);
    StateVec target2 = StateVec(-1700.0, 0.0, -1000.0, 50.0);

    double prune_threshold = 1e-5;
    double merge_threshold = 4.0;
    int max_components = 500;
    double extract_threshold = 0.5;
    int history_scans = 5;

    int particles_per_target = 20000;
    int particle_count = 40000;
    double gate_sigmas = 3.0;

    double ospa_order = 2.0;
    double ospa_cutoff = 200.0;
    int metric_first_scan = 11;

    /// Particle dump decimation for `track` (0 disables the dump).
    int particle_dump_stride = 40;
    bool gm_snapshots = false;

    /// Throws InvalidConfig for unknown keys or malformed values.
    void set(const std::string& key, const std::string& value);
    /// Throws InvalidConfig when values are out of range.
    /// Value of a key in the same syntax `set` accepts.
    [[nodiscard]] std::string get(const std::string& key) const;
    void validate() const;

    [[nodiscard]] std::vector<double> detect_probs() const;
    [[nodiscard]] std::vector<double> clutter_means() const;
    [[nodiscard]] std::vector<std::string> extractors() const;

    /// Canonical `key = value` text of every setting that affects results
    /// (out_dir and workers excluded).
    [[nodiscard]] std::string canonical_text() const;
    /// FNV-1a 64 of canonical_text().
    [[nodiscard]] std::uint64_t hash() const;
    [[nodiscard]] std::string hash_hex() const;

    [[nodiscard]] scenario::ScenarioConfig scenario() const;
    [[nodiscard]] models::MotionModel motion() const;
    [[nodiscard]] models::MeasurementModel sensor(double pd, double clutter) const;
    [[nodiscard]] gm::GmParams gm_params() const;
    [[nodiscard]] smc::SmcParams smc_params() const;
    [[nodiscard]] extract::PalmParams palm_params() const;
};

/// Applies `key = value` lines on top of cfg; `#` starts a comment.
void apply_config(RunConfig& cfg, const std::string& text);
RunConfig parse_config(const std::string& text);
std::string read_config_file(const std::string& path);
RunConfig load_config_file(const std::string& path);

std::uint64_t fnv1a64(const std::string& data);

}  // namespace palm::config
