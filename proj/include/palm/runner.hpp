#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "palm/config.hpp"
#include "palm/eval.hpp"
#include "palm/palm_extract.hpp"
#include "palm/scenario.hpp"

namespace palm::runner {

using config::RunConfig;

struct ScenarioData {
    scenario::Truth truth;
    std::vector<scenario::Scan> scans;
};

/// Per-run seed derived from the master seed.
std::uint64_t run_seed(const RunConfig& cfg, std::size_t run_index);

ScenarioData simulate(const RunConfig& cfg, double pd, double clutter, std::uint64_t seed);

struct ScanLog {
    int scan = 0;
    std::string extractor;
    std::vector<StateVec> estimates;
    /// Present for the Palm extractor only.
    bool has_palm = false;
    extract::ExtractionResult palm;
};

struct TrackingOptions {
    bool keep_logs = false;
    std::ostream* gm_snapshots = nullptr;
    std::ostream* particle_dump = nullptr;
};

struct TrackingResult {
    std::map<std::string, eval::RunRecord> records;
    std::vector<ScanLog> logs;
};

/// Runs the configured filter over all scans and scores every extractor.
TrackingResult run_tracking(const RunConfig& cfg, const models::MeasurementModel& sensor, const scenario::Truth& truth,
                            const std::vector<scenario::Scan>& scans, std::uint64_t seed,
                            const TrackingOptions& options = {});

struct CellResult {
    double detect_prob = 0.0;
    double clutter_mean = 0.0;
    std::map<std::string, std::vector<eval::RunRecord>> records;
    std::map<std::string, eval::Aggregate> aggregates;
};

struct McResult {
    std::string config_hash;
    std::vector<std::uint64_t> seeds;
    std::vector<CellResult> cells;
};

/// Fans runs out over cfg.workers threads; results are ordered by run index.
McResult run_monte_carlo(const RunConfig& cfg);

/// Writes truth.csv and scans.csv for run 0 of the first sweep cell.
void cmd_simulate(const RunConfig& cfg, const std::string& out_dir);

/// Tracks a scan file. An empty truth path regenerates the noise-free truth
/// from the config.
TrackingResult cmd_track(const RunConfig& cfg, const std::string& scans_csv, const std::string& truth_csv,
                         const std::string& out_dir);

/// Writes mospa.csv, runs.csv, summary.json and the run_meta.json sidecar.
McResult cmd_mc(const RunConfig& cfg, const std::string& out_dir);

/// Plain-text table built from a directory written by cmd_mc.
std::string cmd_report(const std::string& dir);

}  // namespace palm::runner
