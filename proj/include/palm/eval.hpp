#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "palm/types.hpp"

namespace palm::eval {

struct OspaParams {
    double order = 2.0;
    double cutoff = 200.0;
};

struct OspaResult {
    double total = 0.0;
    double localization = 0.0;
    double cardinality = 0.0;
};

/// Minimum-cost assignment of every row to a distinct column (rows <= cols).
/// Returns the column per row.
std::vector<std::size_t> min_cost_assignment(const std::vector<std::vector<double>>& cost);

OspaResult ospa_components(const std::vector<MeasVec>& truth, const std::vector<MeasVec>& est,
                           const OspaParams& params = {});

double ospa(const std::vector<MeasVec>& truth, const std::vector<MeasVec>& est, const OspaParams& params = {});

struct RunRecord {
    std::uint64_t seed = 0;
    std::string filter;
    std::string extractor;
    std::vector<int> truth_count;
    std::vector<int> estimated_count;
    std::vector<double> ospa;
    std::vector<double> ospa_localization;
    std::vector<double> ospa_cardinality;

    [[nodiscard]] std::size_t scan_count() const { return ospa.size(); }
    void push(int truth_n, int est_n, const OspaResult& r);
};

struct Aggregate {
    std::size_t runs = 0;
    std::vector<double> mospa;
    std::vector<double> mospa_stderr;
    std::vector<double> mean_tracks;
    std::vector<double> tracks_stderr;
    /// Mean over scans [first_scan, last] of each run's OSPA, then over runs.
    double scenario_mospa = 0.0;
    double scenario_mospa_stderr = 0.0;
    std::vector<double> run_scenario_mospa;
};

/// Scan-wise means and standard errors; first_scan is 1-based.
Aggregate aggregate(const std::vector<RunRecord>& records, int first_scan = 11);

struct PairedTest {
    double mean_difference = 0.0;
    double stderr = 0.0;
    /// mean - z * stderr
    double lower_bound = 0.0;
    bool significant = false;
};

/// One-sided paired test that a[i] - b[i] is positive on average.
PairedTest paired_greater(const std::vector<double>& a, const std::vector<double>& b, double z = 1.6448536269514722);

}  // namespace palm::eval
