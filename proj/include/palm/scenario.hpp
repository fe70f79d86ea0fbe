#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "palm/models.hpp"
#include "palm/types.hpp"

namespace palm::scenario {

struct ScenarioConfig {
    std::array<StateVec, 2> initial_states{StateVec(-1700.0, 0.0, 1000.0, -50.0),
                                           StateVec(-1700.0, 0.0, -1000.0, 50.0)};
    /// +1 counter-clockwise, -1 clockwise, for the first turn; the last turn
    /// uses the same sense so the targets separate again.
    std::array<double, 2> turn_sense{1.0, -1.0};
    double turn_rate_deg = 3.0;
    double segment_seconds = 30.0;
    double scan_interval = 1.0;
    int scan_count = 91;
    int init_scans = 10;
};

/// truth[target][scan - 1]
using Truth = std::vector<std::vector<StateVec>>;

struct Scan {
    int index = 0;
    double time = 0.0;
    std::vector<MeasVec> measurements;
    /// Target id per measurement, -1 for clutter.
    std::vector<int> truth_assoc;
};

/// Noise-free state of one target at time t (seconds since scan 0).
StateVec truth_state(const ScenarioConfig& cfg, int target, double t);

Truth generate_truth(const ScenarioConfig& cfg);

/// Positions of all targets at a scan (1-based).
std::vector<MeasVec> truth_positions(const Truth& truth, int scan);

/// Detections with P^D (always during init scans), Gaussian noise, Poisson
/// clutter uniform over the field of view, order shuffled.
std::vector<Scan> generate_measurements(const Truth& truth, const ScenarioConfig& cfg,
                                        const models::MeasurementModel& sensor, std::mt19937_64& rng);

/// splitmix64 finalizer over (seed, index); used to derive per-run seeds.
std::uint64_t hash64(std::uint64_t seed, std::uint64_t index);

void write_truth_csv(const std::string& path, const Truth& truth, double scan_interval);
Truth read_truth_csv(const std::string& path);

void write_scans_csv(const std::string& path, const std::vector<Scan>& scans);
/// Scans without rows are restored as empty scans up to scan_count.
std::vector<Scan> read_scans_csv(const std::string& path, int scan_count, double scan_interval);

}  // namespace palm::scenario
