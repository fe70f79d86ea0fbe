#include "palm/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>

#include "palm/error.hpp"
#include "palm/format.hpp"

namespace palm::scenario {

namespace {

// Advance a constant-speed state by tau seconds at signed turn rate omega.
StateVec advance(const StateVec& s, double omega, double tau) {
    if (tau <= 0.0) return s;
    const double vx = s(1);
    const double vy = s(3);
    if (omega == 0.0) return StateVec(s(0) + vx * tau, vx, s(2) + vy * tau, vy);
    const double speed = std::hypot(vx, vy);
    const double h0 = std::atan2(vy, vx);
    const double h = h0 + omega * tau;
    const double r = speed / omega;
    return StateVec(s(0) + r * (std::sin(h) - std::sin(h0)), speed * std::cos(h),
                    s(2) - r * (std::cos(h) - std::cos(h0)), speed * std::sin(h));
}

std::string fmt(double v) { return format_double(v); }

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    return in;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    return out;
}

double parse_double(const std::string& s, const std::string& path) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorCode::IoError, "bad number '" + s + "' in " + path);
    }
}

}  // namespace

StateVec truth_state(const ScenarioConfig& cfg, int target, double t) {
    const double omega = cfg.turn_sense.at(static_cast<std::size_t>(target)) * cfg.turn_rate_deg *
                         std::numbers::pi / 180.0;
    const double seg = cfg.segment_seconds;
    StateVec s = cfg.initial_states.at(static_cast<std::size_t>(target));
    s = advance(s, omega, std::min(t, seg));
    s = advance(s, 0.0, std::min(t, 2.0 * seg) - seg);
    s = advance(s, omega, std::min(t, 3.0 * seg) - 2.0 * seg);
    s = advance(s, 0.0, t - 3.0 * seg);
    return s;
}

Truth generate_truth(const ScenarioConfig& cfg) {
    Truth truth(cfg.initial_states.size());
    for (std::size_t i = 0; i < truth.size(); ++i) {
        truth[i].reserve(static_cast<std::size_t>(cfg.scan_count));
        for (int k = 1; k <= cfg.scan_count; ++k) {
            truth[i].push_back(truth_state(cfg, static_cast<int>(i), k * cfg.scan_interval));
        }
    }
    return truth;
}

std::vector<MeasVec> truth_positions(const Truth& truth, int scan) {
    std::vector<MeasVec> out;
    for (const auto& track : truth) out.push_back(position_of(track.at(static_cast<std::size_t>(scan - 1))));
    return out;
}

std::vector<Scan> generate_measurements(const Truth& truth, const ScenarioConfig& cfg,
                                        const models::MeasurementModel& sensor, std::mt19937_64& rng) {
    std::normal_distribution<double> noise(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> fov(-sensor.fov_half_width, sensor.fov_half_width);
    std::poisson_distribution<int> clutter_count(sensor.clutter_mean > 0.0 ? sensor.clutter_mean : 1.0);
    const Eigen::LLT<MeasCov> chol(sensor.noise_cov);
    const MeasCov l = chol.matrixL();

    const int scans = truth.empty() ? 0 : static_cast<int>(truth.front().size());
    std::vector<Scan> out;
    out.reserve(static_cast<std::size_t>(scans));
    for (int k = 1; k <= scans; ++k) {
        Scan scan;
        scan.index = k;
        scan.time = k * cfg.scan_interval;
        for (std::size_t t = 0; t < truth.size(); ++t) {
            const bool detected = k <= cfg.init_scans || unit(rng) < sensor.detect_prob;
            if (!detected) continue;
            const MeasVec w(noise(rng), noise(rng));
            scan.measurements.push_back(sensor.observation * truth[t][static_cast<std::size_t>(k - 1)] + l * w);
            scan.truth_assoc.push_back(static_cast<int>(t));
        }
        const int n_clutter = sensor.clutter_mean > 0.0 ? clutter_count(rng) : 0;
        for (int c = 0; c < n_clutter; ++c) {
            const double x = fov(rng);
            const double y = fov(rng);
            scan.measurements.emplace_back(x, y);
            scan.truth_assoc.push_back(-1);
        }
        std::vector<std::size_t> order(scan.measurements.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), rng);
        Scan shuffled;
        shuffled.index = scan.index;
        shuffled.time = scan.time;
        for (std::size_t i : order) {
            shuffled.measurements.push_back(scan.measurements[i]);
            shuffled.truth_assoc.push_back(scan.truth_assoc[i]);
        }
        out.push_back(std::move(shuffled));
    }
    return out;
}

std::uint64_t hash64(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

void write_truth_csv(const std::string& path, const Truth& truth, double scan_interval) {
    auto out = open_out(path);
    out << "scan,time,target_id,x,vx,y,vy\n";
    const std::size_t scans = truth.empty() ? 0 : truth.front().size();
    for (std::size_t k = 0; k < scans; ++k) {
        for (std::size_t t = 0; t < truth.size(); ++t) {
            const StateVec& s = truth[t][k];
            out << k + 1 << ',' << fmt(static_cast<double>(k + 1) * scan_interval) << ',' << t << ','
                << fmt(s(0)) << ',' << fmt(s(1)) << ',' << fmt(s(2)) << ',' << fmt(s(3)) << '\n';
        }
    }
}

Truth read_truth_csv(const std::string& path) {
    auto in = open_in(path);
    std::string line;
    std::getline(in, line);
    std::map<int, std::map<int, StateVec>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != 7) throw Error(ErrorCode::IoError, "expected 7 columns in " + path);
        const int scan = static_cast<int>(parse_double(cells[0], path));
        const int target = static_cast<int>(parse_double(cells[2], path));
        rows[target][scan] = StateVec(parse_double(cells[3], path), parse_double(cells[4], path),
                                      parse_double(cells[5], path), parse_double(cells[6], path));
    }
    Truth truth;
    for (const auto& [target, by_scan] : rows) {
        std::vector<StateVec> track;
        int expect = 1;
        for (const auto& [scan, s] : by_scan) {
            if (scan != expect++) throw Error(ErrorCode::IoError, "non-contiguous scans in " + path);
            track.push_back(s);
        }
        truth.push_back(std::move(track));
    }
    return truth;
}

void write_scans_csv(const std::string& path, const std::vector<Scan>& scans) {
    auto out = open_out(path);
    out << "scan,target_id,x,y\n";
    for (const auto& scan : scans) {
        for (std::size_t i = 0; i < scan.measurements.size(); ++i) {
            const int assoc = i < scan.truth_assoc.size() ? scan.truth_assoc[i] : -1;
            out << scan.index << ',' << assoc << ',' << fmt(scan.measurements[i](0)) << ','
                << fmt(scan.measurements[i](1)) << '\n';
        }
    }
}

std::vector<Scan> read_scans_csv(const std::string& path, int scan_count, double scan_interval) {
    std::vector<Scan> scans(static_cast<std::size_t>(scan_count));
    for (int k = 0; k < scan_count; ++k) {
        scans[static_cast<std::size_t>(k)].index = k + 1;
        scans[static_cast<std::size_t>(k)].time = (k + 1) * scan_interval;
    }
    auto in = open_in(path);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != 4) throw Error(ErrorCode::IoError, "expected 4 columns in " + path);
        const int scan = static_cast<int>(parse_double(cells[0], path));
        if (scan < 1 || scan > scan_count) throw Error(ErrorCode::IoError, "scan index out of range in " + path);
        auto& s = scans[static_cast<std::size_t>(scan - 1)];
        s.truth_assoc.push_back(static_cast<int>(parse_double(cells[1], path)));
        s.measurements.emplace_back(parse_double(cells[2], path), parse_double(cells[3], path));
    }
    return scans;
}

}  // namespace palm::scenario
