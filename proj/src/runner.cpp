#include "palm/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "palm/error.hpp"
#include "palm/format.hpp"
#include "palm/gm_phd.hpp"
#include "palm/smc_phd.hpp"

namespace palm::runner {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string num(double v) { return format_double(v); }

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create directory " + dir + ": " + ec.message());
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    return out;
}

json state_json(const StateVec& s) { return json::array({s(0), s(1), s(2), s(3)}); }

json log_json(const ScanLog& log) {
    json j;
    j["scan"] = log.scan;
    j["extractor"] = log.extractor;
    j["estimates"] = json::array();
    for (const auto& e : log.estimates) j["estimates"].push_back(state_json(e));
    if (log.has_palm) {
        const auto& r = log.palm;
        j["cardinality"] = r.cardinality;
        j["posterior_mass"] = r.posterior_mass;
        j["degenerate_peak"] = r.degenerate_peak;
        j["peaks"] = json::array();
        j["alpha"] = json::array();
        j["cluster_sizes"] = json::array();
        for (const auto& s : r.steps) {
            j["peaks"].push_back(state_json(s.peak_state));
            j["alpha"].push_back(s.alpha);
            j["cluster_sizes"].push_back(s.cluster_size);
        }
        j["support_sizes"] = json::array();
        j["empty_support"] = json::array();
        for (const auto& t : r.tracks) {
            j["support_sizes"].push_back(t.cluster_members.size());
            j["empty_support"].push_back(t.empty_support);
        }
    }
    return j;
}

// Estimates during initialization: the associated measurements on scan 1,
// then the two-point Kalman filters.
std::vector<StateVec> init_estimates(const std::vector<scenario::Scan>& scans, int k,
                                     const models::MotionModel& motion, const models::MeasurementModel& sensor,
                                     int targets, int history) {
    if (k == 1) {
        std::vector<StateVec> out;
        const auto& s = scans.front();
        for (std::size_t i = 0; i < s.measurements.size(); ++i) {
            if (i < s.truth_assoc.size() && s.truth_assoc[i] >= 0) {
                out.emplace_back(s.measurements[i](0), 0.0, s.measurements[i](1), 0.0);
            }
        }
        return out;
    }
    const std::vector<scenario::Scan> first(scans.begin(), scans.begin() + k);
    std::vector<StateVec> out;
    for (const auto& c : gm::init_two_point(first, motion, sensor, targets, history).components) out.push_back(c.mean);
    return out;
}

std::vector<MeasVec> positions(const std::vector<StateVec>& states) {
    std::vector<MeasVec> out;
    out.reserve(states.size());
    for (const auto& s : states) out.push_back(position_of(s));
    return out;
}

}  // namespace

std::uint64_t run_seed(const RunConfig& cfg, std::size_t run_index) { return scenario::hash64(cfg.seed, run_index); }

ScenarioData simulate(const RunConfig& cfg, double pd, double clutter, std::uint64_t seed) {
    ScenarioData data;
    const auto sc = cfg.scenario();
    data.truth = scenario::generate_truth(sc);
    std::mt19937_64 rng(scenario::hash64(seed, 0));
    data.scans = scenario::generate_measurements(data.truth, sc, cfg.sensor(pd, clutter), rng);
    return data;
}

TrackingResult run_tracking(const RunConfig& cfg, const models::MeasurementModel& sensor, const scenario::Truth& truth,
                            const std::vector<scenario::Scan>& scans, std::uint64_t seed,
                            const TrackingOptions& options) {
    if (static_cast<int>(scans.size()) != cfg.scan_count) {
        throw Error(ErrorCode::MismatchedScanCounts, "scan list length does not match scan_count");
    }
    for (const auto& t : truth) {
        if (static_cast<int>(t.size()) != cfg.scan_count) {
            throw Error(ErrorCode::MismatchedScanCounts, "truth length does not match scan_count");
        }
    }
    const auto motion = cfg.motion();
    const auto gm_params = cfg.gm_params();
    const auto palm_params = cfg.palm_params();
    const eval::OspaParams ospa_params{cfg.ospa_order, cfg.ospa_cutoff};
    const auto extractors = cfg.extractors();
    const int targets = static_cast<int>(truth.size());

    TrackingResult result;
    for (const auto& name : extractors) {
        auto& rec = result.records[name];
        rec.seed = seed;
        rec.filter = cfg.filter;
        rec.extractor = name;
    }
    auto score = [&](const std::string& name, int k, const std::vector<StateVec>& est) {
        const auto tp = scenario::truth_positions(truth, k);
        result.records[name].push(static_cast<int>(tp.size()), static_cast<int>(est.size()),
                                  eval::ospa_components(tp, positions(est), ospa_params));
    };

    for (int k = 1; k <= cfg.init_scans; ++k) {
        const auto est = init_estimates(scans, k, motion, sensor, targets, cfg.history_scans);
        for (const auto& name : extractors) {
            score(name, k, est);
            if (options.keep_logs) result.logs.push_back({k, name, est, false, {}});
        }
    }

    const std::vector<scenario::Scan> init(scans.begin(), scans.begin() + cfg.init_scans);
    const auto init_mix = gm::init_two_point(init, motion, sensor, targets, cfg.history_scans);
    std::mt19937_64 rng(scenario::hash64(seed, 1));

    if (cfg.filter == "gm") {
        gm::GaussianMixture mix = init_mix;
        for (int k = cfg.init_scans + 1; k <= cfg.scan_count; ++k) {
            const auto& scan = scans[static_cast<std::size_t>(k - 1)];
            const auto update = gm::gm_update(gm::gm_predict(mix, motion), scan, sensor, cfg.history_scans);
            mix = gm::gm_manage(update.posterior, gm_params);
            if (options.gm_snapshots) gm::append_snapshot_csv(*options.gm_snapshots, k, mix, k == cfg.init_scans + 1);
            for (const auto& name : extractors) {
                ScanLog log{k, name, {}, false, {}};
                if (name == "baseline") {
                    log.estimates = gm::gm_extract_baseline(mix, gm_params.extract_threshold);
                } else {
                    log.palm = extract::extract(update, sensor, palm_params);
                    log.estimates = log.palm.point_estimates();
                    log.has_palm = true;
                }
                score(name, k, log.estimates);
                if (options.keep_logs) result.logs.push_back(std::move(log));
            }
        }
    } else {
        const auto smc_params = cfg.smc_params();
        smc::ParticleCloud cloud = smc::smc_init(init_mix, rng, smc_params);
        for (int k = cfg.init_scans + 1; k <= cfg.scan_count; ++k) {
            const auto& scan = scans[static_cast<std::size_t>(k - 1)];
            const auto update = smc::smc_update(smc::smc_predict(cloud, motion, rng), scan, sensor);
            if (options.particle_dump && cfg.particle_dump_stride > 0) {
                smc::append_particle_dump_csv(*options.particle_dump, k, update.posterior,
                                              static_cast<std::size_t>(cfg.particle_dump_stride),
                                              k == cfg.init_scans + 1);
            }
            ScanLog log{k, "palm", {}, true, extract::extract(update, sensor, palm_params)};
            log.estimates = log.palm.point_estimates();
            score("palm", k, log.estimates);
            if (options.keep_logs) result.logs.push_back(std::move(log));
            cloud = smc::smc_resample_dither(update.posterior, rng, smc_params);
        }
    }
    return result;
}

McResult run_monte_carlo(const RunConfig& cfg) {
    cfg.validate();
    McResult mc;
    mc.config_hash = cfg.hash_hex();
    for (int r = 0; r < cfg.runs; ++r) mc.seeds.push_back(run_seed(cfg, static_cast<std::size_t>(r)));

    struct Task {
        std::size_t cell;
        std::size_t run;
    };
    std::vector<Task> tasks;
    for (double pd : cfg.detect_probs()) {
        for (double clutter : cfg.clutter_means()) {
            CellResult cell;
            cell.detect_prob = pd;
            cell.clutter_mean = clutter;
            for (const auto& name : cfg.extractors()) cell.records[name].resize(static_cast<std::size_t>(cfg.runs));
            mc.cells.push_back(std::move(cell));
            for (int r = 0; r < cfg.runs; ++r) tasks.push_back({mc.cells.size() - 1, static_cast<std::size_t>(r)});
        }
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t t = next.fetch_add(1);
            if (t >= tasks.size()) return;
            try {
                auto& cell = mc.cells[tasks[t].cell];
                const std::uint64_t seed = mc.seeds[tasks[t].run];
                const auto data = simulate(cfg, cell.detect_prob, cell.clutter_mean, seed);
                auto tr = run_tracking(cfg, cfg.sensor(cell.detect_prob, cell.clutter_mean), data.truth, data.scans,
                                       seed);
                for (auto& [name, rec] : tr.records) cell.records[name][tasks[t].run] = std::move(rec);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = tasks.size();
                return;
            }
        }
    };
    const int n_workers = std::max(1, std::min<int>(cfg.workers, static_cast<int>(tasks.size())));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);

    for (auto& cell : mc.cells) {
        for (const auto& [name, recs] : cell.records) cell.aggregates[name] = eval::aggregate(recs, cfg.metric_first_scan);
    }
    return mc;
}

void cmd_simulate(const RunConfig& cfg, const std::string& out_dir) {
    cfg.validate();
    ensure_dir(out_dir);
    const auto data = simulate(cfg, cfg.detect_probs().front(), cfg.clutter_means().front(), run_seed(cfg, 0));
    scenario::write_truth_csv((fs::path(out_dir) / "truth.csv").string(), data.truth, cfg.scan_interval);
    scenario::write_scans_csv((fs::path(out_dir) / "scans.csv").string(), data.scans);
}

TrackingResult cmd_track(const RunConfig& cfg, const std::string& scans_csv, const std::string& truth_csv,
                         const std::string& out_dir) {
    cfg.validate();
    ensure_dir(out_dir);
    const auto scans = scenario::read_scans_csv(scans_csv, cfg.scan_count, cfg.scan_interval);
    const auto truth = truth_csv.empty() ? scenario::generate_truth(cfg.scenario()) : scenario::read_truth_csv(truth_csv);
    const double pd = cfg.detect_probs().front();
    const double clutter = cfg.clutter_means().front();
    const std::uint64_t seed = run_seed(cfg, 0);

    const fs::path dir(out_dir);
    std::ofstream snapshots;
    std::ofstream particles;
    TrackingOptions options;
    options.keep_logs = true;
    if (cfg.filter == "gm" && cfg.gm_snapshots) {
        snapshots = open_out(dir / "gm_snapshots.csv");
        options.gm_snapshots = &snapshots;
    }
    if (cfg.filter == "smc" && cfg.particle_dump_stride > 0) {
        particles = open_out(dir / "particles.csv");
        options.particle_dump = &particles;
    }
    auto result = run_tracking(cfg, cfg.sensor(pd, clutter), truth, scans, seed, options);

    json log = json::array();
    for (const auto& l : result.logs) log.push_back(log_json(l));
    open_out(dir / "extraction_log.json") << log.dump(1) << '\n';

    auto rec_out = open_out(dir / "run_record.csv");
    rec_out << "extractor,scan,truth_count,estimated_count,ospa,ospa_localization,ospa_cardinality\n";
    for (const auto& [name, rec] : result.records) {
        for (std::size_t s = 0; s < rec.scan_count(); ++s) {
            rec_out << name << ',' << s + 1 << ',' << rec.truth_count[s] << ',' << rec.estimated_count[s] << ','
                    << num(rec.ospa[s]) << ',' << num(rec.ospa_localization[s]) << ','
                    << num(rec.ospa_cardinality[s]) << '\n';
        }
    }
    auto tracks_out = open_out(dir / "tracks.csv");
    tracks_out << "extractor,scan,track,x,vx,y,vy\n";
    for (const auto& l : result.logs) {
        for (std::size_t t = 0; t < l.estimates.size(); ++t) {
            const auto& e = l.estimates[t];
            tracks_out << l.extractor << ',' << l.scan << ',' << t << ',' << num(e(0)) << ',' << num(e(1)) << ','
                       << num(e(2)) << ',' << num(e(3)) << '\n';
        }
    }
    json summary;
    summary["config_hash"] = cfg.hash_hex();
    summary["config"] = cfg.canonical_text();
    summary["filter"] = cfg.filter;
    summary["seed"] = seed;
    summary["scenario_mospa"] = json::object();
    for (const auto& [name, rec] : result.records) {
        summary["scenario_mospa"][name] = eval::aggregate({rec}, cfg.metric_first_scan).scenario_mospa;
    }
    open_out(dir / "summary.json") << summary.dump(2) << '\n';
    return result;
}

McResult cmd_mc(const RunConfig& cfg, const std::string& out_dir) {
    cfg.validate();
    ensure_dir(out_dir);
    const auto started = std::chrono::system_clock::now();
    const auto mc = run_monte_carlo(cfg);
    const auto finished = std::chrono::system_clock::now();
    const fs::path dir(out_dir);

    auto curves = open_out(dir / "mospa.csv");
    curves << "filter,extractor,detect_prob,clutter_mean,scan,mospa,mospa_stderr,mean_tracks,tracks_stderr\n";
    auto runs = open_out(dir / "runs.csv");
    runs << "filter,extractor,detect_prob,clutter_mean,run,seed,scenario_mospa\n";
    json summary;
    summary["config_hash"] = mc.config_hash;
    summary["config"] = cfg.canonical_text();
    summary["filter"] = cfg.filter;
    summary["master_seed"] = cfg.seed;
    summary["runs"] = cfg.runs;
    summary["metric_first_scan"] = cfg.metric_first_scan;
    summary["run_seeds"] = mc.seeds;
    summary["cells"] = json::array();
    for (const auto& cell : mc.cells) {
        json jc;
        jc["detect_prob"] = cell.detect_prob;
        jc["clutter_mean"] = cell.clutter_mean;
        jc["extractors"] = json::object();
        for (const auto& [name, agg] : cell.aggregates) {
            for (std::size_t s = 0; s < agg.mospa.size(); ++s) {
                curves << cfg.filter << ',' << name << ',' << num(cell.detect_prob) << ',' << num(cell.clutter_mean)
                       << ',' << s + 1 << ',' << num(agg.mospa[s]) << ',' << num(agg.mospa_stderr[s]) << ','
                       << num(agg.mean_tracks[s]) << ',' << num(agg.tracks_stderr[s]) << '\n';
            }
            for (std::size_t r = 0; r < agg.run_scenario_mospa.size(); ++r) {
                runs << cfg.filter << ',' << name << ',' << num(cell.detect_prob) << ',' << num(cell.clutter_mean)
                     << ',' << r << ',' << mc.seeds[r] << ',' << num(agg.run_scenario_mospa[r]) << '\n';
            }
            json je;
            je["scenario_mospa"] = agg.scenario_mospa;
            je["scenario_mospa_stderr"] = agg.scenario_mospa_stderr;
            je["record_count"] = agg.runs;
            jc["extractors"][name] = je;
        }
        if (cell.aggregates.count("baseline") && cell.aggregates.count("palm")) {
            const auto t = eval::paired_greater(cell.aggregates.at("baseline").run_scenario_mospa,
                                                cell.aggregates.at("palm").run_scenario_mospa);
            jc["baseline_minus_palm"] = {{"mean", t.mean_difference},
                                         {"stderr", t.stderr},
                                         {"lower_95", t.lower_bound},
                                         {"significant", t.significant}};
        }
        summary["cells"].push_back(jc);
    }
    open_out(dir / "summary.json") << summary.dump(2) << '\n';

    const std::time_t t = std::chrono::system_clock::to_time_t(finished);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    json meta;
    meta["finished_utc"] = stamp;
    meta["elapsed_seconds"] = std::chrono::duration<double>(finished - started).count();
    meta["workers"] = cfg.workers;
    meta["out_dir"] = out_dir;
    open_out(dir / "run_meta.json") << meta.dump(2) << '\n';
    return mc;
}

std::string cmd_report(const std::string& dir) {
    const fs::path path = fs::path(dir) / "summary.json";
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
    json summary;
    try {
        in >> summary;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::IoError, "malformed " + path.string() + ": " + e.what());
    }
    std::ostringstream o;
    o << "config " << summary.value("config_hash", "?") << ", filter " << summary.value("filter", "?") << ", "
      << summary.value("runs", 0) << " runs per cell\n";
    char line[160];
    std::snprintf(line, sizeof line, "%-6s %-8s %-10s %12s %10s\n", "P^D", "clutter", "extractor", "MOSPA", "stderr");
    o << line;
    for (const auto& cell : summary.at("cells")) {
        for (const auto& [name, e] : cell.at("extractors").items()) {
            std::snprintf(line, sizeof line, "%-6.3g %-8.4g %-10s %12.3f %10.3f\n", cell.at("detect_prob").get<double>(),
                          cell.at("clutter_mean").get<double>(), name.c_str(), e.at("scenario_mospa").get<double>(),
                          e.at("scenario_mospa_stderr").get<double>());
            o << line;
        }
        if (cell.contains("baseline_minus_palm")) {
            const auto& d = cell.at("baseline_minus_palm");
            std::snprintf(line, sizeof line, "       baseline - palm = %.3f (95%% lower bound %.3f)%s\n",
                          d.at("mean").get<double>(), d.at("lower_95").get<double>(),
                          d.at("significant").get<bool>() ? " significant" : "");
            o << line;
        }
    }
    return o.str();
}

}  // namespace palm::runner
