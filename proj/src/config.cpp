#include "palm/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "palm/error.hpp"
#include "palm/format.hpp"

namespace palm::config {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(const std::string& key, const std::string& value) {
    throw Error(ErrorCode::InvalidConfig, "invalid value '" + value + "' for key '" + key + "'");
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) bad(key, v);
        return d;
    } catch (const std::logic_error&) {
        bad(key, v);
    }
}

long long to_int(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const long long i = std::stoll(v, &used);
        if (used != v.size()) bad(key, v);
        return i;
    } catch (const std::logic_error&) {
        bad(key, v);
    }
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    if (v.empty() || v[0] == '-') bad(key, v);
    try {
        std::size_t used = 0;
        const unsigned long long i = std::stoull(v, &used);
        if (used != v.size()) bad(key, v);
        return i;
    } catch (const std::logic_error&) {
        bad(key, v);
    }
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
    return out;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    bad(key, v);
}

std::string num(double v) { return format_double(v); }

std::string join(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + num(v[i]);
    return out;
}

std::string state_text(const StateVec& s) { return num(s(0)) + "," + num(s(1)) + "," + num(s(2)) + "," + num(s(3)); }

}  // namespace

void RunConfig::set(const std::string& key, const std::string& raw) {
    const std::string v = trim(raw);
    using Setter = std::function<void(RunConfig&, const std::string&)>;
    static const std::map<std::string, Setter> setters = {
        {"seed", [](RunConfig& c, const std::string& x) { c.seed = to_u64("seed", x); }},
        {"runs", [](RunConfig& c, const std::string& x) { c.runs = static_cast<int>(to_int("runs", x)); }},
        {"workers", [](RunConfig& c, const std::string& x) { c.workers = static_cast<int>(to_int("workers", x)); }},
        {"out", [](RunConfig& c, const std::string& x) { c.out_dir = x; }},
        {"filter", [](RunConfig& c, const std::string& x) { c.filter = x; }},
        {"extractor", [](RunConfig& c, const std::string& x) { c.extractor = x; }},
        {"cardinality", [](RunConfig& c, const std::string& x) { c.cardinality = x; }},
        {"detect_prob", [](RunConfig& c, const std::string& x) { c.detect_prob = to_double("detect_prob", x); }},
        {"clutter_mean", [](RunConfig& c, const std::string& x) { c.clutter_mean = to_double("clutter_mean", x); }},
        {"pd_list", [](RunConfig& c, const std::string& x) { c.pd_list = to_list("pd_list", x); }},
        {"clutter_list", [](RunConfig& c, const std::string& x) { c.clutter_list = to_list("clutter_list", x); }},
        {"sigma_p", [](RunConfig& c, const std::string& x) { c.sigma_p = to_double("sigma_p", x); }},
        {"sigma_m", [](RunConfig& c, const std::string& x) { c.sigma_m = to_double("sigma_m", x); }},
        {"fov_half_width", [](RunConfig& c, const std::string& x) { c.fov_half_width = to_double("fov_half_width", x); }},
        {"clutter_floor", [](RunConfig& c, const std::string& x) { c.clutter_floor = to_double("clutter_floor", x); }},
        {"scan_interval", [](RunConfig& c, const std::string& x) { c.scan_interval = to_double("scan_interval", x); }},
        {"turn_rate_deg", [](RunConfig& c, const std::string& x) { c.turn_rate_deg = to_double("turn_rate_deg", x); }},
        {"segment_seconds", [](RunConfig& c, const std::string& x) { c.segment_seconds = to_double("segment_seconds", x); }},
        {"scan_count", [](RunConfig& c, const std::string& x) { c.scan_count = static_cast<int>(to_int("scan_count", x)); }},
        {"init_scans", [](RunConfig& c, const std::string& x) { c.init_scans = static_cast<int>(to_int("init_scans", x)); }},
        {"target1", [](RunConfig& c, const std::string& x) {
             const auto l = to_list("target1", x);
             if (l.size() != 4) bad("target1", x);
             c.target1 = StateVec(l[0], l[1], l[2], l[3]);
         }},
        {"target2", [](RunConfig& c, const std::string& x) {
             const auto l = to_list("target2", x);
             if (l.size() != 4) bad("target2", x);
             c.target2 = StateVec(l[0], l[1], l[2], l[3]);
         }},
        {"prune_threshold", [](RunConfig& c, const std::string& x) { c.prune_threshold = to_double("prune_threshold", x); }},
        {"merge_threshold", [](RunConfig& c, const std::string& x) { c.merge_threshold = to_double("merge_threshold", x); }},
        {"max_components", [](RunConfig& c, const std::string& x) { c.max_components = static_cast<int>(to_int("max_components", x)); }},
        {"extract_threshold", [](RunConfig& c, const std::string& x) { c.extract_threshold = to_double("extract_threshold", x); }},
        {"history_scans", [](RunConfig& c, const std::string& x) { c.history_scans = static_cast<int>(to_int("history_scans", x)); }},
        {"particles_per_target", [](RunConfig& c, const std::string& x) { c.particles_per_target = static_cast<int>(to_int("particles_per_target", x)); }},
        {"particle_count", [](RunConfig& c, const std::string& x) { c.particle_count = static_cast<int>(to_int("particle_count", x)); }},
        {"gate_sigmas", [](RunConfig& c, const std::string& x) { c.gate_sigmas = to_double("gate_sigmas", x); }},
        {"ospa_order", [](RunConfig& c, const std::string& x) { c.ospa_order = to_double("ospa_order", x); }},
        {"ospa_cutoff", [](RunConfig& c, const std::string& x) { c.ospa_cutoff = to_double("ospa_cutoff", x); }},
        {"metric_first_scan", [](RunConfig& c, const std::string& x) { c.metric_first_scan = static_cast<int>(to_int("metric_first_scan", x)); }},
        {"particle_dump_stride", [](RunConfig& c, const std::string& x) { c.particle_dump_stride = static_cast<int>(to_int("particle_dump_stride", x)); }},
        {"gm_snapshots", [](RunConfig& c, const std::string& x) { c.gm_snapshots = to_bool("gm_snapshots", x); }},
    };
    const auto it = setters.find(trim(key));
    if (it == setters.end()) throw Error(ErrorCode::InvalidConfig, "unknown config key '" + trim(key) + "'");
    it->second(*this, v);
}

std::string RunConfig::get(const std::string& raw_key) const {
    const std::string key = trim(raw_key);
    if (key == "out") return out_dir;
    if (key == "workers") return std::to_string(workers);
    std::istringstream in(canonical_text());
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq != std::string::npos && trim(line.substr(0, eq)) == key) return trim(line.substr(eq + 1));
    }
    throw Error(ErrorCode::InvalidConfig, "unknown config key '" + key + "'");
}

void RunConfig::validate() const {
    auto require = [](bool ok, const std::string& what) {
        if (!ok) throw Error(ErrorCode::InvalidConfig, what);
    };
    require(runs >= 1, "runs must be >= 1");
    require(workers >= 1, "workers must be >= 1");
    require(filter == "gm" || filter == "smc", "filter must be gm or smc");
    require(extractor == "baseline" || extractor == "palm" || extractor == "both",
            "extractor must be baseline, palm or both");
    require(!(filter == "smc" && extractor == "baseline"), "the baseline extractor exists only for the gm filter");
    require(cardinality == "rounded_expected" || cardinality == "map", "cardinality must be rounded_expected or map");
    for (double pd : detect_probs()) require(pd >= 0.0 && pd <= 1.0, "detection probabilities must lie in [0, 1]");
    for (double c : clutter_means()) require(c >= 0.0, "clutter means must be nonnegative");
    require(sigma_p >= 0.0 && sigma_m > 0.0, "noise levels must be positive");
    require(fov_half_width > 0.0 && clutter_floor > 0.0, "fov and clutter floor must be positive");
    require(scan_interval > 0.0, "scan_interval must be positive");
    require(init_scans >= 2 && scan_count > init_scans, "need 2 <= init_scans < scan_count");
    require(prune_threshold >= 0.0 && merge_threshold >= 0.0 && max_components >= 1, "bad mixture management");
    require(history_scans >= 1, "history_scans must be >= 1");
    require(particles_per_target >= 1 && particle_count >= 1, "particle counts must be positive");
    require(gate_sigmas > 0.0, "gate_sigmas must be positive");
    require(ospa_order >= 1.0 && ospa_cutoff > 0.0, "OSPA needs order >= 1 and cutoff > 0");
    require(metric_first_scan >= 1 && metric_first_scan <= scan_count, "metric_first_scan out of range");
    require(particle_dump_stride >= 0, "particle_dump_stride must be >= 0");
}

std::vector<double> RunConfig::detect_probs() const { return pd_list.empty() ? std::vector<double>{detect_prob} : pd_list; }

std::vector<double> RunConfig::clutter_means() const {
    return clutter_list.empty() ? std::vector<double>{clutter_mean} : clutter_list;
}

std::vector<std::string> RunConfig::extractors() const {
    if (extractor == "both") return filter == "gm" ? std::vector<std::string>{"baseline", "palm"} : std::vector<std::string>{"palm"};
    return {extractor};
}

std::string RunConfig::canonical_text() const {
    std::ostringstream o;
    o << "cardinality = " << cardinality << '\n'
      << "clutter_floor = " << num(clutter_floor) << '\n'
      << "clutter_list = " << join(clutter_means()) << '\n'
      << "extract_threshold = " << num(extract_threshold) << '\n'
      << "extractor = " << extractor << '\n'
      << "filter = " << filter << '\n'
      << "fov_half_width = " << num(fov_half_width) << '\n'
      << "gate_sigmas = " << num(gate_sigmas) << '\n'
      << "history_scans = " << history_scans << '\n'
      << "init_scans = " << init_scans << '\n'
      << "max_components = " << max_components << '\n'
      << "merge_threshold = " << num(merge_threshold) << '\n'
      << "metric_first_scan = " << metric_first_scan << '\n'
      << "ospa_cutoff = " << num(ospa_cutoff) << '\n'
      << "ospa_order = " << num(ospa_order) << '\n'
      << "particle_count = " << particle_count << '\n'
      << "particles_per_target = " << particles_per_target << '\n'
      << "pd_list = " << join(detect_probs()) << '\n'
      << "prune_threshold = " << num(prune_threshold) << '\n'
      << "runs = " << runs << '\n'
      << "scan_count = " << scan_count << '\n'
      << "scan_interval = " << num(scan_interval) << '\n'
      << "seed = " << seed << '\n'
      << "segment_seconds = " << num(segment_seconds) << '\n'
      << "sigma_m = " << num(sigma_m) << '\n'
      << "sigma_p = " << num(sigma_p) << '\n'
      << "target1 = " << state_text(target1) << '\n'
      << "target2 = " << state_text(target2) << '\n'
      << "turn_rate_deg = " << num(turn_rate_deg) << '\n';
    return o.str();
}

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t RunConfig::hash() const { return fnv1a64(canonical_text()); }

std::string RunConfig::hash_hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash()));
    return buf;
}

scenario::ScenarioConfig RunConfig::scenario() const {
    scenario::ScenarioConfig s;
    s.initial_states = {target1, target2};
    s.turn_rate_deg = turn_rate_deg;
    s.segment_seconds = segment_seconds;
    s.scan_interval = scan_interval;
    s.scan_count = scan_count;
    s.init_scans = init_scans;
    return s;
}

models::MotionModel RunConfig::motion() const { return models::MotionModel::constant_velocity(scan_interval, sigma_p); }

models::MeasurementModel RunConfig::sensor(double pd, double clutter) const {
    auto m = models::MeasurementModel::position_sensor(sigma_m, pd, clutter, fov_half_width);
    m.clutter_floor = clutter_floor;
    return m;
}

gm::GmParams RunConfig::gm_params() const {
    gm::GmParams p;
    p.prune_threshold = prune_threshold;
    p.merge_threshold = merge_threshold;
    p.max_components = static_cast<std::size_t>(max_components);
    p.extract_threshold = extract_threshold;
    p.history_scans = history_scans;
    return p;
}

smc::SmcParams RunConfig::smc_params() const {
    smc::SmcParams p;
    p.particles_per_component = static_cast<std::size_t>(particles_per_target);
    p.particle_count = static_cast<std::size_t>(particle_count);
    return p;
}

extract::PalmParams RunConfig::palm_params() const {
    extract::PalmParams p;
    p.strategy = cardinality == "map" ? pointproc::CardinalityStrategy::MapOfPmf
                                      : pointproc::CardinalityStrategy::RoundedExpected;
    p.history_scans = history_scans;
    p.gate_sigmas = gate_sigmas;
    return p;
}

void apply_config(RunConfig& cfg, const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(line_no) + ": expected key = value");
        }
        cfg.set(line.substr(0, eq), line.substr(eq + 1));
    }
}

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    apply_config(cfg, text);
    return cfg;
}

std::string read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::InvalidConfig, "cannot read config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunConfig load_config_file(const std::string& path) { return parse_config(read_config_file(path)); }

}  // namespace palm::config
