#include "palm/gm_phd.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numbers>
#include <numeric>
#include <ostream>

#include "palm/error.hpp"
#include "palm/format.hpp"

namespace palm::gm {

namespace {

void trim_history(std::vector<MeasurementTag>& history, int current_scan, int horizon) {
    std::erase_if(history, [&](const MeasurementTag& t) { return t.scan <= current_scan - horizon; });
}

void add_tag(std::vector<MeasurementTag>& history, MeasurementTag tag) {
    auto it = std::lower_bound(history.begin(), history.end(), tag);
    if (it == history.end() || !(*it == tag)) history.insert(it, tag);
}

struct Innovation {
    MeasVec predicted;
    MeasCov s;
    MeasCov s_inv;
    Eigen::Matrix<double, 4, 2> gain;
    StateCov updated_cov;
    double norm;  // 1 / (2 pi sqrt|S|)
};

Innovation innovation(const StateVec& mean, const StateCov& cov, const models::MeasurementModel& sensor) {
    const auto& h = sensor.observation;
    Innovation inn;
    inn.predicted = h * mean;
    inn.s = h * cov * h.transpose() + sensor.noise_cov;
    inn.s = 0.5 * (inn.s + inn.s.transpose());
    inn.s_inv = inn.s.inverse();
    inn.gain = cov * h.transpose() * inn.s_inv;
    StateCov p = (StateCov::Identity() - inn.gain * h) * cov;
    inn.updated_cov = 0.5 * (p + p.transpose());
    inn.norm = 1.0 / (2.0 * std::numbers::pi * std::sqrt(inn.s.determinant()));
    return inn;
}

double innovation_density(const Innovation& inn, const MeasVec& z) {
    const MeasVec d = z - inn.predicted;
    return inn.norm * std::exp(-0.5 * d.dot(inn.s_inv * d));
}

const scenario::Scan& find_scan(const std::vector<scenario::Scan>& scans, int index) {
    for (const auto& s : scans) {
        if (s.index == index) return s;
    }
    throw Error(ErrorCode::MissingAssignment, "initialization scan " + std::to_string(index) + " not supplied");
}

std::size_t find_assoc(const scenario::Scan& scan, int target) {
    for (std::size_t i = 0; i < scan.truth_assoc.size(); ++i) {
        if (scan.truth_assoc[i] == target) return i;
    }
    throw Error(ErrorCode::MissingAssignment, "target " + std::to_string(target) + " has no measurement in scan " +
                                                  std::to_string(scan.index));
}

}  // namespace

double GaussianMixture::mass() const {
    double total = 0.0;
    for (const auto& c : components) total += c.weight;
    return total;
}

std::pair<StateVec, StateCov> kalman_update(const StateVec& mean, const StateCov& cov, const MeasVec& z,
                                            const models::MeasurementModel& sensor) {
    const Innovation inn = innovation(mean, cov, sensor);
    return {mean + inn.gain * (z - inn.predicted), inn.updated_cov};
}

GaussianMixture init_two_point(const std::vector<scenario::Scan>& init_scans, const models::MotionModel& motion,
                               const models::MeasurementModel& sensor, int target_count, int history_scans) {
    int last = 0;
    for (const auto& s : init_scans) last = std::max(last, s.index);
    if (last < 2) throw Error(ErrorCode::MissingAssignment, "two-point initialization needs scans 1 and 2");

    const double dt = motion.dt;
    GaussianMixture mix;
    for (int target = 0; target < target_count; ++target) {
        const auto& s1 = find_scan(init_scans, 1);
        const auto& s2 = find_scan(init_scans, 2);
        const MeasVec z1 = s1.measurements[find_assoc(s1, target)];
        const std::size_t i2 = find_assoc(s2, target);
        const MeasVec z2 = s2.measurements[i2];

        GaussianComponent c;
        c.weight = 1.0;
        c.mean = StateVec(z2(0), (z2(0) - z1(0)) / dt, z2(1), (z2(1) - z1(1)) / dt);
        c.cov.setZero();
        for (int axis = 0; axis < 2; ++axis) {
            const double r = sensor.noise_cov(axis, axis);
            const int o = 2 * axis;
            c.cov(o, o) = r;
            c.cov(o, o + 1) = r / dt;
            c.cov(o + 1, o) = r / dt;
            c.cov(o + 1, o + 1) = 2.0 * r / (dt * dt);
        }
        add_tag(c.history, {1, static_cast<int>(find_assoc(s1, target))});
        add_tag(c.history, {2, static_cast<int>(i2)});
        for (int k = 3; k <= last; ++k) {
            const auto& sk = find_scan(init_scans, k);
            const std::size_t ik = find_assoc(sk, target);
            auto [m, p] = models::gaussian_predict(c.mean, c.cov, motion);
            std::tie(c.mean, c.cov) = kalman_update(m, p, sk.measurements[ik], sensor);
            add_tag(c.history, {k, static_cast<int>(ik)});
        }
        trim_history(c.history, last, history_scans);
        mix.components.push_back(std::move(c));
    }
    return mix;
}

GaussianMixture gm_predict(const GaussianMixture& mix, const models::MotionModel& motion) {
    GaussianMixture out;
    out.components.reserve(mix.components.size());
    for (const auto& c : mix.components) {
        GaussianComponent p = c;
        std::tie(p.mean, p.cov) = models::gaussian_predict(c.mean, c.cov, motion);
        p.weight = motion.survival_prob * c.weight;
        p.source = -1;
        p.parent = -1;
        out.components.push_back(std::move(p));
    }
    return out;
}

GmUpdate gm_update(const GaussianMixture& prior, const scenario::Scan& scan, const models::MeasurementModel& sensor,
                   int history_scans) {
    const std::size_t j_count = prior.components.size();
    const std::size_t k = scan.measurements.size();
    const double pd = sensor.detect_prob;

    GmUpdate up;
    up.prior = prior;
    up.scan = scan.index;
    up.measurements = scan.measurements;
    up.detect_prob = pd;
    up.mu_missed = (1.0 - pd) * prior.mass();

    std::vector<Innovation> inns;
    inns.reserve(j_count);
    for (const auto& c : prior.components) inns.push_back(innovation(c.mean, c.cov, sensor));

    auto& out = up.posterior.components;
    out.reserve(j_count * (k + 1));
    for (std::size_t i = 0; i < j_count; ++i) {
        GaussianComponent c = prior.components[i];
        c.weight *= (1.0 - pd);
        c.source = -1;
        c.parent = static_cast<int>(i);
        trim_history(c.history, scan.index, history_scans);
        out.push_back(std::move(c));
    }

    std::vector<double> q(j_count);
    for (std::size_t j = 0; j < k; ++j) {
        const MeasVec& z = scan.measurements[j];
        double detected = 0.0;
        for (std::size_t i = 0; i < j_count; ++i) {
            q[i] = innovation_density(inns[i], z);
            detected += pd * prior.components[i].weight * q[i];
        }
        const double lambda = models::filter_clutter_intensity(z, sensor);
        const double mu = lambda + detected;
        up.mu_detected.push_back(detected);
        up.clutter.push_back(lambda);
        up.mu_z.push_back(mu);
        for (std::size_t i = 0; i < j_count; ++i) {
            const auto& src = prior.components[i];
            GaussianComponent c;
            c.weight = pd * src.weight * q[i] / mu;
            c.mean = src.mean + inns[i].gain * (z - inns[i].predicted);
            c.cov = inns[i].updated_cov;
            c.history = src.history;
            trim_history(c.history, scan.index, history_scans);
            add_tag(c.history, {scan.index, static_cast<int>(j)});
            c.source = static_cast<int>(j);
            c.parent = static_cast<int>(i);
            out.push_back(std::move(c));
        }
    }
    return up;
}

GaussianMixture gm_manage(const GaussianMixture& mix, const GmParams& params) {
    std::vector<std::size_t> alive;
    for (std::size_t i = 0; i < mix.components.size(); ++i) {
        if (mix.components[i].weight >= params.prune_threshold) alive.push_back(i);
    }
    std::stable_sort(alive.begin(), alive.end(), [&](std::size_t a, std::size_t b) {
        return mix.components[a].weight > mix.components[b].weight;
    });

    std::vector<StateCov> inv(mix.components.size());
    for (std::size_t i : alive) inv[i] = mix.components[i].cov.inverse();

    std::vector<bool> used(mix.components.size(), false);
    GaussianMixture out;
    for (std::size_t lead : alive) {
        if (used[lead]) continue;
        const StateVec& ml = mix.components[lead].mean;
        std::vector<std::size_t> group;
        for (std::size_t i : alive) {
            if (used[i]) continue;
            const StateVec d = mix.components[i].mean - ml;
            if (d.dot(inv[i] * d) <= params.merge_threshold) group.push_back(i);
        }
        GaussianComponent merged;
        merged.weight = 0.0;
        merged.mean.setZero();
        for (std::size_t i : group) {
            used[i] = true;
            const auto& c = mix.components[i];
            merged.weight += c.weight;
            merged.mean += c.weight * c.mean;
            for (const auto& t : c.history) add_tag(merged.history, t);
        }
        merged.mean /= merged.weight;
        merged.cov.setZero();
        for (std::size_t i : group) {
            const auto& c = mix.components[i];
            const StateVec d = merged.mean - c.mean;
            merged.cov += c.weight * (c.cov + d * d.transpose());
        }
        merged.cov /= merged.weight;
        merged.cov = 0.5 * (merged.cov + merged.cov.transpose());
        out.components.push_back(std::move(merged));
    }
    if (out.components.size() > params.max_components) {
        std::stable_sort(out.components.begin(), out.components.end(),
                         [](const GaussianComponent& a, const GaussianComponent& b) { return a.weight > b.weight; });
        out.components.resize(params.max_components);
    }
    return out;
}

std::vector<StateVec> gm_extract_baseline(const GaussianMixture& mix, double threshold) {
    std::vector<StateVec> out;
    for (const auto& c : mix.components) {
        if (c.weight < threshold) continue;
        const long copies = std::max(1L, std::lround(c.weight));
        for (long n = 0; n < copies; ++n) out.push_back(c.mean);
    }
    return out;
}

double mixture_density(const GaussianMixture& mix, const StateVec& x) {
    double total = 0.0;
    for (const auto& c : mix.components) {
        const Eigen::LLT<StateCov> llt(c.cov);
        const StateVec d = x - c.mean;
        const Eigen::Vector4d y = llt.matrixL().solve(d);
        const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
        total += c.weight * std::exp(-0.5 * y.squaredNorm() - 0.5 * log_det - 2.0 * std::log(2.0 * std::numbers::pi));
    }
    return total;
}

Context gm_context(const GmUpdate& update, const models::MeasurementModel& sensor, bool with_density) {
    pointproc::PhdModel<StateVec, MeasVec> model;
    if (with_density) {
        auto prior = std::make_shared<GaussianMixture>(update.prior);
        model.prior_intensity = [prior](const StateVec& x) { return mixture_density(*prior, x); };
    }
    const double pd = update.detect_prob;
    model.detect_prob = [pd](const StateVec&) { return pd; };
    model.likelihood = [sensor](const MeasVec& z, const StateVec& x) {
        return models::gaussian_likelihood(z, x, sensor);
    };
    model.clutter_intensity = [sensor](const MeasVec& z) { return models::filter_clutter_intensity(z, sensor); };
    return Context::from_integrals(std::move(model), update.measurements, update.prior.mass(), update.mu_missed,
                                   update.mu_detected);
}

void append_snapshot_csv(std::ostream& out, int scan, const GaussianMixture& mix, bool header) {
    if (header) {
        out << "scan,weight,x,vx,y,vy";
        for (int r = 0; r < 4; ++r) {
            for (int c = r; c < 4; ++c) out << ",p" << r << c;
        }
        out << '\n';
    }
    auto put = [&](double v) { out << ',' << format_double(v); };
    for (const auto& c : mix.components) {
        out << scan;
        put(c.weight);
        for (int i = 0; i < 4; ++i) put(c.mean(i));
        for (int r = 0; r < 4; ++r) {
            for (int col = r; col < 4; ++col) put(c.cov(r, col));
        }
        out << '\n';
    }
}

}  // namespace palm::gm
