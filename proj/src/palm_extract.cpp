#include "palm/palm_extract.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "palm/error.hpp"

namespace palm::extract {

namespace {

using pointproc::Mode;

bool shares_tag(const std::vector<gm::MeasurementTag>& a, const std::vector<gm::MeasurementTag>& b, int min_scan) {
    // Both histories are sorted.
    auto i = a.begin();
    auto j = b.begin();
    while (i != a.end() && j != b.end()) {
        if (*i < *j) {
            ++i;
        } else if (*j < *i) {
            ++j;
        } else {
            if (i->scan >= min_scan) return true;
            ++i;
            ++j;
        }
    }
    return false;
}

template <class Fn>
void finish_pdf(TrackEstimate& track, const std::vector<std::size_t>& support, const std::vector<double>& raw,
                Fn&& state_of) {
    double total = 0.0;
    for (double w : raw) total += w;
    track.cluster_members = support;
    if (!(total > 0.0)) {
        track.empty_support = true;
        track.point_estimate = track.peak_state;
        track.member_weights.assign(raw.size(), 0.0);
        return;
    }
    track.member_weights.resize(raw.size());
    StateVec mean = StateVec::Zero();
    for (std::size_t i = 0; i < raw.size(); ++i) {
        track.member_weights[i] = raw[i] / total;
        mean += track.member_weights[i] * state_of(i).first;
    }
    StateCov cov = StateCov::Zero();
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const auto [m, p] = state_of(i);
        const StateVec d = m - mean;
        cov += track.member_weights[i] * (p + d * d.transpose());
    }
    track.point_estimate = mean;
    track.covariance = cov;
}

std::size_t argmax_positive(const std::vector<double>& w) {
    std::size_t best = w.size();
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i] > 0.0 && (best == w.size() || w[i] > w[best])) best = i;
    }
    return best;
}

}  // namespace

std::vector<StateVec> ExtractionResult::point_estimates() const {
    std::vector<StateVec> out;
    out.reserve(tracks.size());
    for (const auto& t : tracks) out.push_back(t.point_estimate);
    return out;
}

std::vector<std::vector<std::size_t>> cluster_by_shared_measurements(
    const std::vector<gm::GaussianComponent>& components, int current_scan, int horizon) {
    std::vector<std::size_t> parent(components.size());
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    std::map<gm::MeasurementTag, std::size_t> first_owner;
    for (std::size_t i = 0; i < components.size(); ++i) {
        for (const auto& tag : components[i].history) {
            if (tag.scan <= current_scan - horizon) continue;
            auto [it, inserted] = first_owner.emplace(tag, i);
            if (!inserted) {
                const std::size_t a = find(it->second);
                const std::size_t b = find(i);
                if (a != b) parent[std::max(a, b)] = std::min(a, b);
            }
        }
    }
    std::map<std::size_t, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < components.size(); ++i) groups[find(i)].push_back(i);
    std::vector<std::vector<std::size_t>> out;
    out.reserve(groups.size());
    for (auto& [root, members] : groups) out.push_back(std::move(members));
    return out;
}

ExtractionResult extract(const gm::GmUpdate& update, const models::MeasurementModel& sensor,
                         const PalmParams& params) {
    ExtractionResult result;
    const auto& comps = update.posterior.components;
    if (comps.empty()) return result;
    const auto ctx = gm::gm_context(update, sensor, false);
    result.posterior_mass = ctx.posterior_mass();
    result.cardinality = pointproc::canonical_estimate(ctx, params.strategy);
    if (result.cardinality == 0) return result;

    const auto clusters = cluster_by_shared_measurements(comps, update.scan, params.history_scans);
    std::vector<std::size_t> cluster_of(comps.size());
    for (const auto& cl : clusters) {
        for (std::size_t i : cl) cluster_of[i] = cl.size();
    }

    std::vector<double> reduced(comps.size());
    for (std::size_t i = 0; i < comps.size(); ++i) reduced[i] = comps[i].weight;
    std::vector<StateVec> peaks;
    std::vector<std::size_t> peak_ids;
    while (peaks.size() < result.cardinality) {
        const std::size_t best = argmax_positive(reduced);
        if (best == reduced.size() || std::find(peak_ids.begin(), peak_ids.end(), best) != peak_ids.end()) {
            result.degenerate_peak = true;
            break;
        }
        ExtractionStep step;
        step.peak_index = best;
        step.peak_state = comps[best].mean;
        step.peak_weight = reduced[best];
        step.cluster_size = cluster_of[best];
        peaks.push_back(comps[best].mean);
        peak_ids.push_back(best);
        const auto mod = pointproc::palm_modulation(ctx, std::span<const StateVec>(peaks), Mode::AtOne);
        for (std::size_t i = 0; i < comps.size(); ++i) {
            const int j = comps[i].source;
            const double a = j < 0 ? 1.0 : mod.alpha[static_cast<std::size_t>(j)];
            reduced[i] = std::max(0.0, comps[i].weight * a);
        }
        step.alpha = mod.alpha;
        result.steps.push_back(std::move(step));
    }

    const int min_scan = update.scan - params.history_scans + 1;
    for (std::size_t t = 0; t < peaks.size(); ++t) {
        std::vector<StateVec> others;
        for (std::size_t o = 0; o < peaks.size(); ++o) {
            if (o != t) others.push_back(peaks[o]);
        }
        const auto mod = pointproc::palm_modulation(ctx, std::span<const StateVec>(others), Mode::AtZero);
        const auto& peak = comps[peak_ids[t]];
        std::vector<std::size_t> support;
        std::vector<double> raw;
        for (std::size_t i = 0; i < comps.size(); ++i) {
            if (i != peak_ids[t] && !shares_tag(peak.history, comps[i].history, min_scan)) continue;
            const int j = comps[i].source;
            double w = comps[i].weight;
            if (j >= 0) {
                const auto js = static_cast<std::size_t>(j);
                w *= ctx.mu_z()[js] / ctx.clutter_at_measurements()[js] * mod.alpha[js];
            }
            support.push_back(i);
            raw.push_back(std::max(0.0, w));
        }
        TrackEstimate track;
        track.peak_index = peak_ids[t];
        track.peak_state = peak.mean;
        finish_pdf(track, support, raw, [&](std::size_t i) {
            const auto& c = comps[support[i]];
            return std::pair<StateVec, StateCov>(c.mean, c.cov);
        });
        result.tracks.push_back(std::move(track));
    }
    return result;
}

ExtractionResult extract(const smc::SmcUpdate& update, const models::MeasurementModel& sensor,
                         const PalmParams& params) {
    ExtractionResult result;
    const auto& post = update.posterior;
    const std::size_t n = post.size();
    if (n == 0) return result;
    const auto ctx = smc::smc_context(update, sensor);
    result.posterior_mass = ctx.posterior_mass();
    result.cardinality = pointproc::canonical_estimate(ctx, params.strategy);
    if (result.cardinality == 0) return result;

    const double pd = update.detect_prob;
    const std::size_t k = update.measurements.size();
    // P^D p(z_j | x_i) for every particle, computed on first use.
    std::vector<std::vector<double>> lik(k);
    auto likelihoods = [&](std::size_t j) -> const std::vector<double>& {
        if (lik[j].empty()) {
            lik[j].resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                lik[j][i] = pd * models::gaussian_likelihood(update.measurements[j], update.states[i], sensor);
            }
        }
        return lik[j];
    };

    std::vector<double> reduced = post.weights;
    std::vector<StateVec> peaks;
    std::vector<std::size_t> peak_ids;
    while (peaks.size() < result.cardinality) {
        std::size_t best = 0;
        try {
            best = smc::smc_peak(update.states, reduced, params.grid);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::EmptyCloud) throw;
            result.degenerate_peak = true;
            break;
        }
        if (std::find(peak_ids.begin(), peak_ids.end(), best) != peak_ids.end()) {
            result.degenerate_peak = true;
            break;
        }
        ExtractionStep step;
        step.peak_index = best;
        step.peak_state = update.states[best];
        step.peak_weight = reduced[best];
        peaks.push_back(update.states[best]);
        peak_ids.push_back(best);
        const auto mod = pointproc::palm_modulation(ctx, std::span<const StateVec>(peaks), Mode::AtOne);
        reduced = post.weights;
        for (std::size_t j = 0; j < k; ++j) {
            const double notch = 1.0 - mod.alpha[j];
            // Contributions below this are far under double resolution of the weights.
            if (notch < 1e-12) continue;
            const auto& l = likelihoods(j);
            const double scale = notch / ctx.mu_z()[j];
            for (std::size_t i = 0; i < n; ++i) reduced[i] -= update.prior_weights[i] * l[i] * scale;
        }
        for (double& w : reduced) w = std::max(0.0, w);
        step.alpha = mod.alpha;
        result.steps.push_back(std::move(step));
    }

    const double gate = params.gate_sigmas * sensor.sigma_m;
    for (std::size_t t = 0; t < peaks.size(); ++t) {
        std::vector<StateVec> others;
        for (std::size_t o = 0; o < peaks.size(); ++o) {
            if (o != t) others.push_back(peaks[o]);
        }
        const auto mod = pointproc::palm_modulation(ctx, std::span<const StateVec>(others), Mode::AtZero);
        const MeasVec centre = position_of(peaks[t]);
        std::vector<std::size_t> support;
        std::vector<double> raw;
        for (std::size_t i = 0; i < n; ++i) {
            if ((position_of(update.states[i]) - centre).norm() > gate) continue;
            double factor = 1.0 - pd;
            for (std::size_t j = 0; j < k; ++j) {
                const double p = pd * models::gaussian_likelihood(update.measurements[j], update.states[i], sensor);
                factor += mod.alpha[j] * p / ctx.clutter_at_measurements()[j];
            }
            support.push_back(i);
            raw.push_back(std::max(0.0, update.prior_weights[i] * factor));
        }
        TrackEstimate track;
        track.peak_index = peak_ids[t];
        track.peak_state = peaks[t];
        finish_pdf(track, support, raw, [&](std::size_t i) {
            return std::pair<StateVec, StateCov>(update.states[support[i]], StateCov::Zero());
        });
        result.tracks.push_back(std::move(track));
    }
    return result;
}

}  // namespace palm::extract
