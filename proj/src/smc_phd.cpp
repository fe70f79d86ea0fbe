#include "palm/smc_phd.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "palm/error.hpp"
#include "palm/format.hpp"

namespace palm::smc {

namespace {

StateVec sample(const StateVec& mean, const StateCov& l, std::normal_distribution<double>& n, std::mt19937_64& rng) {
    StateVec w;
    for (int i = 0; i < 4; ++i) w(i) = n(rng);
    return mean + l * w;
}

StateCov cholesky_factor(const StateCov& cov) {
    const Eigen::LDLT<StateCov> ldlt(cov);
    // LDLT tolerates the singular covariances that appear with zero process noise.
    const Eigen::Vector4d d = ldlt.vectorD().cwiseMax(0.0).cwiseSqrt();
    StateCov l = ldlt.matrixL();
    l = ldlt.transpositionsP().transpose() * l * d.asDiagonal();
    return l;
}

}  // namespace

void ParticleCloud::recompute_mass() {
    total_mass = 0.0;
    for (double w : weights) total_mass += w;
}

StateCov default_dither() {
    StateCov q = StateCov::Zero();
    q(0, 0) = 0.33;
    q(0, 1) = 0.5;
    q(1, 0) = 0.5;
    q(1, 1) = 1.0;
    q.block<2, 2>(2, 2) = q.block<2, 2>(0, 0);
    return q;
}

ParticleCloud smc_init(const gm::GaussianMixture& init, std::mt19937_64& rng, const SmcParams& params) {
    if (init.components.empty()) throw Error(ErrorCode::EmptyPrior, "initial mixture has no components");
    std::normal_distribution<double> n(0.0, 1.0);
    ParticleCloud cloud;
    const double mass = init.mass();
    const std::size_t total = params.particles_per_component * init.components.size();
    cloud.states.reserve(total);
    for (const auto& c : init.components) {
        const StateCov l = cholesky_factor(c.cov);
        for (std::size_t i = 0; i < params.particles_per_component; ++i) cloud.states.push_back(sample(c.mean, l, n, rng));
    }
    cloud.weights.assign(total, mass / static_cast<double>(total));
    cloud.total_mass = mass;
    return cloud;
}

ParticleCloud smc_predict(const ParticleCloud& cloud, const models::MotionModel& motion, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    const StateCov l = cholesky_factor(motion.process_noise);
    ParticleCloud out;
    out.states.reserve(cloud.size());
    for (const auto& s : cloud.states) out.states.push_back(sample(motion.transition * s, l, n, rng));
    out.weights = cloud.weights;
    for (double& w : out.weights) w *= motion.survival_prob;
    out.recompute_mass();
    return out;
}

SmcUpdate smc_update(const ParticleCloud& cloud, const scenario::Scan& scan, const models::MeasurementModel& sensor) {
    const std::size_t n = cloud.size();
    const std::size_t k = scan.measurements.size();
    const double pd = sensor.detect_prob;

    SmcUpdate up;
    up.states = cloud.states;
    up.prior_weights = cloud.weights;
    up.scan = scan.index;
    up.measurements = scan.measurements;
    up.detect_prob = pd;
    up.prior_mass = cloud.total_mass;
    up.mu_missed = (1.0 - pd) * cloud.total_mass;

    std::vector<double> lik(n);
    std::vector<double> factor(n, 1.0 - pd);
    for (std::size_t j = 0; j < k; ++j) {
        const MeasVec& z = scan.measurements[j];
        double detected = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            lik[i] = pd * models::gaussian_likelihood(z, cloud.states[i], sensor);
            detected += lik[i] * cloud.weights[i];
        }
        const double lambda = models::filter_clutter_intensity(z, sensor);
        const double mu = lambda + detected;
        up.mu_detected.push_back(detected);
        up.clutter.push_back(lambda);
        up.mu_z.push_back(mu);
        for (std::size_t i = 0; i < n; ++i) factor[i] += lik[i] / mu;
    }
    up.posterior.states = cloud.states;
    up.posterior.weights.resize(n);
    for (std::size_t i = 0; i < n; ++i) up.posterior.weights[i] = cloud.weights[i] * factor[i];
    up.posterior.recompute_mass();
    return up;
}

ParticleCloud smc_resample_dither(const ParticleCloud& cloud, std::mt19937_64& rng, const SmcParams& params) {
    const double mass = cloud.total_mass;
    if (!(mass > 0.0) || cloud.size() == 0) throw Error(ErrorCode::DegenerateMass, "cannot resample a cloud with zero mass");
    const std::size_t n_out = params.particle_count;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double step = mass / static_cast<double>(n_out);
    double pointer = u(rng) * step;
    double cumulative = cloud.weights[0];
    std::size_t src = 0;

    std::normal_distribution<double> n(0.0, 1.0);
    const StateCov l = cholesky_factor(params.dither);
    ParticleCloud out;
    out.states.reserve(n_out);
    for (std::size_t i = 0; i < n_out; ++i) {
        while (pointer > cumulative && src + 1 < cloud.size()) cumulative += cloud.weights[++src];
        out.states.push_back(sample(cloud.states[src], l, n, rng));
        pointer += step;
    }
    out.weights.assign(n_out, step);
    out.total_mass = mass;
    return out;
}

std::size_t smc_peak(std::span<const StateVec> states, std::span<const double> weights, const PeakGrid& grid) {
    const int nc = grid.coarse_cells;
    const int nf = grid.fine_cells;
    const double fine_size = grid.coarse_size / nf;
    auto cell_of = [&](double v) { return static_cast<int>(std::floor((v - grid.origin) / grid.coarse_size)); };

    std::vector<double> coarse(static_cast<std::size_t>(nc * nc), 0.0);
    for (std::size_t i = 0; i < states.size(); ++i) {
        const int cx = cell_of(states[i](0));
        const int cy = cell_of(states[i](2));
        if (cx < 0 || cy < 0 || cx >= nc || cy >= nc || !(weights[i] > 0.0)) continue;
        coarse[static_cast<std::size_t>(cy * nc + cx)] += weights[i];
    }
    const auto best_coarse = std::max_element(coarse.begin(), coarse.end());
    if (!(*best_coarse > 0.0)) throw Error(ErrorCode::EmptyCloud, "no particle mass inside the peak grid");
    const int bc = static_cast<int>(best_coarse - coarse.begin());
    const int bcx = bc % nc;
    const int bcy = bc / nc;
    const double x0 = grid.origin + bcx * grid.coarse_size;
    const double y0 = grid.origin + bcy * grid.coarse_size;

    std::vector<double> fine(static_cast<std::size_t>(nf * nf), 0.0);
    std::vector<int> fine_of(states.size(), -1);
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (cell_of(states[i](0)) != bcx || cell_of(states[i](2)) != bcy || !(weights[i] > 0.0)) continue;
        const int fx = std::clamp(static_cast<int>(std::floor((states[i](0) - x0) / fine_size)), 0, nf - 1);
        const int fy = std::clamp(static_cast<int>(std::floor((states[i](2) - y0) / fine_size)), 0, nf - 1);
        fine_of[i] = fy * nf + fx;
        fine[static_cast<std::size_t>(fine_of[i])] += weights[i];
    }
    const int bf = static_cast<int>(std::max_element(fine.begin(), fine.end()) - fine.begin());

    std::size_t best = states.size();
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (fine_of[i] != bf) continue;
        if (best == states.size() || weights[i] > weights[best]) best = i;
    }
    return best;
}

gm::Context smc_context(const SmcUpdate& update, const models::MeasurementModel& sensor) {
    pointproc::PhdModel<StateVec, MeasVec> model;
    const double pd = update.detect_prob;
    model.detect_prob = [pd](const StateVec&) { return pd; };
    model.likelihood = [sensor](const MeasVec& z, const StateVec& x) {
        return models::gaussian_likelihood(z, x, sensor);
    };
    model.clutter_intensity = [sensor](const MeasVec& z) { return models::filter_clutter_intensity(z, sensor); };
    return gm::Context::from_integrals(std::move(model), update.measurements, update.prior_mass, update.mu_missed,
                                       update.mu_detected);
}

void append_particle_dump_csv(std::ostream& out, int scan, const ParticleCloud& cloud, std::size_t stride,
                              bool header) {
    if (header) out << "scan,x,y,weight\n";
    for (std::size_t i = 0; i < cloud.size(); i += std::max<std::size_t>(stride, 1)) {
        out << scan << ',' << format_double(cloud.states[i](0)) << ',' << format_double(cloud.states[i](2)) << ','
            << format_double(cloud.weights[i]) << '\n';
    }
}

}  // namespace palm::smc
