#pragma once

#include <cstddef>
#include <iosfwd>
#include <random>
#include <span>
#include <vector>

#include "palm/gm_phd.hpp"
#include "palm/models.hpp"
#include "palm/scenario.hpp"
#include "palm/types.hpp"

namespace palm::smc {

struct ParticleCloud {
    std::vector<StateVec> states;
    std::vector<double> weights;
    double total_mass = 0.0;

    [[nodiscard]] std::size_t size() const { return states.size(); }
    void recompute_mass();
};

/// Dithering covariance added after every resampling step.
StateCov default_dither();

struct SmcParams {
    std::size_t particles_per_component = 20000;
    std::size_t particle_count = 40000;
    StateCov dither = default_dither();
};

/// Coarse/fine position grid used to locate intensity peaks.
struct PeakGrid {
    double origin = -2040.0;
    double coarse_size = 80.0;
    int coarse_cells = 51;
    int fine_cells = 21;
};

/// Posterior of one scan plus the prior weights and integrals, so that
/// Palm-modulated weights can be recomputed per measurement.
struct SmcUpdate {
    std::vector<StateVec> states;
    std::vector<double> prior_weights;
    ParticleCloud posterior;
    int scan = 0;
    std::vector<MeasVec> measurements;
    double detect_prob = 0.0;
    double prior_mass = 0.0;
    double mu_missed = 0.0;
    std::vector<double> mu_detected;
    std::vector<double> clutter;
    std::vector<double> mu_z;
};

/// Samples particles_per_component particles from every mixture component;
/// the cloud carries the mixture's total mass.
ParticleCloud smc_init(const gm::GaussianMixture& init, std::mt19937_64& rng, const SmcParams& params = {});

ParticleCloud smc_predict(const ParticleCloud& cloud, const models::MotionModel& motion, std::mt19937_64& rng);

SmcUpdate smc_update(const ParticleCloud& cloud, const scenario::Scan& scan, const models::MeasurementModel& sensor);

/// Systematic resampling to particle_count equal weights plus Gaussian dither.
ParticleCloud smc_resample_dither(const ParticleCloud& cloud, std::mt19937_64& rng, const SmcParams& params = {});

/// Index of the heaviest particle inside the heaviest fine cell of the
/// heaviest coarse cell. Ties go to the lowest cell and particle index.
std::size_t smc_peak(std::span<const StateVec> states, std::span<const double> weights, const PeakGrid& grid = {});

/// Density-free point-process context of an update.
gm::Context smc_context(const SmcUpdate& update, const models::MeasurementModel& sensor);

/// Every stride-th particle: scan, x, y, weight.
void append_particle_dump_csv(std::ostream& out, int scan, const ParticleCloud& cloud, std::size_t stride,
                              bool header);

}  // namespace palm::smc
