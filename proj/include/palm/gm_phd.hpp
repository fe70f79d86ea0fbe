#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "palm/models.hpp"
#include "palm/pointproc.hpp"
#include "palm/scenario.hpp"
#include "palm/types.hpp"

namespace palm::gm {

struct MeasurementTag {
    int scan = 0;
    int index = 0;
    friend bool operator==(const MeasurementTag&, const MeasurementTag&) = default;
    friend auto operator<=>(const MeasurementTag&, const MeasurementTag&) = default;
};

struct GaussianComponent {
    double weight = 0.0;
    StateVec mean = StateVec::Zero();
    StateCov cov = StateCov::Identity();
    /// Sorted (scan, measurement) pairs from the last few scans.
    std::vector<MeasurementTag> history;
    /// Measurement of the current scan that produced this component, -1 for
    /// the missed-detection copy. Only meaningful straight after gm_update.
    int source = -1;
    /// Index of the prior component it was updated from.
    int parent = -1;
};

struct GmParams {
    double prune_threshold = 1e-5;
    double merge_threshold = 4.0;
    std::size_t max_components = 500;
    double extract_threshold = 0.5;
    int history_scans = 5;
};

struct GaussianMixture {
    std::vector<GaussianComponent> components;
    [[nodiscard]] double mass() const;
};

/// Bayes posterior of one scan before management, with the integrals needed
/// to rebuild the point-process context.
struct GmUpdate {
    GaussianMixture prior;
    GaussianMixture posterior;
    int scan = 0;
    std::vector<MeasVec> measurements;
    double detect_prob = 0.0;
    double mu_missed = 0.0;
    std::vector<double> mu_detected;
    std::vector<double> clutter;
    std::vector<double> mu_z;
};

using Context = pointproc::PhdPosteriorContext<StateVec, MeasVec>;

/// Two-point differencing on scans 1-2 followed by Kalman filtering through
/// the remaining initialization scans, one component of weight 1 per target.
GaussianMixture init_two_point(const std::vector<scenario::Scan>& init_scans, const models::MotionModel& motion,
                               const models::MeasurementModel& sensor, int target_count = 2,
                               int history_scans = 5);

GaussianMixture gm_predict(const GaussianMixture& mix, const models::MotionModel& motion);

GmUpdate gm_update(const GaussianMixture& prior, const scenario::Scan& scan, const models::MeasurementModel& sensor,
                   int history_scans = 5);

GaussianMixture gm_manage(const GaussianMixture& mix, const GmParams& params = {});

std::vector<StateVec> gm_extract_baseline(const GaussianMixture& mix, double threshold = 0.5);

/// Point-process context of an update. With with_density the prior mixture
/// density is attached; without it only density-free operations (Palm
/// modulation, cardinality) are available, which avoids underflowing the
/// prior density far from the mixture.
Context gm_context(const GmUpdate& update, const models::MeasurementModel& sensor, bool with_density = true);

/// Standalone Kalman measurement update; returns the updated (mean, cov).
std::pair<StateVec, StateCov> kalman_update(const StateVec& mean, const StateCov& cov, const MeasVec& z,
                                            const models::MeasurementModel& sensor);

/// Mixture density at x.
double mixture_density(const GaussianMixture& mix, const StateVec& x);

/// One row per component: scan, weight, mean, upper triangle of cov.
void append_snapshot_csv(std::ostream& out, int scan, const GaussianMixture& mix, bool header);

}  // namespace palm::gm
