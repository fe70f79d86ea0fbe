#pragma once

#include <cstddef>
#include <vector>

#include "palm/gm_phd.hpp"
#include "palm/models.hpp"
#include "palm/pointproc.hpp"
#include "palm/smc_phd.hpp"
#include "palm/types.hpp"

namespace palm::extract {

struct PalmParams {
    pointproc::CardinalityStrategy strategy = pointproc::CardinalityStrategy::RoundedExpected;
    /// Scans of measurement history that define the GM truncation region.
    int history_scans = 5;
    /// Particle truncation gate around the peak, in measurement sigmas.
    double gate_sigmas = 3.0;
    smc::PeakGrid grid;
};

struct TrackEstimate {
    std::size_t peak_index = 0;
    StateVec peak_state = StateVec::Zero();
    /// Mean of the conditional track pdf.
    StateVec point_estimate = StateVec::Zero();
    StateCov covariance = StateCov::Zero();
    /// Components or particles inside the truncation region and their
    /// normalized pdf weights.
    std::vector<std::size_t> cluster_members;
    std::vector<double> member_weights;
    /// Set when the clamped pdf had no mass on its support; the peak state
    /// is reported instead.
    bool empty_support = false;
};

struct ExtractionStep {
    std::size_t peak_index = 0;
    StateVec peak_state = StateVec::Zero();
    double peak_weight = 0.0;
    /// Palm modulation after conditioning on this and all earlier peaks.
    std::vector<double> alpha;
    /// Size of the shared-measurement cluster holding the peak (GM only).
    std::size_t cluster_size = 0;
};

struct ExtractionResult {
    std::size_t cardinality = 0;
    double posterior_mass = 0.0;
    std::vector<TrackEstimate> tracks;
    std::vector<ExtractionStep> steps;
    /// Fewer than `cardinality` tracks were found because the reduced
    /// intensity ran out of mass or its peak repeated an earlier one.
    bool degenerate_peak = false;

    [[nodiscard]] std::vector<StateVec> point_estimates() const;
};

/// Extraction from the pre-management Gaussian-mixture posterior.
ExtractionResult extract(const gm::GmUpdate& update, const models::MeasurementModel& sensor,
                         const PalmParams& params = {});

/// Extraction from the particle posterior before resampling.
ExtractionResult extract(const smc::SmcUpdate& update, const models::MeasurementModel& sensor,
                         const PalmParams& params = {});

/// Connected components of the graph linking components that share a
/// (scan, measurement) pair within the last `horizon` scans.
std::vector<std::vector<std::size_t>> cluster_by_shared_measurements(
    const std::vector<gm::GaussianComponent>& components, int current_scan, int horizon = 5);

}  // namespace palm::extract
