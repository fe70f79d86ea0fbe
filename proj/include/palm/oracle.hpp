#pragma once

// Brute-force ground truth for the closed forms in pointproc. The posterior
// of a small discrete model is tabulated over every count vector (a multiset
// of grid cells) by summing the measurement likelihood over all assignments of
// measurements to distinct targets or to clutter. Nothing here uses the
// factorized structure of the posterior.

#include <cstddef>
#include <cstdint>
#include <map>
#include <vector>

#include "palm/pointproc.hpp"

namespace palm::oracle {

/// A finite grid of state cells carrying intensities (per unit cell volume)
/// and a fixed set of observed measurements.
struct DiscreteModel {
    std::vector<double> prior_intensity;            // per state
    std::vector<double> detect_prob;                // per state
    std::vector<std::vector<double>> likelihood;    // [state][measurement]
    std::vector<double> clutter_intensity;          // per measurement
    double cell_volume = 1.0;

    [[nodiscard]] std::size_t state_count() const noexcept { return prior_intensity.size(); }
    [[nodiscard]] std::size_t measurement_count() const noexcept { return clutter_intensity.size(); }
    [[nodiscard]] double prior_mass() const;

    /// Throws InvalidArgument on malformed tables or out-of-range values.
    void validate() const;
};

using DiscreteContext = pointproc::PhdPosteriorContext<int, int>;

/// States and measurements are cell / measurement indices.
pointproc::PhdModel<int, int> to_phd_model(const DiscreteModel& model);
pointproc::Quadrature<int> cell_quadrature(const DiscreteModel& model);
std::vector<int> measurement_indices(const DiscreteModel& model);
DiscreteContext make_context(const DiscreteModel& model);

/// Smallest n with Poisson(prior mass) tail beyond n below the tolerance, plus
/// the measurement count.
std::size_t recommended_n_max(const DiscreteModel& model, double tail_tolerance = 1e-13);

using CountVector = std::vector<std::uint8_t>;

/// Exact joint posterior over count vectors with at most n_max targets.
struct EnumeratedPosterior {
    std::size_t state_count = 0;
    double cell_volume = 1.0;
    std::size_t n_max = 0;
    std::map<CountVector, double> probability;

    /// Symmetric density N! p(N, x_1..x_N | nu) of the unordered event given
    /// by the cell multiset; zero if the event was not enumerated.
    [[nodiscard]] double event_density(const std::vector<int>& cells) const;
};

constexpr std::size_t kDefaultMaxTerms = 50'000'000;

/// Throws EnumerationTooLarge if count vectors times assignment patterns
/// exceeds max_terms.
EnumeratedPosterior enumerate_posterior(const DiscreteModel& model, std::size_t n_max,
                                        std::size_t max_terms = kDefaultMaxTerms);

/// Factorial moment densities and the canonical pmf, by weighted counting.
class OracleMoments {
public:
    explicit OracleMoments(const EnumeratedPosterior& posterior);

    [[nodiscard]] double m1(int s) const { return m1_[s]; }
    [[nodiscard]] double m2(int s, int t) const { return m2_[index(s, t)]; }
    [[nodiscard]] double m3(int s, int t, int u) const { return m3_[index(s, t, u)]; }
    [[nodiscard]] const std::vector<double>& canonical_pmf() const noexcept { return pmf_; }

    /// m2(x1, x) / m1(x1)
    [[nodiscard]] double reduced_palm(int x1, int x) const;
    /// m3(x1, x2, x) / m2(x1, x2)
    [[nodiscard]] double reduced_palm(int x1, int x2, int x) const;

    /// Conditional pdf of one target at x given targets at the other cells,
    /// for events with exactly |others| + 1 targets, normalized over the grid.
    [[nodiscard]] std::vector<double> conditional_pdf(const std::vector<int>& others) const;

private:
    [[nodiscard]] std::size_t index(int s, int t) const { return static_cast<std::size_t>(s) * n_ + t; }
    [[nodiscard]] std::size_t index(int s, int t, int u) const {
        return (static_cast<std::size_t>(s) * n_ + t) * n_ + u;
    }

    const EnumeratedPosterior* posterior_;
    std::size_t n_;
    std::vector<double> m1_;
    std::vector<double> m2_;
    std::vector<double> m3_;
    std::vector<double> pmf_;
};

}  // namespace palm::oracle
