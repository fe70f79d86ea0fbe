#pragma once

// Moments of the Bayes posterior point process of the PHD filter before the
// Poisson approximation: first, second and third order C-terms, pair
// correlation, reduced Palm intensities, Palm modulation coefficients, the
// canonical-number pmf and per-track conditional pdfs.
//
// Everything is templated on the state and measurement types so the same code
// serves continuous Gaussian-mixture priors, particle priors and the discrete
// models used by the enumeration oracle.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "palm/error.hpp"

namespace palm::pointproc {

/// Which functional argument the C-terms are evaluated at: h -> 1 gives
/// intensities (denominators mu_z), h = 0 gives pdfs (denominators lambda(z)).
enum class Mode { AtOne, AtZero };

enum class ReductionMethod { ExactOne, ExactPair, FirstOrder };

enum class CardinalityStrategy { MapOfPmf, RoundedExpected };

template <class State>
using Integrand = std::function<double(const State&)>;

/// Integration rule over the state space.
template <class State>
using Quadrature = std::function<double(const Integrand<State>&)>;

/// Model ingredients of the predicted PPP and the sensor.
template <class State, class Meas>
struct PhdModel {
    /// Predicted target intensity. May be left empty for particle priors,
    /// in which case only density-free operations are available.
    std::function<double(const State&)> prior_intensity;
    std::function<double(const State&)> detect_prob;
    std::function<double(const Meas&, const State&)> likelihood;
    std::function<double(const Meas&)> clutter_intensity;
};

/// A truncation region: membership test plus an integration rule restricted
/// to the region.
template <class State>
struct Region {
    std::function<bool(const State&)> contains;
    Quadrature<State> integrate;
};

/// Immutable posterior context: model plus the scan's measurements and the
/// integrals mu_Missed, mu_Detected(z_i) and mu_{z_i} = lambda(z_i) + mu_Detected(z_i).
template <class State, class Meas>
class PhdPosteriorContext {
public:
    /// Computes every integral with the supplied quadrature.
    static PhdPosteriorContext build(PhdModel<State, Meas> model, std::vector<Meas> measurements,
                                     const Quadrature<State>& quadrature) {
        const auto& m = model;
        const double prior_mass = quadrature([&m](const State& s) { return m.prior_intensity(s); });
        const double mu_missed = quadrature(
            [&m](const State& s) { return (1.0 - m.detect_prob(s)) * m.prior_intensity(s); });
        std::vector<double> mu_detected;
        mu_detected.reserve(measurements.size());
        for (const auto& z : measurements) {
            mu_detected.push_back(quadrature([&m, &z](const State& s) {
                return m.detect_prob(s) * m.likelihood(z, s) * m.prior_intensity(s);
            }));
        }
        return from_integrals(std::move(model), std::move(measurements), prior_mass, mu_missed,
                              std::move(mu_detected));
    }

    /// For priors whose integrals are known in closed form (Gaussian mixtures)
    /// or as weighted sums (particles).
    static PhdPosteriorContext from_integrals(PhdModel<State, Meas> model, std::vector<Meas> measurements,
                                              double prior_mass, double mu_missed,
                                              std::vector<double> mu_detected) {
        if (!(prior_mass > 0.0)) {
            throw Error(ErrorCode::EmptyPrior, "prior intensity has zero total mass");
        }
        if (mu_detected.size() != measurements.size()) {
            throw Error(ErrorCode::InvalidArgument, "one mu_Detected value per measurement required");
        }
        PhdPosteriorContext ctx;
        ctx.model_ = std::move(model);
        ctx.measurements_ = std::move(measurements);
        ctx.prior_mass_ = prior_mass;
        ctx.mu_missed_ = std::max(0.0, mu_missed);
        ctx.mu_detected_ = std::move(mu_detected);
        ctx.clutter_.reserve(ctx.measurements_.size());
        ctx.mu_z_.reserve(ctx.measurements_.size());
        for (std::size_t i = 0; i < ctx.measurements_.size(); ++i) {
            const double lambda = ctx.model_.clutter_intensity(ctx.measurements_[i]);
            if (!(lambda > 0.0)) {
                throw Error(ErrorCode::ZeroClutterAtMeasurement,
                            "clutter intensity vanishes at measurement " + std::to_string(i));
            }
            ctx.mu_detected_[i] = std::max(0.0, ctx.mu_detected_[i]);
            ctx.clutter_.push_back(lambda);
            ctx.mu_z_.push_back(lambda + ctx.mu_detected_[i]);
        }
        return ctx;
    }

    [[nodiscard]] const PhdModel<State, Meas>& model() const noexcept { return model_; }
    [[nodiscard]] const std::vector<Meas>& measurements() const noexcept { return measurements_; }
    [[nodiscard]] std::size_t measurement_count() const noexcept { return measurements_.size(); }
    [[nodiscard]] double prior_mass() const noexcept { return prior_mass_; }
    [[nodiscard]] double mu_missed() const noexcept { return mu_missed_; }
    [[nodiscard]] const std::vector<double>& mu_detected() const noexcept { return mu_detected_; }
    [[nodiscard]] const std::vector<double>& mu_z() const noexcept { return mu_z_; }
    [[nodiscard]] const std::vector<double>& clutter_at_measurements() const noexcept { return clutter_; }
    [[nodiscard]] bool has_prior_density() const noexcept { return static_cast<bool>(model_.prior_intensity); }

    [[nodiscard]] double denominator(std::size_t i, Mode mode) const {
        return mode == Mode::AtOne ? mu_z_[i] : clutter_[i];
    }

    [[nodiscard]] double prior(const State& x) const { return model_.prior_intensity(x); }

    /// (1 - P^D(x)) f(x)
    [[nodiscard]] double missed_term(const State& x) const {
        return (1.0 - model_.detect_prob(x)) * model_.prior_intensity(x);
    }

    /// P^D(x) p(z_i|x) f(x)
    [[nodiscard]] double detection_term(std::size_t i, const State& x) const {
        return model_.detect_prob(x) * model_.likelihood(measurements_[i], x) * model_.prior_intensity(x);
    }

    /// missed_term / f: needs no prior density.
    [[nodiscard]] double missed_ratio(const State& x) const { return 1.0 - model_.detect_prob(x); }

    /// detection_term / f: needs no prior density.
    [[nodiscard]] double detection_ratio(std::size_t i, const State& x) const {
        return model_.detect_prob(x) * model_.likelihood(measurements_[i], x);
    }

    /// Expected number of targets of the posterior, the integral of c1 in AtOne mode.
    [[nodiscard]] double posterior_mass() const {
        double total = mu_missed_;
        for (std::size_t i = 0; i < mu_z_.size(); ++i) total += mu_detected_[i] / mu_z_[i];
        return total;
    }

private:
    PhdPosteriorContext() = default;

    PhdModel<State, Meas> model_;
    std::vector<Meas> measurements_;
    double prior_mass_ = 0.0;
    double mu_missed_ = 0.0;
    std::vector<double> mu_detected_;
    std::vector<double> clutter_;
    std::vector<double> mu_z_;
};

/// First order term. In AtOne mode this is the Bayes posterior intensity.
template <class State, class Meas>
double c1(const PhdPosteriorContext<State, Meas>& ctx, const State& x, Mode mode = Mode::AtOne) {
    double value = ctx.missed_term(x);
    for (std::size_t i = 0; i < ctx.measurement_count(); ++i) {
        value += ctx.detection_term(i, x) / ctx.denominator(i, mode);
    }
    return value;
}

/// Second order interaction term; never positive.
template <class State, class Meas>
double c2(const PhdPosteriorContext<State, Meas>& ctx, const State& x1, const State& x2, Mode mode = Mode::AtOne) {
    double value = 0.0;
    for (std::size_t i = 0; i < ctx.measurement_count(); ++i) {
        const double d = ctx.denominator(i, mode);
        value -= ctx.detection_term(i, x1) * ctx.detection_term(i, x2) / (d * d);
    }
    return value;
}

/// Third order interaction term; never negative.
template <class State, class Meas>
double c3(const PhdPosteriorContext<State, Meas>& ctx, const State& x1, const State& x2, const State& x3,
          Mode mode = Mode::AtOne) {
    double value = 0.0;
    for (std::size_t i = 0; i < ctx.measurement_count(); ++i) {
        const double d = ctx.denominator(i, mode);
        value += 2.0 * ctx.detection_term(i, x1) * ctx.detection_term(i, x2) * ctx.detection_term(i, x3) /
                 (d * d * d);
    }
    return value;
}

/// rho(x1, x2) = m2 / (m1 m1) = 1 + c2 / (c1 c1), always in [0, 1].
template <class State, class Meas>
double pair_correlation(const PhdPosteriorContext<State, Meas>& ctx, const State& x1, const State& x2) {
    const double a = c1(ctx, x1);
    const double b = c1(ctx, x2);
    if (!(a > 0.0) || !(b > 0.0)) {
        throw Error(ErrorCode::ZeroIntensityPoint, "pair correlation at a point of zero intensity");
    }
    return 1.0 + c2(ctx, x1, x2) / (a * b);
}

namespace detail {

template <class State, class Meas>
double conditioning_intensity(const PhdPosteriorContext<State, Meas>& ctx, const State& x, Mode mode) {
    const double value = c1(ctx, x, mode);
    if (!(value > 0.0)) {
        throw Error(ErrorCode::ConditioningOnZeroIntensity, "conditioning state has zero intensity");
    }
    return value;
}

}  // namespace detail

/// Intensity of the posterior process reduced by the conditioning states.
///
/// ExactOne and ExactPair are the exact reduced Palm intensities for one and
/// two conditioning states. FirstOrder sums the single-target Palm correctors
/// of every conditioning state and clamps the result at zero.
template <class State, class Meas>
double reduced_palm_intensity(const PhdPosteriorContext<State, Meas>& ctx, const State& x,
                              std::span<const State> cond, ReductionMethod method) {
    if (cond.empty()) return c1(ctx, x);
    switch (method) {
        case ReductionMethod::ExactOne: {
            if (cond.size() != 1) {
                throw Error(ErrorCode::InvalidArgument, "ExactOne needs exactly one conditioning state");
            }
            const double m1 = detail::conditioning_intensity(ctx, cond[0], Mode::AtOne);
            return c1(ctx, x) + c2(ctx, cond[0], x) / m1;
        }
        case ReductionMethod::ExactPair: {
            if (cond.size() != 2) {
                throw Error(ErrorCode::InvalidArgument, "ExactPair needs exactly two conditioning states");
            }
            const State& x1 = cond[0];
            const State& x2 = cond[1];
            const double a = detail::conditioning_intensity(ctx, x1, Mode::AtOne);
            const double b = detail::conditioning_intensity(ctx, x2, Mode::AtOne);
            const double denom = a * b + c2(ctx, x1, x2);
            if (!(denom > 0.0)) {
                throw Error(ErrorCode::DegenerateDenominator, "second factorial moment of the pair is not positive");
            }
            const double numer = c2(ctx, x1, x) * b + c2(ctx, x2, x) * a + c3(ctx, x1, x2, x);
            return c1(ctx, x) + numer / denom;
        }
        case ReductionMethod::FirstOrder: {
            double value = c1(ctx, x);
            for (const auto& xj : cond) {
                value += c2(ctx, xj, x) / detail::conditioning_intensity(ctx, xj, Mode::AtOne);
            }
            return std::max(0.0, value);
        }
    }
    return c1(ctx, x);
}

/// Per-measurement multipliers applied to the Bernoulli components of the
/// posterior once targets are known to exist at the conditioning states.
template <class State>
struct PalmModulation {
    std::vector<double> alpha;
    std::vector<State> conditioning_set;
    Mode evaluation_mode = Mode::AtOne;
};

/// alpha_j = 1 - sum_l P^D(x_l) p(z_j|x_l) f(x_l) / (D_j c1(x_l)).
///
/// The prior intensity cancels between numerator and c1(x_l), so the
/// coefficients are computed in density-free form; this also serves particle
/// priors. Values may be negative; clamping is left to the consumer.
template <class State, class Meas>
PalmModulation<State> palm_modulation(const PhdPosteriorContext<State, Meas>& ctx, std::span<const State> cond,
                                      Mode mode = Mode::AtOne) {
    const std::size_t k = ctx.measurement_count();
    PalmModulation<State> result;
    result.alpha.assign(k, 1.0);
    result.conditioning_set.assign(cond.begin(), cond.end());
    result.evaluation_mode = mode;
    std::vector<double> ratios(k);
    for (const auto& xl : cond) {
        if (ctx.has_prior_density() && !(ctx.prior(xl) > 0.0)) {
            throw Error(ErrorCode::ConditioningOnZeroIntensity, "prior intensity vanishes at conditioning state");
        }
        double normalizer = ctx.missed_ratio(xl);
        for (std::size_t i = 0; i < k; ++i) {
            ratios[i] = ctx.detection_ratio(i, xl);
            normalizer += ratios[i] / ctx.denominator(i, mode);
        }
        if (!(normalizer > 0.0)) {
            throw Error(ErrorCode::ConditioningOnZeroIntensity, "conditioning state has zero intensity");
        }
        for (std::size_t j = 0; j < k; ++j) {
            result.alpha[j] -= ratios[j] / (ctx.denominator(j, mode) * normalizer);
        }
    }
    return result;
}

/// Missed term plus alpha-modulated Bernoulli terms, clamped at zero.
/// With the coefficients of palm_modulation this is the first-order reduced
/// intensity (AtOne) or the unnormalized conditional track pdf (AtZero).
template <class State, class Meas>
double modulated_intensity(const PhdPosteriorContext<State, Meas>& ctx, const State& x,
                           const PalmModulation<State>& modulation) {
    double value = ctx.missed_term(x);
    for (std::size_t j = 0; j < ctx.measurement_count(); ++j) {
        value += modulation.alpha[j] * ctx.detection_term(j, x) / ctx.denominator(j, modulation.evaluation_mode);
    }
    return std::max(0.0, value);
}

/// Posterior pmf of the number of targets, truncated at n_max.
struct CanonicalPmf {
    std::vector<double> probabilities;
    std::size_t n_max = 0;

    [[nodiscard]] double tail_mass() const;
    [[nodiscard]] double mean() const;
};

/// Elementary symmetric polynomials sigma_0..sigma_k of the arguments, by
/// expanding prod_j (1 + r_j t) one factor at a time.
std::vector<double> elementary_symmetric(std::span<const double> r);

/// pmf of a sum of a Poisson(mu_missed) count and independent Bernoulli
/// counts with the given existence probabilities.
CanonicalPmf poisson_bernoulli_pmf(double mu_missed, std::span<const double> existence, std::size_t n_max);

/// k + ceil(mu) + 20 sqrt(mu + 1)
std::size_t default_n_max(double mu_missed, std::size_t measurement_count);

/// Index of the largest pmf entry, smallest index on ties.
std::size_t map_cardinality(const CanonicalPmf& pmf);

/// Nearest integer to the expected target count, halves rounded away from zero.
std::size_t rounded_expected_cardinality(double expected_count);

/// sum n(n-1)p(n) / (sum n p(n))^2: the ratio of the reduced Palm intensity of
/// an IID cluster process to its intensity.
double iid_cluster_ratio(std::span<const double> pmf);

template <class State, class Meas>
CanonicalPmf canonical_pmf(const PhdPosteriorContext<State, Meas>& ctx, std::size_t n_max) {
    // r_j / (1 + r_j) with r_j = mu_Detected(z_j) / lambda(z_j); the product
    // prod_j (1 + r_j t) is expanded after dividing each factor by (1 + r_j),
    // which keeps the coefficients bounded when clutter is sparse.
    std::vector<double> existence;
    existence.reserve(ctx.measurement_count());
    for (std::size_t j = 0; j < ctx.measurement_count(); ++j) {
        existence.push_back(ctx.mu_detected()[j] / ctx.mu_z()[j]);
    }
    return poisson_bernoulli_pmf(ctx.mu_missed(), existence, n_max);
}

template <class State, class Meas>
CanonicalPmf canonical_pmf(const PhdPosteriorContext<State, Meas>& ctx) {
    return canonical_pmf(ctx, default_n_max(ctx.mu_missed(), ctx.measurement_count()));
}

template <class State, class Meas>
std::size_t canonical_estimate(const PhdPosteriorContext<State, Meas>& ctx, CardinalityStrategy strategy) {
    if (strategy == CardinalityStrategy::MapOfPmf) return map_cardinality(canonical_pmf(ctx));
    return rounded_expected_cardinality(ctx.posterior_mass());
}

/// Conditional pdf of one extracted target given the other extracted targets,
/// truncated to a support region and normalized there.
template <class State, class Meas>
class TrackPdf {
public:
    TrackPdf(PhdPosteriorContext<State, Meas> ctx, PalmModulation<State> modulation, Region<State> support,
             double normalizer)
        : ctx_(std::move(ctx)), modulation_(std::move(modulation)), support_(std::move(support)),
          normalizer_(normalizer) {}

    [[nodiscard]] double unnormalized(const State& x) const {
        if (!support_.contains(x)) return 0.0;
        return modulated_intensity(ctx_, x, modulation_);
    }

    double operator()(const State& x) const { return unnormalized(x) / normalizer_; }

    [[nodiscard]] double normalizer() const noexcept { return normalizer_; }
    [[nodiscard]] const PalmModulation<State>& modulation() const noexcept { return modulation_; }

private:
    PhdPosteriorContext<State, Meas> ctx_;
    PalmModulation<State> modulation_;
    Region<State> support_;
    double normalizer_;
};

/// pdf proportional to c1(x, AtZero) + sum_j c2(x_j, x, AtZero) / c1(x_j, AtZero),
/// clamped at zero and normalized over the support.
template <class State, class Meas>
TrackPdf<State, Meas> conditional_track_pdf(const PhdPosteriorContext<State, Meas>& ctx,
                                            std::span<const State> cond_others, Region<State> support) {
    auto modulation = palm_modulation(ctx, cond_others, Mode::AtZero);
    const double mass = support.integrate([&](const State& x) {
        return support.contains(x) ? modulated_intensity(ctx, x, modulation) : 0.0;
    });
    if (!(mass > 0.0)) {
        throw Error(ErrorCode::ZeroMassOnSupport, "conditional track pdf has no mass on its support");
    }
    return TrackPdf<State, Meas>(ctx, std::move(modulation), std::move(support), mass);
}

}  // namespace palm::pointproc
