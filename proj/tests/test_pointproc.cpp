#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "palm/oracle.hpp"
#include "palm/pointproc.hpp"
#include "support/random_models.hpp"

using namespace palm;
using namespace palm::pointproc;

namespace {

double normal_pdf(double x, double mean, double sd) {
    const double u = (x - mean) / sd;
    return std::exp(-0.5 * u * u) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

// Composite Simpson rule on [-lim, lim].
Quadrature<double> simpson(double lim, int intervals = 8000) {
    return [=](const Integrand<double>& f) {
        const double h = 2.0 * lim / intervals;
        double sum = f(-lim) + f(lim);
        for (int i = 1; i < intervals; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(-lim + i * h);
        return sum * h / 3.0;
    };
}

struct LineSetup {
    std::vector<double> prior_means{0.0};
    std::vector<double> prior_weights{1.0};
    double prior_sd = 1.0;
    double pd = 0.9;
    double meas_sd = 0.5;
    double clutter = 1e-9;
};

using LineContext = PhdPosteriorContext<double, double>;

LineContext line_context(const LineSetup& s, std::vector<double> z, double lim = 30.0) {
    PhdModel<double, double> m;
    m.prior_intensity = [s](const double& x) {
        double f = 0.0;
        for (std::size_t i = 0; i < s.prior_means.size(); ++i) f += s.prior_weights[i] * normal_pdf(x, s.prior_means[i], s.prior_sd);
        return f;
    };
    m.detect_prob = [pd = s.pd](const double&) { return pd; };
    m.likelihood = [sd = s.meas_sd](const double& zz, const double& x) { return normal_pdf(zz, x, sd); };
    m.clutter_intensity = [c = s.clutter](const double&) { return c; };
    return LineContext::build(m, std::move(z), simpson(lim));
}

}  // namespace

TEST(BuildContext, DetectionOffKeepsWholePriorMissed) {
    LineSetup s;
    s.pd = 0.0;
    s.prior_weights = {2.5};
    const auto ctx = line_context(s, {});
    EXPECT_NEAR(ctx.mu_missed(), 2.5, 1e-10);
    EXPECT_TRUE(ctx.mu_z().empty());
}

TEST(BuildContext, ConstantDetectionProbability) {
    const auto ctx = line_context(LineSetup{}, {});
    EXPECT_NEAR(ctx.mu_missed(), 0.1, 1e-10);
}

TEST(BuildContext, DiscreteIntegralsMatchExhaustiveSum) {
    oracle::DiscreteModel m;
    m.prior_intensity = {0.2, 0.5, 0.3};
    m.detect_prob = {0.9, 0.5, 0.0};
    m.likelihood = {{1.0, 0.0}, {0.5, 2.0}, {3.0, 3.0}};
    m.clutter_intensity = {0.4, 0.7};
    m.cell_volume = 2.0;
    const auto ctx = oracle::make_context(m);
    for (int j = 0; j < 2; ++j) {
        double sum = 0.0;
        for (int s = 0; s < 3; ++s) sum += m.detect_prob[s] * m.likelihood[s][j] * m.prior_intensity[s] * 2.0;
        EXPECT_NEAR(ctx.mu_z()[j], m.clutter_intensity[j] + sum, 1e-15);
    }
    EXPECT_NEAR(ctx.mu_missed(), 2.0 * (0.1 * 0.2 + 0.5 * 0.5 + 0.3), 1e-15);
}

TEST(BuildContext, Errors) {
    oracle::DiscreteModel m;
    m.prior_intensity = {0.0, 0.0};
    m.detect_prob = {0.5, 0.5};
    m.likelihood = {{}, {}};
    EXPECT_THROW(
        {
            try {
                oracle::make_context(m);
            } catch (const Error& e) {
                EXPECT_EQ(e.code(), ErrorCode::EmptyPrior);
                throw;
            }
        },
        Error);

    LineSetup s;
    s.clutter = 0.0;
    try {
        line_context(s, {0.0});
        FAIL() << "expected ZeroClutterAtMeasurement";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ZeroClutterAtMeasurement);
    }
}

TEST(C1, NoMeasurementsIsThinnedPrior) {
    const auto ctx = line_context(LineSetup{}, {});
    for (double x : {-1.0, 0.0, 0.7}) {
        const double expected = 0.1 * normal_pdf(x, 0.0, 1.0);
        EXPECT_NEAR(c1(ctx, x, Mode::AtOne), expected, 1e-15);
        EXPECT_NEAR(c1(ctx, x, Mode::AtZero), expected, 1e-15);
    }
}

TEST(C1, SingleDetectedTargetIntegratesToTwoMinusPd) {
    const auto ctx = line_context(LineSetup{}, {0.3});
    const double mass = simpson(30.0)([&](const double& x) { return c1(ctx, x); });
    EXPECT_NEAR(mass, 2.0 - 0.9, 1e-6);
    EXPECT_NEAR(ctx.posterior_mass(), 1.1, 1e-6);
}

TEST(C2, VanishingCases) {
    const auto empty = line_context(LineSetup{}, {});
    EXPECT_EQ(c2(empty, 0.1, 0.2), 0.0);
    EXPECT_EQ(c3(empty, 0.1, 0.2, 0.3), 0.0);

    oracle::DiscreteModel m;
    m.prior_intensity = {0.4, 0.4};
    m.detect_prob = {0.0, 0.8};
    m.likelihood = {{1.0}, {1.0}};
    m.clutter_intensity = {0.5};
    const auto ctx = oracle::make_context(m);
    EXPECT_EQ(c2(ctx, 0, 1), 0.0);
    EXPECT_EQ(c3(ctx, 1, 0, 1), 0.0);
    EXPECT_LT(c2(ctx, 1, 1), 0.0);
    EXPECT_GT(c3(ctx, 1, 1, 1), 0.0);
}

TEST(PairCorrelation, NoMeasurementsIsOne) {
    const auto ctx = line_context(LineSetup{}, {});
    EXPECT_EQ(pair_correlation(ctx, -0.5, 0.4), 1.0);
}

TEST(PairCorrelation, WellSeparatedMeasurementsDecouple) {
    LineSetup s;
    s.prior_means = {-10.0, 10.0};
    s.prior_weights = {1.0, 1.0};
    const auto ctx = line_context(s, {-10.0, 10.0});
    EXPECT_NEAR(pair_correlation(ctx, -10.1, 9.8), 1.0, 1e-6);
    // Same measurement region: strongly repulsive.
    EXPECT_LT(pair_correlation(ctx, -10.0, -10.05), 0.5);
}

TEST(PairCorrelation, ZeroIntensityPointRaises) {
    oracle::DiscreteModel m;
    m.prior_intensity = {0.4, 0.0};
    m.detect_prob = {0.5, 0.5};
    m.likelihood = {{1.0}, {1.0}};
    m.clutter_intensity = {0.5};
    const auto ctx = oracle::make_context(m);
    try {
        (void)pair_correlation(ctx, 0, 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ZeroIntensityPoint);
    }
}

TEST(ReducedPalm, EmptyConditioningIsPosteriorIntensity) {
    const auto ctx = line_context(LineSetup{}, {0.3});
    const std::vector<double> none;
    for (auto method : {ReductionMethod::ExactOne, ReductionMethod::ExactPair, ReductionMethod::FirstOrder}) {
        EXPECT_EQ(reduced_palm_intensity(ctx, 0.2, std::span<const double>(none), method), c1(ctx, 0.2));
    }
}

TEST(ReducedPalm, UndetectableConditioningStateChangesNothing) {
    oracle::DiscreteModel m;
    m.prior_intensity = {0.4, 0.3, 0.2};
    m.detect_prob = {0.0, 0.8, 0.6};
    m.likelihood = {{1.0, 0.5}, {1.0, 0.2}, {0.3, 2.0}};
    m.clutter_intensity = {0.5, 0.9};
    const auto ctx = oracle::make_context(m);
    const std::vector<int> cond{0};
    const auto alpha = palm_modulation(ctx, std::span<const int>(cond));
    for (double a : alpha.alpha) EXPECT_EQ(a, 1.0);
    for (int x = 0; x < 3; ++x) {
        EXPECT_DOUBLE_EQ(reduced_palm_intensity(ctx, x, std::span<const int>(cond), ReductionMethod::ExactOne), c1(ctx, x));
    }
}

TEST(ReducedPalm, FirstOrderAgreesWithExactPairWhenSeparated) {
    LineSetup s;
    s.prior_means = {-10.0, 10.0};
    s.prior_weights = {1.0, 1.0};
    s.clutter = 1e-3;
    const auto ctx = line_context(s, {-10.0, 10.0});
    const std::vector<double> cond{-10.0, 10.0};
    for (double x : {-11.0, -10.0, -9.5, 9.0, 10.0, 10.7}) {
        const double exact = reduced_palm_intensity(ctx, x, std::span<const double>(cond), ReductionMethod::ExactPair);
        const double approx = reduced_palm_intensity(ctx, x, std::span<const double>(cond), ReductionMethod::FirstOrder);
        EXPECT_NEAR(approx / exact, 1.0, 1e-6) << "x = " << x;
    }
}

TEST(ReducedPalm, OverlappingRegionsShowAGap) {
    LineSetup s;
    s.prior_means = {-0.2, 0.2};
    s.prior_weights = {1.0, 1.0};
    s.clutter = 1e-3;
    const auto ctx = line_context(s, {-0.2, 0.2});
    const std::vector<double> cond{-0.2, 0.2};
    const double exact = reduced_palm_intensity(ctx, 0.0, std::span<const double>(cond), ReductionMethod::ExactPair);
    const double approx = reduced_palm_intensity(ctx, 0.0, std::span<const double>(cond), ReductionMethod::FirstOrder);
    RecordProperty("relative_gap", std::to_string(std::abs(approx - exact) / exact));
    EXPECT_GT(std::abs(approx - exact) / exact, 1e-4);
}

TEST(ReducedPalm, WrongConditioningSizeAndZeroIntensity) {
    const auto ctx = line_context(LineSetup{}, {0.3});
    const std::vector<double> two{0.1, 0.2};
    EXPECT_THROW((void)reduced_palm_intensity(ctx, 0.0, std::span<const double>(two), ReductionMethod::ExactOne), Error);

    oracle::DiscreteModel m;
    m.prior_intensity = {0.4, 0.0};
    m.detect_prob = {0.5, 0.5};
    m.likelihood = {{1.0}, {1.0}};
    m.clutter_intensity = {0.5};
    const auto dctx = oracle::make_context(m);
    const std::vector<int> cond{1};
    try {
        (void)reduced_palm_intensity(dctx, 0, std::span<const int>(cond), ReductionMethod::FirstOrder);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ConditioningOnZeroIntensity);
    }
    try {
        (void)palm_modulation(dctx, std::span<const int>(cond));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ConditioningOnZeroIntensity);
    }
}

TEST(PalmModulation, DominantBernoulliIsWhitened) {
    // One target generates the only measurement with P^D = 1. The posterior
    // is a single Bernoulli, so conditioning on its point removes it entirely:
    // alpha is zero, below the clutter ratio lambda / mu_z.
    LineSetup s;
    s.pd = 1.0;
    s.prior_sd = 0.01;
    s.meas_sd = 1.0;
    s.clutter = 1e-4;
    const auto ctx = line_context(s, {0.0}, 2.0);
    const std::vector<double> cond{0.0};
    const auto mod = palm_modulation(ctx, std::span<const double>(cond));
    EXPECT_NEAR(mod.alpha[0], 0.0, 1e-12);
    EXPECT_LE(mod.alpha[0], s.clutter / ctx.mu_z()[0]);

    // With missed detections possible the notch is partial:
    // alpha = (1 - P^D) / ((1 - P^D) + P^D p(z|x1) / mu_z).
    s.pd = 0.9;
    const auto partial = line_context(s, {0.0}, 2.0);
    const auto mod2 = palm_modulation(partial, std::span<const double>(cond));
    const double ratio = 0.9 * normal_pdf(0.0, 0.0, 1.0) / partial.mu_z()[0];
    EXPECT_NEAR(mod2.alpha[0], 0.1 / (0.1 + ratio), 1e-12);
}

TEST(PalmModulation, ModulatedIntensityIsFirstOrderReduction) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const auto model = test_support::random_model(rng);
        const auto ctx = oracle::make_context(model);
        std::vector<int> cond;
        for (int s = 0; s < static_cast<int>(model.state_count()) && cond.size() < 2; ++s) {
            if (c1(ctx, s) > 0.0) cond.push_back(s);
        }
        const auto mod = palm_modulation(ctx, std::span<const int>(cond));
        for (double a : mod.alpha) EXPECT_LE(a, 1.0);
        for (int x = 0; x < static_cast<int>(model.state_count()); ++x) {
            EXPECT_NEAR(modulated_intensity(ctx, x, mod),
                        reduced_palm_intensity(ctx, x, std::span<const int>(cond), ReductionMethod::FirstOrder),
                        1e-12 * (1.0 + c1(ctx, x)));
        }
    }
}

TEST(ElementarySymmetric, MatchesSubsetEnumeration) {
    const std::vector<double> r{0.5, 2.0, 1.5, 3.0, 0.25};
    const auto sigma = elementary_symmetric(r);
    std::vector<double> brute(r.size() + 1, 0.0);
    for (unsigned mask = 0; mask < (1u << r.size()); ++mask) {
        double prod = 1.0;
        int bits = 0;
        for (std::size_t j = 0; j < r.size(); ++j) {
            if (mask & (1u << j)) {
                prod *= r[j];
                ++bits;
            }
        }
        brute[bits] += prod;
    }
    for (std::size_t i = 0; i < brute.size(); ++i) EXPECT_NEAR(sigma[i], brute[i], 1e-12);
}

TEST(CanonicalPmf, NoMeasurementsIsPoisson) {
    LineSetup s;
    s.prior_weights = {3.0};
    s.pd = 0.4;
    const auto ctx = line_context(s, {});
    const auto pmf = canonical_pmf(ctx);
    const double mu = 3.0 * 0.6;
    double term = std::exp(-mu);
    for (std::size_t n = 0; n < 15; ++n) {
        EXPECT_NEAR(pmf.probabilities[n], term, 1e-12);
        term *= mu / static_cast<double>(n + 1);
    }
    EXPECT_LT(pmf.tail_mass(), 1e-12);
}

TEST(CanonicalPmf, PolynomialMultiplicationOracle) {
    // mu_Missed = 0.5 and r = (1, 2): choose lambda = 1 and mu_Detected = r.
    oracle::DiscreteModel m;
    m.prior_intensity = {0.5, 1.0, 2.0};
    m.detect_prob = {0.0, 1.0, 1.0};
    m.likelihood = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
    m.clutter_intensity = {1.0, 1.0};
    const auto ctx = oracle::make_context(m);
    ASSERT_DOUBLE_EQ(ctx.mu_missed(), 0.5);

    // Oracle: coefficients of exp((x-1) 0.5) (1 + x)/2 (1 + 2x)/3 by series
    // multiplication.
    const std::size_t n_max = 30;
    std::vector<double> series(n_max + 1);
    double term = std::exp(-0.5);
    for (std::size_t n = 0; n <= n_max; ++n) {
        series[n] = term;
        term *= 0.5 / static_cast<double>(n + 1);
    }
    auto multiply = [&](double c0, double c1v) {
        std::vector<double> out(n_max + 1, 0.0);
        for (std::size_t n = 0; n <= n_max; ++n) {
            out[n] += c0 * series[n];
            if (n + 1 <= n_max) out[n + 1] += c1v * series[n];
        }
        series = out;
    };
    multiply(0.5, 0.5);
    multiply(1.0 / 3.0, 2.0 / 3.0);

    const auto pmf = canonical_pmf(ctx, n_max);
    const double f0 = std::exp(-0.5) / 6.0;
    EXPECT_NEAR(pmf.probabilities[0], f0, 1e-15);
    EXPECT_NEAR(pmf.probabilities[1], f0 * (0.5 + 3.0), 1e-15);
    for (std::size_t n = 0; n <= n_max; ++n) EXPECT_NEAR(pmf.probabilities[n], series[n], 1e-15);
}

TEST(CanonicalPmf, TruncationInsufficient) {
    LineSetup s;
    s.prior_weights = {20.0};
    s.pd = 0.0;
    const auto ctx = line_context(s, {});
    try {
        (void)canonical_pmf(ctx, 5);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::TruncationInsufficient);
    }
    EXPECT_NO_THROW((void)canonical_pmf(ctx));
}

TEST(CanonicalEstimate, RoundingOfExpectedCount) {
    EXPECT_EQ(rounded_expected_cardinality(1.1), 1u);
    EXPECT_EQ(rounded_expected_cardinality(0.1), 0u);
    EXPECT_EQ(rounded_expected_cardinality(0.6), 1u);
    EXPECT_EQ(rounded_expected_cardinality(1.5), 2u);
    EXPECT_EQ(rounded_expected_cardinality(2.5), 3u);

    LineSetup s;
    const auto detected = line_context(s, {0.3});
    EXPECT_EQ(canonical_estimate(detected, CardinalityStrategy::RoundedExpected), 1u);
    const auto missed = line_context(s, {});
    EXPECT_EQ(canonical_estimate(missed, CardinalityStrategy::RoundedExpected), 0u);
    s.pd = 0.4;
    const auto missed_low = line_context(s, {});
    EXPECT_EQ(canonical_estimate(missed_low, CardinalityStrategy::RoundedExpected), 1u);
}

TEST(CanonicalEstimate, MapBreaksTiesTowardSmallerCount) {
    CanonicalPmf pmf;
    pmf.probabilities = {0.1, 0.35, 0.35, 0.2};
    pmf.n_max = 3;
    EXPECT_EQ(map_cardinality(pmf), 1u);
}

TEST(IidClusterRatio, UniformAndPoissonPmfs) {
    auto uniform = [](int k) { return std::vector<double>(k + 1, 1.0 / (k + 1)); };
    EXPECT_NEAR(iid_cluster_ratio(uniform(4)), 1.0, 1e-12);
    EXPECT_NEAR(iid_cluster_ratio(uniform(3)), 8.0 / 9.0, 1e-12);
    EXPECT_NEAR(iid_cluster_ratio(uniform(5)), 16.0 / 15.0, 1e-12);
    for (int k = 1; k < 12; ++k) {
        EXPECT_NEAR(iid_cluster_ratio(uniform(k)), 4.0 * (k - 1) / (3.0 * k), 1e-12);
    }
    std::vector<double> poisson(120);
    double term = std::exp(-3.7);
    for (std::size_t n = 0; n < poisson.size(); ++n) {
        poisson[n] = term;
        term *= 3.7 / static_cast<double>(n + 1);
    }
    EXPECT_NEAR(iid_cluster_ratio(poisson), 1.0, 1e-12);
    const std::vector<double> zero{1.0};
    EXPECT_THROW((void)iid_cluster_ratio(zero), Error);
}

TEST(ConditionalTrackPdf, NoConditioningNoMeasurementsIsThinnedPrior) {
    const auto ctx = line_context(LineSetup{}, {});
    Region<double> all{[](const double&) { return true; }, simpson(30.0)};
    const std::vector<double> none;
    const auto pdf = conditional_track_pdf(ctx, std::span<const double>(none), all);
    EXPECT_NEAR(pdf.normalizer(), 0.1, 1e-10);
    EXPECT_NEAR(pdf(0.4), normal_pdf(0.4, 0.0, 1.0), 1e-9);
}

TEST(ConditionalTrackPdf, EmptySupportRaises) {
    const auto ctx = line_context(LineSetup{}, {0.0});
    Region<double> nowhere{[](const double&) { return false; }, simpson(30.0)};
    const std::vector<double> none;
    try {
        (void)conditional_track_pdf(ctx, std::span<const double>(none), nowhere);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ZeroMassOnSupport);
    }
}

TEST(Properties, PairCorrelationInUnitIntervalOnRandomContexts) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const auto model = test_support::random_model(rng);
        const auto ctx = oracle::make_context(model);
        const int n = static_cast<int>(model.state_count());
        for (int a = 0; a < n; ++a) {
            for (int b = 0; b < n; ++b) {
                if (!(c1(ctx, a) > 0.0) || !(c1(ctx, b) > 0.0)) continue;
                const double rho = pair_correlation(ctx, a, b);
                EXPECT_GE(rho, 0.0);
                EXPECT_LE(rho, 1.0);
            }
        }
    }
}

TEST(Properties, FirstOrderReductionNeverExceedsIntensity) {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 100; ++trial) {
        const auto model = test_support::random_model(rng);
        const auto ctx = oracle::make_context(model);
        const int n = static_cast<int>(model.state_count());
        std::vector<int> cond;
        for (int s = 0; s < n && cond.size() < 3; ++s) {
            if (c1(ctx, s) > 0.0) cond.push_back(s);
        }
        for (int x = 0; x < n; ++x) {
            EXPECT_LE(reduced_palm_intensity(ctx, x, std::span<const int>(cond), ReductionMethod::FirstOrder),
                      c1(ctx, x) * (1.0 + 1e-14));
        }
    }
}

TEST(Properties, PoissonPosteriorIsInvariantUnderConditioning) {
    std::mt19937_64 rng(13);
    test_support::RandomModelLimits lim;
    lim.max_measurements = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const auto model = test_support::random_model(rng, lim);
        const auto ctx = oracle::make_context(model);
        const int n = static_cast<int>(model.state_count());
        std::vector<int> cond;
        for (int s = 0; s < n; ++s) {
            if (c1(ctx, s) > 0.0) cond.push_back(s);
        }
        for (int x = 0; x < n; ++x) {
            EXPECT_EQ(reduced_palm_intensity(ctx, x, std::span<const int>(cond), ReductionMethod::FirstOrder), c1(ctx, x));
            if (!cond.empty()) {
                const std::span<const int> one(cond.data(), 1);
                EXPECT_EQ(reduced_palm_intensity(ctx, x, one, ReductionMethod::ExactOne), c1(ctx, x));
            }
        }
    }
}

TEST(Properties, AtZeroDiffersOnlyInDenominators) {
    std::mt19937_64 rng(14);
    for (int trial = 0; trial < 50; ++trial) {
        const auto model = test_support::random_model(rng);
        const auto ctx = oracle::make_context(model);
        for (int x = 0; x < static_cast<int>(model.state_count()); ++x) {
            double expected = ctx.missed_term(x);
            for (std::size_t j = 0; j < model.measurement_count(); ++j) {
                expected += ctx.detection_term(j, x) / model.clutter_intensity[j];
            }
            EXPECT_NEAR(c1(ctx, x, Mode::AtZero), expected, 1e-12 * (1.0 + expected));
        }
    }
}

TEST(Properties, PmfSumsToOneAndMeanMatchesIntensityIntegral) {
    std::mt19937_64 rng(15);
    for (int trial = 0; trial < 50; ++trial) {
        const auto model = test_support::random_model(rng);
        const auto ctx = oracle::make_context(model);
        const auto pmf = canonical_pmf(ctx);
        EXPECT_LT(pmf.tail_mass(), 1e-9);
        for (double p : pmf.probabilities) EXPECT_GE(p, 0.0);
        double integral = 0.0;
        for (int x = 0; x < static_cast<int>(model.state_count()); ++x) integral += c1(ctx, x) * model.cell_volume;
        EXPECT_NEAR(pmf.mean(), integral, 1e-8);
    }
}
