#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "palm/oracle.hpp"
#include "support/random_models.hpp"

using namespace palm;
using namespace palm::oracle;
namespace pp = palm::pointproc;

TEST(Enumerate, SingleUndetectableStateIsPoisson) {
    DiscreteModel m;
    m.prior_intensity = {0.8};
    m.detect_prob = {0.0};
    m.likelihood = {{}};
    m.cell_volume = 1.0;
    const auto post = enumerate_posterior(m, 30);
    const OracleMoments mom(post);
    double term = std::exp(-0.8);
    for (std::size_t n = 0; n < 10; ++n) {
        EXPECT_NEAR(mom.canonical_pmf()[n], term, 1e-14);
        term *= 0.8 / static_cast<double>(n + 1);
    }
    EXPECT_NEAR(mom.m1(0), 0.8, 1e-14);
    // Poisson: factorial moments factor.
    EXPECT_NEAR(mom.m2(0, 0), 0.64, 1e-13);
}

TEST(Enumerate, TwoStatesOneMeasurementIsThinnedPppPlusBernoulli) {
    DiscreteModel m;
    m.prior_intensity = {0.6, 0.3};
    m.detect_prob = {0.7, 0.2};
    m.likelihood = {{1.5}, {0.4}};
    m.clutter_intensity = {0.3};
    const auto post = enumerate_posterior(m, recommended_n_max(m));
    const OracleMoments mom(post);
    // Direct expansion on the grid: the Bernoulli exists with probability
    // mu_D / (lambda + mu_D) and sits in cell s proportionally to P^D p f.
    const double g0 = 0.7 * 1.5 * 0.6;
    const double g1 = 0.2 * 0.4 * 0.3;
    const double mu = 0.3 + g0 + g1;
    EXPECT_NEAR(mom.m1(0), 0.3 * 0.6 + g0 / mu, 1e-12);
    EXPECT_NEAR(mom.m1(1), 0.8 * 0.3 + g1 / mu, 1e-12);
    // Bernoulli part contributes no pair in the same realization.
    const double missed_mass = 0.3 * 0.6 + 0.8 * 0.3;
    const double q = (g0 + g1) / mu;
    EXPECT_NEAR(mom.canonical_pmf()[0], std::exp(-missed_mass) * (1.0 - q), 1e-12);
}

TEST(Enumerate, NormalizedOnRandomModels) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        const auto m = test_support::random_model(rng);
        const auto post = enumerate_posterior(m, recommended_n_max(m));
        double total = 0.0;
        for (const auto& [c, p] : post.probability) total += p;
        EXPECT_NEAR(total, 1.0, 1e-12);
    }
}

TEST(Enumerate, TooLargeRaises) {
    DiscreteModel m;
    m.prior_intensity.assign(12, 1.0);
    m.detect_prob.assign(12, 0.5);
    m.likelihood.assign(12, std::vector<double>(4, 1.0));
    m.clutter_intensity.assign(4, 1.0);
    try {
        (void)enumerate_posterior(m, 20);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EnumerationTooLarge);
    }
}

TEST(Moments, PoissonModelFactorsAndPalmInvariant) {
    std::mt19937_64 rng(22);
    test_support::RandomModelLimits lim;
    lim.max_measurements = 0;
    for (int trial = 0; trial < 10; ++trial) {
        const auto m = test_support::random_model(rng, lim);
        const OracleMoments mom(enumerate_posterior(m, recommended_n_max(m)));
        const int n = static_cast<int>(m.state_count());
        for (int a = 0; a < n; ++a) {
            for (int b = 0; b < n; ++b) {
                EXPECT_NEAR(mom.m2(a, b), mom.m1(a) * mom.m1(b), 1e-12);
                if (mom.m1(a) > 0.0) EXPECT_NEAR(mom.reduced_palm(a, b), mom.m1(b), 1e-12);
            }
        }
    }
}

TEST(Moments, FirstMomentIdentity) {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        const auto m = test_support::random_model(rng);
        const OracleMoments mom(enumerate_posterior(m, recommended_n_max(m)));
        double lhs = 0.0;
        for (int s = 0; s < static_cast<int>(m.state_count()); ++s) lhs += mom.m1(s) * m.cell_volume;
        double rhs = 0.0;
        const auto& pmf = mom.canonical_pmf();
        for (std::size_t n = 0; n < pmf.size(); ++n) rhs += static_cast<double>(n) * pmf[n];
        EXPECT_NEAR(lhs, rhs, 1e-12);
    }
}

TEST(Moments, ZeroConditioningMomentRaises) {
    DiscreteModel m;
    m.prior_intensity = {0.5, 0.0};
    m.detect_prob = {0.5, 0.5};
    m.likelihood = {{1.0}, {1.0}};
    m.clutter_intensity = {0.5};
    const OracleMoments mom(enumerate_posterior(m, 20));
    try {
        (void)mom.reduced_palm(1, 0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ZeroFactorialMoment);
    }
}

// Spot check of the closed forms; the acceptance suite runs the full sweep.
TEST(Oracle, ClosedFormsMatchEnumeration) {
    std::mt19937_64 rng(24);
    for (int trial = 0; trial < 10; ++trial) {
        const auto m = test_support::random_model(rng);
        const auto ctx = make_context(m);
        const OracleMoments mom(enumerate_posterior(m, recommended_n_max(m)));
        const int n = static_cast<int>(m.state_count());
        for (int a = 0; a < n; ++a) {
            EXPECT_NEAR(pp::c1(ctx, a), mom.m1(a), 1e-10 * (1.0 + mom.m1(a)));
            for (int b = 0; b < n; ++b) {
                const double oracle_c2 = mom.m2(a, b) - mom.m1(a) * mom.m1(b);
                EXPECT_NEAR(pp::c2(ctx, a, b), oracle_c2, 1e-10 * (1.0 + std::abs(oracle_c2)));
                for (int c = 0; c < n; ++c) {
                    const double c2ab = mom.m2(a, b) - mom.m1(a) * mom.m1(b);
                    const double c2ac = mom.m2(a, c) - mom.m1(a) * mom.m1(c);
                    const double c2bc = mom.m2(b, c) - mom.m1(b) * mom.m1(c);
                    const double oracle_c3 = mom.m3(a, b, c) - mom.m1(a) * mom.m1(b) * mom.m1(c) -
                                             c2ab * mom.m1(c) - c2ac * mom.m1(b) - c2bc * mom.m1(a);
                    EXPECT_NEAR(pp::c3(ctx, a, b, c), oracle_c3, 1e-10 * (1.0 + std::abs(oracle_c3)));
                }
            }
        }
    }
}
