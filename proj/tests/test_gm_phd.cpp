#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "palm/error.hpp"
#include "palm/gm_phd.hpp"

using namespace palm;
using namespace palm::gm;

namespace {

models::MeasurementModel sensor(double pd, double clutter = 0.0) {
    return models::MeasurementModel::position_sensor(25.0, pd, clutter);
}

GaussianComponent component(double w, const StateVec& m, double var = 100.0) {
    GaussianComponent c;
    c.weight = w;
    c.mean = m;
    c.cov = var * StateCov::Identity();
    return c;
}

scenario::Scan scan_with(int index, std::vector<MeasVec> z, std::vector<int> assoc = {}) {
    scenario::Scan s;
    s.index = index;
    s.time = index;
    s.measurements = std::move(z);
    s.truth_assoc = assoc.empty() ? std::vector<int>(s.measurements.size(), -1) : std::move(assoc);
    return s;
}

// Noise-free constant-velocity scans for two targets.
std::vector<scenario::Scan> straight_scans(int count) {
    std::vector<scenario::Scan> scans;
    for (int k = 1; k <= count; ++k) {
        scans.push_back(scan_with(k, {MeasVec(100.0 + 10.0 * k, -20.0 - 3.0 * k), MeasVec(-500.0 - 4.0 * k, 7.0 * k)},
                                  {1, 0}));
    }
    return scans;
}

}  // namespace

TEST(Init, NoiseFreeVelocityIsExact) {
    const auto motion = models::MotionModel::constant_velocity(1.0, 5.0);
    const auto mix = init_two_point(straight_scans(10), motion, sensor(0.98));
    ASSERT_EQ(mix.components.size(), 2u);
    EXPECT_DOUBLE_EQ(mix.mass(), 2.0);
    const auto& t0 = mix.components[0];
    EXPECT_NEAR(t0.mean(1), -4.0, 1e-9);
    EXPECT_NEAR(t0.mean(3), 7.0, 1e-9);
    EXPECT_NEAR(t0.mean(0), -540.0, 1e-9);
    const auto& t1 = mix.components[1];
    EXPECT_NEAR(t1.mean(1), 10.0, 1e-9);
    EXPECT_NEAR(t1.mean(3), -3.0, 1e-9);
    // History keeps the last five scans only.
    ASSERT_EQ(t0.history.size(), 5u);
    EXPECT_EQ(t0.history.front().scan, 6);
    EXPECT_EQ(t0.history.back(), (MeasurementTag{10, 1}));
}

TEST(Init, TwoPointCovariance) {
    const auto motion = models::MotionModel::constant_velocity(2.0, 5.0);
    const auto mix = init_two_point(straight_scans(2), motion, sensor(0.98));
    const auto& p = mix.components[0].cov;
    EXPECT_DOUBLE_EQ(p(0, 0), 625.0);
    EXPECT_DOUBLE_EQ(p(0, 1), 625.0 / 2.0);
    EXPECT_DOUBLE_EQ(p(1, 1), 2.0 * 625.0 / 4.0);
    EXPECT_DOUBLE_EQ(p(3, 3), 2.0 * 625.0 / 4.0);
    EXPECT_EQ(p(0, 2), 0.0);
}

TEST(Init, MissingAssignmentRaises) {
    auto scans = straight_scans(10);
    scans[4].truth_assoc = {-1, -1};
    try {
        (void)init_two_point(scans, models::MotionModel::constant_velocity(1.0, 5.0), sensor(0.98));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MissingAssignment);
    }
}

TEST(Predict, MatchesGaussianPredictAndKeepsWeights) {
    const auto motion = models::MotionModel::constant_velocity(1.0, 5.0);
    GaussianMixture mix;
    mix.components = {component(0.7, StateVec(0, 1, 2, 3)), component(1.3, StateVec(5, 0, 5, 0)),
                      component(0.1, StateVec(-1, 0, 0, 9))};
    const auto out = gm_predict(mix, motion);
    ASSERT_EQ(out.components.size(), 3u);
    EXPECT_DOUBLE_EQ(out.mass(), mix.mass());
    const auto [m, p] = models::gaussian_predict(mix.components[0].mean, mix.components[0].cov, motion);
    EXPECT_EQ(out.components[0].mean, m);
    EXPECT_EQ(out.components[0].cov, p);
}

TEST(Update, NoMeasurementsScalesByMissProbability) {
    GaussianMixture mix;
    mix.components = {component(0.7, StateVec(0, 1, 2, 3)), component(1.3, StateVec(5, 0, 5, 0))};
    const auto up = gm_update(mix, scan_with(11, {}), sensor(0.9));
    ASSERT_EQ(up.posterior.components.size(), 2u);
    EXPECT_NEAR(up.posterior.components[0].weight, 0.07, 1e-15);
    EXPECT_NEAR(up.posterior.components[1].weight, 0.13, 1e-15);
    EXPECT_EQ(up.posterior.components[1].mean, mix.components[1].mean);
    EXPECT_EQ(up.posterior.components[1].cov, mix.components[1].cov);
}

TEST(Update, ComponentCountAndProvenance) {
    GaussianMixture mix;
    mix.components = {component(1.0, StateVec(0, 0, 0, 0)), component(1.0, StateVec(300, 0, 0, 0))};
    const auto up = gm_update(mix, scan_with(11, {MeasVec(0, 0), MeasVec(300, 0), MeasVec(1000, 1000)}), sensor(0.9, 10));
    ASSERT_EQ(up.posterior.components.size(), 8u);
    EXPECT_EQ(up.posterior.components[0].source, -1);
    EXPECT_EQ(up.posterior.components[3].source, 0);
    EXPECT_EQ(up.posterior.components[3].parent, 1);
    EXPECT_EQ(up.posterior.components[7].source, 2);
    EXPECT_EQ(up.posterior.components[7].history.back(), (MeasurementTag{11, 2}));
    // Weights sum to the posterior mass of the point-process context.
    const auto ctx = gm_context(up, sensor(0.9, 10));
    EXPECT_NEAR(up.posterior.mass(), ctx.posterior_mass(), 1e-12);
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(up.mu_z[j], up.clutter[j] + up.mu_detected[j], 1e-18);
}

TEST(Update, KalmanEquivalence) {
    GaussianMixture mix;
    StateCov p;
    p << 400, 20, 5, 1, 20, 30, 0, 2, 5, 0, 300, 10, 1, 2, 10, 25;
    mix.components = {component(1.0, StateVec(10, 2, -5, 1))};
    mix.components[0].cov = p;
    const MeasVec z(40, -20);
    const auto up = gm_update(mix, scan_with(11, {z}), sensor(1.0, 0.0));
    ASSERT_EQ(up.posterior.components.size(), 2u);
    const auto& c = up.posterior.components[1];
    EXPECT_NEAR(c.weight, 1.0, 1e-10);
    // Independent Kalman form: information filter.
    Eigen::Matrix<double, 2, 4> h = Eigen::Matrix<double, 2, 4>::Zero();
    h(0, 0) = 1.0;
    h(1, 2) = 1.0;
    const Eigen::Matrix2d r_inv = Eigen::Matrix2d::Identity() / 625.0;
    const StateCov info = p.inverse() + h.transpose() * r_inv * h;
    const StateCov p_post = info.inverse();
    const StateVec m_post = p_post * (p.inverse() * mix.components[0].mean + h.transpose() * r_inv * z);
    EXPECT_LT((c.mean - m_post).cwiseAbs().maxCoeff(), 1e-10 * m_post.cwiseAbs().maxCoeff());
    EXPECT_LT((c.cov - p_post).cwiseAbs().maxCoeff(), 1e-10 * p_post.cwiseAbs().maxCoeff());
}

TEST(Update, MassLawSingleTarget) {
    for (double pd : {0.6, 0.9, 0.98}) {
        GaussianMixture mix;
        mix.components = {component(1.0, StateVec(0, 0, 0, 0))};
        const auto detected = gm_update(mix, scan_with(11, {MeasVec(3, -4)}), sensor(pd, 0.0));
        // Exactly 2 - P^D as lambda -> 0; the filter's clutter floor leaves lambda / mu_z.
        EXPECT_NEAR(detected.posterior.mass(), 2.0 - pd - detected.clutter[0] / detected.mu_z[0], 1e-15);
        EXPECT_NEAR(detected.posterior.mass(), 2.0 - pd, 1e-10);
        const auto missed = gm_update(mix, scan_with(11, {}), sensor(pd, 0.0));
        EXPECT_NEAR(missed.posterior.mass(), 1.0 - pd, 1e-15);
    }
}

TEST(Manage, IdenticalComponentsMerge) {
    GaussianMixture mix;
    mix.components = {component(0.4, StateVec(1, 2, 3, 4)), component(0.6, StateVec(1, 2, 3, 4))};
    mix.components[0].history = {{10, 1}};
    mix.components[1].history = {{10, 2}, {11, 0}};
    const auto out = gm_manage(mix);
    ASSERT_EQ(out.components.size(), 1u);
    EXPECT_DOUBLE_EQ(out.components[0].weight, 1.0);
    EXPECT_EQ(out.components[0].mean, StateVec(1, 2, 3, 4));
    EXPECT_EQ(out.components[0].history.size(), 3u);
}

TEST(Manage, MergePreservesMomentsAndPrunes) {
    GaussianMixture mix;
    mix.components = {component(0.5, StateVec(0, 0, 0, 0)), component(0.3, StateVec(5, 0, 0, 0)),
                      component(0.2, StateVec(0, 0, 8, 1)), component(5e-6, StateVec(1, 1, 1, 1)),
                      component(0.9, StateVec(1000, 0, 0, 0))};
    const auto out = gm_manage(mix);
    ASSERT_EQ(out.components.size(), 2u);
    EXPECT_NEAR(mix.mass() - out.mass(), 5e-6, 1e-15);
    // Heaviest component leads.
    EXPECT_EQ(out.components[0].mean, StateVec(1000, 0, 0, 0));
    const auto& merged = out.components[1];
    EXPECT_NEAR(merged.weight, 1.0, 1e-15);
    const StateVec mean = (0.5 * mix.components[0].mean + 0.3 * mix.components[1].mean + 0.2 * mix.components[2].mean);
    EXPECT_LT((merged.mean - mean).norm(), 1e-12);
    StateCov second = StateCov::Zero();
    for (int i = 0; i < 3; ++i) {
        const auto& c = mix.components[static_cast<std::size_t>(i)];
        second += c.weight * (c.cov + c.mean * c.mean.transpose());
    }
    EXPECT_LT((merged.cov + mean * mean.transpose() - second).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Manage, CapsComponentCount) {
    GaussianMixture mix;
    for (int i = 0; i < 600; ++i) mix.components.push_back(component(0.001 * (i + 1), StateVec(100.0 * i, 0, 0, 0), 1.0));
    const auto out = gm_manage(mix);
    EXPECT_EQ(out.components.size(), 500u);
    EXPECT_NEAR(out.components.back().weight, 0.101, 1e-12);
}

TEST(Baseline, WeightRule) {
    GaussianMixture mix;
    mix.components = {component(0.4, StateVec(1, 0, 0, 0)), component(0.4, StateVec(2, 0, 0, 0))};
    EXPECT_TRUE(gm_extract_baseline(mix).empty());
    mix.components = {component(0.9, StateVec(1, 0, 0, 0)), component(0.2, StateVec(2, 0, 0, 0))};
    ASSERT_EQ(gm_extract_baseline(mix).size(), 1u);
    EXPECT_EQ(gm_extract_baseline(mix)[0], StateVec(1, 0, 0, 0));
    mix.components = {component(2.2, StateVec(3, 0, 0, 0))};
    const auto two = gm_extract_baseline(mix);
    ASSERT_EQ(two.size(), 2u);
    EXPECT_EQ(two[0], two[1]);
    mix.components = {component(0.5, StateVec(3, 0, 0, 0))};
    EXPECT_EQ(gm_extract_baseline(mix).size(), 1u);
}

TEST(Context, MixtureDensityMatchesIntegrals) {
    GaussianMixture mix;
    mix.components = {component(0.7, StateVec(0, 1, 2, 3)), component(1.3, StateVec(50, 0, 5, 0))};
    const auto up = gm_update(mix, scan_with(11, {MeasVec(10, 0)}), sensor(0.9, 10));
    const auto ctx = gm_context(up, sensor(0.9, 10));
    EXPECT_NEAR(ctx.prior_mass(), 2.0, 1e-15);
    EXPECT_NEAR(ctx.mu_missed(), 0.2, 1e-15);
    // Density at a component mean: weight times N(0; 0, P) plus the tail of the other.
    const double peak = 1.0 / (4.0 * M_PI * M_PI * 1e4);
    EXPECT_NEAR(mixture_density(mix, StateVec(0, 1, 2, 3)) / peak, 0.7 + 1.3 * std::exp(-0.5 * (2500 + 1 + 9 + 9) / 100.0),
                1e-12);
    const auto free = gm_context(up, sensor(0.9, 10), false);
    EXPECT_FALSE(free.has_prior_density());
    EXPECT_DOUBLE_EQ(free.posterior_mass(), ctx.posterior_mass());
}

TEST(Snapshot, CsvRows) {
    GaussianMixture mix;
    mix.components = {component(0.7, StateVec(0, 1, 2, 3)), component(1.3, StateVec(50, 0, 5, 0))};
    std::ostringstream out;
    append_snapshot_csv(out, 12, mix, true);
    const std::string text = out.str();
    EXPECT_EQ(text.substr(0, text.find('\n')), "scan,weight,x,vx,y,vy,p00,p01,p02,p03,p11,p12,p13,p22,p23,p33");
    EXPECT_NE(text.find("\n12,0.7,0,1,2,3,100,0,0,0,100,0,0,100,0,100\n"), std::string::npos);
}
