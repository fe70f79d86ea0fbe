#include "palm/oracle.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "palm/error.hpp"

namespace palm::oracle {

double DiscreteModel::prior_mass() const {
    return std::accumulate(prior_intensity.begin(), prior_intensity.end(), 0.0) * cell_volume;
}

void DiscreteModel::validate() const {
    const std::size_t n = state_count();
    const std::size_t k = measurement_count();
    auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); };
    if (n == 0) fail("discrete model has no states");
    if (detect_prob.size() != n || likelihood.size() != n) fail("per-state tables disagree in length");
    if (!(cell_volume > 0.0)) fail("cell volume must be positive");
    for (std::size_t s = 0; s < n; ++s) {
        if (prior_intensity[s] < 0.0) fail("negative prior intensity");
        if (detect_prob[s] < 0.0 || detect_prob[s] > 1.0) fail("detection probability outside [0, 1]");
        if (likelihood[s].size() != k) fail("likelihood row length differs from measurement count");
        for (double l : likelihood[s]) {
            if (l < 0.0) fail("negative likelihood");
        }
    }
    for (double lambda : clutter_intensity) {
        if (!(lambda > 0.0)) throw Error(ErrorCode::ZeroClutterAtMeasurement, "clutter intensity must be positive");
    }
}

pointproc::PhdModel<int, int> to_phd_model(const DiscreteModel& model) {
    pointproc::PhdModel<int, int> m;
    m.prior_intensity = [p = model.prior_intensity](const int& s) { return p[s]; };
    m.detect_prob = [p = model.detect_prob](const int& s) { return p[s]; };
    m.likelihood = [l = model.likelihood](const int& z, const int& s) { return l[s][z]; };
    m.clutter_intensity = [c = model.clutter_intensity](const int& z) { return c[z]; };
    return m;
}

pointproc::Quadrature<int> cell_quadrature(const DiscreteModel& model) {
    return [n = static_cast<int>(model.state_count()), v = model.cell_volume](const pointproc::Integrand<int>& f) {
        double total = 0.0;
        for (int s = 0; s < n; ++s) total += f(s);
        return total * v;
    };
}

std::vector<int> measurement_indices(const DiscreteModel& model) {
    std::vector<int> z(model.measurement_count());
    std::iota(z.begin(), z.end(), 0);
    return z;
}

DiscreteContext make_context(const DiscreteModel& model) {
    model.validate();
    return DiscreteContext::build(to_phd_model(model), measurement_indices(model), cell_quadrature(model));
}

std::size_t recommended_n_max(const DiscreteModel& model, double tail_tolerance) {
    const double mu = model.prior_mass();
    double term = std::exp(-mu);
    double cdf = term;
    std::size_t n = 0;
    while (1.0 - cdf > tail_tolerance && n < 200) {
        ++n;
        term *= mu / static_cast<double>(n);
        cdf += term;
    }
    return n + model.measurement_count();
}

double EnumeratedPosterior::event_density(const std::vector<int>& cells) const {
    CountVector counts(state_count, 0);
    for (int c : cells) ++counts[static_cast<std::size_t>(c)];
    const auto it = probability.find(counts);
    if (it == probability.end()) return 0.0;
    double multiplicity = 1.0;
    for (auto c : counts) {
        for (int i = 2; i <= c; ++i) multiplicity *= i;
    }
    return it->second * multiplicity / std::pow(cell_volume, static_cast<double>(cells.size()));
}

namespace {

double binomial(std::size_t n, std::size_t k) {
    double r = 1.0;
    for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    return r;
}

// Sum over assignments of measurements j.. to clutter or to a distinct,
// not yet used target. `remaining[s]` counts targets in cell s without a
// measurement so far.
double assignment_likelihood(const DiscreteModel& model, std::size_t j, std::vector<int>& remaining) {
    const std::size_t k = model.measurement_count();
    if (j == k) {
        double missed = 1.0;
        for (std::size_t s = 0; s < remaining.size(); ++s) {
            missed *= std::pow(1.0 - model.detect_prob[s], remaining[s]);
        }
        return missed;
    }
    double total = model.clutter_intensity[j] * assignment_likelihood(model, j + 1, remaining);
    for (std::size_t s = 0; s < remaining.size(); ++s) {
        if (remaining[s] == 0) continue;
        const double w = model.detect_prob[s] * model.likelihood[s][j];
        if (w == 0.0) continue;
        const int choices = remaining[s];
        --remaining[s];
        total += choices * w * assignment_likelihood(model, j + 1, remaining);
        ++remaining[s];
    }
    return total;
}

void enumerate_counts(std::size_t s, int budget, CountVector& counts, const std::function<void(const CountVector&)>& visit) {
    if (s == counts.size()) {
        visit(counts);
        return;
    }
    for (int c = 0; c <= budget; ++c) {
        counts[s] = static_cast<std::uint8_t>(c);
        enumerate_counts(s + 1, budget - c, counts, visit);
    }
    counts[s] = 0;
}

}  // namespace

EnumeratedPosterior enumerate_posterior(const DiscreteModel& model, std::size_t n_max, std::size_t max_terms) {
    model.validate();
    const std::size_t n = model.state_count();
    const std::size_t k = model.measurement_count();
    const double vectors = binomial(n_max + n, n);
    const double patterns = std::pow(static_cast<double>(n + 1), static_cast<double>(k));
    if (n_max > 255 || vectors * patterns > static_cast<double>(max_terms)) {
        throw Error(ErrorCode::EnumerationTooLarge,
                    "enumeration needs about " + std::to_string(vectors * patterns) + " terms");
    }

    std::vector<double> cell_mass(n);
    for (std::size_t s = 0; s < n; ++s) cell_mass[s] = model.prior_intensity[s] * model.cell_volume;

    EnumeratedPosterior post;
    post.state_count = n;
    post.cell_volume = model.cell_volume;
    post.n_max = n_max;

    double total = 0.0;
    CountVector counts(n, 0);
    std::vector<int> remaining(n);
    enumerate_counts(0, static_cast<int>(n_max), counts, [&](const CountVector& c) {
        // Independent Poisson counts per cell; the common exp(-mass) factor
        // cancels in the normalization.
        double prior = 1.0;
        for (std::size_t s = 0; s < n; ++s) {
            for (int i = 1; i <= c[s]; ++i) prior *= cell_mass[s] / i;
        }
        if (prior == 0.0) return;
        for (std::size_t s = 0; s < n; ++s) remaining[s] = c[s];
        const double weight = prior * assignment_likelihood(model, 0, remaining);
        if (weight == 0.0) return;
        post.probability.emplace(c, weight);
        total += weight;
    });
    for (auto& [c, p] : post.probability) p /= total;
    return post;
}

OracleMoments::OracleMoments(const EnumeratedPosterior& posterior)
    : posterior_(&posterior), n_(posterior.state_count) {
    m1_.assign(n_, 0.0);
    m2_.assign(n_ * n_, 0.0);
    m3_.assign(n_ * n_ * n_, 0.0);
    pmf_.assign(posterior.n_max + 1, 0.0);
    const double v = posterior.cell_volume;
    for (const auto& [c, p] : posterior.probability) {
        std::size_t total = 0;
        for (std::size_t s = 0; s < n_; ++s) {
            total += c[s];
            if (c[s] == 0) continue;
            const double ns = c[s];
            m1_[s] += p * ns;
            for (std::size_t t = 0; t < n_; ++t) {
                const double nt = c[t] - (t == s ? 1.0 : 0.0);
                if (nt <= 0.0) continue;
                m2_[index(static_cast<int>(s), static_cast<int>(t))] += p * ns * nt;
                for (std::size_t u = 0; u < n_; ++u) {
                    const double nu = c[u] - (u == s ? 1.0 : 0.0) - (u == t ? 1.0 : 0.0);
                    if (nu <= 0.0) continue;
                    m3_[index(static_cast<int>(s), static_cast<int>(t), static_cast<int>(u))] += p * ns * nt * nu;
                }
            }
        }
        pmf_[total] += p;
    }
    for (auto& m : m1_) m /= v;
    for (auto& m : m2_) m /= v * v;
    for (auto& m : m3_) m /= v * v * v;
}

double OracleMoments::reduced_palm(int x1, int x) const {
    if (!(m1(x1) > 0.0)) throw Error(ErrorCode::ZeroFactorialMoment, "conditioning cell has zero intensity");
    return m2(x1, x) / m1(x1);
}

double OracleMoments::reduced_palm(int x1, int x2, int x) const {
    if (!(m2(x1, x2) > 0.0)) throw Error(ErrorCode::ZeroFactorialMoment, "conditioning pair has zero moment");
    return m3(x1, x2, x) / m2(x1, x2);
}

std::vector<double> OracleMoments::conditional_pdf(const std::vector<int>& others) const {
    std::vector<double> pdf(n_, 0.0);
    double total = 0.0;
    std::vector<int> event = others;
    event.push_back(0);
    for (std::size_t x = 0; x < n_; ++x) {
        event.back() = static_cast<int>(x);
        pdf[x] = posterior_->event_density(event);
        total += pdf[x] * posterior_->cell_volume;
    }
    if (!(total > 0.0)) throw Error(ErrorCode::ZeroFactorialMoment, "conditioning event has zero probability");
    for (auto& p : pdf) p /= total;
    return pdf;
}

}  // namespace palm::oracle
