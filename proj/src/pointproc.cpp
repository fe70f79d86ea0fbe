#include "palm/pointproc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace palm::pointproc {

namespace {
constexpr double kTruncationTolerance = 1e-9;
}

double CanonicalPmf::tail_mass() const {
    const double total = std::accumulate(probabilities.begin(), probabilities.end(), 0.0);
    return std::max(0.0, 1.0 - total);
}

double CanonicalPmf::mean() const {
    double m = 0.0;
    for (std::size_t n = 0; n < probabilities.size(); ++n) m += static_cast<double>(n) * probabilities[n];
    return m;
}

std::vector<double> elementary_symmetric(std::span<const double> r) {
    std::vector<double> sigma(r.size() + 1, 0.0);
    sigma[0] = 1.0;
    for (std::size_t j = 0; j < r.size(); ++j) {
        for (std::size_t i = j + 1; i >= 1; --i) sigma[i] += r[j] * sigma[i - 1];
    }
    return sigma;
}

CanonicalPmf poisson_bernoulli_pmf(double mu_missed, std::span<const double> existence, std::size_t n_max) {
    // Coefficients of prod_j ((1 - q_j) + q_j t); same recurrence as
    // elementary_symmetric, each factor scaled by 1 / (1 + r_j).
    std::vector<double> detected(existence.size() + 1, 0.0);
    detected[0] = 1.0;
    for (std::size_t j = 0; j < existence.size(); ++j) {
        const double q = std::clamp(existence[j], 0.0, 1.0);
        for (std::size_t i = j + 1; i >= 1; --i) detected[i] = detected[i] * (1.0 - q) + detected[i - 1] * q;
        detected[0] *= (1.0 - q);
    }

    std::vector<double> poisson(n_max + 1, 0.0);
    poisson[0] = std::exp(-mu_missed);
    for (std::size_t n = 1; n <= n_max; ++n) poisson[n] = poisson[n - 1] * mu_missed / static_cast<double>(n);

    CanonicalPmf pmf;
    pmf.n_max = n_max;
    pmf.probabilities.assign(n_max + 1, 0.0);
    for (std::size_t n = 0; n <= n_max; ++n) {
        double p = 0.0;
        const std::size_t top = std::min(n, existence.size());
        for (std::size_t i = 0; i <= top; ++i) p += poisson[n - i] * detected[i];
        pmf.probabilities[n] = std::max(0.0, p);
    }
    if (pmf.tail_mass() > kTruncationTolerance) {
        throw Error(ErrorCode::TruncationInsufficient,
                    "canonical pmf truncated at n_max = " + std::to_string(n_max) + " loses mass " +
                        std::to_string(pmf.tail_mass()));
    }
    return pmf;
}

std::size_t default_n_max(double mu_missed, std::size_t measurement_count) {
    const double mu = std::max(0.0, mu_missed);
    return measurement_count + static_cast<std::size_t>(std::ceil(mu)) +
           static_cast<std::size_t>(std::ceil(20.0 * std::sqrt(mu + 1.0)));
}

std::size_t map_cardinality(const CanonicalPmf& pmf) {
    const auto it = std::max_element(pmf.probabilities.begin(), pmf.probabilities.end());
    return static_cast<std::size_t>(std::distance(pmf.probabilities.begin(), it));
}

std::size_t rounded_expected_cardinality(double expected_count) {
    return static_cast<std::size_t>(std::round(std::max(0.0, expected_count)));
}

double iid_cluster_ratio(std::span<const double> pmf) {
    double first = 0.0;
    double second = 0.0;
    for (std::size_t n = 0; n < pmf.size(); ++n) {
        const auto dn = static_cast<double>(n);
        first += dn * pmf[n];
        second += dn * (dn - 1.0) * pmf[n];
    }
    if (!(first > 0.0)) throw Error(ErrorCode::ZeroMeanPmf, "pmf has zero mean");
    return second / (first * first);
}

}  // namespace palm::pointproc
