#include "palm/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "palm/error.hpp"

namespace palm::eval {

namespace {

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& v) {
    MeanSe r;
    if (v.empty()) return r;
    for (double x : v) r.mean += x;
    r.mean /= static_cast<double>(v.size());
    if (v.size() < 2) return r;
    double ss = 0.0;
    for (double x : v) ss += (x - r.mean) * (x - r.mean);
    r.se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
    return r;
}

}  // namespace

// Shortest augmenting path (Jonker-Volgenant style potentials), O(n^2 m).
std::vector<std::size_t> min_cost_assignment(const std::vector<std::vector<double>>& cost) {
    const std::size_t n = cost.size();
    if (n == 0) return {};
    const std::size_t m = cost.front().size();
    if (m < n) throw Error(ErrorCode::InvalidArgument, "assignment needs at least as many columns as rows");
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(m + 1, inf);
        std::vector<bool> used(m + 1, false);
        do {
            used[j0] = true;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::size_t> assignment(n);
    for (std::size_t j = 1; j <= m; ++j) {
        if (p[j] != 0) assignment[p[j] - 1] = j - 1;
    }
    return assignment;
}

OspaResult ospa_components(const std::vector<MeasVec>& truth, const std::vector<MeasVec>& est,
                           const OspaParams& params) {
    const auto& small = truth.size() <= est.size() ? truth : est;
    const auto& large = truth.size() <= est.size() ? est : truth;
    const std::size_t m = small.size();
    const std::size_t n = large.size();
    OspaResult r;
    if (n == 0) return r;
    const double p = params.order;
    const double c = params.cutoff;
    double loc = 0.0;
    if (m > 0) {
        std::vector<std::vector<double>> cost(m, std::vector<double>(n));
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) cost[i][j] = std::pow(std::min((small[i] - large[j]).norm(), c), p);
        }
        const auto a = min_cost_assignment(cost);
        for (std::size_t i = 0; i < m; ++i) loc += cost[i][a[i]];
    }
    const double card = std::pow(c, p) * static_cast<double>(n - m);
    const double nn = static_cast<double>(n);
    r.total = std::pow((loc + card) / nn, 1.0 / p);
    r.localization = std::pow(loc / nn, 1.0 / p);
    r.cardinality = std::pow(card / nn, 1.0 / p);
    return r;
}

double ospa(const std::vector<MeasVec>& truth, const std::vector<MeasVec>& est, const OspaParams& params) {
    return ospa_components(truth, est, params).total;
}

void RunRecord::push(int truth_n, int est_n, const OspaResult& r) {
    truth_count.push_back(truth_n);
    estimated_count.push_back(est_n);
    ospa.push_back(r.total);
    ospa_localization.push_back(r.localization);
    ospa_cardinality.push_back(r.cardinality);
}

Aggregate aggregate(const std::vector<RunRecord>& records, int first_scan) {
    Aggregate agg;
    agg.runs = records.size();
    if (records.empty()) return agg;
    const std::size_t scans = records.front().scan_count();
    for (const auto& r : records) {
        if (r.scan_count() != scans || r.estimated_count.size() != scans) {
            throw Error(ErrorCode::MismatchedScanCounts, "run records cover different numbers of scans");
        }
    }
    std::vector<double> column(records.size());
    for (std::size_t s = 0; s < scans; ++s) {
        for (std::size_t i = 0; i < records.size(); ++i) column[i] = records[i].ospa[s];
        const auto o = mean_se(column);
        for (std::size_t i = 0; i < records.size(); ++i) column[i] = records[i].estimated_count[s];
        const auto t = mean_se(column);
        agg.mospa.push_back(o.mean);
        agg.mospa_stderr.push_back(o.se);
        agg.mean_tracks.push_back(t.mean);
        agg.tracks_stderr.push_back(t.se);
    }
    const std::size_t from = static_cast<std::size_t>(std::max(first_scan, 1) - 1);
    for (const auto& r : records) {
        double total = 0.0;
        std::size_t count = 0;
        for (std::size_t s = from; s < scans; ++s, ++count) total += r.ospa[s];
        agg.run_scenario_mospa.push_back(count ? total / static_cast<double>(count) : 0.0);
    }
    const auto sc = mean_se(agg.run_scenario_mospa);
    agg.scenario_mospa = sc.mean;
    agg.scenario_mospa_stderr = sc.se;
    return agg;
}

PairedTest paired_greater(const std::vector<double>& a, const std::vector<double>& b, double z) {
    if (a.size() != b.size()) throw Error(ErrorCode::InvalidArgument, "paired samples differ in length");
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    const auto s = mean_se(d);
    PairedTest t;
    t.mean_difference = s.mean;
    t.stderr = s.se;
    t.lower_bound = s.mean - z * s.se;
    t.significant = a.size() >= 2 && t.lower_bound > 0.0;
    return t;
}

}  // namespace palm::eval
