#include "ipevo/metric.hpp"

#include "ipevo/rng.hpp"

#include <algorithm>
#include <cmath>

namespace ipevo {

namespace {

struct Item {
    double mass;
    double div;
};

void extract(const IntervalPartition& p, std::vector<Item>& items, double& total_div) {
    items.clear();
    items.reserve(p.blocks.size());
    for (std::size_t i = 0; i < p.blocks.size(); ++i) {
        double d = p.diversity_meta ? (*p.diversity_meta)[i] : 0.0;
        items.push_back({p.blocks[i].length(), d});
    }
    total_div = p.diversity_total_or(0.0);
}

// nondominated (A,B) pairs: A strictly increasing, B strictly decreasing
using Frontier = std::vector<std::pair<double, double>>;

void prune(Frontier& f) {
    if (f.size() <= 1) return;
    std::sort(f.begin(), f.end());
    Frontier out;
    double best_b = std::numeric_limits<double>::infinity();
    for (auto& [a, b] : f) {
        if (b < best_b) {
            out.emplace_back(a, b);
            best_b = b;
        }
    }
    f.swap(out);
}

} // namespace

double distortion(const IntervalPartition& beta, const IntervalPartition& gamma,
                  const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
    std::vector<Item> bi, gi;
    double dB, dG;
    extract(beta, bi, dB);
    extract(gamma, gi, dG);
    double div_sup = std::fabs(dB - dG);
    double a_sum = 0, b_sum = 0;
    for (auto& [i, j] : pairs) {
        const double u = bi[i].mass, v = gi[j].mass;
        div_sup = std::max(div_sup, std::fabs(bi[i].div - gi[j].div));
        a_sum += std::fabs(u - v) - u;
        b_sum += std::fabs(u - v) - v;
    }
    return std::max({div_sup, beta.total_mass + a_sum, gamma.total_mass + b_sum});
}

double metric_distance(const IntervalPartition& beta, const IntervalPartition& gamma,
                       const MetricOptions& opts) {
    const std::size_t n = beta.blocks.size(), m = gamma.blocks.size();
    if (n > opts.n_max || m > opts.n_max)
        throw invalid_input("metric_distance: too many blocks, truncate first");

    std::vector<Item> bi, gi;
    double dB, dG;
    extract(beta, bi, dB);
    extract(gamma, gi, dG);
    const double div_inf_gap = std::fabs(dB - dG);
    const double mb = beta.total_mass, mg = gamma.total_mass;

    // value of the empty correspondence
    double best = std::max({div_inf_gap, mb, mg});
    if (n == 0 || m == 0) return best;

    // candidate bottleneck thresholds: the pairwise diversity gaps
    std::vector<double> taus;
    taus.reserve(n * m);
    for (const Item& x : bi)
        for (const Item& y : gi) taus.push_back(std::fabs(x.div - y.div));
    std::sort(taus.begin(), taus.end());
    taus.erase(std::unique(taus.begin(), taus.end()), taus.end());

    std::vector<Frontier> dp((n + 1) * (m + 1));
    auto at = [&](std::size_t i, std::size_t j) -> Frontier& { return dp[i * (m + 1) + j]; };

    for (double tau : taus) {
        if (std::max(tau, div_inf_gap) >= best) break; // larger taus cannot improve
        for (auto& f : dp) f.clear();
        at(0, 0) = {{0.0, 0.0}};
        for (std::size_t i = 0; i <= n; ++i) {
            for (std::size_t j = 0; j <= m; ++j) {
                Frontier& cur = at(i, j);
                if (i > 0)
                    for (auto& p : at(i - 1, j)) cur.push_back(p);
                if (j > 0)
                    for (auto& p : at(i, j - 1)) cur.push_back(p);
                if (i > 0 && j > 0 &&
                    std::fabs(bi[i - 1].div - gi[j - 1].div) <= tau) {
                    const double u = bi[i - 1].mass, v = gi[j - 1].mass;
                    const double da = std::fabs(u - v) - u, db2 = std::fabs(u - v) - v;
                    for (auto& p : at(i - 1, j - 1))
                        cur.emplace_back(p.first + da, p.second + db2);
                }
                prune(cur);
            }
        }
        for (auto& [a, b] : at(n, m)) {
            double val = std::max({tau, div_inf_gap, mb + a, mg + b});
            best = std::min(best, val);
        }
    }
    return best;
}

} // namespace ipevo
