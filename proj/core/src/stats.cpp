#include "ipevo/stats.hpp"

#include "ipevo/rng.hpp"
#include "ipevo/special.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace ipevo::stats {

namespace {

double ks_p_from_d(double d, double n_eff) {
    double x = (std::sqrt(n_eff) + 0.12 + 0.11 / std::sqrt(n_eff)) * d;
    return sf::kolmogorov_sf(x);
}

double tie_fraction(const std::vector<double>& sorted) {
    if (sorted.size() < 2) return 0;
    std::size_t tied = 0;
    for (std::size_t i = 1; i < sorted.size(); ++i)
        if (sorted[i] == sorted[i - 1]) ++tied;
    return static_cast<double>(tied) / static_cast<double>(sorted.size());
}

// chi-square homogeneity of two discrete samples over pooled categories
double discrete_two_sample_p(const std::vector<double>& a, const std::vector<double>& b) {
    std::map<double, std::pair<double, double>> counts;
    for (double v : a) counts[v].first += 1;
    for (double v : b) counts[v].second += 1;
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    // merge sparse categories left to right so every expected count is >= 5
    std::vector<std::pair<double, double>> cells;
    double ca = 0, cb = 0;
    for (auto& [v, c] : counts) {
        ca += c.first;
        cb += c.second;
        double tot = ca + cb;
        if (std::min(tot * na, tot * nb) / (na + nb) >= 5.0) {
            cells.emplace_back(ca, cb);
            ca = cb = 0;
        }
    }
    if (ca + cb > 0) {
        if (cells.empty()) return 1.0;
        cells.back().first += ca;
        cells.back().second += cb;
    }
    if (cells.size() < 2) return 1.0;
    double chi2 = 0;
    for (auto& [oa, ob] : cells) {
        double tot = oa + ob;
        double ea = tot * na / (na + nb), eb = tot * nb / (na + nb);
        chi2 += (oa - ea) * (oa - ea) / ea + (ob - eb) * (ob - eb) / eb;
    }
    return sf::chi2_sf(static_cast<double>(cells.size() - 1), chi2);
}

} // namespace

KsResult ks_test(std::vector<double> sample, const std::function<double(double)>& cdf) {
    if (sample.size() < 20) throw invalid_input("ks_test: need at least 20 observations");
    std::sort(sample.begin(), sample.end());
    KsResult r;
    r.n = sample.size();
    if (tie_fraction(sample) > 0.5)
        throw invalid_input("ks_test: sample is mostly atoms; test the atom separately");
    const double n = static_cast<double>(sample.size());
    double d = 0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        double f = cdf(sample[i]);
        d = std::max(d, std::fabs(f - static_cast<double>(i) / n));
        d = std::max(d, std::fabs(static_cast<double>(i + 1) / n - f));
    }
    r.d = d;
    r.p = ks_p_from_d(d, n);
    return r;
}

KsResult ks_test_2(std::vector<double> a, std::vector<double> b) {
    if (a.size() < 20 || b.size() < 20) throw invalid_input("ks_test_2: samples too small");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    KsResult r;
    r.n = a.size() + b.size();
    std::vector<double> pooled;
    pooled.reserve(r.n);
    std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(pooled));
    if (tie_fraction(pooled) > 0.5) {
        r.discrete_fallback = true;
        r.p = discrete_two_sample_p(a, b);
        return r;
    }
    double d = 0;
    std::size_t i = 0, j = 0;
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    while (i < a.size() && j < b.size()) {
        double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= v) ++i;
        while (j < b.size() && b[j] <= v) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    r.d = d;
    r.p = ks_p_from_d(d, na * nb / (na + nb));
    return r;
}

double binomial_z(std::size_t successes, std::size_t n, double p0) {
    double nn = static_cast<double>(n);
    double se = std::sqrt(p0 * (1 - p0) / nn);
    return (static_cast<double>(successes) / nn - p0) / se;
}

double chi2_gof_p(const std::vector<double>& observed, const std::vector<double>& expected,
                  std::size_t fitted) {
    if (observed.size() != expected.size() || observed.empty())
        throw invalid_input("chi2_gof: size mismatch");
    // merge adjacent bins until every expected count is >= 5
    std::vector<double> obs, exp;
    double co = 0, ce = 0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        co += observed[i];
        ce += expected[i];
        if (ce >= 5.0) {
            obs.push_back(co);
            exp.push_back(ce);
            co = ce = 0;
        }
    }
    if (ce > 0 && !exp.empty()) {
        obs.back() += co;
        exp.back() += ce;
    }
    if (obs.size() < 2 + fitted) return 1.0;
    double chi2 = 0;
    for (std::size_t i = 0; i < obs.size(); ++i)
        chi2 += (obs[i] - exp[i]) * (obs[i] - exp[i]) / exp[i];
    return sf::chi2_sf(static_cast<double>(obs.size() - 1 - fitted), chi2);
}

std::vector<LaplacePoint> empirical_laplace(const std::vector<double>& sample,
                                            const std::vector<double>& lambdas) {
    for (double x : sample)
        if (x < 0) throw invalid_input("empirical_laplace: sample must be nonnegative");
    std::vector<LaplacePoint> out;
    const double n = static_cast<double>(sample.size());
    for (double l : lambdas) {
        double s = 0;
        for (double x : sample) s += std::exp(-l * x);
        double m = s / n;
        // jackknife over leave-one-out means
        double ss = 0;
        for (double x : sample) {
            double loo = (s - std::exp(-l * x)) / (n - 1);
            ss += (loo - m) * (loo - m);
        }
        out.push_back({l, m, std::sqrt((n - 1) / n * ss)});
    }
    return out;
}

namespace {

double dcor_stat(const std::vector<double>& x, const std::vector<double>& y,
                 const std::vector<std::size_t>& perm) {
    const std::size_t n = x.size();
    auto centered = [n](const std::vector<double>& v, std::vector<double>& m) {
        std::vector<double> row(n, 0.0);
        double grand = 0;
        m.assign(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                double d = std::fabs(v[i] - v[j]);
                m[i * n + j] = d;
                row[i] += d;
                grand += d;
            }
        for (std::size_t i = 0; i < n; ++i) row[i] /= static_cast<double>(n);
        grand /= static_cast<double>(n * n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) m[i * n + j] += grand - row[i] - row[j];
    };
    static thread_local std::vector<double> ax, by;
    centered(x, ax);
    std::vector<double> yp(n);
    for (std::size_t i = 0; i < n; ++i) yp[i] = y[perm[i]];
    centered(yp, by);
    double vxy = 0, vx = 0, vy = 0;
    for (std::size_t k = 0; k < n * n; ++k) {
        vxy += ax[k] * by[k];
        vx += ax[k] * ax[k];
        vy += by[k] * by[k];
    }
    if (vx <= 0 || vy <= 0) return 0;
    return std::sqrt(std::max(vxy, 0.0) / std::sqrt(vx * vy));
}

} // namespace

DcorResult dcor_permutation_test(std::vector<double> x, std::vector<double> y,
                                 std::uint64_t seed, std::size_t n_perm, std::size_t max_n) {
    if (x.size() != y.size() || x.size() < 20) throw invalid_input("dcor: bad sample sizes");
    Rng rng(seed);
    if (x.size() > max_n) {
        // deterministic subsample
        std::vector<std::size_t> idx(x.size());
        std::iota(idx.begin(), idx.end(), 0);
        for (std::size_t i = 0; i < max_n; ++i) {
            std::size_t j = i + static_cast<std::size_t>(rng.u64() % (idx.size() - i));
            std::swap(idx[i], idx[j]);
        }
        std::vector<double> xs(max_n), ys(max_n);
        for (std::size_t i = 0; i < max_n; ++i) {
            xs[i] = x[idx[i]];
            ys[i] = y[idx[i]];
        }
        x.swap(xs);
        y.swap(ys);
    }
    const std::size_t n = x.size();
    std::vector<std::size_t> id(n);
    std::iota(id.begin(), id.end(), 0);
    DcorResult r;
    r.n = n;
    r.dcor = dcor_stat(x, y, id);
    std::size_t ge = 0;
    std::vector<std::size_t> perm = id;
    for (std::size_t b = 0; b < n_perm; ++b) {
        for (std::size_t i = 0; i + 1 < n; ++i) {
            std::size_t j = i + static_cast<std::size_t>(rng.u64() % (n - i));
            std::swap(perm[i], perm[j]);
        }
        if (dcor_stat(x, y, perm) >= r.dcor) ++ge;
    }
    r.p = (static_cast<double>(ge) + 1.0) / (static_cast<double>(n_perm) + 1.0);
    return r;
}

std::vector<double> holm_adjust(const std::vector<double>& p_values) {
    const std::size_t m = p_values.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });
    std::vector<double> adj(m, 0.0);
    double running = 0;
    for (std::size_t k = 0; k < m; ++k) {
        double v = static_cast<double>(m - k) * p_values[order[k]];
        running = std::max(running, std::min(v, 1.0));
        adj[order[k]] = running;
    }
    return adj;
}

double mean(const std::vector<double>& v) {
    if (v.empty()) return 0;
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v) {
    if (v.size() < 2) return 0;
    double m = mean(v), s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / (static_cast<double>(v.size()) - 1.0));
}

} // namespace ipevo::stats
