#include "ipevo/experiments.hpp"

#include "ipevo/besq.hpp"
#include "ipevo/depois.hpp"
#include "ipevo/kernels.hpp"
#include "ipevo/metric.hpp"
#include "ipevo/parallel.hpp"
#include "ipevo/pdip.hpp"
#include "ipevo/scaffold.hpp"
#include "ipevo/special.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace ipevo::experiments {

using stats::KsResult;
using stats::TestReport;

namespace {

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
    }
};

std::size_t scaled(const SuiteConfig& cfg, std::size_t n) {
    auto s = static_cast<std::size_t>(static_cast<double>(n) * cfg.scale);
    return std::max<std::size_t>(s, 100);
}

TestReport base_report(const SuiteConfig& cfg, std::string id, std::size_t n,
                       std::string params) {
    TestReport r;
    r.test_id = std::move(id);
    r.alpha = cfg.alpha;
    r.params = std::move(params);
    r.n = n;
    r.seed = cfg.seed;
    r.threshold = cfg.p_threshold;
    return r;
}

TestReport ks_report(const SuiteConfig& cfg, std::string id, const KsResult& ks,
                     std::string reference, std::string params, const Timer& tm) {
    TestReport r = base_report(cfg, std::move(id), ks.n, std::move(params));
    r.statistic = ks.d;
    r.reference = std::move(reference);
    r.p_value = ks.p;
    r.pass = ks.p > cfg.p_threshold;
    r.runtime_ms = tm.ms();
    return r;
}

TestReport z_report(const SuiteConfig& cfg, std::string id, double z, std::size_t n,
                    std::string reference, std::string params, const Timer& tm) {
    TestReport r = base_report(cfg, std::move(id), n, std::move(params));
    r.statistic = z;
    r.reference = std::move(reference);
    r.z_score = z;
    r.pass = std::fabs(z) < cfg.z_threshold;
    r.runtime_ms = tm.ms();
    return r;
}

std::string fmt(const char* k, double v) {
    std::ostringstream os;
    os << k << "=" << v;
    return os.str();
}

kernel::KernelParams kparams(const SuiteConfig& cfg) { return {cfg.alpha, cfg.eps}; }

scaffold::Engine engine_for(const SuiteConfig& cfg, double level_scale) {
    scaffold::Config sc;
    sc.alpha = cfg.alpha;
    sc.z_cutoff = cfg.z_cutoff;
    sc.eps = cfg.eps;
    return scaffold::Engine::make(sc, level_scale);
}

IntervalPartition unit_block() { return make_partition({1.0}); }

double gamma_cdf(double shape, double rate, double x) { return sf::gamma_p(shape, rate * x); }

// mean/z against a closed-form target using the sample standard error
double mean_z(const std::vector<double>& v, double target) {
    double m = stats::mean(v);
    double se = stats::sample_sd(v) / std::sqrt(static_cast<double>(v.size()));
    return (m - target) / se;
}

} // namespace

// ---------------------------------------------------------------------------

Reports experiment_besq_absorption(const SuiteConfig& cfg, std::size_t n) {
    n = scaled(cfg, n);
    Timer tm;
    Rng root = make_stream(cfg.seed).child("besq-absorption");
    const double delta = -2.0 * cfg.alpha;
    std::vector<double> zeta(n);
    parallel_for(n, cfg.threads, [&](std::size_t i) {
        Rng rng = root.child(i);
        auto path = besq::besq_path(rng, delta, 1.0, {0.0, 4000.0}, true, 5e-3);
        zeta[i] = path.absorbed ? path.absorption_time : 4000.0;
    });
    Reports out;
    auto ks = stats::ks_test(zeta, [&](double t) { return besq::absorption_time_cdf(cfg.alpha, 1.0, t); });
    out.push_back(ks_report(cfg, "besq.absorption.ks", ks, "InverseGamma(1+alpha, 1/2)",
                            fmt("alpha", cfg.alpha), tm));
    double z = mean_z(zeta, 0.5 / cfg.alpha);
    out.push_back(z_report(cfg, "besq.absorption.mean", z, n, "mean = 1/(2 alpha)",
                           fmt("alpha", cfg.alpha), tm));
    return out;
}

Reports experiment_entrance_survival(const SuiteConfig& cfg, double y, std::size_t n) {
    n = scaled(cfg, n);
    Timer tm;
    const double target = -std::expm1(-1.0 / (2.0 * y)); // 1 - e^{-b/2y}, b = 1
    Reports out;
    {
        Rng root = make_stream(cfg.seed).child("survival-kernel");
        auto kp = kparams(cfg);
        std::vector<int> alive(n);
        parallel_for(n, cfg.threads, [&](std::size_t i) {
            Rng rng = root.child(i);
            alive[i] = !kernel::kappa_step(rng, kp, unit_block(), y).empty();
        });
        std::size_t s = 0;
        for (int a : alive) s += static_cast<std::size_t>(a);
        out.push_back(z_report(cfg, "survival.kernel", stats::binomial_z(s, n, target), n,
                               "1 - exp(-1/2y)", fmt("y", y), tm));
    }
    {
        Rng root = make_stream(cfg.seed).child("survival-scaffold");
        auto eng = engine_for(cfg, y);
        std::vector<double> levels{y};
        std::vector<int> alive(n);
        parallel_for(n, cfg.threads, [&](std::size_t i) {
            Rng rng = root.child(i);
            auto cs = scaffold::sample_clade_summary(rng, eng, 1.0, levels);
            alive[i] = cs.total[0] > 0;
        });
        std::size_t s = 0;
        for (int a : alive) s += static_cast<std::size_t>(a);
        out.push_back(z_report(cfg, "survival.scaffold", stats::binomial_z(s, n, target), n,
                               "1 - exp(-1/2y)", fmt("y", y), tm));
    }
    return out;
}

Reports experiment_total_mass(const SuiteConfig& cfg, std::size_t n) {
    n = scaled(cfg, n);
    Reports out;
    // type-1 from a unit block at y = 0.3: atom + continuous part
    for (Method method : {Method::scaffold, Method::kernel}) {
        Timer tm;
        const double y = 0.3;
        const char* tag = method == Method::scaffold ? "scaffold" : "kernel";
        Rng root = make_stream(cfg.seed).child(std::string("mass-t1-") + tag);
        auto eng = engine_for(cfg, y);
        auto kp = kparams(cfg);
        std::vector<double> mass(n);
        std::vector<int> empty(n);
        std::vector<double> levels{y};
        parallel_for(n, cfg.threads, [&](std::size_t i) {
            Rng rng = root.child(i);
            if (method == Method::scaffold) {
                auto st = scaffold::type1_levels(rng, eng, unit_block(), levels);
                empty[i] = st[0].empty();
                mass[i] = st[0].mass_sum() + st[0].truncation_mass;
            } else {
                auto st = kernel::kappa_step(rng, kp, unit_block(), y);
                empty[i] = st.empty();
                mass[i] = st.mass_sum() + st.truncation_mass;
            }
        });
        std::size_t zeros = 0;
        std::vector<double> positive;
        for (std::size_t i = 0; i < n; ++i) {
            if (empty[i])
                ++zeros;
            else
                positive.push_back(mass[i]);
        }
        out.push_back(z_report(cfg, std::string("mass.type1.atom.") + tag,
                               stats::binomial_z(zeros, n, std::exp(-1.0 / (2.0 * y))), n,
                               "exp(-1/2y)", fmt("y", y), tm));
        auto ks = stats::ks_test(positive, [&](double c) {
            return kernel::besq0_total_mass_cdf_positive(1.0, y, c);
        });
        out.push_back(ks_report(cfg, std::string("mass.type1.cont.") + tag, ks,
                                "zero-dim squared Bessel marginal", fmt("y", y), tm));
    }
    // type-0 from the empty partition at y = 0.5: Gamma(alpha, 1/2y)
    for (Method method : {Method::scaffold, Method::kernel}) {
        Timer tm;
        const double y = 0.5;
        const char* tag = method == Method::scaffold ? "scaffold" : "kernel";
        Rng root = make_stream(cfg.seed).child(std::string("mass-t0-") + tag);
        auto eng = engine_for(cfg, y);
        auto kp = kparams(cfg);
        std::vector<double> mass(n);
        std::vector<double> levels{y};
        parallel_for(n, cfg.threads, [&](std::size_t i) {
            Rng rng = root.child(i);
            if (method == Method::scaffold) {
                auto st = scaffold::type0_levels(rng, eng, IntervalPartition{}, levels);
                mass[i] = st[0].mass_sum() + st[0].truncation_mass;
            } else {
                auto st = kernel::kappa0_step(rng, kp, IntervalPartition{}, y);
                mass[i] = st.mass_sum() + st.truncation_mass;
            }
        });
        auto ks = stats::ks_test(
            mass, [&](double c) { return gamma_cdf(cfg.alpha, 1.0 / (2.0 * y), c); });
        out.push_back(ks_report(cfg, std::string("mass.type0.") + tag, ks,
                                "Gamma(alpha, 1/2y)", fmt("y", y), tm));
    }
    return out;
}

Reports experiment_method_agreement(const SuiteConfig& cfg, double y, std::size_t n) {
    n = scaled(cfg, n);
    Timer tm;
    auto kp = kparams(cfg);
    auto eng = engine_for(cfg, y);
    std::vector<double> levels{y};
    std::vector<double> mass_k(n), left_k(n), cnt_k(n);
    std::vector<double> mass_s(n), left_s(n), cnt_s(n);
    {
        Rng root = make_stream(cfg.seed).child("agree-kernel");
        parallel_for(n, cfg.threads, [&](std::size_t i) {
            Rng rng = root.child(i);
            auto init = sample_pdip(rng, cfg.alpha, PdipVariant::alpha_zero, cfg.eps);
            auto st = kernel::kappa_step(rng, kp, init, y);
            mass_k[i] = st.mass_sum() + st.truncation_mass;
            left_k[i] = st.leftmost_mass();
            cnt_k[i] = static_cast<double>(st.count_above(0.01));
        });
    }
    {
        Rng root = make_stream(cfg.seed).child("agree-scaffold");
        parallel_for(n, cfg.threads, [&](std::size_t i) {
            Rng rng = root.child(i);
            auto init = sample_pdip(rng, cfg.alpha, PdipVariant::alpha_zero, cfg.eps);
            auto st = scaffold::type1_levels(rng, eng, init, levels);
            mass_s[i] = st[0].mass_sum() + st[0].truncation_mass;
            left_s[i] = st[0].leftmost_mass();
            cnt_s[i] = static_cast<double>(st[0].count_above(0.01));
        });
    }
    Reports out;
    out.push_back(ks_report(cfg, "agree.total_mass", stats::ks_test_2(mass_k, mass_s),
                            "kernel vs scaffold", fmt("y", y), tm));
    out.push_back(ks_report(cfg, "agree.leftmost", stats::ks_test_2(left_k, left_s),
                            "kernel vs scaffold", fmt("y", y), tm));
    out.push_back(ks_report(cfg, "agree.count_above_0.01", stats::ks_test_2(cnt_k, cnt_s),
                            "kernel vs scaffold", fmt("y", y), tm));
    return out;
}

Reports experiment_pseudostationarity(const SuiteConfig& cfg, EvolutionType type, double rho,
                                      double y, std::size_t n) {
    n = scaled(cfg, n);
    Timer tm;
    const bool t1 = type == EvolutionType::type1;
    auto kp = kparams(cfg);
    Rng root = make_stream(cfg.seed).child(t1 ? "pseudostat-1" : "pseudostat-0");
    std::vector<double> mass(n, 0.0), top(n, 0.0);
    std::vector<int> alive(n, 0);
    parallel_for(n, cfg.threads, [&](std::size_t i) {
        Rng rng = root.child(i);
        double z0 = t1 ? rng.exponential(rho) : rng.gamma(cfg.alpha, rho);
        auto shape = sample_pdip(rng, cfg.alpha,
                                 t1 ? PdipVariant::alpha_zero : PdipVariant::alpha_alpha,
                                 cfg.eps);
        auto init = scale(z0, shape, cfg.alpha);
        auto st = t1 ? kernel::kappa_step(rng, kp, init, y)
                     : kernel::kappa0_step(rng, kp, init, y);
        alive[i] = !st.empty();
        if (alive[i]) {
            mass[i] = st.mass_sum() + st.truncation_mass;
            top[i] = st.largest_mass() / mass[i];
        }
    });
    std::vector<double> mass_s, top_s;
    for (std::size_t i = 0; i < n; ++i)
        if (alive[i]) {
            mass_s.push_back(mass[i]);
            top_s.push_back(top[i]);
        }
    const double rate = rho / (2.0 * y * rho + 1.0);
    Reports out;
    const char* pre = t1 ? "pseudostat.type1" : "pseudostat.type0";
    if (t1) {
        std::size_t s = mass_s.size();
        out.push_back(z_report(cfg, std::string(pre) + ".survival",
                               stats::binomial_z(s, n, 1.0 / (2.0 * y * rho + 1.0)), n,
                               "1/(2 y rho + 1)", fmt("y", y) + " " + fmt("rho", rho), tm));
        auto ks = stats::ks_test(mass_s, [&](double c) { return -std::expm1(-rate * c); });
        out.push_back(ks_report(cfg, std::string(pre) + ".mass", ks,
                                "Exponential(rho/(2 y rho + 1))", fmt("y", y), tm));
    } else {
        auto ks = stats::ks_test(mass_s,
                                 [&](double c) { return gamma_cdf(cfg.alpha, rate, c); });
        out.push_back(ks_report(cfg, std::string(pre) + ".mass", ks,
                                "Gamma(alpha, rho/(2 y rho + 1))", fmt("y", y), tm));
    }
    // normalized top block against fresh Poisson-Dirichlet draws
    {
        Rng fresh_root = make_stream(cfg.seed).child("pseudostat-fresh");
        std::size_t m = std::max<std::size_t>(mass_s.size(), 1000);
        std::vector<double> fresh(m);
        parallel_for(m, cfg.threads, [&](std::size_t i) {
            Rng rng = fresh_root.child(i);
            auto p = sample_pdip(rng, cfg.alpha,
                                 t1 ? PdipVariant::alpha_zero : PdipVariant::alpha_alpha,
                                 cfg.eps);
            fresh[i] = p.largest_mass();
        });
        out.push_back(ks_report(cfg, std::string(pre) + ".top_block",
                                stats::ks_test_2(top_s, fresh), "fresh PDIP draw", fmt("y", y),
                                tm));
    }
    // independence of the normalized shape and the current mass
    {
        auto dc = stats::dcor_permutation_test(mass_s, top_s, cfg.seed ^ 0x5eedULL);
        TestReport r = base_report(cfg, std::string(pre) + ".shape_mass_independence",
                                   dc.n, fmt("y", y));
        r.statistic = dc.dcor;
        r.reference = "independence (permutation)";
        r.p_value = dc.p;
        r.pass = dc.p > cfg.p_threshold;
        r.runtime_ms = tm.ms();
        out.push_back(r);
    }
    return out;
}

// ---------------------------------------------------------------------------
// de-Poissonized evolutions via adaptive kernel stepping

namespace {

struct DpResult {
    bool ok = false;
    IntervalPartition state_u; // state at the knot nearest to u_target
    double mass_at_ystar = -1;
};

DpResult dp_evolve(Rng rng, const kernel::KernelParams& kp, EvolutionType type,
                   IntervalPartition beta0, double u_target, double y_star) {
    const double du_max = 0.01;
    DpResult res;
    double u = 0, y = 0;
    IntervalPartition cur = std::move(beta0);
    double mass = cur.mass_sum() + cur.truncation_mass;
    if (!(mass > 0)) return res;
    double prev_u = 0;
    IntervalPartition prev_state = cur;
    Rng steps = rng.child("steps");
    for (std::uint64_t k = 0; u < u_target || (y_star > 0 && y < y_star); ++k) {
        if (k > 10000) return res;
        double dy = du_max * mass;
        if (y_star > 0 && y < y_star && y + dy > y_star) dy = y_star - y;
        Rng srng = steps.child(k);
        cur = (type == EvolutionType::type1) ? kernel::kappa_step(srng, kp, cur, dy)
                                             : kernel::kappa0_step(srng, kp, cur, dy);
        double new_mass = cur.mass_sum() + cur.truncation_mass;
        if (!(new_mass > 0)) return res; // extinct inside the grid
        y += dy;
        prev_u = u;
        u += 0.5 * dy * (1.0 / mass + 1.0 / new_mass);
        if (y_star > 0 && res.mass_at_ystar < 0 && y >= y_star) res.mass_at_ystar = new_mass;
        if (u >= u_target) {
            // nearest knot, no state interpolation
            bool take_new = (u - u_target) <= (u_target - prev_u);
            res.state_u = take_new ? cur : prev_state;
            if (y_star > 0 && res.mass_at_ystar < 0) continue; // keep stepping to y*
            res.ok = true;
            return res;
        }
        prev_state = cur;
        mass = new_mass;
    }
    res.ok = res.mass_at_ystar > 0 && !res.state_u.blocks.empty();
    return res;
}

} // namespace

Reports experiment_stationarity(const SuiteConfig& cfg, EvolutionType type, double u,
                                std::size_t n) {
    n = scaled(cfg, n);
    Timer tm;
    const bool t1 = type == EvolutionType::type1;
    auto kp = kparams(cfg);
    Rng root = make_stream(cfg.seed).child(t1 ? "stationarity-1" : "stationarity-0");
    std::vector<double> top(n, -1), left(n, -1), cnt(n, -1);
    parallel_for(n, cfg.threads, [&](std::size_t i) {
        Rng rng = root.child(i);
        auto init = sample_pdip(rng, cfg.alpha,
                                t1 ? PdipVariant::alpha_zero : PdipVariant::alpha_alpha,
                                cfg.eps);
        auto res = dp_evolve(rng, kp, type, init, u, -1);
        if (!res.ok && res.state_u.blocks.empty()) return; // extinct; dropped below
        double m = res.state_u.mass_sum() + res.state_u.truncation_mass;
        if (!(m > 0)) return;
        top[i] = res.state_u.largest_mass() / m;
        left[i] = res.state_u.leftmost_mass() / m;
        cnt[i] = static_cast<double>(res.state_u.count_above(0.01 * m));
    });
    std::vector<double> top_s, left_s, cnt_s;
    for (std::size_t i = 0; i < n; ++i)
        if (top[i] >= 0) {
            top_s.push_back(top[i]);
            left_s.push_back(left[i]);
            cnt_s.push_back(cnt[i]);
        }
    // fresh stationary-law draws play the role of the u = 0 sample
    std::size_t m = std::max<std::size_t>(top_s.size(), 1000);
    std::vector<double> top0(m), cnt0(m), top0b(m);
    Rng fresh_root = make_stream(cfg.seed).child("stationarity-fresh");
    parallel_for(m, cfg.threads, [&](std::size_t i) {
        Rng rng = fresh_root.child(i);
        auto p = sample_pdip(rng, cfg.alpha,
                             t1 ? PdipVariant::alpha_zero : PdipVariant::alpha_alpha, cfg.eps);
        top0[i] = p.largest_mass();
        cnt0[i] = static_cast<double>(p.count_above(0.01));
        Rng rng_b = rng.child("b");
        auto q = sample_pdip(rng_b, cfg.alpha,
                             t1 ? PdipVariant::alpha_zero : PdipVariant::alpha_alpha, cfg.eps);
        top0b[i] = q.largest_mass();
    });
    Reports out;
    const char* pre = t1 ? "stationarity.type1" : "stationarity.type0";
    if (t1) {
        auto ks = stats::ks_test(left_s, [&](double c) {
            return sf::beta_p(1.0 - cfg.alpha, cfg.alpha, c);
        });
        out.push_back(ks_report(cfg, std::string(pre) + ".leftmost", ks, "Beta(1-alpha, alpha)",
                                fmt("u", u), tm));
    }
    out.push_back(ks_report(cfg, std::string(pre) + ".top_block", stats::ks_test_2(top_s, top0),
                            "fresh stationary draw", fmt("u", u), tm));
    out.push_back(ks_report(cfg, std::string(pre) + ".count_above_0.01",
                            stats::ks_test_2(cnt_s, cnt0), "fresh stationary draw", fmt("u", u),
                            tm));
    out.push_back(ks_report(cfg, std::string(pre) + ".calibration_split_half",
                            stats::ks_test_2(top0, top0b), "null calibration", fmt("u", 0.0),
                            tm));
    return out;
}

Reports experiment_conjecture_independence(const SuiteConfig& cfg, EvolutionType type,
                                           std::size_t n) {
    n = scaled(cfg, n);
    Timer tm;
    const bool t1 = type == EvolutionType::type1;
    const double y_star = 0.5, u_star = 0.3;
    auto kp = kparams(cfg);
    Rng root = make_stream(cfg.seed).child("conjecture");
    std::vector<double> xm(n, -1), yt(n, -1);
    parallel_for(n, cfg.threads, [&](std::size_t i) {
        Rng rng = root.child(i);
        auto init = sample_pdip(rng, cfg.alpha,
                                t1 ? PdipVariant::alpha_zero : PdipVariant::alpha_alpha,
                                cfg.eps);
        auto res = dp_evolve(rng, kp, type, init, u_star, y_star);
        if (!res.ok) return;
        double m = res.state_u.mass_sum() + res.state_u.truncation_mass;
        if (!(m > 0) || !(res.mass_at_ystar > 0)) return;
        xm[i] = res.mass_at_ystar;
        yt[i] = res.state_u.largest_mass() / m;
    });
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < n; ++i)
        if (xm[i] > 0 && yt[i] >= 0) {
            xs.push_back(xm[i]);
            ys.push_back(yt[i]);
        }
    Reports out;
    {
        auto dc = stats::dcor_permutation_test(xs, ys, cfg.seed ^ 0xC0817ULL);
        TestReport r = base_report(cfg, "conjecture.probe", dc.n,
                                   fmt("y*", y_star) + " " + fmt("u*", u_star));
        r.statistic = dc.dcor;
        r.reference = "conjecture probe: no pass threshold";
        r.p_value = dc.p;
        r.informational = true;
        r.pass = true;
        r.runtime_ms = tm.ms();
        out.push_back(r);
    }
    // calibration: permutation p under synthetic independence is uniform
    {
        Rng crng = make_stream(cfg.seed).child("conjecture-calibration");
        const std::size_t reps = 100, m = 100;
        std::vector<double> pvals(reps);
        parallel_for(reps, cfg.threads, [&](std::size_t r) {
            Rng rr = crng.child(r);
            std::vector<double> a(m), b(m);
            for (auto& v : a) v = rr.uniform();
            for (auto& v : b) v = rr.uniform();
            pvals[r] = stats::dcor_permutation_test(a, b, rr.u64(), 99).p;
        });
        std::vector<double> obs(10, 0.0), exp(10, reps / 10.0);
        for (double p : pvals)
            obs[std::min<std::size_t>(static_cast<std::size_t>(p * 10), 9)] += 1;
        double p = stats::chi2_gof_p(obs, exp);
        TestReport r = base_report(cfg, "conjecture.calibration_uniform", reps, "");
        r.statistic = p;
        r.reference = "uniform permutation p under independence";
        r.p_value = p;
        r.pass = p > cfg.p_threshold;
        r.runtime_ms = tm.ms();
        out.push_back(r);
    }
    {
        Rng crng = make_stream(cfg.seed).child("conjecture-power");
        std::vector<double> a(200);
        for (auto& v : a) v = crng.uniform();
        auto dc = stats::dcor_permutation_test(a, a, crng.u64(), 199);
        TestReport r = base_report(cfg, "conjecture.calibration_power", a.size(), "");
        r.statistic = dc.p;
        r.reference = "coupled pairs give minimal permutation p";
        r.p_value = dc.p;
        r.pass = dc.p <= 1.0 / 200.0 + 1e-12;
        r.runtime_ms = tm.ms();
        out.push_back(r);
    }
    return out;
}

Reports experiment_leftmost_split(const SuiteConfig& cfg, double a, std::size_t n) {
    n = scaled(cfg, n);
    Timer tm;
    const double y = 0.2, rest_mass = 0.5;
    auto eng = engine_for(cfg, 1.0);
    Rng root = make_stream(cfg.seed).child("leftmost-split");
    std::vector<double> death(n), lm(n, -1), rm(n, -1);
    std::vector<double> levels{y};
    parallel_for(n, cfg.threads, [&](std::size_t i) {
        Rng rng = root.child(i);
        Rng arng = rng.child("a");
        auto cs = scaffold::sample_clade_summary(arng, eng, a, levels);
        death[i] = cs.initial_lifetime;
        auto rest = scaffold::type1_levels(rng, eng, make_partition({rest_mass}), levels);
        double rest_total = rest[0].mass_sum() + rest[0].truncation_mass;
        if (cs.initial_lifetime > y) {
            lm[i] = cs.leftmost[0];
            rm[i] = (cs.total[0] - cs.leftmost[0]) + rest_total;
        }
    });
    Reports out;
    auto ksY = stats::ks_test(death, [&](double t) {
        return besq::absorption_time_cdf(cfg.alpha, a, t);
    });
    out.push_back(ks_report(cfg, "leftmost_split.death_level", ksY,
                            "InverseGamma(1+alpha, a/2)", fmt("a", a), tm));
    std::vector<double> lms, rms;
    for (std::size_t i = 0; i < n; ++i)
        if (lm[i] >= 0) {
            lms.push_back(lm[i]);
            rms.push_back(rm[i]);
        }
    auto ksL = stats::ks_test(lms, [&](double c) {
        return besq::transition_killed_neg_cdf(cfg.alpha, a, y, c);
    });
    out.push_back(ks_report(cfg, "leftmost_split.leftmost_marginal", ksL,
                            "killed BESQ(-2alpha) marginal", fmt("y", y), tm));
    {
        Rng orng = make_stream(cfg.seed).child("leftmost-split-oracle");
        std::vector<double> oracle(rms.size());
        for (auto& v : oracle)
            v = besq::transition_nonneg(orng, 2.0 * cfg.alpha, rest_mass, y);
        out.push_back(ks_report(cfg, "leftmost_split.remaining_vs_oracle",
                                stats::ks_test_2(rms, oracle),
                                "independent BESQ(2alpha) pair", fmt("y", y), tm));
    }
    {
        // sample correlation under independence: sqrt(m) rho ~ N(0,1)
        double mx = stats::mean(lms), my = stats::mean(rms);
        double sxy = 0, sxx = 0, syy = 0;
        for (std::size_t i = 0; i < lms.size(); ++i) {
            sxy += (lms[i] - mx) * (rms[i] - my);
            sxx += (lms[i] - mx) * (lms[i] - mx);
            syy += (rms[i] - my) * (rms[i] - my);
        }
        double rho = sxy / std::sqrt(sxx * syy);
        double z = rho * std::sqrt(static_cast<double>(lms.size()));
        out.push_back(z_report(cfg, "leftmost_split.independence", z, lms.size(),
                               "zero correlation", fmt("y", y), tm));
    }
    {
        // large initial mass: the leftmost block survives every run
        Rng rng2 = make_stream(cfg.seed).child("leftmost-split-large");
        std::size_t n2 = std::min<std::size_t>(n, 2000), surv = 0;
        for (std::size_t i = 0; i < n2; ++i) {
            Rng r = rng2.child(i);
            surv += besq::absorption_time(r, cfg.alpha, 100.0) > y;
        }
        TestReport r = base_report(cfg, "leftmost_split.large_mass_survival", n2, "a=100");
        r.statistic = static_cast<double>(surv);
        r.reference = "all runs survive level 0.2";
        r.pass = surv == n2;
        r.runtime_ms = tm.ms();
        out.push_back(r);
    }
    return out;
}

Reports experiment_leftmost_law(const SuiteConfig& cfg, double b, double y, std::size_t n) {
    n = scaled(cfg, n);
    Timer tm;
    Reports out;
    const double r_rate = 1.0 / (2.0 * y);
    {
        auto eng = engine_for(cfg, y);
        Rng root = make_stream(cfg.seed).child("leftmost-law-skewer");
        std::vector<double> lm(n, -1);
        std::vector<double> levels{y};
        parallel_for(n, cfg.threads, [&](std::size_t i) {
            Rng rng = root.child(i);
            auto cs = scaffold::sample_clade_summary(rng, eng, b, levels);
            if (cs.total[0] > 0) lm[i] = cs.leftmost[0];
        });
        std::vector<double> survivors;
        for (double v : lm)
            if (v >= 0) survivors.push_back(v);
        auto ks = stats::ks_test(survivors, [&](double c) {
            return kernel::leftmost_L_cdf(cfg.alpha, b, r_rate, c);
        });
        out.push_back(ks_report(cfg, "leftmost_law.skewer", ks, "leftmost mass series density",
                                fmt("b", b) + " " + fmt("y", y), tm));
    }
    {
        Rng root = make_stream(cfg.seed).child("leftmost-law-sampler");
        std::size_t m = scaled(cfg, 100000);
        std::vector<double> draws(m);
        parallel_for(m, cfg.threads, [&](std::size_t i) {
            Rng rng = root.child(i);
            draws[i] = kernel::sample_leftmost_L(rng, cfg.alpha, b, r_rate);
        });
        auto lp = stats::empirical_laplace(draws, {0.5, 1.0, 2.0});
        double worst = 0;
        for (auto& p : lp) {
            double target = kernel::leftmost_L_laplace(cfg.alpha, b, r_rate, p.lambda);
            worst = std::max(worst, std::fabs(p.mean - target) / p.se);
        }
        out.push_back(z_report(cfg, "leftmost_law.laplace", worst, m,
                               "closed-form Laplace transform", fmt("b", b) + " " + fmt("y", y),
                               tm));
    }
    {
        // the series density integrates to 1
        double total = sf::integrate_semi_infinite(
            [&](double c) { return kernel::leftmost_L_density(cfg.alpha, b, r_rate, c); },
            1.0, 1e-9);
        TestReport r = base_report(cfg, "leftmost_law.density_normalization", 0, fmt("b", b));
        r.statistic = total;
        r.reference = "quadrature of the series density";
        r.pass = std::fabs(total - 1.0) < 1e-6;
        r.runtime_ms = tm.ms();
        out.push_back(r);
    }
    return out;
}

Reports clade_statistics(const SuiteConfig& cfg, const std::string& which, std::size_t n) {
    n = scaled(cfg, n);
    auto want = [&](const char* k) {
        return which.empty() || which.find(k) != std::string::npos;
    };
    Reports out;
    const double b = 1.0;
    if (want("iii") || want("iv")) {
        Timer tm;
        auto eng = engine_for(cfg, 1.0);
        Rng root = make_stream(cfg.seed).child("clade-stats-b");
        std::vector<double> j_plus(n), zeta_plus(n);
        std::vector<double> no_levels;
        parallel_for(n, cfg.threads, [&](std::size_t i) {
            Rng rng = root.child(i);
            auto cs = scaffold::sample_clade_summary(rng, eng, b, no_levels);
            j_plus[i] = cs.initial_lifetime;
            zeta_plus[i] = cs.zeta_plus;
        });
        if (want("iii")) {
            auto ks = stats::ks_test(j_plus, [&](double t) {
                return besq::absorption_time_cdf(cfg.alpha, b, t);
            });
            out.push_back(ks_report(cfg, "clade.iii.overshoot_given_mass", ks,
                                    "InverseGamma(1+alpha, b/2)", fmt("b", b), tm));
        }
        if (want("iv")) {
            auto ks = stats::ks_test(zeta_plus, [&](double z) {
                return z > 0 ? std::exp(-b / (2.0 * z)) : 0.0;
            });
            out.push_back(ks_report(cfg, "clade.iv.lifetime_given_mass", ks,
                                    "exp(-b/2z)", fmt("b", b), tm));
        }
    }
    if (want("v") || want("vi")) {
        Timer tm;
        const double y = 0.5;
        auto eng = engine_for(cfg, 1.0);
        Rng root = make_stream(cfg.seed).child("clade-stats-over");
        std::vector<double> m0(n), zp(n);
        parallel_for(n, cfg.threads, [&](std::size_t i) {
            Rng rng = root.child(i);
            auto [m, z] = scaffold::sample_clade_given_overshoot(rng, eng, y);
            m0[i] = m;
            zp[i] = z;
        });
        if (want("v")) {
            auto ks = stats::ks_test(m0, [&](double c) {
                return -std::expm1(-c / (2.0 * y));
            });
            out.push_back(ks_report(cfg, "clade.v.mass_given_overshoot", ks,
                                    "Exponential(1/2y)", fmt("y", y), tm));
        }
        if (want("vi")) {
            auto ks = stats::ks_test(zp, [&](double z) {
                return z >= y ? std::pow((z - y) / z, cfg.alpha) : 0.0;
            });
            out.push_back(ks_report(cfg, "clade.vi.lifetime_given_overshoot", ks,
                                    "((z-y)/z)^alpha", fmt("y", y), tm));
        }
    }
    if (want("ratio")) {
        Timer tm;
        const double y_star = 0.6, b0 = 0.5, z0 = 0.3;
        auto eng = engine_for(cfg, y_star);
        Rng root = make_stream(cfg.seed).child("clade-stats-harvest");
        std::size_t runs = std::max<std::size_t>(n / 4, 200);
        std::vector<std::vector<scaffold::Excursion>> pools(runs);
        parallel_for(runs, cfg.threads, [&](std::size_t i) {
            Rng rng = root.child(i);
            pools[i] = scaffold::harvest_excursions(rng, eng, y_star, 2.0 * y_star + 1.0);
        });
        std::size_t nb = 0, n2b = 0, nz = 0, n2z = 0;
        for (auto& pool : pools)
            for (auto& e : pool) {
                if (e.m0 > b0) {
                    ++nb;
                    if (e.m0 > 2 * b0) ++n2b;
                }
                if (e.zeta_plus > z0) {
                    ++nz;
                    if (e.zeta_plus > 2 * z0) ++n2z;
                }
            }
        const double target = std::pow(2.0, -cfg.alpha);
        out.push_back(z_report(cfg, "clade.i.mass_tail_ratio", stats::binomial_z(n2b, nb, target),
                               nb, "2^-alpha", fmt("b", b0), tm));
        out.push_back(z_report(cfg, "clade.ii.lifetime_tail_ratio",
                               stats::binomial_z(n2z, nz, target), nz, "2^-alpha", fmt("z", z0),
                               tm));
    }
    if (want("a2")) {
        Timer tm;
        auto eng = engine_for(cfg, 1.0);
        Rng root = make_stream(cfg.seed).child("clade-stats-a2");
        std::size_t m = std::max<std::size_t>(n / 2, 2000);
        std::vector<double> lap(m);
        parallel_for(m, cfg.threads, [&](std::size_t i) {
            Rng rng = root.child(i);
            lap[i] = std::exp(-scaffold::sample_first_passage_time(rng, eng, 1.0));
        });
        double mhat = stats::mean(lap);
        double se = stats::sample_sd(lap) / std::sqrt(static_cast<double>(m));
        double target = std::pow(std::pow(2.0, cfg.alpha) * std::tgamma(1.0 + cfg.alpha),
                                 1.0 / (1.0 + cfg.alpha));
        double z = (-std::log(mhat) - target) / (se / mhat);
        out.push_back(z_report(cfg, "clade.a2.hitting_time_laplace", z, m,
                               "psi^{-1}(1) = (2^a Gamma(1+a))^{1/(1+a)}", fmt("theta", 1.0),
                               tm));
    }
    if (want("a3")) {
        Timer tm;
        // inverse local time at a level scales like a Stable(alpha/(1+alpha))
        // subordinator; aggregate mass along it like a Stable(alpha)
        const double y_star = 0.5, s0 = 0.1, x_start = 1.0, stop = -8.0;
        auto eng = engine_for(cfg, y_star);
        Rng root = make_stream(cfg.seed).child("clade-stats-a3");
        std::size_t m = std::max<std::size_t>(n / 10, 500);
        std::vector<double> tau(m, -1), mass(m, -1);
        parallel_for(m, cfg.threads, [&](std::size_t i) {
            Rng rng = root.child(i);
            auto r = scaffold::inverse_local_time_probe(rng, eng, y_star, s0, x_start, stop);
            tau[i] = r.first;
            mass[i] = r.second;
        });
        // absorption at the deep stop level acts as exponential killing of the
        // subordinator: estimate the kill rate from the survival fraction and
        // subtract it from the empirical Laplace exponent
        std::size_t alive = 0;
        for (std::size_t i = 0; i < m; ++i) alive += tau[i] >= 0;
        const double kill = -std::log(static_cast<double>(alive) / static_cast<double>(m)) / s0;
        auto slope_of = [&](const std::vector<double>& v) {
            std::vector<double> ls, lf;
            for (double th : {0.5, 1.0, 2.0, 4.0}) {
                double s = 0;
                for (double x : v)
                    if (x >= 0) s += std::exp(-th * x);
                double phi = -std::log(s / static_cast<double>(v.size())) / s0 - kill;
                ls.push_back(std::log(th));
                lf.push_back(std::log(phi));
            }
            double mx = stats::mean(ls), my = stats::mean(lf), num = 0, den = 0;
            for (std::size_t k = 0; k < ls.size(); ++k) {
                num += (ls[k] - mx) * (lf[k] - my);
                den += (ls[k] - mx) * (ls[k] - mx);
            }
            return num / den;
        };
        double slope_tau = slope_of(tau);
        double target_tau = cfg.alpha / (1.0 + cfg.alpha);
        TestReport r1 = base_report(cfg, "clade.a3.inverse_local_time_slope", alive,
                                    fmt("s0", s0));
        r1.statistic = slope_tau;
        r1.reference = "alpha/(1+alpha) within 10%";
        r1.pass = std::fabs(slope_tau - target_tau) < 0.1 * target_tau;
        r1.runtime_ms = tm.ms();
        out.push_back(r1);
        double slope_m = slope_of(mass);
        TestReport r2 = base_report(cfg, "clade.a3.aggregate_mass_slope", alive,
                                    fmt("s0", s0));
        r2.statistic = slope_m;
        r2.reference = "alpha within 10%";
        r2.pass = std::fabs(slope_m - cfg.alpha) < 0.1 * cfg.alpha;
        r2.runtime_ms = tm.ms();
        out.push_back(r2);
    }
    return out;
}

Reports experiment_semigroup(const SuiteConfig& cfg, std::size_t n) {
    n = scaled(cfg, n);
    Timer tm;
    auto kp = kparams(cfg);
    Reports out;
    {
        const double y = 0.4;
        Rng r1 = make_stream(cfg.seed).child("ck-one");
        Rng r2 = make_stream(cfg.seed).child("ck-two");
        std::vector<double> m1(n), l1(n), c1(n), m2(n), l2(n), c2(n);
        parallel_for(n, cfg.threads, [&](std::size_t i) {
            Rng a = r1.child(i);
            auto st = kernel::kappa_step(a, kp, unit_block(), y);
            m1[i] = st.mass_sum() + st.truncation_mass;
            l1[i] = st.leftmost_mass();
            c1[i] = static_cast<double>(st.count_above(0.01));
            Rng bb = r2.child(i);
            auto mid = kernel::kappa_step(bb, kp, unit_block(), 0.5 * y);
            auto fin = kernel::kappa_step(bb, kp, mid, 0.5 * y);
            m2[i] = fin.mass_sum() + fin.truncation_mass;
            l2[i] = fin.leftmost_mass();
            c2[i] = static_cast<double>(fin.count_above(0.01));
        });
        out.push_back(ks_report(cfg, "semigroup.ck.total_mass", stats::ks_test_2(m1, m2),
                                "one step vs two half steps", fmt("y", y), tm));
        out.push_back(ks_report(cfg, "semigroup.ck.leftmost", stats::ks_test_2(l1, l2),
                                "one step vs two half steps", fmt("y", y), tm));
        out.push_back(ks_report(cfg, "semigroup.ck.count_above_0.01", stats::ks_test_2(c1, c2),
                                "one step vs two half steps", fmt("y", y), tm));
    }
    {
        const double y = 0.3, c = 2.0;
        Rng r1 = make_stream(cfg.seed).child("selfsim-a");
        Rng r2 = make_stream(cfg.seed).child("selfsim-b");
        std::vector<double> ma(n), mb(n);
        parallel_for(n, cfg.threads, [&](std::size_t i) {
            Rng a = r1.child(i);
            auto st = kernel::kappa_step(a, kp, unit_block(), y);
            ma[i] = c * (st.mass_sum() + st.truncation_mass);
            Rng bb = r2.child(i);
            auto st2 = kernel::kappa_step(bb, kp, make_partition({c}), c * y);
            mb[i] = st2.mass_sum() + st2.truncation_mass;
        });
        out.push_back(ks_report(cfg, "semigroup.selfsimilar.total_mass",
                                stats::ks_test_2(ma, mb), "c beta^{y} vs evolution from c beta",
                                fmt("c", c), tm));
    }
    return out;
}

Reports experiment_diversity_identity(const SuiteConfig& cfg, std::size_t n_samples) {
    Timer tm;
    Rng root = make_stream(cfg.seed).child("diversity-identity");
    const double h = 1e-6, eps = 1e-8;
    std::vector<int> good(n_samples, 0);
    parallel_for(n_samples, cfg.threads, [&](std::size_t i) {
        Rng rng = root.child(i);
        auto p = sample_stable_partition(rng, cfg.alpha, 1.0, eps);
        double exact = p.diversity_total_or(0.0);
        if (exact <= 0) return;
        auto est = estimate_diversity(p, cfg.alpha, p.total_mass, std::vector<double>{h});
        good[i] = std::fabs(est[0] - exact) <= 0.10 * exact;
    });
    std::size_t g = 0;
    for (int v : good) g += static_cast<std::size_t>(v);
    TestReport r = base_report(cfg, "diversity.tracked_vs_estimator", n_samples, fmt("h", h));
    r.statistic = static_cast<double>(g) / static_cast<double>(n_samples);
    r.reference = ">= 90% of samples within 10% relative error";
    r.pass = r.statistic >= 0.90;
    r.runtime_ms = tm.ms();
    return {r};
}

Reports experiment_type0_consistency(const SuiteConfig& cfg, std::size_t n) {
    n = scaled(cfg, n);
    Timer tm;
    const double y = 0.5;
    auto eng = engine_for(cfg, y);
    std::vector<double> levels{y};
    std::vector<double> m1(n), m2(n);
    Rng r1 = make_stream(cfg.seed).child("consistency-j");
    Rng r2 = make_stream(cfg.seed).child("consistency-2j");
    parallel_for(n, cfg.threads, [&](std::size_t i) {
        Rng a = r1.child(i);
        auto s1 = scaffold::type0_levels(a, eng, IntervalPartition{}, levels, 2.0);
        m1[i] = s1[0].mass_sum() + s1[0].truncation_mass;
        Rng b = r2.child(i);
        auto s2 = scaffold::type0_levels(b, eng, IntervalPartition{}, levels, 4.0);
        m2[i] = s2[0].mass_sum() + s2[0].truncation_mass;
    });
    Reports out;
    out.push_back(ks_report(cfg, "type0.descent_depth_consistency", stats::ks_test_2(m1, m2),
                            "depth j vs 2j", fmt("y", y), tm));
    return out;
}

Reports verify_clades(const SuiteConfig& cfg) {
    Reports out = clade_statistics(cfg);
    auto add = [&](Reports r) {
        for (auto& t : r) out.push_back(std::move(t));
    };
    add(experiment_leftmost_law(cfg));
    add(experiment_leftmost_split(cfg));
    add(experiment_type0_consistency(cfg));
    return out;
}

Reports verify_kernels(const SuiteConfig& cfg) {
    Reports out = experiment_besq_absorption(cfg);
    auto add = [&](Reports r) {
        for (auto& t : r) out.push_back(std::move(t));
    };
    add(experiment_entrance_survival(cfg));
    add(experiment_total_mass(cfg));
    add(experiment_method_agreement(cfg));
    add(experiment_semigroup(cfg));
    add(experiment_diversity_identity(cfg));
    return out;
}

Reports verify_pseudostat(const SuiteConfig& cfg) {
    Reports out = experiment_pseudostationarity(cfg, EvolutionType::type1);
    auto r0 = experiment_pseudostationarity(cfg, EvolutionType::type0);
    out.insert(out.end(), r0.begin(), r0.end());
    return out;
}

Reports verify_stationarity(const SuiteConfig& cfg) {
    Reports out = experiment_stationarity(cfg, EvolutionType::type1);
    auto r0 = experiment_stationarity(cfg, EvolutionType::type0);
    out.insert(out.end(), r0.begin(), r0.end());
    return out;
}

Reports verify_conjecture(const SuiteConfig& cfg) {
    return experiment_conjecture_independence(cfg, EvolutionType::type0);
}

Reports verify_all(const SuiteConfig& cfg) {
    Reports out = verify_kernels(cfg);
    auto add = [&](Reports r) {
        for (auto& t : r) out.push_back(std::move(t));
    };
    add(verify_clades(cfg));
    add(verify_pseudostat(cfg));
    add(verify_stationarity(cfg));
    add(verify_conjecture(cfg));
    return out;
}

} // namespace ipevo::experiments
