#include "ipevo/besq.hpp"

#include "ipevo/special.hpp"

#include <algorithm>
#include <cmath>

namespace ipevo::besq {

double transition_nonneg(Rng& rng, double delta, double v, double s) {
    if (delta < 0) throw invalid_input("transition_nonneg: delta must be >= 0");
    if (!(s > 0)) throw invalid_input("transition_nonneg: step must be > 0");
    std::uint64_t n = (v > 0) ? rng.poisson(v / (2.0 * s)) : 0;
    double shape = 0.5 * delta + static_cast<double>(n);
    if (shape == 0) return 0.0;
    return 2.0 * s * rng.gamma(shape, 1.0);
}

double absorption_time(Rng& rng, double alpha, double z) {
    return rng.inverse_gamma(1.0 + alpha, 0.5 * z);
}

double absorption_time_cdf(double alpha, double z, double t) {
    if (t <= 0) return 0.0;
    // zeta <= t  <=>  z/(2 zeta) >= z/2t, with z/(2 zeta) ~ Gamma(1+alpha,1)
    return sf::gamma_q(1.0 + alpha, 0.5 * z / t);
}

double survival_probability(double alpha, double v, double s) {
    return sf::gamma_p(1.0 + alpha, 0.5 * v / s);
}

double transition_killed_neg(Rng& rng, double alpha, double v, double s) {
    // mixture weights pi_k ~ e^{-x} x^{k+1+alpha} / Gamma(k+2+alpha), x = v/2s,
    // summing to the survival probability; value ~ Gamma(k+1, 1/2s)
    const double x = 0.5 * v / s;
    const double total = sf::gamma_p(1.0 + alpha, x);
    double u = rng.uniform() * total;
    double lterm = -x + (1.0 + alpha) * std::log(x) - std::lgamma(2.0 + alpha);
    double term = std::exp(lterm);
    double cum = term;
    std::uint64_t k = 0;
    while (u > cum && k < 100000) {
        ++k;
        term *= x / (static_cast<double>(k) + 1.0 + alpha);
        cum += term;
    }
    return 2.0 * s * rng.gamma(static_cast<double>(k) + 1.0, 1.0);
}

double transition_killed_neg_cdf(double alpha, double v, double s, double c) {
    if (c <= 0) return 0.0;
    const double x = 0.5 * v / s;
    const double total = sf::gamma_p(1.0 + alpha, x);
    double lterm = -x + (1.0 + alpha) * std::log(x) - std::lgamma(2.0 + alpha);
    double cum = 0;
    for (int k = 0; k < 100000; ++k) {
        double w = std::exp(lterm);
        cum += w * sf::gamma_p(static_cast<double>(k) + 1.0, 0.5 * c / s);
        if (static_cast<double>(k) > x && w < 1e-17 * total) break;
        lterm += std::log(x) - std::log(static_cast<double>(k) + 2.0 + alpha);
    }
    return std::min(cum / total, 1.0);
}

double density_killed_neg(double alpha, double v, double c, double s) {
    if (c <= 0 || v <= 0) return 0.0;
    const double nu = 1.0 + alpha;
    double lg = -std::log(2.0 * s) + 0.5 * nu * std::log(v / c) - (v + c) / (2.0 * s) +
                sf::log_bessel_i(nu, std::sqrt(v * c) / s);
    return std::exp(lg);
}

double density_nonneg(double delta, double v, double c, double s) {
    if (c <= 0 || v <= 0) return 0.0;
    const double nu = 0.5 * delta - 1.0;
    double lg = -std::log(2.0 * s) + 0.5 * nu * std::log(c / v) - (v + c) / (2.0 * s) +
                sf::log_bessel_i(std::fabs(nu), std::sqrt(v * c) / s);
    return std::exp(lg);
}

double bridge_value(Rng& rng, double p, double u, double w, double x, double y) {
    if (!(u > 0) || !(w > 0)) throw invalid_input("bridge_value: u,w must be > 0");
    const double lambda = (u + w) / (2.0 * u * w);
    const double m1 = x * w / (2.0 * u * (u + w));
    const double m2 = y * u / (2.0 * w * (u + w));
    std::uint64_t k = (m1 > 0) ? rng.poisson(m1) : 0;
    std::uint64_t l = (m2 > 0) ? rng.poisson(m2) : 0;
    std::uint64_t j = 0;
    if (x > 0 && y > 0) j = rng.bessel(p - 1.0, std::sqrt(x * y) / (u + w));
    double shape = static_cast<double>(k + l + 2 * j) + p;
    return rng.gamma(shape, lambda);
}

Spindle::Spindle(double alpha, double lifetime, double birth_value, Rng rng)
    : p_(2.0 + alpha), lifetime_(lifetime), birth_value_(birth_value), rng_(rng) {
    if (!(lifetime > 0)) throw invalid_input("Spindle: lifetime must be > 0");
    knots_[0.0] = birth_value;
    knots_[lifetime] = 0.0;
}

double Spindle::value_at(double h) {
    if (h <= 0) return birth_value_;
    if (h >= lifetime_) return 0.0;
    auto hi = knots_.lower_bound(h);
    if (hi->first == h) return hi->second;
    auto lo = std::prev(hi);
    double v = bridge_value(rng_, p_, h - lo->first, hi->first - h, lo->second, hi->second);
    knots_[h] = v;
    return v;
}

std::vector<std::pair<double, double>> Spindle::grid() const {
    return {knots_.begin(), knots_.end()};
}

double sample_excursion_lifetime_tail(Rng& rng, double alpha, double z_cutoff) {
    if (!(z_cutoff > 0)) throw invalid_input("lifetime tail: z_cutoff must be > 0");
    return z_cutoff * std::pow(rng.uniform(), -1.0 / (1.0 + alpha));
}

double excursion_tail_rate(double alpha, double z) {
    const double c = alpha / (std::pow(2.0, alpha) * std::tgamma(1.0 - alpha) *
                              std::tgamma(1.0 + alpha));
    return c * std::pow(z, -1.0 - alpha);
}

double compensator_slope(double alpha, double z) {
    return excursion_tail_rate(alpha, z) * z * (1.0 + alpha) / alpha;
}

double small_jump_variance(double alpha, double z) {
    // int_0^z x^2 nu(zeta in dx) with nu(zeta in dx) = c (1+alpha) x^{-2-alpha} dx
    const double c = alpha / (std::pow(2.0, alpha) * std::tgamma(1.0 - alpha) *
                              std::tgamma(1.0 + alpha));
    return c * (1.0 + alpha) / (1.0 - alpha) * std::pow(z, 1.0 - alpha);
}

std::vector<double> sample_spindle_given_lifetime(Rng& rng, double alpha, double zeta,
                                                  const std::vector<double>& grid) {
    Spindle sp(alpha, zeta, 0.0, rng.child("spindle"));
    std::vector<double> out;
    out.reserve(grid.size());
    for (double t : grid) out.push_back(sp.value_at(t));
    return out;
}

BrokenSpindle sample_clade_leftmost_spindle_given_overshoot(Rng& rng, double alpha, double y) {
    if (!(y > 0)) throw invalid_input("overshoot must be > 0");
    double a = rng.exponential(1.0 / (2.0 * y));
    return {a, Spindle(alpha, y, a, rng.child("fpb"))};
}

namespace {

// adaptive Euler-Maruyama on value coordinates; absorbing boundary when
// absorb is set (delta <= 0), reflecting otherwise
void euler_advance(Rng& rng, double delta, double& v, double& t, double target, bool absorb,
                   double dt_max, EulerPath& out) {
    while (t < target && !out.absorbed) {
        double dt = std::min({dt_max, target - t,
                              std::max(v / (10.0 * std::max(std::fabs(delta), 1e-12)), 1e-9),
                              std::max(v / 400.0, 1e-9)});
        double vn = v + delta * dt + 2.0 * std::sqrt(std::max(v, 0.0) * dt) * rng.normal();
        if (absorb) {
            if (vn <= 0) {
                out.absorbed = true;
                // linear small-time refinement of the crossing
                out.absorption_time = t + dt * (v / (v - vn));
                v = 0;
                return;
            }
            // Brownian-bridge hitting correction between step endpoints
            double vbar = 0.5 * (v + vn);
            double phit = std::exp(-v * vn / (2.0 * vbar * dt));
            if (rng.uniform() < phit) {
                out.absorbed = true;
                out.absorption_time = t + 0.5 * dt;
                v = 0;
                return;
            }
        } else if (vn < 0) {
            vn = -vn;
        }
        v = vn;
        t += dt;
    }
}

} // namespace

EulerPath besq_path(Rng& rng, double delta, double z0, const std::vector<double>& grid,
                    bool absorb_at_zero, double dt_max) {
    if (grid.empty() || grid.front() != 0.0)
        throw invalid_input("besq_path: grid must start at 0");
    if (delta <= 0 && !absorb_at_zero)
        throw invalid_input("besq_path: delta <= 0 requires absorption");
    if (delta <= 0 && !(z0 > 0)) throw invalid_input("besq_path: delta <= 0 requires z0 > 0");
    EulerPath out;
    out.times = grid;
    out.values.assign(grid.size(), 0.0);
    out.values[0] = z0;
    double v = z0;
    double t = 0;
    for (std::size_t k = 1; k < grid.size(); ++k) {
        if (out.absorbed) continue;
        if (delta > 0) {
            v = transition_nonneg(rng, delta, v, grid[k] - t);
            t = grid[k];
        } else {
            euler_advance(rng, delta, v, t, grid[k], true, dt_max, out);
        }
        out.values[k] = v;
    }
    return out;
}

EulerPath besq_path_euler(Rng& rng, double delta, double z0, const std::vector<double>& grid,
                          double dt_max) {
    if (grid.empty() || grid.front() != 0.0)
        throw invalid_input("besq_path_euler: grid must start at 0");
    EulerPath out;
    out.times = grid;
    out.values.assign(grid.size(), 0.0);
    out.values[0] = z0;
    double v = z0;
    double t = 0;
    for (std::size_t k = 1; k < grid.size(); ++k) {
        if (out.absorbed) continue;
        euler_advance(rng, delta, v, t, grid[k], delta <= 0, dt_max, out);
        out.values[k] = v;
    }
    return out;
}

} // namespace ipevo::besq
