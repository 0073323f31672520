#include "ipevo/pdip.hpp"

#include "ipevo/special.hpp"

#include <algorithm>
#include <cmath>

namespace ipevo {

double tilted_jump_rate_above(double alpha, double r, double eps) {
    // (alpha/Gamma(1-alpha)) int_eps^inf c^{-1-alpha} e^{-cr} dc, integrated
    // by parts so only the regularized upper gamma is needed
    const double x = r * eps;
    const double g1 = std::tgamma(1.0 - alpha);
    return std::pow(eps, -alpha) * std::exp(-x) / g1 -
           std::pow(r, alpha) * sf::gamma_q(1.0 - alpha, x);
}

double tilted_mean_mass_below(double alpha, double r, double eps) {
    // (alpha/Gamma(1-alpha)) int_0^eps c^{-alpha} e^{-cr} dc
    return alpha * std::pow(r, alpha - 1.0) * sf::gamma_p(1.0 - alpha, r * eps);
}

namespace {

// size of a tilted jump conditioned > eps: Pareto proposal, e^{-rc} thinning
double sample_tilted_jump(Rng& rng, double alpha, double r, double eps) {
    for (;;) {
        double c = eps * std::pow(rng.uniform(), -1.0 / alpha);
        if (std::log(rng.uniform()) < -r * (c - eps)) return c;
    }
}

} // namespace

SubordinatorRange sample_tilted_range(Rng& rng, double alpha, double r, double eps) {
    if (!(alpha > 0) || !(alpha < 1)) throw invalid_input("alpha must be in (0,1)");
    if (!(r > 0) || !(eps > 0)) throw invalid_input("r and eps must be > 0");
    SubordinatorRange out;
    out.tilt_rate = r;
    out.elapsed_local_time = rng.exponential(std::pow(r, alpha));
    const double rate = tilted_jump_rate_above(alpha, r, eps);
    const std::uint64_t n = rng.poisson(rate * out.elapsed_local_time);
    out.jumps.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        double s = rng.uniform(0.0, out.elapsed_local_time);
        double c = sample_tilted_jump(rng, alpha, r, eps);
        out.jumps.push_back({s, c});
    }
    std::sort(out.jumps.begin(), out.jumps.end(),
              [](const SubordinatorJump& a, const SubordinatorJump& b) {
                  return a.local_time < b.local_time;
              });
    for (const auto& j : out.jumps) out.terminal_value += j.size;
    out.truncated_mass = tilted_mean_mass_below(alpha, r, eps) * out.elapsed_local_time;
    return out;
}

IntervalPartition sample_stable_partition(Rng& rng, double alpha, double r, double eps) {
    SubordinatorRange range = sample_tilted_range(rng, alpha, r, eps);
    IntervalPartition p;
    p.blocks.reserve(range.jumps.size());
    p.diversity_meta.emplace();
    p.diversity_meta->reserve(range.jumps.size());
    double x = 0;
    for (const auto& j : range.jumps) {
        p.blocks.push_back({x, x + j.size});
        p.diversity_meta->push_back(j.local_time);
        x += j.size;
    }
    p.truncation_mass = range.truncated_mass;
    p.total_mass = x + range.truncated_mass;
    p.total_diversity = range.elapsed_local_time;
    return p;
}

IntervalPartition sample_pdip(Rng& rng, double alpha, PdipVariant variant, double eps) {
    const double r = 1.0; // the normalized law does not depend on the tilt
    IntervalPartition beta = sample_stable_partition(rng, alpha, r, eps);
    if (variant == PdipVariant::alpha_zero) {
        double g0 = rng.gamma(1.0 - alpha, r);
        IntervalPartition left;
        left.blocks.push_back({0.0, g0});
        left.total_mass = g0;
        left.diversity_meta = std::vector<double>{0.0};
        left.total_diversity = 0.0;
        beta = concatenate(left, beta);
    }
    if (beta.total_mass <= 0) return beta;
    return scale(1.0 / beta.total_mass, beta, alpha);
}

} // namespace ipevo
