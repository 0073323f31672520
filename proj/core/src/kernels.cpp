#include "ipevo/kernels.hpp"

#include "ipevo/pdip.hpp"
#include "ipevo/special.hpp"

#include <algorithm>
#include <cmath>

namespace ipevo::kernel {

double sample_leftmost_L(Rng& rng, double alpha, double b, double r) {
    if (!(b > 0) || !(r > 0)) throw invalid_input("sample_leftmost_L: b,r must be > 0");
    std::uint64_t n = rng.zt_poisson(b * r);
    return rng.gamma(static_cast<double>(n) - alpha, r);
}

double leftmost_L_density(double alpha, double b, double r, double c) {
    if (c <= 0) return 0.0;
    // (r^{-a}/(e^{br}-1)) c^{-1-a} e^{-cr} sum_n (b c r^2)^n / (n! Gamma(n-a)),
    // truncated when the next term falls below 1e-16 of the running sum
    const double x = b * c * r * r;
    double sum = 0;
    double lx = std::log(x);
    for (int n = 1; n < 400; ++n) {
        double t = std::exp(n * lx - std::lgamma(n + 1.0) - std::lgamma(n - alpha));
        sum += t;
        if (n > 2 && t < 1e-16 * sum) break;
    }
    return std::pow(r, -alpha) / std::expm1(b * r) * std::pow(c, -1.0 - alpha) *
           std::exp(-c * r) * sum;
}

double leftmost_L_cdf(double alpha, double b, double r, double c) {
    if (c <= 0) return 0.0;
    // mixture form: N zero-truncated Poisson(br), L | N ~ Gamma(N - alpha, r)
    const double x = b * r;
    const double denom = -std::expm1(-x); // 1 - e^{-x}
    double cum = 0;
    double lw = -x; // log of e^{-x} x^n / n! at n=0
    for (int n = 1; n < 500; ++n) {
        lw += std::log(x) - std::log(static_cast<double>(n));
        double w = std::exp(lw) / denom;
        cum += w * sf::gamma_p(n - alpha, r * c);
        if (n > x + 10 * std::sqrt(x) + 30) break;
    }
    return std::min(cum, 1.0);
}

double leftmost_L_laplace(double alpha, double b, double r, double lambda) {
    return std::pow((r + lambda) / r, alpha) * std::expm1(b * r * r / (r + lambda)) /
           std::expm1(b * r);
}

IntervalPartition sample_mu(Rng& rng, const KernelParams& kp, double b, double r) {
    if (!(b > 0) || !(r > 0)) throw invalid_input("sample_mu: b,r must be > 0");
    IntervalPartition out;
    if (std::log(rng.uniform()) < -b * r) return out; // empty with probability e^{-br}
    double L = sample_leftmost_L(rng, kp.alpha, b, r);
    double B = rng.gamma(kp.alpha, r);
    IntervalPartition left;
    left.blocks.push_back({0.0, L});
    left.total_mass = L;
    left.diversity_meta = std::vector<double>{0.0};
    left.total_diversity = 0.0;
    IntervalPartition tail = sample_pdip(rng, kp.alpha, PdipVariant::alpha_alpha, kp.eps / B);
    return concatenate(left, scale(B, tail, kp.alpha));
}

IntervalPartition kappa_step(Rng& rng, const KernelParams& kp, const IntervalPartition& beta,
                             double y) {
    if (!(y > 0)) throw invalid_input("kappa_step: y must be > 0");
    const double r = 1.0 / (2.0 * y);
    std::vector<IntervalPartition> parts;
    Rng blocks_rng = rng.child("blocks");
    for (std::size_t i = 0; i < beta.blocks.size(); ++i) {
        double b = beta.blocks[i].length();
        if (b < 1e-300) continue; // numerically extinct
        Rng child = blocks_rng.child(i);
        // cheap emptiness draw first: most blocks contribute nothing
        if (std::log(child.uniform()) < -b * r) continue;
        double L = sample_leftmost_L(child, kp.alpha, b, r);
        double B = child.gamma(kp.alpha, r);
        IntervalPartition left;
        left.blocks.push_back({0.0, L});
        left.total_mass = L;
        left.diversity_meta = std::vector<double>{0.0};
        left.total_diversity = 0.0;
        IntervalPartition tail = sample_pdip(child, kp.alpha, PdipVariant::alpha_alpha,
                                             std::max(kp.eps / B, 1e-14));
        parts.push_back(concatenate(left, scale(B, tail, kp.alpha)));
    }
    return truncate_small_blocks(concatenate(parts), kp.eps);
}

IntervalPartition kappa0_step(Rng& rng, const KernelParams& kp, const IntervalPartition& beta,
                              double y) {
    if (!(y > 0)) throw invalid_input("kappa0_step: y must be > 0");
    const double r = 1.0 / (2.0 * y);
    Rng head_rng = rng.child("immigration");
    double B = head_rng.gamma(kp.alpha, r);
    IntervalPartition head = scale(
        B, sample_pdip(head_rng, kp.alpha, PdipVariant::alpha_alpha, std::max(kp.eps / B, 1e-14)),
        kp.alpha);
    IntervalPartition tail = kappa_step(rng, kp, beta, y);
    return truncate_small_blocks(concatenate(head, tail), kp.eps);
}

EvolutionTrace evolve_by_kernel(Rng& rng, const KernelParams& kp, const IntervalPartition& beta0,
                                const std::vector<double>& levels, EvolutionType type) {
    if (levels.empty() || levels.front() != 0.0)
        throw invalid_input("evolve_by_kernel: levels must start at 0");
    for (std::size_t i = 1; i < levels.size(); ++i)
        if (!(levels[i] > levels[i - 1]))
            throw invalid_input("evolve_by_kernel: levels must be strictly increasing");
    EvolutionTrace tr;
    tr.alpha = kp.alpha;
    tr.method = Method::kernel;
    tr.type = type;
    tr.push(0.0, beta0);
    IntervalPartition cur = beta0;
    Rng steps = rng.child("steps");
    for (std::size_t k = 1; k < levels.size(); ++k) {
        double dy = levels[k] - levels[k - 1];
        Rng step_rng = steps.child(k);
        cur = (type == EvolutionType::type1) ? kappa_step(step_rng, kp, cur, dy)
                                             : kappa0_step(step_rng, kp, cur, dy);
        tr.push(levels[k], cur);
    }
    return tr;
}

double besq0_total_mass_atom(double b, double y) { return std::exp(-b / (2.0 * y)); }

double besq0_total_mass_cdf_positive(double b, double y, double c) {
    if (c <= 0) return 0.0;
    // positive part is Gamma(N, 1/2y) with N a zero-truncated Poisson(b/2y)
    const double x = b / (2.0 * y);
    const double denom = -std::expm1(-x);
    double cum = 0;
    double lw = -x;
    for (int n = 1; n < 500; ++n) {
        lw += std::log(x) - std::log(static_cast<double>(n));
        cum += std::exp(lw) / denom * sf::gamma_p(static_cast<double>(n), c / (2.0 * y));
        if (n > x + 10 * std::sqrt(x) + 30) break;
    }
    return std::min(cum, 1.0);
}

} // namespace ipevo::kernel
