#pragma once

#include "ipevo/partition.hpp"
#include "ipevo/rng.hpp"
#include "ipevo/trace.hpp"

#include <vector>

namespace ipevo::kernel {

struct KernelParams {
    double alpha;
    double eps = 1e-8; // mass resolution for generated partitions
};

// Leftmost-block mass under the one-block transition law: exactly
// Gamma(N - alpha, r) with N a zero-truncated Poisson(b r) count.  The
// density below is the equivalent series form used as a test reference.
double sample_leftmost_L(Rng& rng, double alpha, double b, double r);
double leftmost_L_density(double alpha, double b, double r, double c);
double leftmost_L_cdf(double alpha, double b, double r, double c);
// closed-form Laplace transform ((r+l)/r)^a (e^{b r^2/(r+l)} - 1)/(e^{b r} - 1)
double leftmost_L_laplace(double alpha, double b, double r, double lambda);

// One-block transition measure: empty with probability e^{-b r}, otherwise
// a leftmost block of mass L followed by an independent Gamma(alpha, r)
// scaled unit Poisson-Dirichlet partition.
IntervalPartition sample_mu(Rng& rng, const KernelParams& kp, double b, double r);

// type-1 transition: independent one-block draws per input block, concatenated
IntervalPartition kappa_step(Rng& rng, const KernelParams& kp, const IntervalPartition& beta,
                             double y);
// type-0 transition: same, with an independent Gamma(alpha, 1/2y)-scaled
// Poisson-Dirichlet component prepended
IntervalPartition kappa0_step(Rng& rng, const KernelParams& kp, const IntervalPartition& beta,
                              double y);

// iterate the kernel over successive level increments
EvolutionTrace evolve_by_kernel(Rng& rng, const KernelParams& kp, const IntervalPartition& beta0,
                                const std::vector<double>& levels, EvolutionType type);

// marginal law of the total mass for a type-1 evolution from mass b at
// level y: atom e^{-b/2y} at zero plus a Bessel-series continuous part
double besq0_total_mass_atom(double b, double y);
double besq0_total_mass_cdf_positive(double b, double y, double c); // conditioned on > 0

} // namespace ipevo::kernel
