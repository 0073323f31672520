#pragma once

#include "ipevo/rng.hpp"

#include <map>
#include <vector>

namespace ipevo::besq {

// --- exact marginals -------------------------------------------------------

// Squared Bessel transition over time step s for dimension delta >= 0:
// Z(t+s) | Z(t)=v  =  2s * Gamma(delta/2 + N, 1)  with  N ~ Poisson(v/2s).
// For delta = 0 and N = 0 the value is exactly 0 (absorption atom).
double transition_nonneg(Rng& rng, double delta, double v, double s);

// Absorption time of BESQ(-2 alpha) from z > 0: InverseGamma(1+alpha, z/2)
double absorption_time(Rng& rng, double alpha, double z);
double absorption_time_cdf(double alpha, double z, double t);

// BESQ(-2 alpha) killed at 0: P{alive at time s | Z(0)=v}, and a draw of
// Z(s) conditioned on being alive (mixture with fractional Poisson weights)
double survival_probability(double alpha, double v, double s);
double transition_killed_neg(Rng& rng, double alpha, double v, double s);
// CDF of the killed transition conditioned on survival
double transition_killed_neg_cdf(double alpha, double v, double s, double c);

// transition density of the killed BESQ(-2 alpha), equal by time reversal
// to the BESQ(4+2 alpha) density with arguments swapped
double density_killed_neg(double alpha, double v, double c, double s);
// transition density of BESQ(delta >= 0) started from v > 0 (continuous part)
double density_nonneg(double delta, double v, double c, double s);

// --- bridges ---------------------------------------------------------------

// Interior marginal of a squared Bessel bridge with index p = delta/2:
// value at distance u from the left endpoint (value x) and w from the right
// endpoint (value y).  Exact: Gamma(K + L + 2J + p, lambda) with independent
// K ~ Poisson, L ~ Poisson and a Bessel-distributed coupling count J
// (Chu-Vandermonde decomposition of the two-sided density product).
// With p = 2 + alpha and y = 0 this is the BESQ(-2 alpha) first-passage
// bridge; with x = y = 0 it is the excursion conditioned on its lifetime.
double bridge_value(Rng& rng, double p, double u, double w, double x, double y);

// --- spindles ---------------------------------------------------------------

// One excursion-like path, represented lazily: heights are sampled on demand
// by consistent bridge refinement between already-sampled heights, so
// multi-level queries of one realization agree.  birth_value > 0 encodes a
// broken spindle cut at its birth level.
class Spindle {
  public:
    Spindle(double alpha, double lifetime, double birth_value, Rng rng);

    double lifetime() const { return lifetime_; }
    double birth_value() const { return birth_value_; }
    // value at height h in [0, lifetime]
    double value_at(double h);
    // sampled (height, value) knots, for debug dumps
    std::vector<std::pair<double, double>> grid() const;

  private:
    double p_; // 2 + alpha
    double lifetime_;
    double birth_value_;
    Rng rng_;
    std::map<double, double> knots_;
};

// lifetime from the excursion measure conditioned > z_cutoff:
// Pareto tail z_cutoff * U^{-1/(1+alpha)}
double sample_excursion_lifetime_tail(Rng& rng, double alpha, double z_cutoff);

// excursion measure tail nu{lifetime > z} and its compensator constants
double excursion_tail_rate(double alpha, double z);
double compensator_slope(double alpha, double z);
// variance per unit time of the compensated sub-z jump sum (Gaussian fill-in)
double small_jump_variance(double alpha, double z);

// excursion conditioned on lifetime zeta, evaluated on an increasing grid
std::vector<double> sample_spindle_given_lifetime(Rng& rng, double alpha, double zeta,
                                                  const std::vector<double>& grid);

// initial broken spindle of a clade conditioned on overshoot y:
// mass A ~ Exponential(1/2y) and a first-passage bridge from A to 0 over [0,y]
struct BrokenSpindle {
    double mass;
    Spindle path;
};
BrokenSpindle sample_clade_leftmost_spindle_given_overshoot(Rng& rng, double alpha, double y);

// --- Euler-Maruyama path sampler -------------------------------------------

struct EulerPath {
    std::vector<double> times;
    std::vector<double> values;
    bool absorbed = false;
    double absorption_time = 0;
};

// BESQ(delta) path on the given grid.  delta > 0 uses exact transition
// sampling; delta <= 0 uses Euler-Maruyama with adaptive sub-steps, a
// Brownian-bridge hitting correction, and requires absorb_at_zero.
EulerPath besq_path(Rng& rng, double delta, double z0, const std::vector<double>& grid,
                    bool absorb_at_zero, double dt_max = 1e-3);

// always Euler-Maruyama (reflecting for delta > 0), for cross-checks
// against the exact transitions
EulerPath besq_path_euler(Rng& rng, double delta, double z0, const std::vector<double>& grid,
                          double dt_max = 1e-3);

} // namespace ipevo::besq
