#pragma once

#include <cstddef>
#include <functional>

namespace ipevo::sf {

// regularized incomplete gamma P(a,x) (lower) and Q(a,x) (upper)
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// log of the modified Bessel function I_nu(x), nu >= 0, x > 0.
// Series for moderate x, uniform asymptotic expansion for large x, so it
// stays finite where exp(x) would overflow.
double log_bessel_i(double nu, double x);

// Kolmogorov distribution survival function Q(x) = P(sup|B(t)| ... > x),
// the asymptotic null law of the scaled KS statistic.
double kolmogorov_sf(double x);

// chi-square survival function with k degrees of freedom
double chi2_sf(double k, double x);

// standard normal survival function
double norm_sf(double z);

// regularized incomplete beta, the Beta(a,b) CDF at x
double beta_p(double a, double b, double x);

// adaptive Simpson quadrature on [a,b]
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-10, int max_depth = 24);

// integral of f over (0, inf) via tanh-sinh style substitution split at `knee`
double integrate_semi_infinite(const std::function<double(double)>& f, double knee,
                               double rel_tol = 1e-9);

} // namespace ipevo::sf
