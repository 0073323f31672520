#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace ipevo {

struct invalid_input : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct resource_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

// Stafford's mix13 finalizer.  Counter-based output = mix(key + c*phi) is
// SplitMix64 with a keyed origin; distinct keys give decorrelated streams.
inline std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ull;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBull;
    x ^= x >> 31;
    return x;
}

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

} // namespace detail

// Splittable counter-based stream.  Value type: copy freely; a copy replays
// the same draws.  child(tag) derives a statistically independent stream, so
// (experiment, replicate, sub-draw) trees reproduce bit-for-bit regardless of
// thread schedule.
class Rng {
  public:
    Rng() : key_(0x6a09e667f3bcc909ull), ctr_(0) {}
    explicit Rng(std::uint64_t master_seed)
        : key_(detail::mix64(master_seed ^ 0x2545F4914F6CDD1Dull)), ctr_(0) {}

    Rng child(std::uint64_t tag) const {
        Rng c;
        c.key_ = detail::mix64(detail::mix64(key_ ^ (0x9E3779B97F4A7C15ull * (tag + 1))) +
                               0xD1B54A32D192ED03ull);
        c.ctr_ = 0;
        return c;
    }
    Rng child(std::string_view tag) const { return child(detail::fnv1a(tag)); }

    std::uint64_t u64() { return detail::mix64(key_ + 0x9E3779B97F4A7C15ull * (++ctr_)); }

    // uniform on (0,1), never exactly 0 or 1
    double uniform() { return (static_cast<double>(u64() >> 11) + 0.5) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    double exponential(double rate) {
        if (!(rate > 0)) throw invalid_input("exponential: rate must be > 0");
        return -std::log(uniform()) / rate;
    }

    // Marsaglia polar method; second variate discarded to keep the stream
    // state a pure counter.
    double normal() {
        for (;;) {
            double u = 2 * uniform() - 1, v = 2 * uniform() - 1;
            double s = u * u + v * v;
            if (s > 0 && s < 1) return u * std::sqrt(-2 * std::log(s) / s);
        }
    }

    // Gamma(shape, rate), density ~ x^{shape-1} e^{-rate x}.
    // Marsaglia-Tsang squeeze for shape >= 1, boosting for shape < 1.
    double gamma(double shape, double rate) {
        if (!(shape > 0) || !(rate > 0)) throw invalid_input("gamma: shape,rate must be > 0");
        if (shape < 1) {
            double u = uniform();
            return gamma(shape + 1, rate) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double t = 1 + c * x;
            if (t <= 0) continue;
            double v = t * t * t;
            double u = uniform();
            if (u < 1 - 0.0331 * x * x * x * x) return d * v / rate;
            if (std::log(u) < 0.5 * x * x + d * (1 - v + std::log(v))) return d * v / rate;
        }
    }

    // X with scale/X ~ Gamma(shape, 1)
    double inverse_gamma(double shape, double scale) {
        if (!(shape > 0) || !(scale > 0))
            throw invalid_input("inverse_gamma: shape,scale must be > 0");
        return scale / gamma(shape, 1.0);
    }

    // Beta(a,b): Johnk rejection when either parameter <= 1, Cheng's BB
    // otherwise.  Deliberately not the gamma-ratio construction, which the
    // tests use as an independent cross-check.
    double beta(double a, double b) {
        if (!(a > 0) || !(b > 0)) throw invalid_input("beta: a,b must be > 0");
        if (a <= 1 || b <= 1) {
            for (;;) {
                double x = std::pow(uniform(), 1.0 / a);
                double y = std::pow(uniform(), 1.0 / b);
                if (x + y <= 1 && x + y > 0) return x / (x + y);
            }
        }
        // Cheng (1978) algorithm BB
        const double a0 = std::min(a, b), b0 = std::max(a, b);
        const double al = a0 + b0;
        const double be = std::sqrt((al - 2) / (2 * a0 * b0 - al));
        const double ga = a0 + 1 / be;
        for (;;) {
            double u1 = uniform(), u2 = uniform();
            double v = be * std::log(u1 / (1 - u1));
            double w = a0 * std::exp(v);
            if (std::isinf(w)) continue;
            double lhs = al * std::log(al / (b0 + w)) + ga * v - 1.3862943611198906;
            if (lhs >= std::log(u1 * u1 * u2)) {
                double x = w / (b0 + w);
                return (a0 == a) ? x : 1 - x;
            }
        }
    }

    std::uint64_t poisson(double mean) {
        if (!(mean >= 0)) throw invalid_input("poisson: mean must be >= 0");
        if (mean == 0) return 0;
        if (mean < 10) {
            // Knuth product method
            double l = std::exp(-mean), p = 1;
            std::uint64_t k = 0;
            do {
                ++k;
                p *= uniform();
            } while (p > l);
            return k - 1;
        }
        return poisson_ptrd(mean);
    }

    // Poisson conditioned to be >= 1
    std::uint64_t zt_poisson(double mean) {
        if (!(mean > 0)) throw invalid_input("zt_poisson: mean must be > 0");
        if (mean < 0.5) {
            // sequential inversion on the truncated pmf
            double u = uniform() * (-std::expm1(-mean));
            double term = std::exp(-mean) * mean;
            std::uint64_t n = 1;
            double cum = term;
            while (u > cum && n < 200) {
                ++n;
                term *= mean / static_cast<double>(n);
                cum += term;
            }
            return n;
        }
        for (;;) {
            std::uint64_t n = poisson(mean);
            if (n >= 1) return n;
        }
    }

    // Bessel distribution: pmf(j) ~ (z/2)^{2j} / (j! Gamma(j+nu+1)), j >= 0.
    // Shows up as the coupling count in squared-Bessel bridge sampling.
    std::uint64_t bessel(double nu, double z) {
        if (z <= 0) return 0;
        const double q = 0.25 * z * z;
        if (q < 1e-8) return 0; // j>=1 has probability < 1e-8 relative
        // unnormalized weights by upward recursion; terms rise to the mode
        // then decay super-geometrically
        std::vector<double> w;
        w.reserve(64);
        double t = 1.0; // weight at j=0 up to a common factor
        w.push_back(t);
        double total = t, peak = t;
        for (std::uint64_t j = 0; j < 100000; ++j) {
            t *= q / ((static_cast<double>(j) + 1) * (static_cast<double>(j) + 1 + nu));
            w.push_back(t);
            total += t;
            peak = std::max(peak, t);
            if (t < peak * 1e-18 && static_cast<double>(j) + 1 > 0.5 * z) break;
        }
        double u = uniform() * total;
        double cum = 0;
        for (std::size_t j = 0; j < w.size(); ++j) {
            cum += w[j];
            if (u <= cum) return j;
        }
        return w.size() - 1;
    }

    // sorted event times of a homogeneous Poisson process on [0, horizon]
    std::vector<double> poisson_process(double rate, double horizon) {
        if (!(rate > 0) || !(horizon > 0))
            throw invalid_input("poisson_process: rate,horizon must be > 0");
        std::vector<double> ev;
        double t = exponential(rate);
        while (t <= horizon) {
            ev.push_back(t);
            t += exponential(rate);
        }
        return ev;
    }

  private:
    // Hormann's PTRD transformed-rejection sampler, valid for mean >= 10
    std::uint64_t poisson_ptrd(double mu) {
        const double smu = std::sqrt(mu);
        const double b = 0.931 + 2.53 * smu;
        const double a = -0.059 + 0.02483 * b;
        const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        const double vr = 0.9277 - 3.6224 / (b - 2);
        for (;;) {
            double u = uniform() - 0.5;
            double v = uniform();
            double us = 0.5 - std::fabs(u);
            double kf = std::floor((2 * a / us + b) * u + mu + 0.43);
            if (kf < 0) continue;
            if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(kf);
            if (us < 0.013 && v > us) continue;
            double k = kf;
            double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
            double rhs = -mu + k * std::log(mu) - std::lgamma(k + 1);
            if (lhs <= rhs) return static_cast<std::uint64_t>(kf);
        }
    }

    std::uint64_t key_;
    std::uint64_t ctr_;
};

// Stream factory mirroring the CLI contract: a 64-bit master seed plus a
// path of ids (experiment, replicate, sub-draw).
inline Rng make_stream(std::uint64_t master_seed, std::initializer_list<std::uint64_t> path = {}) {
    Rng r(master_seed);
    for (std::uint64_t p : path) r = r.child(p);
    return r;
}

} // namespace ipevo
