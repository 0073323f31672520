#pragma once

#include "ipevo/partition.hpp"
#include "ipevo/rng.hpp"

#include <vector>

namespace ipevo {

enum class PdipVariant { alpha_alpha, alpha_zero };

// One jump of a subordinator: local time of the jump and its size.
struct SubordinatorJump {
    double local_time;
    double size;
};

// Jumps above resolution eps of the exponentially tilted Stable(alpha)
// subordinator (Levy density (alpha/Gamma(1-alpha)) c^{-1-alpha} e^{-c r})
// run until an independent Exponential(r^alpha) local time.
struct SubordinatorRange {
    std::vector<SubordinatorJump> jumps; // sorted by local_time
    double elapsed_local_time = 0;
    double terminal_value = 0;     // sum of retained jump sizes
    double truncated_mass = 0;     // compensating mean of dropped sub-eps jumps
    double tilt_rate = 0;
};

// rate of jumps above eps per unit local time
double tilted_jump_rate_above(double alpha, double r, double eps);
// mean mass of jumps below eps per unit local time
double tilted_mean_mass_below(double alpha, double r, double eps);

SubordinatorRange sample_tilted_range(Rng& rng, double alpha, double r, double eps);

// Jump-interval partition of the tilted subordinator stopped at an
// independent Exponential(r^alpha) time.  Total mass ~ Gamma(alpha, r);
// diversity metadata records the exact local time of each jump, and
// total_diversity the elapsed local time.
IntervalPartition sample_stable_partition(Rng& rng, double alpha, double r, double eps);

// Unit-mass Poisson-Dirichlet interval partition.  alpha_alpha: normalized
// stable partition.  alpha_zero: an independent Gamma(1-alpha, r) leftmost
// block is prepended before normalizing.
IntervalPartition sample_pdip(Rng& rng, double alpha, PdipVariant variant, double eps);

} // namespace ipevo
