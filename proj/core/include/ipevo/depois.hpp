#pragma once

#include "ipevo/trace.hpp"

#include <vector>

namespace ipevo {

// Cumulative integral of 1/mass over the level grid (trapezoid) and its
// inverse, the time change rho(u).
struct TimeChange {
    std::vector<double> levels;
    std::vector<double> u_knots; // u value at each level knot; strictly increasing

    double u_at_level(double y) const;   // interpolated integral value
    double rho(double u) const;          // inverse map by monotone interpolation
    static TimeChange from_mass_path(const std::vector<double>& levels,
                                     const std::vector<double>& mass);
};

// Result of de-Poissonizing a trace: unit-mass states indexed by the image
// u-grid of the level grid (no resampling).  If the mass hits zero inside
// the grid (type-1 extinction) the output is truncated at the last
// positive-mass level and `truncated` is set.
struct DepoissonizedTrace {
    double alpha = 0;
    std::vector<double> u_grid;
    std::vector<double> level_at_u;
    std::vector<IntervalPartition> states; // total mass exactly 1
    bool truncated = false;
};

DepoissonizedTrace depoissonize(const EvolutionTrace& trace);

} // namespace ipevo
