#pragma once

#include "ipevo/partition.hpp"

#include <cstddef>
#include <utility>
#include <vector>

namespace ipevo {

struct MetricOptions {
    std::size_t n_max = 30; // refuse larger inputs; truncate first
};

// Distortion of an explicit correspondence (pairs of block indices,
// strictly increasing in both coordinates): the maximum of
//   (i)  sup_j |D_beta(U_j) - D_gamma(V_j)|
//   (ii) |D_beta(inf) - D_gamma(inf)|
//   (iii) mass(beta) + sum_j (|u_j - v_j| - u_j)
//   (iv)  mass(gamma) + sum_j (|u_j - v_j| - v_j)
// Partitions without diversity metadata are treated as having zero
// diversity everywhere.
double distortion(const IntervalPartition& beta, const IntervalPartition& gamma,
                  const std::vector<std::pair<std::size_t, std::size_t>>& pairs);

// Infimum of the distortion over all correspondences, computed exactly by
// a Pareto-frontier dynamic program swept over the finitely many diversity
// bottleneck thresholds.
double metric_distance(const IntervalPartition& beta, const IntervalPartition& gamma,
                       const MetricOptions& opts = {});

} // namespace ipevo
