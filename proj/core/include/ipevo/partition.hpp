#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ipevo {

struct Block {
    double left = 0;
    double right = 0;
    double length() const { return right - left; }
};

// Ordered finite list of disjoint open subintervals of [0, total_mass].
// Samplers of laws with infinitely many blocks truncate at a mass
// resolution and accumulate the dropped mass into truncation_mass so the
// total stays exact.  diversity_meta, when present, holds the exact
// alpha-diversity to the left of each block (subordinator local time for
// generated partitions); total_diversity is the diversity of the whole
// partition, which exceeds the last block's entry whenever small blocks
// were truncated at the right.
struct IntervalPartition {
    std::vector<Block> blocks;
    double total_mass = 0;
    double truncation_mass = 0;
    std::optional<std::vector<double>> diversity_meta;
    std::optional<double> total_diversity;

    bool empty() const { return blocks.empty(); }
    std::size_t size() const { return blocks.size(); }

    double mass_sum() const;
    double leftmost_mass() const { return blocks.empty() ? 0.0 : blocks.front().length(); }
    double largest_mass() const;
    std::size_t count_above(double threshold) const;
    double diversity_total_or(double fallback) const;

    // throws invalid_input if ordering/mass/diversity invariants are violated
    void check_invariants() const;
};

IntervalPartition make_partition(std::vector<double> lengths);

// concatenation: blocks of part k shifted by the summed total masses of the
// preceding parts; diversity kept only if every part carries it (offset by
// the running total diversity)
IntervalPartition concatenate(std::span<const IntervalPartition> parts);
IntervalPartition concatenate(const IntervalPartition& a, const IntervalPartition& b);

// every endpoint (and total/truncation mass) scaled by c; diversity scaled
// by c^alpha
IntervalPartition scale(double c, const IntervalPartition& beta, double alpha);

// left-right reversal; diversity metadata is dropped (the reversed profile
// is not the reversal of the original)
IntervalPartition reverse(const IntervalPartition& beta);

// Gamma(1-alpha) h^alpha #{blocks with length > h ending at or before t},
// one value per h in h_grid (strictly decreasing grid)
std::vector<double> estimate_diversity(const IntervalPartition& beta, double alpha, double t,
                                       std::span<const double> h_grid);

// drop blocks shorter than eps into truncation_mass (positions of retained
// blocks keep their gaps)
IntervalPartition truncate_small_blocks(const IntervalPartition& beta, double eps);

} // namespace ipevo
