#include "ipevo/partition.hpp"

#include "ipevo/rng.hpp"

#include <algorithm>
#include <cmath>

namespace ipevo {

double IntervalPartition::mass_sum() const {
    double s = 0;
    for (const Block& b : blocks) s += b.length();
    return s;
}

double IntervalPartition::largest_mass() const {
    double m = 0;
    for (const Block& b : blocks) m = std::max(m, b.length());
    return m;
}

std::size_t IntervalPartition::count_above(double threshold) const {
    std::size_t n = 0;
    for (const Block& b : blocks)
        if (b.length() > threshold) ++n;
    return n;
}

double IntervalPartition::diversity_total_or(double fallback) const {
    if (total_diversity) return *total_diversity;
    if (diversity_meta && !diversity_meta->empty()) return diversity_meta->back();
    return fallback;
}

void IntervalPartition::check_invariants() const {
    const double tol = 1e-12 * std::max(total_mass, 1.0);
    double prev_right = 0;
    for (const Block& b : blocks) {
        if (!(b.right > b.left)) throw invalid_input("partition: empty or inverted block");
        if (b.left < prev_right - tol) throw invalid_input("partition: overlapping blocks");
        prev_right = b.right;
    }
    if (!blocks.empty() && blocks.back().right > total_mass + tol)
        throw invalid_input("partition: blocks exceed total mass");
    if (mass_sum() + truncation_mass > total_mass + tol)
        throw invalid_input("partition: mass sum exceeds total mass");
    if (truncation_mass < 0) throw invalid_input("partition: negative truncation mass");
    if (diversity_meta) {
        if (diversity_meta->size() != blocks.size())
            throw invalid_input("partition: diversity size mismatch");
        double prev = 0;
        for (double d : *diversity_meta) {
            if (d < prev - 1e-12) throw invalid_input("partition: diversity not nondecreasing");
            prev = d;
        }
    }
    if (blocks.empty() && total_mass != 0 && truncation_mass < total_mass - tol)
        throw invalid_input("partition: empty but positive unaccounted mass");
}

IntervalPartition make_partition(std::vector<double> lengths) {
    IntervalPartition p;
    double x = 0;
    p.blocks.reserve(lengths.size());
    for (double l : lengths) {
        if (!(l > 0)) throw invalid_input("make_partition: nonpositive length");
        p.blocks.push_back({x, x + l});
        x += l;
    }
    p.total_mass = x;
    return p;
}

IntervalPartition concatenate(std::span<const IntervalPartition> parts) {
    IntervalPartition out;
    bool all_div = true;
    std::size_t n = 0;
    for (const auto& p : parts) {
        p.check_invariants();
        n += p.blocks.size();
        all_div = all_div && p.diversity_meta.has_value();
    }
    out.blocks.reserve(n);
    if (all_div) out.diversity_meta.emplace();
    double off = 0, div_off = 0;
    for (const auto& p : parts) {
        for (const Block& b : p.blocks) out.blocks.push_back({off + b.left, off + b.right});
        if (all_div) {
            for (double d : *p.diversity_meta) out.diversity_meta->push_back(div_off + d);
            div_off += p.diversity_total_or(0.0);
        }
        off += p.total_mass;
        out.truncation_mass += p.truncation_mass;
    }
    out.total_mass = off;
    if (all_div) out.total_diversity = div_off;
    return out;
}

IntervalPartition concatenate(const IntervalPartition& a, const IntervalPartition& b) {
    const IntervalPartition parts[2] = {a, b};
    return concatenate(std::span<const IntervalPartition>(parts, 2));
}

IntervalPartition scale(double c, const IntervalPartition& beta, double alpha) {
    if (!(c > 0)) throw invalid_input("scale: factor must be > 0");
    IntervalPartition out;
    out.blocks.reserve(beta.blocks.size());
    for (const Block& b : beta.blocks) out.blocks.push_back({c * b.left, c * b.right});
    out.total_mass = c * beta.total_mass;
    out.truncation_mass = c * beta.truncation_mass;
    const double ca = std::pow(c, alpha);
    if (beta.diversity_meta) {
        out.diversity_meta.emplace();
        out.diversity_meta->reserve(beta.diversity_meta->size());
        for (double d : *beta.diversity_meta) out.diversity_meta->push_back(ca * d);
    }
    if (beta.total_diversity) out.total_diversity = ca * *beta.total_diversity;
    return out;
}

IntervalPartition reverse(const IntervalPartition& beta) {
    IntervalPartition out;
    out.total_mass = beta.total_mass;
    out.truncation_mass = beta.truncation_mass;
    const double m = beta.total_mass;
    out.blocks.reserve(beta.blocks.size());
    for (auto it = beta.blocks.rbegin(); it != beta.blocks.rend(); ++it)
        out.blocks.push_back({m - it->right, m - it->left});
    return out;
}

std::vector<double> estimate_diversity(const IntervalPartition& beta, double alpha, double t,
                                       std::span<const double> h_grid) {
    if (h_grid.empty()) throw invalid_input("estimate_diversity: empty h grid");
    for (std::size_t i = 1; i < h_grid.size(); ++i)
        if (!(h_grid[i] < h_grid[i - 1]))
            throw invalid_input("estimate_diversity: h grid must be strictly decreasing");
    if (t < 0 || t > beta.total_mass + 1e-12 * std::max(1.0, beta.total_mass))
        throw invalid_input("estimate_diversity: t out of range");
    const double g = std::tgamma(1.0 - alpha);
    std::vector<double> out;
    out.reserve(h_grid.size());
    for (double h : h_grid) {
        std::size_t n = 0;
        for (const Block& b : beta.blocks)
            if (b.length() > h && b.right <= t) ++n;
        out.push_back(g * std::pow(h, alpha) * static_cast<double>(n));
    }
    return out;
}

IntervalPartition truncate_small_blocks(const IntervalPartition& beta, double eps) {
    IntervalPartition out;
    out.total_mass = beta.total_mass;
    out.truncation_mass = beta.truncation_mass;
    out.total_diversity = beta.total_diversity;
    if (beta.diversity_meta) out.diversity_meta.emplace();
    for (std::size_t i = 0; i < beta.blocks.size(); ++i) {
        if (beta.blocks[i].length() < eps) {
            out.truncation_mass += beta.blocks[i].length();
        } else {
            out.blocks.push_back(beta.blocks[i]);
            if (beta.diversity_meta) out.diversity_meta->push_back((*beta.diversity_meta)[i]);
        }
    }
    return out;
}

} // namespace ipevo
