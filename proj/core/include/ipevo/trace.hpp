#pragma once

#include "ipevo/partition.hpp"
#include "ipevo/rng.hpp"

#include <string>
#include <vector>

namespace ipevo {

enum class Method { kernel, scaffold };
enum class EvolutionType { type1 = 1, type0 = 0 };

// level-indexed sequence of interval partitions with the total-mass path
struct EvolutionTrace {
    double alpha = 0;
    Method method = Method::kernel;
    EvolutionType type = EvolutionType::type1;
    std::vector<double> levels;
    std::vector<IntervalPartition> states;
    std::vector<double> total_mass; // mass_sum + truncation_mass per level

    void push(double level, IntervalPartition state) {
        levels.push_back(level);
        total_mass.push_back(state.mass_sum() + state.truncation_mass);
        states.push_back(std::move(state));
    }

    void check_invariants() const {
        bool dead = false;
        for (std::size_t k = 0; k < states.size(); ++k) {
            states[k].check_invariants();
            if (type == EvolutionType::type1) {
                if (dead && !states[k].empty())
                    throw invalid_input("trace: type-1 state revived after extinction");
                dead = dead || states[k].empty();
            }
        }
    }
};

// light per-level summary for large Monte Carlo sweeps
struct LevelSummary {
    double level = 0;
    double total_mass = 0;
    double leftmost_mass = 0;
    double largest_mass = 0;
    std::size_t block_count = 0;
    std::size_t count_above_001 = 0;
    double diversity_total = 0;
};

inline LevelSummary summarize(double level, const IntervalPartition& p) {
    LevelSummary s;
    s.level = level;
    s.total_mass = p.mass_sum() + p.truncation_mass;
    s.leftmost_mass = p.leftmost_mass();
    s.largest_mass = p.largest_mass();
    s.block_count = p.size();
    s.count_above_001 = p.count_above(0.01);
    s.diversity_total = p.diversity_total_or(0.0);
    return s;
}

} // namespace ipevo
