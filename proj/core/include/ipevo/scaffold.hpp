#pragma once

#include "ipevo/besq.hpp"
#include "ipevo/partition.hpp"
#include "ipevo/rng.hpp"
#include "ipevo/trace.hpp"

#include <optional>
#include <vector>

namespace ipevo::scaffold {

struct Config {
    double alpha = 0.5;
    // spindle lifetime resolution; 0 means auto (2e-3 times the top level)
    double z_cutoff = 0;
    double eps = 1e-8;        // skewer block mass resolution
    bool gaussian_fill = true; // Asmussen-Rosinski fill-in for sub-cutoff jumps
    double h_loc = 1e-3;      // occupation bandwidth for local time estimates
    std::uint64_t max_steps = 400000000ull;
};

// Config with the derived constants of the compensated construction:
// jump rate above the cutoff, compensator slope, small-jump variance, and
// the mean skewer mass carried by sub-cutoff spindles per unit local time.
struct Engine {
    Config cfg;
    double jump_rate = 0;
    double slope = 0;
    double sigma = 0;     // Gaussian fill-in volatility (0 when disabled)
    double miss_rate = 0; // mean missing block mass per unit level local time

    static Engine make(Config cfg, double level_scale);
};

// deterministic mean of skewer mass lost to spindles with lifetime <= z,
// per unit local time at the queried level
double skewer_missing_mass_rate(double alpha, double z);

// ---------------------------------------------------------------------------
// streaming evolutions

// skewer states of independent clades, one per block of beta0, at the given
// levels (levels[0] == 0 reproduces beta0 up to gap collapse)
std::vector<IntervalPartition> type1_levels(Rng& rng, const Engine& eng,
                                            const IntervalPartition& beta0,
                                            const std::vector<double>& levels);

// type-0: a first-passage descent viewed from depth_j (auto when <= 0)
// concatenated level-wise with an independent type-1 part
std::vector<IntervalPartition> type0_levels(Rng& rng, const Engine& eng,
                                            const IntervalPartition& beta0,
                                            const std::vector<double>& levels,
                                            double depth_j = 0);

EvolutionTrace type1_evolution_scaffold(Rng& rng, const Engine& eng,
                                        const IntervalPartition& beta0,
                                        const std::vector<double>& levels);
EvolutionTrace type0_evolution_scaffold(Rng& rng, const Engine& eng,
                                        const IntervalPartition& beta0,
                                        const std::vector<double>& levels, double depth_j = 0);

// ---------------------------------------------------------------------------
// clade-level sampling for the statistics suite

struct CladeSummary {
    double initial_lifetime = 0; // overshoot of the initial jump
    double zeta_plus = 0;        // sup of the scaffolding (clade lifetime)
    double length = 0;           // time to first passage below the origin
    // leftmost block mass at each queried level, 0 when dead (ordered as the
    // level grid passed in)
    std::vector<double> leftmost;
    std::vector<double> total;
};

CladeSummary sample_clade_summary(Rng& rng, const Engine& eng, double b,
                                  const std::vector<double>& levels);

// clade conditioned on its initial overshoot: returns (central mass m0,
// clade lifetime zeta_plus)
std::pair<double, double> sample_clade_given_overshoot(Rng& rng, const Engine& eng, double y);

// time of first passage of the scaffolding from 0 down to -depth
double sample_first_passage_time(Rng& rng, const Engine& eng, double depth);

// complete excursions about a fixed level harvested from one descent run
struct Excursion {
    double m0 = 0;        // mass of the spindle straddling the level (0 = crept)
    double zeta_plus = 0; // height of the excursion above the level
};
std::vector<Excursion> harvest_excursions(Rng& rng, const Engine& eng, double y_star,
                                          double depth_j);

// Walk from x_start down to `stop` accruing occupation local time at y_star.
// Returns (tau, mass): tau is the time elapsed between the first positive
// occupation and local time s0, mass the aggregate straddling-spindle mass
// collected at the level by then; tau = -1 if the walk is absorbed first.
std::pair<double, double> inverse_local_time_probe(Rng& rng, const Engine& eng, double y_star,
                                                   double s0, double x_start, double stop);

// ---------------------------------------------------------------------------
// retained point systems for replay, debugging and the CLI

struct CladePoint {
    double t;        // jump time
    double x_before; // scaffolding value just before the jump
};

struct CladeSystem {
    double alpha = 0;
    double z_cutoff = 0;
    double slope = 0;
    double origin_level = 0;
    double initial_mass = 0;
    double length = 0; // T
    besq::Spindle initial_spindle;
    std::vector<std::pair<CladePoint, besq::Spindle>> points;

    // piecewise-linear scaffolding value at time t (systems built with the
    // Gaussian fill disabled replay exactly)
    double scaffolding_at(double t) const;
};

// full clade with retained spindles; Gaussian fill is disabled so the
// scaffolding replays exactly
CladeSystem build_clade(Rng& rng, const Engine& eng, double b);

IntervalPartition skewer(std::vector<CladeSystem>& clades, double y, double eps);

// occupation-density local time estimate at level y up to time t (one clade)
double local_time(const CladeSystem& clade, double y, double t, double h_loc = 1e-3);

} // namespace ipevo::scaffold
