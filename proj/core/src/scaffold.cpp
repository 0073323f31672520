#include "ipevo/scaffold.hpp"

#include "ipevo/special.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <mutex>
#include <string>

namespace ipevo::scaffold {

namespace {

// E[(G1 G2/(G1+G2))^{1-alpha}] for iid Gamma(1+alpha,1); cached per alpha
double harmonic_gamma_moment(double alpha) {
    static std::map<double, double> cache;
    static std::mutex mu;
    {
        std::lock_guard<std::mutex> lk(mu);
        auto it = cache.find(alpha);
        if (it != cache.end()) return it->second;
    }
    const double lg = std::lgamma(1.0 + alpha);
    auto dens = [&](double x) {
        return std::exp(alpha * std::log(x) - x - lg);
    };
    auto inner = [&](double x) {
        auto f = [&](double y) {
            double hm = x * y / (x + y);
            return std::pow(hm, 1.0 - alpha) * dens(y);
        };
        return sf::integrate_semi_infinite(f, 1.0 + alpha, 1e-8);
    };
    auto outer = [&](double x) { return inner(x) * dens(x); };
    double v = sf::integrate_semi_infinite(outer, 1.0 + alpha, 1e-7);
    std::lock_guard<std::mutex> lk(mu);
    cache[alpha] = v;
    return v;
}

} // namespace

double skewer_missing_mass_rate(double alpha, double z) {
    // mean of m0 over bi-clades whose central spindle lifetime is <= z;
    // the lifetime given m0=b is a sum of two iid InverseGamma(1+alpha, b/2)
    return alpha / std::tgamma(1.0 - alpha) * std::pow(2.0 * z, 1.0 - alpha) /
           (1.0 - alpha) * harmonic_gamma_moment(alpha);
}

Engine Engine::make(Config cfg, double level_scale) {
    if (!(cfg.alpha > 0) || !(cfg.alpha < 1)) throw invalid_input("alpha must be in (0,1)");
    Engine e;
    if (cfg.z_cutoff <= 0) cfg.z_cutoff = 2e-3 * std::max(level_scale, 1e-6);
    e.cfg = cfg;
    e.jump_rate = besq::excursion_tail_rate(cfg.alpha, cfg.z_cutoff);
    e.slope = besq::compensator_slope(cfg.alpha, cfg.z_cutoff);
    e.sigma = cfg.gaussian_fill
                  ? std::sqrt(besq::small_jump_variance(cfg.alpha, cfg.z_cutoff))
                  : 0.0;
    e.miss_rate = skewer_missing_mass_rate(cfg.alpha, cfg.z_cutoff);
    return e;
}

namespace {

// One first-passage walk of the compensated scaffolding: linear drift,
// Poisson jumps above the cutoff, optional Gaussian fill-in for the rest.
// seg(t0,x0,t1,x1) is called per (approximately linear) chord, jump(t,x,zeta)
// per retained jump.  Returns the first passage time below stop.
template <class SegFn, class JumpFn>
double walk_to_stop(Rng& rng, const Engine& eng, double x_start, double stop, SegFn&& seg,
                    JumpFn&& jump) {
    double t = 0, x = x_start;
    const double c = eng.slope, sig = eng.sigma;
    std::uint64_t steps = 0;
    if (x <= stop) return 0.0;
    for (;;) {
        if (++steps > eng.cfg.max_steps)
            throw resource_error("scaffold walk exceeded step cap (t=" + std::to_string(t) +
                                 ", x=" + std::to_string(x) + ")");
        double dt = rng.exponential(eng.jump_rate);
        double xe = x - c * dt;
        if (sig > 0) xe += sig * std::sqrt(dt) * rng.normal();
        if (xe <= stop) {
            double frac = (x - stop) / (x - xe);
            double tc = t + dt * frac;
            seg(t, x, tc, stop);
            return tc;
        }
        if (sig > 0) {
            // Brownian-bridge dip below the stop level between endpoints
            double p = std::exp(-2.0 * (x - stop) * (xe - stop) / (sig * sig * dt));
            if (rng.uniform() < p) {
                double tc = t + 0.5 * dt;
                seg(t, x, tc, stop);
                return tc;
            }
        }
        seg(t, x, t + dt, xe);
        double zeta = besq::sample_excursion_lifetime_tail(rng, eng.cfg.alpha, eng.cfg.z_cutoff);
        jump(t + dt, xe, zeta);
        x = xe + zeta;
        t += dt;
    }
}

// sample the chord-conditioned Brownian maximum of one segment
inline double segment_max(Rng& rng, double sig, double t0, double x0, double t1, double x1) {
    if (sig <= 0) return std::max(x0, x1);
    double dt = t1 - t0;
    if (dt <= 0) return std::max(x0, x1);
    double u = rng.uniform();
    double d = (x0 - x1) * (x0 - x1) - 2.0 * sig * sig * dt * std::log(u);
    return 0.5 * (x0 + x1 + std::sqrt(d));
}

// occupation of [levels[k], levels[k]+h) per level along a linear chord
class Occupancy {
  public:
    Occupancy(const std::vector<double>& levels, double h) : levels_(levels), h_(h) {
        occ_.assign(levels.size(), 0.0);
    }
    void add_chord(double t0, double x0, double t1, double x1) {
        double dt = t1 - t0;
        if (dt <= 0) return;
        double lo = std::min(x0, x1), hi = std::max(x0, x1);
        auto first = std::upper_bound(levels_.begin(), levels_.end(), lo - h_);
        for (auto it = first; it != levels_.end() && *it < hi; ++it) {
            double ov = std::min(hi, *it + h_) - std::max(lo, *it);
            if (ov <= 0) continue;
            double frac = (hi > lo) ? ov / (hi - lo) : 1.0;
            occ_[static_cast<std::size_t>(it - levels_.begin())] += dt * std::min(frac, 1.0) / h_;
        }
    }
    double at(std::size_t k) const { return occ_[k]; }
    const std::vector<double>& values() const { return occ_; }

  private:
    const std::vector<double>& levels_;
    double h_;
    std::vector<double> occ_;
};

struct BlockDraft {
    double mass;
    double loc; // local time estimate at emission (diversity metadata)
};

// accumulates skewer blocks per level across concatenated clades
class LevelSink {
  public:
    LevelSink(const std::vector<double>& levels, double h) : levels_(levels), h_(h) {
        drafts_.resize(levels.size());
        base_.assign(levels.size(), 0.0);
    }
    const std::vector<double>& levels() const { return levels_; }

    // run one clade: initial spindle from mass b (b=0 for the bare descent),
    // scaffolding from x_start down to 0
    void run_clade(Rng rng, const Engine& eng, double b) {
        Occupancy occ(levels_, h_);
        double x_start;
        Rng walk_rng = rng.child("walk");
        std::uint64_t jump_idx = 0;
        if (b > 0) {
            Rng life_rng = rng.child("life");
            double zeta0 = besq::absorption_time(life_rng, eng.cfg.alpha, b);
            besq::Spindle f0(eng.cfg.alpha, zeta0, b, rng.child("f0"));
            for (std::size_t k = 0; k < levels_.size(); ++k) {
                double y = levels_[k];
                if (y >= 0 && y < zeta0) {
                    double v = (y == 0) ? b : f0.value_at(y);
                    drafts_[k].push_back({v, base_[k]});
                }
            }
            x_start = zeta0;
        } else {
            x_start = initial_level_;
        }
        Rng spindles = rng.child("spindles");
        auto seg = [&](double t0, double x0, double t1, double x1) {
            occ.add_chord(t0, x0, t1, x1);
        };
        auto jump = [&](double, double xb, double zeta) {
            ++jump_idx;
            auto first = std::upper_bound(levels_.begin(), levels_.end(), xb);
            if (first == levels_.end() || *first >= xb + zeta) return;
            besq::Spindle sp(eng.cfg.alpha, zeta, 0.0, spindles.child(jump_idx));
            for (auto it = first; it != levels_.end() && *it < xb + zeta; ++it) {
                std::size_t k = static_cast<std::size_t>(it - levels_.begin());
                drafts_[k].push_back({sp.value_at(*it - xb), base_[k] + occ.at(k)});
            }
        };
        walk_to_stop(walk_rng, eng, x_start, 0.0, seg, jump);
        for (std::size_t k = 0; k < levels_.size(); ++k) base_[k] += occ.at(k);
    }

    void set_initial_level(double x) { initial_level_ = x; }

    IntervalPartition assemble(std::size_t k, double eps, double miss_rate) const {
        IntervalPartition p;
        p.diversity_meta.emplace();
        double x = 0, trunc = 0;
        for (const BlockDraft& d : drafts_[k]) {
            if (d.mass < eps) {
                trunc += d.mass;
            } else {
                p.blocks.push_back({x, x + d.mass});
                p.diversity_meta->push_back(d.loc);
            }
            x += d.mass;
        }
        double miss = miss_rate * base_[k];
        p.truncation_mass = trunc + miss;
        p.total_mass = x + miss;
        p.total_diversity = base_[k];
        return p;
    }

  private:
    const std::vector<double>& levels_;
    double h_;
    double initial_level_ = 0;
    std::vector<std::vector<BlockDraft>> drafts_;
    std::vector<double> base_;
};

void check_levels(const std::vector<double>& levels) {
    if (levels.empty()) throw invalid_input("scaffold: empty level grid");
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (levels[i] < 0) throw invalid_input("scaffold: negative level");
        if (i > 0 && !(levels[i] > levels[i - 1]))
            throw invalid_input("scaffold: levels must be strictly increasing");
    }
}

void warn_cutoff(const Engine& eng, const std::vector<double>& levels) {
    static std::atomic<bool> warned{false};
    double min_gap = std::numeric_limits<double>::infinity();
    double prev = 0;
    for (double y : levels) {
        if (y > prev) min_gap = std::min(min_gap, y - prev);
        prev = y;
    }
    double limit = (eng.sigma > 0 ? 0.1 : 0.01) * min_gap;
    if (eng.cfg.z_cutoff > limit && !warned.exchange(true))
        std::fprintf(stderr,
                     "ipevo: warning: z_cutoff %.3g is coarse for level gap %.3g\n",
                     eng.cfg.z_cutoff, min_gap);
}

} // namespace

std::vector<IntervalPartition> type1_levels(Rng& rng, const Engine& eng,
                                            const IntervalPartition& beta0,
                                            const std::vector<double>& levels) {
    check_levels(levels);
    warn_cutoff(eng, levels);
    LevelSink sink(levels, eng.cfg.h_loc);
    Rng clades = rng.child("clades");
    for (std::size_t i = 0; i < beta0.blocks.size(); ++i) {
        double b = beta0.blocks[i].length();
        if (b < 1e-300) continue;
        sink.run_clade(clades.child(i), eng, b);
    }
    std::vector<IntervalPartition> out;
    out.reserve(levels.size());
    for (std::size_t k = 0; k < levels.size(); ++k)
        out.push_back(sink.assemble(k, eng.cfg.eps, eng.miss_rate));
    return out;
}

std::vector<IntervalPartition> type0_levels(Rng& rng, const Engine& eng,
                                            const IntervalPartition& beta0,
                                            const std::vector<double>& levels, double depth_j) {
    check_levels(levels);
    warn_cutoff(eng, levels);
    if (depth_j <= 0) depth_j = 2.0 * levels.back() + 1.0;
    if (depth_j <= levels.back())
        throw invalid_input("type0: descent depth must exceed the top level");
    LevelSink descent(levels, eng.cfg.h_loc);
    descent.set_initial_level(depth_j);
    descent.run_clade(rng.child("descent"), eng, 0.0);
    std::vector<IntervalPartition> left;
    left.reserve(levels.size());
    for (std::size_t k = 0; k < levels.size(); ++k)
        left.push_back(descent.assemble(k, eng.cfg.eps, eng.miss_rate));
    if (beta0.blocks.empty()) return left;
    Rng t1 = rng.child("type1");
    std::vector<IntervalPartition> right = type1_levels(t1, eng, beta0, levels);
    std::vector<IntervalPartition> out;
    out.reserve(levels.size());
    for (std::size_t k = 0; k < levels.size(); ++k)
        out.push_back(concatenate(left[k], right[k]));
    return out;
}

EvolutionTrace type1_evolution_scaffold(Rng& rng, const Engine& eng,
                                        const IntervalPartition& beta0,
                                        const std::vector<double>& levels) {
    EvolutionTrace tr;
    tr.alpha = eng.cfg.alpha;
    tr.method = Method::scaffold;
    tr.type = EvolutionType::type1;
    auto states = type1_levels(rng, eng, beta0, levels);
    for (std::size_t k = 0; k < levels.size(); ++k) tr.push(levels[k], std::move(states[k]));
    return tr;
}

EvolutionTrace type0_evolution_scaffold(Rng& rng, const Engine& eng,
                                        const IntervalPartition& beta0,
                                        const std::vector<double>& levels, double depth_j) {
    EvolutionTrace tr;
    tr.alpha = eng.cfg.alpha;
    tr.method = Method::scaffold;
    tr.type = EvolutionType::type0;
    auto states = type0_levels(rng, eng, beta0, levels, depth_j);
    for (std::size_t k = 0; k < levels.size(); ++k) tr.push(levels[k], std::move(states[k]));
    return tr;
}

CladeSummary sample_clade_summary(Rng& rng, const Engine& eng, double b,
                                  const std::vector<double>& levels) {
    if (!(b > 0)) throw invalid_input("sample_clade_summary: b must be > 0");
    if (!levels.empty()) check_levels(levels);
    CladeSummary cs;
    cs.leftmost.assign(levels.size(), 0.0);
    cs.total.assign(levels.size(), 0.0);
    Rng life_rng = rng.child("life");
    double zeta0 = besq::absorption_time(life_rng, eng.cfg.alpha, b);
    cs.initial_lifetime = zeta0;
    besq::Spindle f0(eng.cfg.alpha, zeta0, b, rng.child("f0"));
    for (std::size_t k = 0; k < levels.size(); ++k) {
        if (levels[k] < zeta0) {
            double v = (levels[k] == 0) ? b : f0.value_at(levels[k]);
            cs.leftmost[k] = v;
            cs.total[k] += v;
        }
    }
    Rng walk_rng = rng.child("walk");
    Rng spindles = rng.child("spindles");
    std::uint64_t jump_idx = 0;
    double running_max = zeta0;
    auto seg = [&](double t0, double x0, double t1, double x1) {
        running_max = std::max(running_max, segment_max(walk_rng, eng.sigma, t0, x0, t1, x1));
    };
    auto jump = [&](double, double xb, double zeta) {
        ++jump_idx;
        running_max = std::max(running_max, xb + zeta);
        auto first = std::upper_bound(levels.begin(), levels.end(), xb);
        if (first == levels.end() || *first >= xb + zeta) return;
        besq::Spindle sp(eng.cfg.alpha, zeta, 0.0, spindles.child(jump_idx));
        for (auto it = first; it != levels.end() && *it < xb + zeta; ++it) {
            std::size_t k = static_cast<std::size_t>(it - levels.begin());
            double v = sp.value_at(*it - xb);
            if (cs.leftmost[k] == 0.0 && cs.total[k] == 0.0) cs.leftmost[k] = v;
            cs.total[k] += v;
        }
    };
    cs.length = walk_to_stop(walk_rng, eng, zeta0, 0.0, seg, jump);
    cs.zeta_plus = running_max;
    return cs;
}

std::pair<double, double> sample_clade_given_overshoot(Rng& rng, const Engine& eng, double y) {
    if (!(y > 0)) throw invalid_input("overshoot must be > 0");
    double m0 = rng.exponential(1.0 / (2.0 * y));
    Rng walk_rng = rng.child("walk");
    double running_max = y;
    auto seg = [&](double t0, double x0, double t1, double x1) {
        running_max = std::max(running_max, segment_max(walk_rng, eng.sigma, t0, x0, t1, x1));
    };
    auto jump = [&](double, double xb, double zeta) {
        running_max = std::max(running_max, xb + zeta);
    };
    walk_to_stop(walk_rng, eng, y, 0.0, seg, jump);
    return {m0, running_max};
}

double sample_first_passage_time(Rng& rng, const Engine& eng, double depth) {
    if (!(depth > 0)) throw invalid_input("first passage depth must be > 0");
    auto nop_seg = [](double, double, double, double) {};
    auto nop_jump = [](double, double, double) {};
    return walk_to_stop(rng, eng, depth, 0.0, nop_seg, nop_jump);
}

std::vector<Excursion> harvest_excursions(Rng& rng, const Engine& eng, double y_star,
                                          double depth_j) {
    if (!(depth_j > y_star) || !(y_star > 0))
        throw invalid_input("harvest: need 0 < y_star < depth");
    std::vector<Excursion> out;
    Rng walk_rng = rng.child("walk");
    Rng spindles = rng.child("spindles");
    std::uint64_t jump_idx = 0;
    bool above = false; // the walk starts at depth_j > y_star, but with no
                        // straddling spindle; treat the initial pass as crept
    Excursion cur;
    auto open_exc = [&](double m0, double top) {
        cur.m0 = m0;
        cur.zeta_plus = std::max(top - y_star, 0.0);
        above = true;
    };
    auto close_exc = [&]() {
        out.push_back(cur);
        above = false;
    };
    auto seg = [&](double t0, double x0, double t1, double x1) {
        if (above) {
            double m = segment_max(walk_rng, eng.sigma, t0, x0, t1, x1);
            cur.zeta_plus = std::max(cur.zeta_plus, m - y_star);
            if (x1 <= y_star) close_exc();
        } else if (x1 > y_star) {
            open_exc(0.0, segment_max(walk_rng, eng.sigma, t0, x0, t1, x1));
        }
    };
    auto jump = [&](double, double xb, double zeta) {
        ++jump_idx;
        if (!above && xb < y_star && xb + zeta > y_star) {
            besq::Spindle sp(eng.cfg.alpha, zeta, 0.0, spindles.child(jump_idx));
            open_exc(sp.value_at(y_star - xb), xb + zeta);
        } else if (above) {
            cur.zeta_plus = std::max(cur.zeta_plus, xb + zeta - y_star);
        }
    };
    walk_to_stop(walk_rng, eng, depth_j, 0.0, seg, jump);
    if (above) close_exc(); // defensive; the walk ends below y_star
    // the first recorded excursion is the initial descent pass, not an
    // excursion about the level
    if (!out.empty()) out.erase(out.begin());
    return out;
}

std::pair<double, double> inverse_local_time_probe(Rng& rng, const Engine& eng, double y_star,
                                                   double s0, double x_start, double stop) {
    double t = 0, x = x_start, occ = 0, mass = 0, t_first = -1;
    const double c = eng.slope, sig = eng.sigma, h = eng.cfg.h_loc;
    Rng spindles = rng.child("spindles");
    std::uint64_t steps = 0, jump_idx = 0;
    auto occ_of_chord = [&](double x0, double x1, double dt) {
        double lo = std::min(x0, x1), hi = std::max(x0, x1);
        double ov = std::min(hi, y_star + h) - std::max(lo, y_star);
        if (ov <= 0 || hi <= lo) return 0.0;
        return dt * std::min(ov / (hi - lo), 1.0) / h;
    };
    for (;;) {
        if (++steps > eng.cfg.max_steps) throw resource_error("local time probe step cap");
        double dt = rng.exponential(eng.jump_rate);
        double xe = x - c * dt;
        if (sig > 0) xe += sig * std::sqrt(dt) * rng.normal();
        bool crossed = xe <= stop;
        if (!crossed && sig > 0) {
            double p = std::exp(-2.0 * (x - stop) * (xe - stop) / (sig * sig * dt));
            crossed = rng.uniform() < p;
        }
        double d_occ = occ_of_chord(x, crossed ? stop : xe, dt);
        if (d_occ > 0 && t_first < 0) t_first = t;
        occ += d_occ;
        t += dt;
        if (occ >= s0) return {t - (t_first < 0 ? 0.0 : t_first), mass};
        if (crossed) return {-1.0, -1.0};
        ++jump_idx;
        double zeta = besq::sample_excursion_lifetime_tail(rng, eng.cfg.alpha, eng.cfg.z_cutoff);
        if (xe < y_star && y_star < xe + zeta) {
            besq::Spindle sp(eng.cfg.alpha, zeta, 0.0, spindles.child(jump_idx));
            mass += sp.value_at(y_star - xe);
        }
        x = xe + zeta;
    }
}

double CladeSystem::scaffolding_at(double t) const {
    double x = origin_level + initial_spindle.lifetime() - slope * t;
    for (const auto& [pt, sp] : points) {
        if (pt.t > t) break;
        x += sp.lifetime();
    }
    return x;
}

CladeSystem build_clade(Rng& rng, const Engine& eng, double b) {
    if (!(b > 0)) throw invalid_input("build_clade: b must be > 0");
    Engine flat = eng;
    flat.sigma = 0; // retained systems replay as piecewise-linear paths
    Rng life_rng = rng.child("life");
    double zeta0 = besq::absorption_time(life_rng, eng.cfg.alpha, b);
    CladeSystem sys{eng.cfg.alpha,
                    eng.cfg.z_cutoff,
                    flat.slope,
                    0.0,
                    b,
                    0.0,
                    besq::Spindle(eng.cfg.alpha, zeta0, b, rng.child("f0")),
                    {}};
    Rng walk_rng = rng.child("walk");
    Rng spindles = rng.child("spindles");
    std::uint64_t jump_idx = 0;
    auto seg = [](double, double, double, double) {};
    auto jump = [&](double t, double xb, double zeta) {
        ++jump_idx;
        sys.points.emplace_back(CladePoint{t, xb},
                                besq::Spindle(eng.cfg.alpha, zeta, 0.0,
                                              spindles.child(jump_idx)));
    };
    sys.length = walk_to_stop(walk_rng, flat, zeta0, 0.0, seg, jump);
    return sys;
}

IntervalPartition skewer(std::vector<CladeSystem>& clades, double y, double eps) {
    IntervalPartition p;
    double x = 0, trunc = 0;
    auto emit = [&](double mass) {
        if (mass < eps) {
            trunc += mass;
        } else {
            p.blocks.push_back({x, x + mass});
        }
        x += mass;
    };
    for (CladeSystem& c : clades) {
        double rel = y - c.origin_level;
        if (rel >= 0 && rel < c.initial_spindle.lifetime())
            emit(rel == 0 ? c.initial_spindle.birth_value() : c.initial_spindle.value_at(rel));
        for (auto& [pt, sp] : c.points)
            if (pt.x_before < rel && rel < pt.x_before + sp.lifetime())
                emit(sp.value_at(rel - pt.x_before));
    }
    p.truncation_mass = trunc;
    p.total_mass = x;
    return p;
}

double local_time(const CladeSystem& clade, double y, double t, double h_loc) {
    double rel = y - clade.origin_level;
    double occ = 0;
    double t0 = 0, x0 = clade.initial_spindle.lifetime();
    auto add = [&](double ta, double xa, double tb, double xb) {
        if (tb <= ta) return;
        double lo = std::min(xa, xb), hi = std::max(xa, xb);
        double ov = std::min(hi, rel + h_loc) - std::max(lo, rel);
        if (ov > 0 && hi > lo) occ += (tb - ta) * std::min(ov / (hi - lo), 1.0) / h_loc;
    };
    for (const auto& [pt, sp] : clade.points) {
        if (pt.t >= t) {
            add(t0, x0, t, x0 - clade.slope * (t - t0));
            return occ;
        }
        add(t0, x0, pt.t, pt.x_before);
        t0 = pt.t;
        x0 = pt.x_before + sp.lifetime();
    }
    double t_end = std::min(t, clade.length);
    add(t0, x0, t_end, x0 - clade.slope * (t_end - t0));
    return occ;
}

} // namespace ipevo::scaffold
