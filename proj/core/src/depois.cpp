#include "ipevo/depois.hpp"

#include "ipevo/partition.hpp"
#include "ipevo/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace ipevo {

double TimeChange::u_at_level(double y) const {
    auto it = std::lower_bound(levels.begin(), levels.end(), y);
    if (it == levels.begin()) return u_knots.front();
    if (it == levels.end()) return u_knots.back();
    std::size_t k = static_cast<std::size_t>(it - levels.begin());
    double f = (y - levels[k - 1]) / (levels[k] - levels[k - 1]);
    return u_knots[k - 1] + f * (u_knots[k] - u_knots[k - 1]);
}

double TimeChange::rho(double u) const {
    auto it = std::lower_bound(u_knots.begin(), u_knots.end(), u);
    if (it == u_knots.begin()) return levels.front();
    if (it == u_knots.end()) return levels.back();
    std::size_t k = static_cast<std::size_t>(it - u_knots.begin());
    double f = (u - u_knots[k - 1]) / (u_knots[k] - u_knots[k - 1]);
    return levels[k - 1] + f * (levels[k] - levels[k - 1]);
}

TimeChange TimeChange::from_mass_path(const std::vector<double>& levels,
                                      const std::vector<double>& mass) {
    if (levels.size() != mass.size() || levels.empty())
        throw invalid_input("time change: level/mass size mismatch");
    TimeChange tc;
    tc.levels = levels;
    tc.u_knots.assign(levels.size(), 0.0);
    for (std::size_t k = 1; k < levels.size(); ++k) {
        if (!(mass[k - 1] > 0) || !(mass[k] > 0))
            throw invalid_input("time change: mass path must stay positive");
        double dy = levels[k] - levels[k - 1];
        tc.u_knots[k] = tc.u_knots[k - 1] + 0.5 * dy * (1.0 / mass[k - 1] + 1.0 / mass[k]);
    }
    return tc;
}

DepoissonizedTrace depoissonize(const EvolutionTrace& trace) {
    if (trace.states.empty()) throw invalid_input("depoissonize: empty trace");
    if (!(trace.total_mass.front() > 0))
        throw invalid_input("depoissonize: initial state must have positive mass");
    // truncate at the last positive-mass level (type-1 extinction)
    std::size_t n = trace.states.size();
    std::size_t last = 0;
    while (last + 1 < n && trace.total_mass[last + 1] > 0) ++last;
    DepoissonizedTrace out;
    out.alpha = trace.alpha;
    out.truncated = (last + 1 < n);

    static bool warned = false;
    for (std::size_t k = 1; k <= last; ++k) {
        double ratio = trace.total_mass[k] / trace.total_mass[k - 1];
        if ((ratio > 1.25 || ratio < 0.8) && !warned) {
            warned = true;
            std::fprintf(stderr,
                         "ipevo: warning: mass varies by more than 20%% between level knots; "
                         "refine the grid for an accurate time change\n");
        }
    }

    std::vector<double> lev(trace.levels.begin(), trace.levels.begin() + last + 1);
    std::vector<double> mass(trace.total_mass.begin(), trace.total_mass.begin() + last + 1);
    TimeChange tc = TimeChange::from_mass_path(lev, mass);
    out.u_grid = tc.u_knots;
    out.level_at_u = lev;
    out.states.reserve(last + 1);
    for (std::size_t k = 0; k <= last; ++k)
        out.states.push_back(scale(1.0 / mass[k], trace.states[k], trace.alpha));
    return out;
}

} // namespace ipevo
