// Independent reference implementations used by unit and acceptance tests.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "activeteach/memory_model.hpp"
#include "activeteach/schedule.hpp"

namespace oracle {

using activeteach::ParamPoint;
using activeteach::Schedule;
using activeteach::Seconds;

inline double recall(const ParamPoint& p, std::uint32_t n, double dt) {
    return std::exp(-p.alpha * std::pow(1.0 - p.beta, static_cast<double>(n) - 1.0) * dt);
}

struct Observation {
    std::uint32_t n;  // presentations before the observed one
    double dt;
    bool outcome;
};

/// prior * likelihood, renormalised once per observation, all in linear space.
inline std::vector<double> posterior(const std::vector<ParamPoint>& grid, std::vector<double> w,
                                     const std::vector<Observation>& obs) {
    double total = 0.0;
    for (double x : w) total += x;
    for (double& x : w) x /= total;
    for (const auto& o : obs) {
        double z = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double x = grid[i].alpha * std::pow(1.0 - grid[i].beta, o.n - 1.0) * o.dt;
            // -expm1 keeps the failure probability exact when recall is close to 1.
            w[i] *= o.outcome ? std::exp(-x) : -std::expm1(-x);
            z += w[i];
        }
        for (double& x : w) x /= z;
    }
    return w;
}

/// Items with recall >= rho at eval_time after presenting `sequence` at the schedule's step times.
inline int reward(const std::vector<ParamPoint>& truth, const std::vector<int>& sequence,
                  const Schedule& schedule, double rho) {
    std::vector<std::uint32_t> n(truth.size(), 0);
    std::vector<double> last(truth.size(), 0.0);
    for (std::size_t k = 0; k < sequence.size(); ++k) {
        ++n[sequence[k]];
        last[sequence[k]] = schedule.time_of_step(static_cast<std::uint32_t>(k));
    }
    int count = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (n[i] == 0) continue;
        if (recall(truth[i], n[i], schedule.eval_time() - last[i]) >= rho) ++count;
    }
    return count;
}

/// Best final reward over all Q^F presentation sequences.
inline int exhaustive_best(const std::vector<ParamPoint>& truth, const Schedule& schedule, double rho) {
    const int q = static_cast<int>(truth.size());
    const int f = static_cast<int>(schedule.horizon());
    std::vector<int> seq(f, 0);
    int best = 0;
    while (true) {
        best = std::max(best, reward(truth, seq, schedule, rho));
        int k = f - 1;
        while (k >= 0 && ++seq[k] == q) seq[k--] = 0;
        if (k < 0) break;
    }
    return best;
}

}  // namespace oracle
