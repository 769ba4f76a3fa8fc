#pragma once

#include "sri/dynamics.hpp"
#include "sri/engine.hpp"

#include <functional>

namespace sri {

/// Compact-open metric on sampled two-sided paths:
/// sum_{k=1}^{K_max} 2^{-k} min(sup-norm on [-k,k], 1).
/// Both paths must cover [-K_max, K_max]; the sup is taken on the union of
/// their sample grids. Truncation defect is at most 2^{-K_max}.
struct SampledPath {
    std::vector<double> times;  // strictly increasing
    std::vector<Vec> points;

    Vec at(double t) const;  // piecewise linear, constant beyond the ends
};

double metric_D(const SampledPath& p1, const SampledPath& p2, int K_max);

struct AptPoint {
    double t = 0.0;
    double e = 0.0;
};

struct AptSeries {
    std::vector<AptPoint> points;
    double oracle_defect = 0.0;
    double T = 0.0;
    double dt = 0.0;
};

/// e(t) = sup_{q in [0,T]} |xbar(t+q) - z_t(q)| with z_t the best feasible
/// tracker started at xbar(t). An upper bound on the distance of the shifted
/// trajectory to the solution set of the inclusion.
AptSeries apt_statistic(const Trajectory& traj, const AveragedMap& am, double T,
                        const std::vector<double>& t_grid, double dt,
                        const std::vector<Vec>& dirs);

void write_apt_csv(const AptSeries& series, const std::string& path);

}  // namespace sri
