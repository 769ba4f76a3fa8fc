#include "sri/apt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

namespace sri {

Vec SampledPath::at(double t) const {
    if (t <= times.front()) return points.front();
    if (t >= times.back()) return points.back();
    auto it = std::upper_bound(times.begin(), times.end(), t);
    long k = std::distance(times.begin(), it) - 1;
    double w = (t - times[k]) / (times[k + 1] - times[k]);
    return (1.0 - w) * points[k] + w * points[k + 1];
}

double metric_D(const SampledPath& p1, const SampledPath& p2, int K_max) {
    if (K_max < 1) throw std::invalid_argument("metric_D: K_max must be >= 1");
    double K = static_cast<double>(K_max);
    if (p1.times.front() > -K || p1.times.back() < K || p2.times.front() > -K ||
        p2.times.back() < K)
        throw std::invalid_argument("metric_D: paths do not cover [-K_max, K_max]");

    // Sup-norms on the union grid restricted to [-k, k], cumulative over k.
    std::vector<double> grid;
    grid.reserve(p1.times.size() + p2.times.size());
    for (double t : p1.times)
        if (t >= -K && t <= K) grid.push_back(t);
    for (double t : p2.times)
        if (t >= -K && t <= K) grid.push_back(t);
    grid.push_back(-K);
    grid.push_back(K);
    std::sort(grid.begin(), grid.end());

    std::vector<double> sup_per_k(static_cast<size_t>(K_max), 0.0);
    for (double t : grid) {
        double diff = (p1.at(t) - p2.at(t)).norm();
        int k_min = std::max(1, static_cast<int>(std::ceil(std::abs(t) - 1e-12)));
        for (int k = k_min; k <= K_max; ++k)
            sup_per_k[static_cast<size_t>(k - 1)] = std::max(sup_per_k[static_cast<size_t>(k - 1)], diff);
    }
    double d = 0.0;
    double w = 1.0;
    for (int k = 1; k <= K_max; ++k) {
        w *= 0.5;
        d += w * std::min(sup_per_k[static_cast<size_t>(k - 1)], 1.0);
    }
    return d;
}

AptSeries apt_statistic(const Trajectory& traj, const AveragedMap& am, double T,
                        const std::vector<double>& t_grid, double dt,
                        const std::vector<Vec>& dirs) {
    AptSeries series;
    series.T = T;
    series.dt = dt;
    for (double t0 : t_grid) {
        if (t0 + T > traj.horizon() + 1e-9)
            throw std::out_of_range("apt_statistic: window extends beyond the trajectory horizon");
        auto reference = [&traj, t0](double q) { return interpolate(traj, t0 + q); };
        DIPath z = best_tracker(am, reference, interpolate(traj, t0), dt, T, dirs);
        series.oracle_defect = std::max(series.oracle_defect, z.oracle_defect);

        // Sup over the tracker grid plus the trajectory breakpoints inside the
        // window; corners of the interpolant carry the extrema.
        double e = 0.0;
        for (double tk : z.t)
            e = std::max(e, (reference(tk) - z.at(tk)).norm());
        auto lo = std::upper_bound(traj.t.begin(), traj.t.end(), t0);
        for (auto it = lo; it != traj.t.end() && *it < t0 + T; ++it) {
            double q = *it - t0;
            e = std::max(e, (reference(q) - z.at(q)).norm());
        }
        series.points.push_back({t0, e});
    }
    return series;
}

void write_apt_csv(const AptSeries& series, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    std::fprintf(f, "t,e,oracle_defect,T,dt\n");
    for (const auto& p : series.points)
        std::fprintf(f, "%.17g,%.17g,%.17g,%.17g,%.17g\n", p.t, p.e, series.oracle_defect,
                     series.T, series.dt);
    std::fclose(f);
}

}  // namespace sri
