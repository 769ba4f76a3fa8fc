#pragma once

#include "sri/averaging.hpp"
#include "sri/engine.hpp"

namespace sri {

/// Euler polygon for dz/dt in Hhat(z): z_{k+1} = z_k + dt * v_k with each
/// velocity a member of the finite inner body at z_k.
struct DIPath {
    double dt = 0.0;
    std::vector<double> t;
    std::vector<Vec> z;
    std::vector<Vec> v;
    /// Worst support gap of the inner bodies used along the path.
    double oracle_defect = 0.0;

    Vec at(double time) const;  // piecewise-linear evaluation
};

enum class FlowSelection { LeastNorm, TowardTarget, RandomVertex };

DIPath euler_flow(const AveragedMap& am, const Vec& x0, double dt, double T,
                  FlowSelection selection, const std::vector<Vec>& dirs, std::uint64_t seed,
                  const Vec& target = {}, double blowup_bound = 1e6);

/// Greedy feasible tracker of a reference path: each step projects the
/// velocity that would reproduce the reference onto the inner body.
DIPath best_tracker(const AveragedMap& am, const std::function<Vec(double)>& reference,
                    const Vec& x_start, double dt, double T, const std::vector<Vec>& dirs);

struct LimitSetEstimate {
    std::vector<Vec> tail;
    Vec mean;
    double diameter = 0.0;
    long first_index = 0;
};

/// Tail point cloud {X_n : n >= (1 - tail_fraction) N}; needs >= 100 points.
LimitSetEstimate limit_set_estimate(const Trajectory& traj, double tail_fraction);

/// True iff every tail point is within eps of the body A.
bool attractor_containment(const LimitSetEstimate& est, const ConvexBody& A, double eps);

void write_dipath_csv(const DIPath& path, const std::string& out_path);

}  // namespace sri
