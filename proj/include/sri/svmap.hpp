#pragma once

#include "sri/geometry.hpp"
#include "sri/markov.hpp"

#include <functional>
#include <string>
#include <vector>

namespace sri {

/// Set-valued drift H(x, s) with a declared linear-growth constant:
/// norm_bound(eval(x,s)) <= growth_K * (1 + |x|).
struct DriftMap {
    std::function<ConvexBody(const Vec&, int)> eval;
    double growth_K = 1.0;
    int dim = 1;
    int n_states = 1;
};

/// One affine piece <a,x> + b of a max-affine objective.
struct AffinePiece {
    Vec a;
    double b = 0.0;
};

/// H(x,s) = {h(x,s)}.
DriftMap singleton_map(std::function<Vec(const Vec&, int)> h, double K, int dim, int n_states);

/// H(x,s) = h(x,s) + eps * unit ball; growth constant inflated by eps.
DriftMap approximate_drift(const DriftMap& base, double eps);

/// H(x,s) = hull{h(x,z,s): z over the control grid}; exact for finite grids.
DriftMap controlled_hull(std::function<Vec(const Vec&, int, int)> h, int n_controls, double K,
                         int dim, int n_states);

/// H(x,s) = -dJ(x,s) for J(x,s) = max_i(<a_i(s),x> + b_i(s)); generators are
/// the negated gradients of pieces active within tie_tol of the max.
DriftMap max_affine_subgradient(const std::vector<std::vector<AffinePiece>>& pieces,
                                double tie_tol = 1e-9);

/// Monte-Carlo inner hull of {h(y,s): |y-x| <= eps}; the shrinking-eps
/// intersection is approximated by the caller running a decreasing schedule.
DriftMap filippov_envelope(std::function<Vec(const Vec&, int)> h, double eps, int n_samples,
                           double K, int dim, int n_states, std::uint64_t rng_seed);

struct CheckViolation {
    Vec x;
    int state = 0;
    double observed = 0.0;
    double allowed = 0.0;
};

struct GrowthReport {
    bool pass = true;
    std::vector<CheckViolation> violations;
};

/// Samples norm_bound(eval(x,s)) <= growth_K*(1+|x|)+tol over x_samples and all states.
GrowthReport check_growth(const DriftMap& map, const std::vector<Vec>& x_samples, double tol = 1e-9);

struct ClosedGraphReport {
    std::vector<double> radii;
    std::vector<double> defects;  // outer defect per radius
    bool nonincreasing = true;
    bool pass = true;  // defects trend toward 0
};

/// Sampled upper-semicontinuity check at (x, s): for each radius r, the worst
/// distance from members of eval(x', s), |x'-x|<=r, to eval(x, s).
ClosedGraphReport check_closed_graph(const DriftMap& map, const Vec& x, int s,
                                     const std::vector<double>& radii, int n_probes,
                                     std::uint64_t rng_seed);

}  // namespace sri
