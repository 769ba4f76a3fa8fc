#pragma once

#include "sri/markov.hpp"
#include "sri/svmap.hpp"

#include <optional>

namespace sri {

/// The averaged drift Hhat(x) = union over stationary mu of sum_s mu(s) H(x,s),
/// exposed through an exact support-function oracle. The max over the
/// stationary polytope of a linear functional is attained at a vertex, so
/// evaluating the vertices is exact.
class AveragedMap {
  public:
    AveragedMap(DriftMap drift, MarkovKernel kernel);

    const DriftMap& drift() const { return drift_; }
    const MarkovKernel& kernel() const { return kernel_; }

    /// sum_s mu(s) H(x,s) as an exact weighted Minkowski sum.
    ConvexBody averaged_body(const Vec& x, const Vec& mu) const;

    /// Exact support function of Hhat(x) in direction dir.
    double hhat_support(const Vec& x, const Vec& dir) const;

    /// Member of Hhat(x) attaining hhat_support(x, dir).
    Vec hhat_extreme_point(const Vec& x, const Vec& dir) const;

    /// Inner polytope approximation from extreme points along dirs.
    ConvexBody hhat_body(const Vec& x, const std::vector<Vec>& dirs) const;

    const StationarySet& stationary(const Vec& x) const;

  private:
    DriftMap drift_;
    MarkovKernel kernel_;
    // Iterate-independent kernels have one stationary set for all x.
    mutable std::optional<StationarySet> cached_;
};

/// Unit directions: +-1 in d=1, uniform circle grid in d=2, Fibonacci sphere in d=3+.
std::vector<Vec> direction_grid(int dim, int count);

/// Default grid sizes per the toolkit configuration (2 / 64 / 512 for d = 1 / 2 / 3).
int default_direction_count(int dim);

struct MarchaudReport {
    bool growth_pass = true;
    bool sublinear_pass = true;
    bool homogeneous_pass = true;
    bool closed_graph_pass = true;
    double worst_growth_excess = 0.0;
    double worst_sublinearity = 0.0;
    double worst_homogeneity = 0.0;
    std::vector<double> closed_graph_defects;
    bool pass() const {
        return growth_pass && sublinear_pass && homogeneous_pass && closed_graph_pass;
    }
};

/// Samples the Marchaud properties of Hhat: linear growth, support-function
/// sublinearity/homogeneity, and a shrinking-radius closed-graph defect.
MarchaudReport marchaud_report(const AveragedMap& am, const std::vector<Vec>& x_samples,
                               const std::vector<Vec>& dir_samples,
                               const std::vector<double>& radii, std::uint64_t rng_seed);

}  // namespace sri
