#pragma once

#include "sri/geometry.hpp"

#include <functional>
#include <random>
#include <string>
#include <vector>

namespace sri {

using Rng = std::mt19937_64;

/// Probability vector over the finite state space.
struct Distribution {
    Vec weights;
};

bool is_distribution(const Vec& w, double tol = 1e-12);

/// Finite-state transition law. Three variants of the same interface:
/// rows may depend on the iterate, on the state alone, or on a sampled
/// control averaged through a stationary randomized policy.
class MarkovKernel {
  public:
    enum class Variant { IterateIndependent, IterateDependent, Controlled };

    /// Fixed row-stochastic matrix, rows indexed by state.
    static MarkovKernel iterate_independent(Mat P);
    /// Row function of (x, s).
    static MarkovKernel iterate_dependent(int n_states, std::function<Vec(const Vec&, int)> row);
    /// Per-control matrices P_z plus a policy matrix phi (n_states x n_controls,
    /// each row a distribution over controls). The effective kernel averages
    /// the control matrices row-wise through phi.
    static MarkovKernel controlled(std::vector<Mat> per_control, Mat policy);

    Variant variant() const { return variant_; }
    int n_states() const { return n_states_; }

    /// Row of the effective kernel at (x, s); for the controlled variant this
    /// is sum_z phi(s)(z) * P_z(s, .).
    Vec effective_row(const Vec& x, int s) const;

    /// Full effective transition matrix frozen at x.
    Mat effective_matrix(const Vec& x) const;

    /// Draws S_{n+1} from effective_row(x, s). Deterministic given the rng state.
    int sample_next(const Vec& x, int s, Rng& rng) const;

  private:
    MarkovKernel() = default;

    Variant variant_ = Variant::IterateIndependent;
    int n_states_ = 0;
    Mat matrix_;
    std::function<Vec(const Vec&, int)> row_fn_;
    std::vector<Mat> per_control_;
    Mat policy_;
};

/// Vertex representation of the stationary-distribution polytope D(x):
/// one vertex per closed recurrent class, supports disjoint.
struct StationarySet {
    std::vector<Vec> vertices;
    std::vector<std::vector<int>> classes;
};

/// Closed communicating classes of the support graph {(s,s'): P(s,s') > support_tol}.
std::vector<std::vector<int>> recurrent_classes(const Mat& P, double support_tol = 1e-12);

/// One stationary vertex per closed class, solved on the restricted block;
/// throws if the residual |pi P - pi|_1 exceeds tol.
StationarySet stationary_vertices(const Mat& P, double tol = 1e-10);

/// Materializes the effective matrix at x and delegates to stationary_vertices.
StationarySet stationary_set(const MarkovKernel& kernel, const Vec& x, double tol = 1e-10);

/// Whitespace-separated rows, one state per line.
Mat load_matrix(const std::string& path);

}  // namespace sri
