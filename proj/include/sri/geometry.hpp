#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

namespace sri {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Compact convex set represented as hull(generators) + radius * (closed unit ball).
/// Generators are stored as columns. Immutable after construction.
class ConvexBody {
  public:
    ConvexBody(Mat generators, double radius);

    static ConvexBody singleton(const Vec& point);
    static ConvexBody ball(const Vec& center, double radius);
    static ConvexBody from_points(const std::vector<Vec>& points, double radius = 0.0);

    const Mat& generators() const { return gens_; }
    double radius() const { return radius_; }
    int dim() const { return static_cast<int>(gens_.rows()); }
    int n_generators() const { return static_cast<int>(gens_.cols()); }

    /// Same hull with the ball radius replaced.
    ConvexBody with_radius(double r) const { return ConvexBody(gens_, r); }

  private:
    Mat gens_;
    double radius_;
};

/// max_g <g,dir> + radius*|dir|. Exact.
double support(const ConvexBody& body, const Vec& dir);

/// A point of the body attaining support(body, dir).
Vec support_point(const ConvexBody& body, const Vec& dir);

/// max(0, dist(p, hull) - radius), dist-to-hull via min-norm-point over
/// convex-combination weights, duality-gap stopping below tol.
double distance(const ConvexBody& body, const Vec& p, double tol = 1e-9);

/// Nearest member of the body to p, within tol of the true distance.
Vec project(const ConvexBody& body, const Vec& p, double tol = 1e-9);

/// sum_i w_i * body_i, exact: cartesian generator sums, radii mix linearly.
/// Throws when the generator product exceeds generator_cap.
ConvexBody minkowski_weighted(const std::vector<ConvexBody>& bodies, const Vec& weights,
                              long generator_cap = 200000);

/// max_g |g| + radius; upper bound on sup-norm over members, exact when radius=0.
double norm_bound(const ConvexBody& body);

}  // namespace sri
