#include "sri/geometry.hpp"

#include <cmath>
#include <limits>

namespace sri {

namespace {
constexpr int kMaxProjectionIters = 10000;

// Min-norm point in hull of the columns of Q (Wolfe's algorithm).
// Returns the convex-combination weights over all columns; the optimum
// satisfies duality gap <x,x> - min_j <x,q_j> <= gap_tol on exit.
Vec min_norm_point_weights(const Mat& Q, double gap_tol) {
    const int m = static_cast<int>(Q.cols());
    Vec w_full = Vec::Zero(m);
    if (m == 1) {
        w_full(0) = 1.0;
        return w_full;
    }

    int start = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
        double n2 = Q.col(i).squaredNorm();
        if (n2 < best) {
            best = n2;
            start = i;
        }
    }

    std::vector<int> active{start};
    Vec w = Vec::Ones(1);
    Vec x = Q.col(start);

    for (int iter = 0; iter < kMaxProjectionIters; ++iter) {
        int j = 0;
        double min_dot = std::numeric_limits<double>::infinity();
        for (int i = 0; i < m; ++i) {
            double d = x.dot(Q.col(i));
            if (d < min_dot) {
                min_dot = d;
                j = i;
            }
        }
        double gap = x.squaredNorm() - min_dot;
        // The gap estimate bottoms out at rounding level; treat that as converged.
        if (gap <= gap_tol || gap <= 1e-13 * (1.0 + x.squaredNorm())) break;

        bool already = false;
        for (int idx : active)
            if (idx == j) already = true;
        if (!already) {
            active.push_back(j);
            Vec w2(active.size());
            w2.head(w.size()) = w;
            w2(w.size()) = 0.0;
            w = w2;
        }

        // Minor cycles: affine min-norm point over the active set, stepping
        // back to the feasible boundary and dropping vanished columns.
        for (int minor = 0; minor < kMaxProjectionIters; ++minor) {
            const int k = static_cast<int>(active.size());
            Mat Qs(Q.rows(), k);
            for (int i = 0; i < k; ++i) Qs.col(i) = Q.col(active[i]);

            Mat kkt = Mat::Zero(k + 1, k + 1);
            kkt.topLeftCorner(k, k) = Qs.transpose() * Qs;
            kkt.topRightCorner(k, 1).setOnes();
            kkt.bottomLeftCorner(1, k).setOnes();
            Vec rhs = Vec::Zero(k + 1);
            rhs(k) = 1.0;
            Vec sol = kkt.fullPivLu().solve(rhs);
            Vec v = sol.head(k);

            if (v.minCoeff() > 1e-14) {
                w = v;
                x = Qs * w;
                break;
            }
            double theta = 1.0;
            for (int i = 0; i < k; ++i) {
                if (v(i) < w(i)) {
                    double t = w(i) / (w(i) - v(i));
                    theta = std::min(theta, t);
                }
            }
            w = w + theta * (v - w);
            std::vector<int> keep_idx;
            std::vector<double> keep_w;
            for (int i = 0; i < k; ++i) {
                if (w(i) > 1e-14) {
                    keep_idx.push_back(active[i]);
                    keep_w.push_back(w(i));
                }
            }
            if (keep_idx.empty()) {
                keep_idx.push_back(active[0]);
                keep_w.push_back(1.0);
            }
            active = keep_idx;
            w = Eigen::Map<Vec>(keep_w.data(), static_cast<long>(keep_w.size()));
            w /= w.sum();
            Mat Qk(Q.rows(), active.size());
            for (size_t i = 0; i < active.size(); ++i) Qk.col(static_cast<long>(i)) = Q.col(active[i]);
            x = Qk * w;
        }
    }

    // Final gap check: fail loudly on ill-conditioned input.
    int jf = 0;
    double min_dot = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
        double d = x.dot(Q.col(i));
        if (d < min_dot) {
            min_dot = d;
            jf = i;
        }
    }
    (void)jf;
    double final_gap = x.squaredNorm() - min_dot;
    if (final_gap > std::max(gap_tol * 10.0, 1e-9 * (1.0 + x.squaredNorm()))) {
        throw std::runtime_error("projection failed to converge: ill-conditioned input");
    }

    for (size_t i = 0; i < active.size(); ++i) w_full(active[i]) = w(static_cast<long>(i));
    return w_full;
}

// Convex-combination weights of the hull point nearest to p.
Vec hull_projection_weights(const Mat& G, const Vec& p, double tol) {
    Mat Q = G.colwise() - p;
    // gap <= tol^2 bounds the distance error by tol (d - d* <= sqrt(gap)).
    return min_norm_point_weights(Q, tol * tol);
}

}  // namespace

ConvexBody::ConvexBody(Mat generators, double radius) : gens_(std::move(generators)), radius_(radius) {
    if (gens_.cols() < 1) throw std::invalid_argument("ConvexBody: need at least one generator");
    if (radius_ < 0.0) throw std::invalid_argument("ConvexBody: negative radius");
    if (!gens_.allFinite()) throw std::invalid_argument("ConvexBody: non-finite generator");
}

ConvexBody ConvexBody::singleton(const Vec& point) {
    Mat g(point.size(), 1);
    g.col(0) = point;
    return ConvexBody(std::move(g), 0.0);
}

ConvexBody ConvexBody::ball(const Vec& center, double radius) {
    Mat g(center.size(), 1);
    g.col(0) = center;
    return ConvexBody(std::move(g), radius);
}

ConvexBody ConvexBody::from_points(const std::vector<Vec>& points, double radius) {
    if (points.empty()) throw std::invalid_argument("ConvexBody: empty point list");
    Mat g(points.front().size(), points.size());
    for (size_t i = 0; i < points.size(); ++i) g.col(static_cast<long>(i)) = points[i];
    return ConvexBody(std::move(g), radius);
}

double support(const ConvexBody& body, const Vec& dir) {
    double best = (body.generators().transpose() * dir).maxCoeff();
    return best + body.radius() * dir.norm();
}

Vec support_point(const ConvexBody& body, const Vec& dir) {
    int best = 0;
    (body.generators().transpose() * dir).maxCoeff(&best);
    Vec z = body.generators().col(best);
    double n = dir.norm();
    if (body.radius() > 0.0 && n > 0.0) z += (body.radius() / n) * dir;
    return z;
}

double distance(const ConvexBody& body, const Vec& p, double tol) {
    if (tol <= 0.0) throw std::invalid_argument("distance: tol must be positive");
    Vec w = hull_projection_weights(body.generators(), p, tol);
    double d_hull = (body.generators() * w - p).norm();
    return std::max(0.0, d_hull - body.radius());
}

Vec project(const ConvexBody& body, const Vec& p, double tol) {
    if (tol <= 0.0) throw std::invalid_argument("project: tol must be positive");
    Vec w = hull_projection_weights(body.generators(), p, tol);
    Vec y = body.generators() * w;
    double d_hull = (y - p).norm();
    if (d_hull <= body.radius()) return p;  // p is inside hull + ball
    if (body.radius() > 0.0) return y + (body.radius() / d_hull) * (p - y);
    return y;
}

ConvexBody minkowski_weighted(const std::vector<ConvexBody>& bodies, const Vec& weights,
                              long generator_cap) {
    if (bodies.empty()) throw std::invalid_argument("minkowski_weighted: no bodies");
    if (static_cast<long>(bodies.size()) != weights.size())
        throw std::invalid_argument("minkowski_weighted: weight count mismatch");
    if (weights.minCoeff() < 0.0 || std::abs(weights.sum() - 1.0) > 1e-12)
        throw std::invalid_argument("minkowski_weighted: weights must lie on the simplex");

    const int d = bodies.front().dim();
    long n_out = 1;
    for (const auto& b : bodies) {
        if (b.dim() != d) throw std::invalid_argument("minkowski_weighted: dimension mismatch");
        n_out *= b.n_generators();
        if (n_out > generator_cap)
            throw std::runtime_error(
                "minkowski_weighted: generator count exceeds cap; coarsen the bodies");
    }

    Mat out(d, n_out);
    std::vector<int> idx(bodies.size(), 0);
    for (long col = 0; col < n_out; ++col) {
        Vec g = Vec::Zero(d);
        for (size_t i = 0; i < bodies.size(); ++i)
            g += weights(static_cast<long>(i)) * bodies[i].generators().col(idx[i]);
        out.col(col) = g;
        for (size_t i = 0; i < bodies.size(); ++i) {
            if (++idx[i] < bodies[i].n_generators()) break;
            idx[i] = 0;
        }
    }
    double r = 0.0;
    for (size_t i = 0; i < bodies.size(); ++i) r += weights(static_cast<long>(i)) * bodies[i].radius();
    return ConvexBody(std::move(out), r);
}

double norm_bound(const ConvexBody& body) {
    return body.generators().colwise().norm().maxCoeff() + body.radius();
}

}  // namespace sri
