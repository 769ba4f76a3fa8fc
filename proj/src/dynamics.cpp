#include "sri/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace sri {

Vec DIPath::at(double time) const {
    if (time <= t.front()) return z.front();
    if (time >= t.back()) return z.back();
    auto it = std::upper_bound(t.begin(), t.end(), time);
    long k = std::distance(t.begin(), it) - 1;
    double w = (time - t[k]) / (t[k + 1] - t[k]);
    return (1.0 - w) * z[k] + w * z[k + 1];
}

namespace {
double inner_body_defect(const AveragedMap& am, const Vec& x, const ConvexBody& body,
                         const std::vector<Vec>& dirs) {
    double defect = 0.0;
    for (const Vec& d : dirs)
        defect = std::max(defect, am.hhat_support(x, d) - support(body, d));
    return defect;
}
}  // namespace

DIPath euler_flow(const AveragedMap& am, const Vec& x0, double dt, double T,
                  FlowSelection selection, const std::vector<Vec>& dirs, std::uint64_t seed,
                  const Vec& target, double blowup_bound) {
    if (dt <= 0.0 || T < dt) throw std::invalid_argument("euler_flow: need 0 < dt <= T");
    DIPath path;
    path.dt = dt;
    const long n = static_cast<long>(std::llround(T / dt));
    Rng rng(seed);
    Vec z = x0;
    path.t.push_back(0.0);
    path.z.push_back(z);
    for (long k = 0; k < n; ++k) {
        ConvexBody body = am.hhat_body(z, dirs);
        path.oracle_defect = std::max(path.oracle_defect, inner_body_defect(am, z, body, dirs));
        Vec v;
        switch (selection) {
            case FlowSelection::LeastNorm:
                v = project(body, Vec::Zero(body.dim()));
                break;
            case FlowSelection::TowardTarget:
                v = project(body, (target - z) / dt);
                break;
            case FlowSelection::RandomVertex: {
                std::uniform_int_distribution<int> pick(0, body.n_generators() - 1);
                v = body.generators().col(pick(rng));
                break;
            }
        }
        z = z + dt * v;
        if (z.norm() > blowup_bound)
            throw StabilityViolation("euler_flow: blow-up guard triggered");
        path.t.push_back(path.t.back() + dt);
        path.v.push_back(std::move(v));
        path.z.push_back(z);
    }
    return path;
}

DIPath best_tracker(const AveragedMap& am, const std::function<Vec(double)>& reference,
                    const Vec& x_start, double dt, double T, const std::vector<Vec>& dirs) {
    if (dt <= 0.0 || T < dt) throw std::invalid_argument("best_tracker: need 0 < dt <= T");
    DIPath path;
    path.dt = dt;
    const long n = static_cast<long>(std::llround(T / dt));
    Vec z = x_start;
    path.t.push_back(0.0);
    path.z.push_back(z);
    for (long k = 0; k < n; ++k) {
        ConvexBody body = am.hhat_body(z, dirs);
        path.oracle_defect = std::max(path.oracle_defect, inner_body_defect(am, z, body, dirs));
        Vec wanted = (reference(path.t.back() + dt) - z) / dt;
        Vec v = project(body, wanted);
        z = z + dt * v;
        path.t.push_back(path.t.back() + dt);
        path.v.push_back(std::move(v));
        path.z.push_back(z);
    }
    return path;
}

LimitSetEstimate limit_set_estimate(const Trajectory& traj, double tail_fraction) {
    if (tail_fraction <= 0.0 || tail_fraction >= 1.0)
        throw std::invalid_argument("limit_set_estimate: tail_fraction in (0,1)");
    const long N = static_cast<long>(traj.X.size());
    long start = static_cast<long>(std::ceil((1.0 - tail_fraction) * N));
    start = std::min(start, N - 1);
    if (N - start < 100)
        throw std::invalid_argument("limit_set_estimate: tail holds fewer than 100 points");

    LimitSetEstimate est;
    est.first_index = start;
    est.mean = Vec::Zero(traj.dim);
    for (long i = start; i < N; ++i) {
        est.tail.push_back(traj.X[i]);
        est.mean += traj.X[i];
    }
    est.mean /= static_cast<double>(est.tail.size());
    // Diameter via the coordinate bounding box in low dims; exact pair scan
    // would be quadratic and is not needed at desk scale.
    Vec lo = est.tail.front(), hi = est.tail.front();
    for (const Vec& p : est.tail) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    est.diameter = (hi - lo).norm();
    return est;
}

bool attractor_containment(const LimitSetEstimate& est, const ConvexBody& A, double eps) {
    if (eps < 0.0) throw std::invalid_argument("attractor_containment: eps must be >= 0");
    for (const Vec& p : est.tail)
        if (distance(A, p) > eps) return false;
    return true;
}

void write_dipath_csv(const DIPath& path, const std::string& out_path) {
    std::FILE* f = std::fopen(out_path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open for writing: " + out_path);
    const int dim = static_cast<int>(path.z.front().size());
    std::fprintf(f, "k,t");
    for (int i = 0; i < dim; ++i) std::fprintf(f, ",Z_%d", i);
    for (int i = 0; i < dim; ++i) std::fprintf(f, ",V_%d", i);
    std::fprintf(f, "\n");
    for (size_t k = 0; k < path.v.size(); ++k) {
        std::fprintf(f, "%zu,%.17g", k, path.t[k]);
        for (int i = 0; i < dim; ++i) std::fprintf(f, ",%.17g", path.z[k](i));
        for (int i = 0; i < dim; ++i) std::fprintf(f, ",%.17g", path.v[k](i));
        std::fprintf(f, "\n");
    }
    std::fclose(f);
}

}  // namespace sri
