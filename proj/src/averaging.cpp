#include "sri/averaging.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace sri {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

AveragedMap::AveragedMap(DriftMap drift, MarkovKernel kernel)
    : drift_(std::move(drift)), kernel_(std::move(kernel)) {
    if (drift_.n_states != kernel_.n_states())
        throw std::invalid_argument("AveragedMap: drift and kernel disagree on state count");
}

const StationarySet& AveragedMap::stationary(const Vec& x) const {
    if (kernel_.variant() == MarkovKernel::Variant::IterateDependent) {
        cached_ = stationary_set(kernel_, x);
        return *cached_;
    }
    if (!cached_) cached_ = stationary_set(kernel_, x);
    return *cached_;
}

ConvexBody AveragedMap::averaged_body(const Vec& x, const Vec& mu) const {
    if (!is_distribution(mu, 1e-9))
        throw std::invalid_argument("averaged_body: mu must lie on the simplex");
    std::vector<ConvexBody> bodies;
    bodies.reserve(static_cast<size_t>(drift_.n_states));
    for (int s = 0; s < drift_.n_states; ++s) bodies.push_back(drift_.eval(x, s));
    return minkowski_weighted(bodies, mu);
}

double AveragedMap::hhat_support(const Vec& x, const Vec& dir) const {
    const StationarySet& ss = stationary(x);
    std::vector<double> per_state(static_cast<size_t>(drift_.n_states));
    for (int s = 0; s < drift_.n_states; ++s) per_state[static_cast<size_t>(s)] = support(drift_.eval(x, s), dir);
    double best = -std::numeric_limits<double>::infinity();
    for (const Vec& mu : ss.vertices) {
        double v = 0.0;
        for (int s = 0; s < drift_.n_states; ++s) v += mu(s) * per_state[static_cast<size_t>(s)];
        best = std::max(best, v);
    }
    return best;
}

Vec AveragedMap::hhat_extreme_point(const Vec& x, const Vec& dir) const {
    const StationarySet& ss = stationary(x);
    std::vector<ConvexBody> bodies;
    bodies.reserve(static_cast<size_t>(drift_.n_states));
    for (int s = 0; s < drift_.n_states; ++s) bodies.push_back(drift_.eval(x, s));

    const Vec* best_mu = nullptr;
    double best = -std::numeric_limits<double>::infinity();
    for (const Vec& mu : ss.vertices) {
        double v = 0.0;
        for (int s = 0; s < drift_.n_states; ++s) v += mu(s) * support(bodies[static_cast<size_t>(s)], dir);
        if (v > best) {
            best = v;
            best_mu = &mu;
        }
    }
    Vec z = Vec::Zero(drift_.dim);
    for (int s = 0; s < drift_.n_states; ++s)
        z += (*best_mu)(s)*support_point(bodies[static_cast<size_t>(s)], dir);
    return z;
}

ConvexBody AveragedMap::hhat_body(const Vec& x, const std::vector<Vec>& dirs) const {
    if (dirs.empty()) throw std::invalid_argument("hhat_body: need at least one direction");
    Mat g(drift_.dim, dirs.size());
    for (size_t i = 0; i < dirs.size(); ++i) g.col(static_cast<long>(i)) = hhat_extreme_point(x, dirs[i]);
    return ConvexBody(std::move(g), 0.0);
}

std::vector<Vec> direction_grid(int dim, int count) {
    std::vector<Vec> dirs;
    if (dim == 1) {
        Vec plus(1), minus(1);
        plus << 1.0;
        minus << -1.0;
        dirs = {plus, minus};
        return dirs;
    }
    if (dim == 2) {
        for (int i = 0; i < count; ++i) {
            double a = kTwoPi * i / count;
            Vec d(2);
            d << std::cos(a), std::sin(a);
            dirs.push_back(d);
        }
        return dirs;
    }
    // Fibonacci lattice on S^2; for d > 3 fall back to a seeded Gaussian grid.
    if (dim == 3) {
        const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
        for (int i = 0; i < count; ++i) {
            double z = 1.0 - 2.0 * (i + 0.5) / count;
            double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            double a = kTwoPi * i / golden;
            Vec d(3);
            d << r * std::cos(a), r * std::sin(a), z;
            dirs.push_back(d);
        }
        return dirs;
    }
    Rng rng(0x5eedu + static_cast<unsigned>(dim));
    std::normal_distribution<double> gauss(0.0, 1.0);
    while (static_cast<int>(dirs.size()) < count) {
        Vec d(dim);
        for (int i = 0; i < dim; ++i) d(i) = gauss(rng);
        double n = d.norm();
        if (n > 1e-12) dirs.push_back(d / n);
    }
    return dirs;
}

int default_direction_count(int dim) {
    if (dim == 1) return 2;
    if (dim == 2) return 64;
    return 512;
}

MarchaudReport marchaud_report(const AveragedMap& am, const std::vector<Vec>& x_samples,
                               const std::vector<Vec>& dir_samples,
                               const std::vector<double>& radii, std::uint64_t rng_seed) {
    MarchaudReport report;
    const double K = am.drift().growth_K;

    for (const Vec& x : x_samples) {
        for (const Vec& d : dir_samples) {
            double sup = am.hhat_support(x, d);
            double excess = sup - K * (1.0 + x.norm()) * d.norm() - 1e-9;
            report.worst_growth_excess = std::max(report.worst_growth_excess, excess);
            if (excess > 0.0) report.growth_pass = false;

            double homog = std::abs(am.hhat_support(x, 2.5 * d) - 2.5 * sup);
            report.worst_homogeneity = std::max(report.worst_homogeneity, homog);
            if (homog > 1e-10 * std::max(1.0, std::abs(sup))) report.homogeneous_pass = false;
        }
        for (size_t i = 0; i + 1 < dir_samples.size(); i += 2) {
            const Vec& d1 = dir_samples[i];
            const Vec& d2 = dir_samples[i + 1];
            double viol = am.hhat_support(x, d1 + d2) - am.hhat_support(x, d1) - am.hhat_support(x, d2);
            report.worst_sublinearity = std::max(report.worst_sublinearity, viol);
            if (viol > 1e-10) report.sublinear_pass = false;
        }
    }

    // Closed-graph defect at the first sample point over the radius schedule.
    if (!x_samples.empty() && !radii.empty()) {
        const Vec& x = x_samples.front();
        std::vector<Vec> fine_dirs = direction_grid(am.drift().dim, 4 * default_direction_count(am.drift().dim));
        ConvexBody limit = am.hhat_body(x, fine_dirs);
        // Inner-approximation defect of the limit body; distances below it
        // are indistinguishable from membership.
        double oracle_defect = 0.0;
        for (const Vec& d : fine_dirs)
            oracle_defect = std::max(oracle_defect, am.hhat_support(x, d) - support(limit, d));
        Rng rng(rng_seed);
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (double r : radii) {
            double defect = 0.0;
            for (int probe = 0; probe < 20; ++probe) {
                Vec dx(am.drift().dim);
                for (int i = 0; i < am.drift().dim; ++i) dx(i) = gauss(rng);
                if (dx.norm() == 0.0) continue;
                Vec xp = x + (r / dx.norm()) * dx;
                for (const Vec& d : dir_samples)
                    defect = std::max(defect,
                                      distance(limit, am.hhat_extreme_point(xp, d)) - oracle_defect);
            }
            report.closed_graph_defects.push_back(std::max(0.0, defect));
        }
        for (size_t i = 1; i < report.closed_graph_defects.size(); ++i)
            if (report.closed_graph_defects[i] > report.closed_graph_defects[i - 1] + 1e-8)
                report.closed_graph_pass = false;
    }
    return report;
}

}  // namespace sri
