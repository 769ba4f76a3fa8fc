#include "sri/svmap.hpp"

#include <cmath>
#include <cstring>
#include <limits>

namespace sri {

namespace {

// Stable per-point seed so set-valued evaluations stay pure.
std::uint64_t mix_seed(std::uint64_t seed, const Vec& x, int s) {
    std::uint64_t h = seed ^ 0x9e3779b97f4a7c15ull;
    auto mix = [&h](std::uint64_t v) {
        h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    };
    for (long i = 0; i < x.size(); ++i) {
        std::uint64_t bits;
        double xi = x(i);
        std::memcpy(&bits, &xi, sizeof(bits));
        mix(bits);
    }
    mix(static_cast<std::uint64_t>(s));
    return h;
}

Vec uniform_in_ball(int dim, double radius, Rng& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Vec dir(dim);
    for (int i = 0; i < dim; ++i) dir(i) = gauss(rng);
    double n = dir.norm();
    if (n == 0.0) return Vec::Zero(dim);
    double r = radius * std::pow(unif(rng), 1.0 / dim);
    return (r / n) * dir;
}

}  // namespace

DriftMap singleton_map(std::function<Vec(const Vec&, int)> h, double K, int dim, int n_states) {
    DriftMap m;
    m.growth_K = K;
    m.dim = dim;
    m.n_states = n_states;
    m.eval = [h = std::move(h)](const Vec& x, int s) { return ConvexBody::singleton(h(x, s)); };
    return m;
}

DriftMap approximate_drift(const DriftMap& base, double eps) {
    if (eps < 0.0) throw std::invalid_argument("approximate_drift: eps must be nonnegative");
    DriftMap m;
    m.growth_K = base.growth_K + eps;
    m.dim = base.dim;
    m.n_states = base.n_states;
    m.eval = [base_eval = base.eval, eps](const Vec& x, int s) {
        return base_eval(x, s).with_radius(eps);
    };
    return m;
}

DriftMap controlled_hull(std::function<Vec(const Vec&, int, int)> h, int n_controls, double K,
                         int dim, int n_states) {
    if (n_controls < 1) throw std::invalid_argument("controlled_hull: empty control grid");
    DriftMap m;
    m.growth_K = K;
    m.dim = dim;
    m.n_states = n_states;
    m.eval = [h = std::move(h), n_controls, dim](const Vec& x, int s) {
        Mat g(dim, n_controls);
        for (int z = 0; z < n_controls; ++z) g.col(z) = h(x, z, s);
        return ConvexBody(std::move(g), 0.0);
    };
    return m;
}

DriftMap max_affine_subgradient(const std::vector<std::vector<AffinePiece>>& pieces,
                                double tie_tol) {
    if (pieces.empty()) throw std::invalid_argument("max_affine_subgradient: no states");
    if (tie_tol <= 0.0) throw std::invalid_argument("max_affine_subgradient: tie_tol must be > 0");
    int dim = 0;
    double K = 0.0;
    for (const auto& state_pieces : pieces) {
        if (state_pieces.empty())
            throw std::invalid_argument("max_affine_subgradient: state with no pieces");
        for (const auto& p : state_pieces) {
            dim = static_cast<int>(p.a.size());
            K = std::max(K, p.a.norm());
        }
    }
    DriftMap m;
    m.growth_K = std::max(K, 1e-12);
    m.dim = dim;
    m.n_states = static_cast<int>(pieces.size());
    m.eval = [pieces, tie_tol, dim](const Vec& x, int s) {
        const auto& ps = pieces.at(static_cast<size_t>(s));
        double best = -std::numeric_limits<double>::infinity();
        for (const auto& p : ps) best = std::max(best, p.a.dot(x) + p.b);
        std::vector<Vec> active;
        for (const auto& p : ps)
            if (p.a.dot(x) + p.b >= best - tie_tol) active.push_back(-p.a);
        Mat g(dim, active.size());
        for (size_t i = 0; i < active.size(); ++i) g.col(static_cast<long>(i)) = active[i];
        return ConvexBody(std::move(g), 0.0);
    };
    return m;
}

DriftMap filippov_envelope(std::function<Vec(const Vec&, int)> h, double eps, int n_samples,
                           double K, int dim, int n_states, std::uint64_t rng_seed) {
    if (eps <= 0.0) throw std::invalid_argument("filippov_envelope: eps must be positive");
    if (n_samples < 1) throw std::invalid_argument("filippov_envelope: n_samples must be >= 1");
    DriftMap m;
    m.growth_K = K;
    m.dim = dim;
    m.n_states = n_states;
    m.eval = [h = std::move(h), eps, n_samples, dim, rng_seed](const Vec& x, int s) {
        Rng rng(mix_seed(rng_seed, x, s));
        Mat g(dim, n_samples + 1);
        g.col(0) = h(x, s);
        for (int i = 0; i < n_samples; ++i) g.col(i + 1) = h(x + uniform_in_ball(dim, eps, rng), s);
        return ConvexBody(std::move(g), 0.0);
    };
    return m;
}

GrowthReport check_growth(const DriftMap& map, const std::vector<Vec>& x_samples, double tol) {
    GrowthReport report;
    for (const auto& x : x_samples) {
        for (int s = 0; s < map.n_states; ++s) {
            double bound = norm_bound(map.eval(x, s));
            double allowed = map.growth_K * (1.0 + x.norm()) + tol;
            if (bound > allowed) {
                report.pass = false;
                report.violations.push_back({x, s, bound, allowed});
            }
        }
    }
    return report;
}

ClosedGraphReport check_closed_graph(const DriftMap& map, const Vec& x, int s,
                                     const std::vector<double>& radii, int n_probes,
                                     std::uint64_t rng_seed) {
    for (size_t i = 1; i < radii.size(); ++i)
        if (radii[i] >= radii[i - 1])
            throw std::invalid_argument("check_closed_graph: radii must strictly decrease");

    ClosedGraphReport report;
    report.radii = radii;
    ConvexBody limit = map.eval(x, s);
    Rng rng(rng_seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    for (double r : radii) {
        double defect = 0.0;
        for (int probe = 0; probe < n_probes; ++probe) {
            Vec xp = x + uniform_in_ball(map.dim, r, rng);
            ConvexBody near = map.eval(xp, s);
            for (int gcol = 0; gcol < near.n_generators(); ++gcol)
                defect = std::max(defect, distance(limit, near.generators().col(gcol)));
            if (near.radius() > 0.0) {
                Vec dir(map.dim);
                for (int i = 0; i < map.dim; ++i) dir(i) = gauss(rng);
                if (dir.norm() > 0.0) defect = std::max(defect, distance(limit, support_point(near, dir)));
            }
        }
        report.defects.push_back(defect);
    }
    for (size_t i = 1; i < report.defects.size(); ++i)
        if (report.defects[i] > report.defects[i - 1] + 1e-9) report.nonincreasing = false;
    double first = report.defects.empty() ? 0.0 : report.defects.front();
    double last = report.defects.empty() ? 0.0 : report.defects.back();
    report.pass = report.nonincreasing && (last <= std::max(0.1 * first, 1e-8));
    return report;
}

}  // namespace sri
