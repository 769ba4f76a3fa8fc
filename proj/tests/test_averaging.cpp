#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sri/averaging.hpp"

using namespace sri;

namespace {
Vec v1(double a) {
    Vec v(1);
    v << a;
    return v;
}
Vec v2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

// Brute force over a simplex grid: max over mu on the grid of
// sum_s mu(s) * support(H(x,s), dir).
double simplex_grid_max(const AveragedMap& am, const Vec& x, const Vec& dir, int steps) {
    const int ns = am.drift().n_states;
    std::vector<double> sup(static_cast<size_t>(ns));
    for (int s = 0; s < ns; ++s) sup[static_cast<size_t>(s)] = support(am.drift().eval(x, s), dir);
    double best = -1e300;
    if (ns == 2) {
        for (int i = 0; i <= steps; ++i) {
            double w = double(i) / steps;
            best = std::max(best, w * sup[0] + (1 - w) * sup[1]);
        }
        return best;
    }
    REQUIRE(ns == 3);
    for (int i = 0; i <= steps; ++i)
        for (int j = 0; j <= steps - i; ++j) {
            double a = double(i) / steps, b = double(j) / steps;
            best = std::max(best, a * sup[0] + b * sup[1] + (1 - a - b) * sup[2]);
        }
    return best;
}
}  // namespace

TEST_CASE("averaged body: degenerate and mixed measures") {
    DriftMap drift;
    drift.dim = 2;
    drift.n_states = 2;
    drift.growth_K = 3.0;
    drift.eval = [](const Vec&, int s) {
        return s == 0 ? ConvexBody::ball(v2(0, 0), 1.0) : ConvexBody::singleton(v2(2, 0));
    };
    Mat P(2, 2);
    P << 0.5, 0.5, 0.5, 0.5;
    AveragedMap am(drift, MarkovKernel::iterate_independent(P));

    Vec point_mass(2);
    point_mass << 1.0, 0.0;
    ConvexBody b0 = am.averaged_body(v2(0, 0), point_mass);
    CHECK(b0.radius() == doctest::Approx(1.0));

    Vec half(2);
    half << 0.5, 0.5;
    ConvexBody mix = am.averaged_body(v2(0, 0), half);
    CHECK(mix.radius() == doctest::Approx(0.5));
    CHECK((mix.generators().col(0) - v2(1, 0)).norm() < 1e-14);

    // support additivity, exact
    for (const Vec& d : direction_grid(2, 16)) {
        double expect = 0.5 * support(drift.eval(v2(0, 0), 0), d) + 0.5 * support(drift.eval(v2(0, 0), 1), d);
        CHECK(support(mix, d) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("hhat support: unique stationary law") {
    DriftMap drift;
    drift.dim = 1;
    drift.n_states = 2;
    drift.growth_K = 2.0;
    drift.eval = [](const Vec& x, int s) {
        return ConvexBody::singleton(v1(-x(0) + (s == 1 ? 0.4 : 0.0)));
    };
    Mat P(2, 2);
    P << 0.5, 0.5, 0.5, 0.5;
    AveragedMap am(drift, MarkovKernel::iterate_independent(P));

    Vec mu(2);
    mu << 0.5, 0.5;
    Vec x = v1(1.0);
    for (const Vec& d : direction_grid(1, 2))
        CHECK(am.hhat_support(x, d) == doctest::Approx(support(am.averaged_body(x, mu), d)).epsilon(1e-12));
}

TEST_CASE("hhat support: identity kernel equals per-state max") {
    DriftMap drift;
    drift.dim = 1;
    drift.n_states = 3;
    drift.growth_K = 5.0;
    drift.eval = [](const Vec& x, int s) {
        if (s == 0) return ConvexBody::singleton(v1(-x(0)));
        if (s == 1) return ConvexBody::ball(v1(1.0), 0.5);
        return ConvexBody::from_points({v1(-2.0), v1(3.0)});
    };
    AveragedMap am(drift, MarkovKernel::iterate_independent(Mat::Identity(3, 3)));

    Rng rng(21);
    std::normal_distribution<double> g(0.0, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
        Vec x = v1(g(rng));
        Vec d = v1(g(rng));
        double expect = -1e300;
        for (int s = 0; s < 3; ++s) expect = std::max(expect, support(drift.eval(x, s), d));
        double got = am.hhat_support(x, d);
        CHECK(got == doctest::Approx(expect).epsilon(1e-12));
        // brute-force simplex grid never exceeds the oracle
        double grid = simplex_grid_max(am, x, d, 100);
        CHECK(grid <= got + 1e-6);
        CHECK(got <= grid + 1e-6 + 0.02 * std::abs(got));
    }
}

TEST_CASE("state-independent drift is kernel-independent") {
    DriftMap drift;
    drift.dim = 1;
    drift.n_states = 3;
    drift.growth_K = 1.0;
    drift.eval = [](const Vec& x, int) { return ConvexBody::singleton(v1(-x(0))); };
    AveragedMap am(drift, MarkovKernel::iterate_independent(Mat::Identity(3, 3)));
    Vec x = v1(1.7), d = v1(1.0);
    CHECK(am.hhat_support(x, d) == doctest::Approx(-1.7).epsilon(1e-12));
}

TEST_CASE("extreme points attain the support value") {
    DriftMap drift;
    drift.dim = 2;
    drift.n_states = 2;
    drift.growth_K = 2.0;
    drift.eval = [](const Vec& x, int s) {
        return s == 0 ? ConvexBody::ball(v2(0, 0), 0.5)
                      : ConvexBody::from_points({v2(-x(0), 0), v2(1, 1)});
    };
    Mat P(2, 2);
    P << 0.2, 0.8, 0.7, 0.3;
    AveragedMap am(drift, MarkovKernel::iterate_independent(P));
    Vec x = v2(0.3, -1.0);
    for (const Vec& d : direction_grid(2, 32)) {
        Vec z = am.hhat_extreme_point(x, d);
        CHECK(z.dot(d) == doctest::Approx(am.hhat_support(x, d)).epsilon(1e-10));
    }
}

TEST_CASE("hhat body: ball drift gives inscribed polygon") {
    DriftMap drift;
    drift.dim = 2;
    drift.n_states = 1;
    drift.growth_K = 1.0;
    double eps = 0.7;
    drift.eval = [eps](const Vec&, int) { return ConvexBody::ball(v2(0, 0), eps); };
    Mat P = Mat::Ones(1, 1);
    AveragedMap am(drift, MarkovKernel::iterate_independent(P));

    auto dirs = direction_grid(2, 64);
    ConvexBody poly = am.hhat_body(v2(0, 0), dirs);
    double defect_bound = eps * (1.0 - std::cos(3.14159265358979 / 64.0));
    for (const Vec& d : direction_grid(2, 200)) {
        double inner = support(poly, d);
        CHECK(inner <= eps + 1e-12);
        CHECK(inner >= eps - defect_bound - 1e-10);
    }
}

TEST_CASE("subgradient identity for the averaged objective") {
    // J(x,s) = |x - theta_s|, theta = (-1, 2), mu = (0.25, 0.75).
    // E_mu J has subgradient 0.25*sgn(x+1) + 0.75*sgn(x-2); Hhat = -dE[J].
    std::vector<std::vector<AffinePiece>> pieces{
        {{v1(1.0), 1.0}, {v1(-1.0), -1.0}},   // |x+1|
        {{v1(1.0), -2.0}, {v1(-1.0), 2.0}}};  // |x-2|
    DriftMap drift = max_affine_subgradient(pieces);
    Mat P(2, 2);
    P << 0.25, 0.75, 0.25, 0.75;  // iid rows: stationary mu = (0.25, 0.75)
    AveragedMap am(drift, MarkovKernel::iterate_independent(P));

    // smooth region x in (-1, 2): dE[J] = 0.25 - 0.75 = -0.5, Hhat = {0.5}
    CHECK(am.hhat_support(v1(0.5), v1(1.0)) == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(am.hhat_support(v1(0.5), v1(-1.0)) == doctest::Approx(-0.5).epsilon(1e-8));
    // kink at x = 2: dE[J] = 0.25 + 0.75*[-1,1], Hhat = [-1, 0.5]
    CHECK(am.hhat_support(v1(2.0), v1(1.0)) == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(am.hhat_support(v1(2.0), v1(-1.0)) == doctest::Approx(1.0).epsilon(1e-8));
    // right of both kinks: Hhat = {-1}
    CHECK(am.hhat_support(v1(3.0), v1(1.0)) == doctest::Approx(-1.0).epsilon(1e-8));
}

TEST_CASE("marchaud report on linear and inflated drifts") {
    DriftMap lin = singleton_map([](const Vec& x, int) -> Vec { return -x; }, 1.0, 1, 2);
    Mat P(2, 2);
    P << 0.5, 0.5, 0.5, 0.5;
    AveragedMap am(lin, MarkovKernel::iterate_independent(P));

    Rng rng(5);
    std::normal_distribution<double> g(0.0, 2.0);
    std::vector<Vec> xs;
    for (int i = 0; i < 30; ++i) xs.push_back(v1(g(rng)));
    auto dirs = direction_grid(1, 2);
    MarchaudReport r = marchaud_report(am, xs, dirs, {1e-1, 1e-2, 1e-3}, 9);
    CHECK(r.growth_pass);
    CHECK(r.sublinear_pass);
    CHECK(r.homogeneous_pass);
    CHECK(r.closed_graph_pass);

    AveragedMap am_fuzz(approximate_drift(lin, 0.1), MarkovKernel::iterate_independent(P));
    MarchaudReport r2 = marchaud_report(am_fuzz, xs, dirs, {1e-1, 1e-2, 1e-3}, 9);
    CHECK(r2.growth_pass);  // K inflated to 1.1 by construction
}
