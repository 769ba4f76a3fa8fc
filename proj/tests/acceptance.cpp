// Acceptance suite: one pass/fail line per criterion, nonzero exit on failure.
#include "sri/apt.hpp"
#include "sri/config.hpp"
#include "sri/dynamics.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace sri;

namespace {

int g_failures = 0;

void report(int index, const std::string& name, bool pass, double seconds,
            const std::string& detail) {
    if (!pass) ++g_failures;
    std::cout << "criterion " << index << " [" << name << "]: " << (pass ? "pass" : "FAIL")
              << "  (" << detail << ", " << seconds << " s)\n";
}

double elapsed(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Vec v1(double a) {
    Vec v(1);
    v << a;
    return v;
}

Trajectory run_config(const ExperimentConfig& cfg, std::uint64_t seed) {
    Experiment e = build_experiment(cfg);
    RunOptions opts;
    opts.n_steps = cfg.n_steps;
    opts.seed = seed;
    opts.blowup_bound = cfg.blowup_bound;
    return run(e.drift, e.kernel, e.schedule, e.noise, e.policy, e.x0, cfg.s0, opts);
}

// 1. Subgradient convergence of the averaged objective sum_s mu(s)|x - theta_s|.
void criterion_1() {
    auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig cfg = load_config(find_preset("subgrad-1d"));
    Experiment e = build_experiment(cfg);

    // Oracle 1: the kernel's stationary law is mu = (0.4, 0.35, 0.25), verified
    // by power iteration independent of the library's stationary solver.
    Vec mu_expected(3);
    mu_expected << 0.4, 0.35, 0.25;
    Mat P = e.kernel.effective_matrix(v1(0.0));
    Vec pi = Vec::Constant(3, 1.0 / 3.0);
    for (int it = 0; it < 2000; ++it) pi = (pi.transpose() * P).transpose();
    bool mu_ok = (pi - mu_expected).lpNorm<1>() <= 1e-10;

    // Oracle 2: the averaged subgradient g(x) = sum_s mu(s) sign(x - theta_s)
    // changes sign only at 0 on a grid, so the minimizer is x* = 0.
    const double theta[3] = {-1.0, 0.0, 2.0};
    bool sign_ok = true;
    for (double x = -3.0; x <= 3.0; x += 0.01) {
        if (std::abs(x) < 5e-3) continue;  // skip the kink at the minimizer
        double g = 0.0;
        for (int s = 0; s < 3; ++s)
            g += mu_expected(s) * ((x > theta[s]) ? 1.0 : (x < theta[s] ? -1.0 : 0.0));
        if (x < 0.0 && g > 1e-12) sign_ok = false;
        if (x > 0.0 && g < -1e-12) sign_ok = false;
    }

    int converged = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Trajectory traj = run_config(cfg, seed);
        if (std::abs(traj.X.back()(0)) <= 0.05) ++converged;
    }
    double sec = elapsed(t0);
    report(1, "subgradient convergence", mu_ok && sign_ok && converged >= 4 && sec < 30.0,
           sec,
           "stationary oracle " + std::string(mu_ok ? "ok" : "BAD") + ", sign oracle " +
               (sign_ok ? "ok" : "BAD") + ", " + std::to_string(converged) + "/5 seeds within 0.05");
}

// 2. Averaged-map support oracle vs brute-force simplex grid (identity kernel).
void criterion_2() {
    auto t0 = std::chrono::steady_clock::now();
    const int d = 2, S = 3;
    // Per-state bodies with known supports: hull{p_s(x), q_s(x)} + r_s * ball.
    Mat A(S, d), B(S, d);
    A << 1.0, 0.5, -0.3, 1.2, 0.0, -1.0;
    B << -0.5, 0.2, 0.8, -0.6, 0.4, 0.4;
    const double r[S] = {0.0, 0.1, 0.25};
    DriftMap drift;
    drift.dim = d;
    drift.n_states = S;
    drift.growth_K = 5.0;
    drift.eval = [=](const Vec& x, int s) {
        Mat G(d, 2);
        G.col(0) = A.row(s).transpose() * (1.0 + 0.1 * x.sum());
        G.col(1) = B.row(s).transpose() - 0.2 * x;
        return ConvexBody(G, r[s]);
    };
    AveragedMap am(drift, MarkovKernel::iterate_independent(Mat::Identity(S, S)));

    Rng rng(11);
    std::normal_distribution<double> gauss(0.0, 1.0);
    double worst_exact = 0.0, worst_grid = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        Vec x(d), dir(d);
        for (int i = 0; i < d; ++i) {
            x(i) = gauss(rng);
            dir(i) = gauss(rng);
        }
        // Known per-state supports.
        double per_state[S];
        double best = -1e300;
        for (int s = 0; s < S; ++s) {
            Vec p = A.row(s).transpose() * (1.0 + 0.1 * x.sum());
            Vec q = B.row(s).transpose() - 0.2 * x;
            per_state[s] = std::max(p.dot(dir), q.dot(dir)) + r[s] * dir.norm();
            best = std::max(best, per_state[s]);
        }
        double hhat = am.hhat_support(x, dir);
        worst_exact = std::max(worst_exact, std::abs(hhat - best));
        // Brute force over the full simplex, step 0.01: averaged support is
        // the mu-weighted sum of per-state supports; must never exceed hhat.
        for (int i = 0; i <= 100; ++i)
            for (int j = 0; j <= 100 - i; ++j) {
                double mu0 = i * 0.01, mu1 = j * 0.01, mu2 = 1.0 - mu0 - mu1;
                double val = mu0 * per_state[0] + mu1 * per_state[1] + mu2 * per_state[2];
                worst_grid = std::max(worst_grid, val - hhat);
            }
    }
    double sec = elapsed(t0);
    report(2, "averaged-map oracle equivalence",
           worst_exact <= 1e-12 && worst_grid <= 1e-6 && sec < 5.0, sec,
           "max |hhat - max_s support| = " + std::to_string(worst_exact) +
               ", max grid excess = " + std::to_string(worst_grid));
}

// 3. Stationary set structure for a block-diagonal kernel.
void criterion_3() {
    auto t0 = std::chrono::steady_clock::now();
    Mat P = Mat::Zero(4, 4);
    P(0, 0) = 0.7; P(0, 1) = 0.3;
    P(1, 0) = 0.4; P(1, 1) = 0.6;
    P(2, 2) = 0.2; P(2, 3) = 0.8;
    P(3, 2) = 0.5; P(3, 3) = 0.5;

    StationarySet set = stationary_vertices(P);
    bool two = set.vertices.size() == 2;
    bool residual_ok = true, disjoint = true;
    if (two) {
        for (const Vec& pi : set.vertices)
            if ((pi.transpose() * P - pi.transpose()).lpNorm<1>() > 1e-10) residual_ok = false;
        for (int s = 0; s < 4; ++s)
            if (set.vertices[0](s) > 1e-12 && set.vertices[1](s) > 1e-12) disjoint = false;
    }

    // Brute-force reachability oracle: closed classes are {0,1} and {2,3}.
    bool reach[4][4] = {};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) reach[i][j] = (i == j) || P(i, j) > 0.0;
    for (int k = 0; k < 4; ++k)
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) reach[i][j] = reach[i][j] || (reach[i][k] && reach[k][j]);
    bool classes_ok = reach[0][1] && reach[1][0] && !reach[0][2] && !reach[0][3] && reach[2][3] &&
                      reach[3][2] && !reach[2][0];
    auto classes = recurrent_classes(P);
    classes_ok = classes_ok && classes.size() == 2;

    double sec = elapsed(t0);
    report(3, "stationary set structure",
           two && residual_ok && disjoint && classes_ok && sec < 1.0, sec,
           std::to_string(set.vertices.size()) + " vertices, residual " +
               (residual_ok ? "<=1e-10" : "BAD") + ", supports " +
               (disjoint ? "disjoint" : "OVERLAP"));
}

// 4. APT statistic trend on the approximate-drift preset.
void criterion_4() {
    auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig cfg = load_config(find_preset("approx-drift-1d"));
    Experiment e = build_experiment(cfg);
    AveragedMap am(e.drift, e.kernel);
    const std::vector<double>& t_grid = cfg.apt->t_grid;
    std::vector<Vec> dirs = direction_grid(cfg.dim, default_direction_count(cfg.dim));

    const int n_seeds = 5;
    std::vector<std::vector<double>> e_by_seed;
    for (std::uint64_t seed = 1; seed <= n_seeds; ++seed) {
        Trajectory traj = run_config(cfg, seed);
        AptSeries s = apt_statistic(traj, am, cfg.apt->T, t_grid, cfg.apt->dt, dirs);
        std::vector<double> es;
        for (const auto& p : s.points) es.push_back(p.e);
        e_by_seed.push_back(es);
    }
    std::vector<double> med(t_grid.size());
    for (size_t i = 0; i < t_grid.size(); ++i) {
        std::vector<double> col;
        for (const auto& es : e_by_seed) col.push_back(es[i]);
        std::sort(col.begin(), col.end());
        med[i] = col[col.size() / 2];
    }
    bool last_small = med.back() < 0.05;
    bool nonincreasing = true;
    for (size_t i = t_grid.size() - 3; i < t_grid.size(); ++i)
        if (med[i] > med[i - 1] + 1e-12) nonincreasing = false;

    double sec = elapsed(t0);
    std::ostringstream detail;
    detail << "median e(t_last) = " << med.back() << ", last-4 trend "
           << (nonincreasing ? "nonincreasing" : "INCREASING");
    report(4, "apt statistic trend", last_small && nonincreasing && sec < 60.0, sec, detail.str());
}

// 5. Marchaud property suite over the preset drifts.
void criterion_5() {
    auto t0 = std::chrono::steady_clock::now();
    bool all_pass = true;
    std::string detail;
    for (const std::string name :
         {"subgrad-1d", "approx-drift-1d", "controlled-hull-1d", "filippov-1d"}) {
        ExperimentConfig cfg = load_config(find_preset(name));
        Experiment e = build_experiment(cfg);
        AveragedMap am(e.drift, e.kernel);
        Rng rng(31);
        std::uniform_real_distribution<double> u(-2.0, 2.0);
        std::vector<Vec> xs;
        xs.push_back(v1(0.77));  // closed-graph base point, away from any kink
        for (int i = 1; i < 200; ++i) xs.push_back(v1(u(rng)));
        std::vector<Vec> ds = direction_grid(cfg.dim, 64);
        MarchaudReport r = marchaud_report(am, xs, ds, {1e-1, 1e-2, 1e-3}, 77);
        if (!r.pass()) all_pass = false;
        if (!detail.empty()) detail += ", ";
        detail += name + (r.pass() ? ": ok" : ": FAIL");
    }
    double sec = elapsed(t0);
    report(5, "marchaud property suite", all_pass && sec < 10.0, sec, detail);
}

// 6. Approximate-drift limit set inside the analytic attractor band.
void criterion_6() {
    auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig cfg = load_config(find_preset("approx-drift-1d"));
    // Analytic attractor for dx/dt in -x + bbar + eps U with bbar = 0.2,
    // eps = 0.1: the interval [0.1, 0.3] (fixed-point band).
    const double lo = 0.1, hi = 0.3, inflate = 0.03;
    Trajectory traj = run_config(cfg, cfg.seed);
    LimitSetEstimate est = limit_set_estimate(traj, cfg.limit_set->tail_fraction);
    double worst = 0.0;
    bool contained = true;
    for (const Vec& x : est.tail) {
        double excess = std::max(lo - x(0), x(0) - hi);
        worst = std::max(worst, excess);
        if (excess > inflate) contained = false;
    }
    ConvexBody band = ConvexBody::from_points({v1(lo), v1(hi)}, 0.0);
    bool lib_agrees = attractor_containment(est, band, inflate) == contained;
    double sec = elapsed(t0);
    report(6, "limit set in attractor band", contained && lib_agrees && sec < 30.0, sec,
           "worst band excess = " + std::to_string(worst) + " (allowed 0.03)");
}

// 7. Metric and engine unit identities; byte-identical CSV rerun through the CLI.
void criterion_7() {
    auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    std::string detail;

    // metric_D on constant paths: exact values.
    SampledPath a, b, c;
    for (double t = -25.0; t <= 25.0 + 1e-12; t += 0.5) {
        a.times.push_back(t); a.points.push_back(v1(0.0));
        b.times.push_back(t); b.points.push_back(v1(0.0));
        c.times.push_back(t); c.points.push_back(v1(0.25));
    }
    if (std::abs(metric_D(a, b, 20)) > 1e-12) { ok = false; detail += "metric zero; "; }
    double expect = 0.25 * (1.0 - std::pow(2.0, -20));
    if (std::abs(metric_D(a, c, 20) - expect) > 1e-12) { ok = false; detail += "metric offset; "; }

    // interpolate(t(n)) = X_n exactly.
    DriftMap contracting = singleton_map([](const Vec& x, int) -> Vec { return -x; }, 1.0, 1, 1);
    MarkovKernel triv = MarkovKernel::iterate_independent(Mat::Ones(1, 1));
    Trajectory traj = run(contracting, triv, StepSchedule(0.5, 0.9), NoiseModel::none(),
                          SelectionPolicy::singleton(), v1(1.0), 0, {.n_steps = 200, .seed = 1});
    for (long n = 0; n <= traj.n_steps(); ++n)
        if ((interpolate(traj, traj.t[n]) - traj.X[n]).norm() != 0.0) {
            ok = false; detail += "interpolate; "; break;
        }

    // Euler flow of dz/dt = -z matches (1 - dt)^k via the exact update rule.
    AveragedMap am(contracting, triv);
    DIPath p = euler_flow(am, v1(1.0), 0.01, 1.0, FlowSelection::LeastNorm,
                          direction_grid(1, 2), 0);
    double x = 1.0;
    for (size_t k = 0; k < p.z.size(); ++k) {
        if (std::abs(p.z[k](0) - x) > 1e-14 * std::abs(x)) { ok = false; detail += "euler; "; break; }
        x *= (1.0 - 0.01);
    }

    // Deterministic rerun through the CLI: byte-identical trajectory CSV.
    std::string cli = SRI_CLI_PATH;
    std::string cmd1 = "\"" + cli + "\" run --preset fixture-constnoise --out acc_run_a > /dev/null";
    std::string cmd2 = "\"" + cli + "\" run --preset fixture-constnoise --out acc_run_b > /dev/null";
    if (std::system(cmd1.c_str()) != 0 || std::system(cmd2.c_str()) != 0) {
        ok = false; detail += "cli run failed; ";
    } else {
        std::ifstream f1("acc_run_a/trajectory.csv"), f2("acc_run_b/trajectory.csv");
        std::stringstream s1, s2;
        s1 << f1.rdbuf(); s2 << f2.rdbuf();
        if (s1.str().empty() || s1.str() != s2.str()) { ok = false; detail += "csv differs; "; }
    }

    double sec = elapsed(t0);
    report(7, "unit identities and deterministic rerun", ok && sec < 5.0, sec,
           detail.empty() ? "all identities exact, rerun byte-identical" : detail);
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    if (g_failures > 0) {
        std::cout << g_failures << " criterion(s) failed\n";
        return 1;
    }
    std::cout << "all acceptance criteria passed\n";
    return 0;
}
