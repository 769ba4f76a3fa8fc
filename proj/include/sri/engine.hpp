#pragma once

#include "sri/averaging.hpp"
#include "sri/markov.hpp"
#include "sri/svmap.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sri {

/// a(n) = a0 / (n+1)^gamma. a0 <= 1, gamma in (0.5, 1] gives a divergent,
/// square-summable, nonincreasing schedule.
class StepSchedule {
  public:
    StepSchedule(double a0, double gamma);
    double a0() const { return a0_; }
    double gamma() const { return gamma_; }
    double step(long n) const;

  private:
    double a0_;
    double gamma_;
};

struct NoiseModel {
    enum class Kind { None, BoundedIid, GaussianMd, Constant };
    Kind kind = Kind::None;
    double bound = 0.0;  // BoundedIid: uniform per coordinate in [-bound, bound]
    double sigma = 0.0;  // GaussianMd: N(0, sigma^2) per coordinate
    Vec value;           // Constant: adversarial test fixture, not a martingale difference

    static NoiseModel none() { return {}; }
    static NoiseModel bounded_iid(double bound);
    static NoiseModel gaussian_md(double sigma);
    static NoiseModel constant(Vec value);

    Vec draw(int dim, Rng& rng) const;
};

struct SelectionPolicy {
    enum class Kind { RandomVertex, LeastNorm, TowardTarget, Singleton };
    Kind kind = Kind::LeastNorm;
    Vec target;  // TowardTarget only

    static SelectionPolicy random_vertex() { return {Kind::RandomVertex, {}}; }
    static SelectionPolicy least_norm() { return {Kind::LeastNorm, {}}; }
    static SelectionPolicy toward_target(Vec t) { return {Kind::TowardTarget, std::move(t)}; }
    static SelectionPolicy singleton() { return {Kind::Singleton, {}}; }

    /// Picks a member of the body; always within tol of membership.
    Vec select(const ConvexBody& body, Rng& rng) const;
};

/// Recorded run of the recursion X_{n+1} = X_n + a(n)(V_n + M_{n+1}),
/// with V_n a selected member of H(X_n, S_n).
struct Trajectory {
    int dim = 0;
    std::vector<double> a;       // a(n), n = 0..N-1
    std::vector<double> t;       // t(n), n = 0..N (t(0) = 0)
    std::vector<Vec> X;          // X_0..X_N
    std::vector<int> S;          // S_0..S_{N-1} (state used at step n)
    std::vector<Vec> V;          // selected drift values
    std::vector<Vec> M;          // noise draws M_{n+1}
    long n_steps() const { return static_cast<long>(a.size()); }
    double horizon() const { return t.back(); }
};

struct RunOptions {
    long n_steps = 1000;
    std::uint64_t seed = 0;
    double blowup_bound = 1e6;
    double membership_tol = 1e-9;
};

/// Thrown when |X_n| exceeds the blow-up bound (stability guard).
struct StabilityViolation : std::runtime_error {
    explicit StabilityViolation(const std::string& msg) : std::runtime_error(msg) {}
};

Trajectory run(const DriftMap& drift, const MarkovKernel& kernel, const StepSchedule& schedule,
               const NoiseModel& noise, const SelectionPolicy& policy, const Vec& x0, int s0,
               const RunOptions& opts);

/// Piecewise-linear interpolant of the iterates on the timeline; constant
/// extension for t < 0.
Vec interpolate(const Trajectory& traj, double t);

/// min{m > n : sum_{k=n}^{m-1} a(k) >= T}. Throws when the horizon is exhausted.
long tau(const StepSchedule& schedule, long n, double T, long horizon);

struct A3Report {
    bool monotone = true;
    bool a0_ok = true;
    double partial_sum = 0.0;
    double partial_square_sum = 0.0;
    bool divergent = true;       // gamma <= 1
    bool square_summable = true; // gamma > 1/2
    bool pass() const { return monotone && a0_ok && divergent && square_summable; }
};

A3Report check_A3(const StepSchedule& schedule, long N);

struct A4Series {
    std::vector<long> n_grid;
    std::vector<double> g;  // sup over the window of the weighted noise sums
    bool decreasing_trend = true;
};

A4Series check_A4(const Trajectory& traj, double T);

struct A5Report {
    double max_norm = 0.0;
    bool guard_triggered = false;
};

A5Report check_A5(const Trajectory& traj, double blowup_bound = 1e6);

/// CSV with header n,t,a,S,X_*,V_*,M_*; 17 significant digits.
void write_trajectory_csv(const Trajectory& traj, const std::string& path);

/// Inverse of write_trajectory_csv; the final iterate is reconstructed from
/// the last row's update identity.
Trajectory read_trajectory_csv(const std::string& path);

}  // namespace sri
