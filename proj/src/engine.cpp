#include "sri/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace sri {

namespace {
Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<unsigned>(seed & 0xffffffffu),
                      static_cast<unsigned>(seed >> 32), static_cast<unsigned>(stream)};
    return Rng(seq);
}
}  // namespace

StepSchedule::StepSchedule(double a0, double gamma) : a0_(a0), gamma_(gamma) {
    if (a0 <= 0.0 || a0 > 1.0) throw std::invalid_argument("StepSchedule: need 0 < a0 <= 1");
    if (gamma <= 0.0) throw std::invalid_argument("StepSchedule: gamma must be positive");
}

double StepSchedule::step(long n) const { return a0_ / std::pow(static_cast<double>(n + 1), gamma_); }

NoiseModel NoiseModel::bounded_iid(double bound) {
    if (bound < 0.0) throw std::invalid_argument("NoiseModel: negative bound");
    NoiseModel m;
    m.kind = Kind::BoundedIid;
    m.bound = bound;
    return m;
}

NoiseModel NoiseModel::gaussian_md(double sigma) {
    if (sigma < 0.0) throw std::invalid_argument("NoiseModel: negative sigma");
    NoiseModel m;
    m.kind = Kind::GaussianMd;
    m.sigma = sigma;
    return m;
}

NoiseModel NoiseModel::constant(Vec value) {
    NoiseModel m;
    m.kind = Kind::Constant;
    m.value = std::move(value);
    return m;
}

Vec NoiseModel::draw(int dim, Rng& rng) const {
    Vec m = Vec::Zero(dim);
    switch (kind) {
        case Kind::None:
            break;
        case Kind::BoundedIid: {
            std::uniform_real_distribution<double> u(-bound, bound);
            for (int i = 0; i < dim; ++i) m(i) = u(rng);
            break;
        }
        case Kind::GaussianMd: {
            std::normal_distribution<double> g(0.0, sigma);
            for (int i = 0; i < dim; ++i) m(i) = g(rng);
            break;
        }
        case Kind::Constant:
            m = value;
            break;
    }
    return m;
}

Vec SelectionPolicy::select(const ConvexBody& body, Rng& rng) const {
    switch (kind) {
        case Kind::RandomVertex: {
            std::uniform_int_distribution<int> pick(0, body.n_generators() - 1);
            Vec v = body.generators().col(pick(rng));
            if (body.radius() > 0.0) {
                std::normal_distribution<double> gauss(0.0, 1.0);
                Vec dir(body.dim());
                for (int i = 0; i < body.dim(); ++i) dir(i) = gauss(rng);
                double n = dir.norm();
                if (n > 0.0) v += (body.radius() / n) * dir;
            }
            return v;
        }
        case Kind::LeastNorm:
            return project(body, Vec::Zero(body.dim()));
        case Kind::TowardTarget:
            return support_point(body, target);
        case Kind::Singleton:
            if (body.n_generators() != 1 || body.radius() != 0.0)
                throw std::runtime_error("singleton selection policy on a non-singleton body");
            return body.generators().col(0);
    }
    throw std::logic_error("unreachable selection kind");
}

Trajectory run(const DriftMap& drift, const MarkovKernel& kernel, const StepSchedule& schedule,
               const NoiseModel& noise, const SelectionPolicy& policy, const Vec& x0, int s0,
               const RunOptions& opts) {
    if (opts.n_steps < 1) throw std::invalid_argument("run: n_steps must be >= 1");
    if (s0 < 0 || s0 >= kernel.n_states()) throw std::invalid_argument("run: s0 out of range");

    Rng markov_rng = make_stream(opts.seed, 1);
    Rng noise_rng = make_stream(opts.seed, 2);
    Rng select_rng = make_stream(opts.seed, 3);

    Trajectory traj;
    traj.dim = drift.dim;
    traj.a.reserve(opts.n_steps);
    traj.t.reserve(opts.n_steps + 1);
    traj.X.reserve(opts.n_steps + 1);
    traj.S.reserve(opts.n_steps);
    traj.V.reserve(opts.n_steps);
    traj.M.reserve(opts.n_steps);

    traj.t.push_back(0.0);
    traj.X.push_back(x0);
    Vec x = x0;
    int s = s0;
    for (long n = 0; n < opts.n_steps; ++n) {
        double an = schedule.step(n);
        Vec v = policy.select(drift.eval(x, s), select_rng);
        Vec m = noise.draw(drift.dim, noise_rng);
        int s_next = kernel.sample_next(x, s, markov_rng);
        Vec x_next = x + an * (v + m);
        if (x_next.norm() > opts.blowup_bound)
            throw StabilityViolation("stability guard: |X_n| exceeded " +
                                     std::to_string(opts.blowup_bound) + " at step " +
                                     std::to_string(n) + " (bounded-iterates assumption violated)");
        traj.a.push_back(an);
        traj.t.push_back(traj.t.back() + an);
        traj.S.push_back(s);
        traj.V.push_back(std::move(v));
        traj.M.push_back(std::move(m));
        traj.X.push_back(x_next);
        x = traj.X.back();
        s = s_next;
    }
    return traj;
}

Vec interpolate(const Trajectory& traj, double t) {
    if (t <= 0.0) return traj.X.front();
    if (t >= traj.t.back()) {
        if (t > traj.t.back() + 1e-12)
            throw std::out_of_range("interpolate: t beyond recorded horizon");
        return traj.X.back();
    }
    auto it = std::upper_bound(traj.t.begin(), traj.t.end(), t);
    long n = std::distance(traj.t.begin(), it) - 1;
    double w = (t - traj.t[n]) / (traj.t[n + 1] - traj.t[n]);
    return (1.0 - w) * traj.X[n] + w * traj.X[n + 1];
}

long tau(const StepSchedule& schedule, long n, double T, long horizon) {
    if (T <= 0.0) throw std::invalid_argument("tau: T must be positive");
    double acc = 0.0;
    for (long k = n; k < horizon; ++k) {
        acc += schedule.step(k);
        if (acc >= T) return k + 1;
    }
    throw std::out_of_range("tau: horizon exhausted before the window closed");
}

A3Report check_A3(const StepSchedule& schedule, long N) {
    A3Report r;
    r.a0_ok = schedule.step(0) <= 1.0;
    double prev = schedule.step(0);
    for (long n = 1; n < std::min<long>(N, 10000); ++n) {
        double a = schedule.step(n);
        if (a > prev) r.monotone = false;
        prev = a;
    }
    for (long n = 0; n < N; ++n) {
        double a = schedule.step(n);
        r.partial_sum += a;
        r.partial_square_sum += a * a;
    }
    r.divergent = schedule.gamma() <= 1.0;
    r.square_summable = schedule.gamma() > 0.5;
    return r;
}

A4Series check_A4(const Trajectory& traj, double T) {
    A4Series series;
    const long N = traj.n_steps();
    for (long n = 1; n < N; n *= 2) {
        // window endpoint tau(n, T) on the recorded schedule
        double acc = 0.0;
        long m_end = -1;
        for (long k = n; k < N; ++k) {
            acc += traj.a[k];
            if (acc >= T) {
                m_end = k + 1;
                break;
            }
        }
        if (m_end < 0) break;
        Vec sum = Vec::Zero(traj.dim);
        double g = 0.0;
        for (long k = n; k <= std::min(m_end, N - 1); ++k) {
            sum += traj.a[k] * traj.M[k];
            g = std::max(g, sum.norm());
        }
        series.n_grid.push_back(n);
        series.g.push_back(g);
    }
    // Trend: median of the later half must sit clearly below the earlier half.
    if (series.g.size() >= 2) {
        auto median = [](std::vector<double> v) {
            std::sort(v.begin(), v.end());
            return v[v.size() / 2];
        };
        size_t half = series.g.size() / 2;
        double early = median({series.g.begin(), series.g.begin() + half});
        double late = median({series.g.begin() + half, series.g.end()});
        series.decreasing_trend = (early <= 1e-14) ? (late <= 1e-14) : (late <= 0.8 * early);
    }
    return series;
}

A5Report check_A5(const Trajectory& traj, double blowup_bound) {
    A5Report r;
    for (const Vec& x : traj.X) r.max_norm = std::max(r.max_norm, x.norm());
    r.guard_triggered = r.max_norm > blowup_bound;
    return r;
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    std::fprintf(f, "n,t,a,S");
    for (int i = 0; i < traj.dim; ++i) std::fprintf(f, ",X_%d", i);
    for (int i = 0; i < traj.dim; ++i) std::fprintf(f, ",V_%d", i);
    for (int i = 0; i < traj.dim; ++i) std::fprintf(f, ",M_%d", i);
    std::fprintf(f, "\n");
    for (long n = 0; n < traj.n_steps(); ++n) {
        std::fprintf(f, "%ld,%.17g,%.17g,%d", n, traj.t[n], traj.a[n], traj.S[n]);
        for (int i = 0; i < traj.dim; ++i) std::fprintf(f, ",%.17g", traj.X[n](i));
        for (int i = 0; i < traj.dim; ++i) std::fprintf(f, ",%.17g", traj.V[n](i));
        for (int i = 0; i < traj.dim; ++i) std::fprintf(f, ",%.17g", traj.M[n](i));
        std::fprintf(f, "\n");
    }
    std::fclose(f);
}

Trajectory read_trajectory_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trajectory file: " + path);
    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("empty trajectory file: " + path);
    int dim = 0;
    {
        size_t pos = 0;
        while ((pos = header.find(",X_", pos)) != std::string::npos) {
            ++dim;
            ++pos;
        }
    }
    if (dim < 1) throw std::runtime_error("trajectory header missing X columns: " + path);

    Trajectory traj;
    traj.dim = dim;
    traj.t.push_back(0.0);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> vals;
        size_t start = 0;
        while (start <= line.size()) {
            size_t comma = line.find(',', start);
            std::string tok = line.substr(start, comma == std::string::npos ? std::string::npos
                                                                            : comma - start);
            vals.push_back(std::stod(tok));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (static_cast<int>(vals.size()) != 4 + 3 * dim)
            throw std::runtime_error("bad trajectory row in " + path);
        double a = vals[2];
        Vec x(dim), v(dim), m(dim);
        for (int i = 0; i < dim; ++i) {
            x(i) = vals[static_cast<size_t>(4 + i)];
            v(i) = vals[static_cast<size_t>(4 + dim + i)];
            m(i) = vals[static_cast<size_t>(4 + 2 * dim + i)];
        }
        traj.a.push_back(a);
        traj.t.push_back(traj.t.back() + a);
        traj.S.push_back(static_cast<int>(vals[3]));
        traj.X.push_back(x);
        traj.V.push_back(v);
        traj.M.push_back(m);
    }
    if (traj.a.empty()) throw std::runtime_error("trajectory file has no rows: " + path);
    // X_N from the recorded update identity of the last step.
    traj.X.push_back(traj.X.back() + traj.a.back() * (traj.V.back() + traj.M.back()));
    return traj;
}

}  // namespace sri
