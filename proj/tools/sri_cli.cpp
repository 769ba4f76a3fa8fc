#include "sri/apt.hpp"
#include "sri/config.hpp"
#include "sri/dynamics.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <fstream>
#include <iostream>

using namespace sri;

namespace {

constexpr const char* kVersion = "0.1.0";

// exit codes: 0 ok, 2 validation, 3 assumption guard, 4 numerical failure
constexpr int kExitValidation = 2;
constexpr int kExitAssumption = 3;
constexpr int kExitNumerical = 4;

ExperimentConfig load(const std::string& config_path, const std::string& preset,
                      std::optional<std::uint64_t> seed_override) {
    if (config_path.empty() == preset.empty())
        throw ConfigError("provide exactly one of --config or --preset");
    std::filesystem::path path = preset.empty() ? std::filesystem::path(config_path)
                                                : find_preset(preset);
    ExperimentConfig cfg = load_config(path);
    if (seed_override) cfg.seed = *seed_override;
    return cfg;
}

void append_event(const std::filesystem::path& out_dir, const json& event) {
    std::ofstream f(out_dir / "events.jsonl", std::ios::app);
    f << event.dump() << "\n";
}

void write_manifest(const std::filesystem::path& out_dir, const ExperimentConfig& cfg,
                    const std::vector<std::string>& outputs) {
    char hash_hex[32];
    std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                  static_cast<unsigned long long>(config_hash(cfg)));
    json manifest = {
        {"config_hash", hash_hex},
        {"seed", cfg.seed},
        {"n_steps", cfg.n_steps},
        {"version", kVersion},
        {"timestamp", std::chrono::duration_cast<std::chrono::seconds>(
                          std::chrono::system_clock::now().time_since_epoch())
                          .count()},
        {"outputs", outputs},
    };
    std::ofstream f(out_dir / "manifest.json");
    f << manifest.dump(2) << "\n";
}

int cmd_run(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::filesystem::remove(out_dir / "events.jsonl");
    Experiment exp = build_experiment(cfg);
    append_event(out_dir, {{"event", "run_start"}, {"seed", cfg.seed}, {"n_steps", cfg.n_steps}});

    RunOptions opts;
    opts.n_steps = cfg.n_steps;
    opts.seed = cfg.seed;
    opts.blowup_bound = cfg.blowup_bound;
    Trajectory traj =
        run(exp.drift, exp.kernel, exp.schedule, exp.noise, exp.policy, exp.x0, cfg.s0, opts);

    write_trajectory_csv(traj, (out_dir / "trajectory.csv").string());
    {
        std::ofstream f(out_dir / "config.json");
        f << dump_config(cfg).dump(2) << "\n";
    }
    A5Report a5 = check_A5(traj, cfg.blowup_bound);
    append_event(out_dir, {{"event", "run_end"},
                           {"max_norm", a5.max_norm},
                           {"horizon", traj.horizon()}});
    write_manifest(out_dir, cfg, {"trajectory.csv", "config.json", "events.jsonl"});
    std::cout << "run: " << cfg.n_steps << " steps, horizon " << traj.horizon() << ", max |X| "
              << a5.max_norm << "\n";
    return 0;
}

int cmd_check(const ExperimentConfig& cfg) {
    Experiment exp = build_experiment(cfg);
    bool hard_fail = false;
    auto verdict = [&](const std::string& name, bool pass, bool warn_only,
                       const std::string& detail) {
        const char* tag = pass ? "pass" : (warn_only ? "warn" : "FAIL");
        if (!pass && !warn_only) hard_fail = true;
        std::cout << name << ": " << tag;
        if (!detail.empty()) std::cout << "  (" << detail << ")";
        std::cout << "\n";
    };

    // A1: growth + sampled closed graph around x0
    std::vector<Vec> xs;
    Rng rng(cfg.seed + 17);
    std::normal_distribution<double> gauss(0.0, 2.0);
    for (int i = 0; i < 50; ++i) {
        Vec x(cfg.dim);
        for (int k = 0; k < cfg.dim; ++k) x(k) = gauss(rng);
        xs.push_back(x);
    }
    GrowthReport growth = check_growth(exp.drift, xs);
    verdict("A1(ii) growth", growth.pass, false,
            "K=" + std::to_string(exp.drift.growth_K) + ", " +
                std::to_string(growth.violations.size()) + " violations");
    ClosedGraphReport cg =
        check_closed_graph(exp.drift, Eigen::Map<const Vec>(cfg.x0.data(), cfg.dim), cfg.s0,
                           {1e-1, 1e-2, 1e-3}, 20, cfg.seed + 23);
    verdict("A1(iii) closed graph (sampled)", cg.pass, true,
            "defects " + std::to_string(cg.defects.front()) + " -> " +
                std::to_string(cg.defects.back()));

    // A2: kernel rows at x0
    bool rows_ok = true;
    try {
        Mat P = exp.kernel.effective_matrix(Eigen::Map<const Vec>(cfg.x0.data(), cfg.dim));
        for (int s = 0; s < P.rows(); ++s)
            if (!is_distribution(P.row(s).transpose(), 1e-9)) rows_ok = false;
    } catch (const std::exception&) {
        rows_ok = false;
    }
    verdict("A2 kernel rows", rows_ok, false, "");

    A3Report a3 = check_A3(exp.schedule, 100000);
    verdict("A3 step schedule", a3.pass(), false,
            "gamma=" + std::to_string(cfg.gamma) +
                (a3.square_summable ? "" : ", not square-summable") +
                (a3.divergent ? "" : ", not divergent"));

    // A4/A5 on a short probe run
    RunOptions opts;
    opts.n_steps = std::min<long>(cfg.n_steps, 20000);
    opts.seed = cfg.seed;
    opts.blowup_bound = cfg.blowup_bound;
    try {
        Trajectory probe =
            run(exp.drift, exp.kernel, exp.schedule, exp.noise, exp.policy, exp.x0, cfg.s0, opts);
        A4Series a4 = check_A4(probe, 1.0);
        bool zero_noise = !a4.g.empty() && a4.g.back() <= 1e-14 && a4.g.front() <= 1e-14;
        verdict("A4 noise trend", zero_noise || a4.decreasing_trend, true,
                a4.g.empty() ? "no full window"
                             : "g " + std::to_string(a4.g.front()) + " -> " +
                                   std::to_string(a4.g.back()));
        A5Report a5 = check_A5(probe, cfg.blowup_bound);
        verdict("A5 boundedness", !a5.guard_triggered, false,
                "max |X| = " + std::to_string(a5.max_norm));
    } catch (const StabilityViolation& e) {
        verdict("A5 boundedness", false, false, e.what());
    }
    return hard_fail ? kExitAssumption : 0;
}

int cmd_analyze(const ExperimentConfig& cfg, const std::filesystem::path& traj_path,
                const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    Experiment exp = build_experiment(cfg);
    AveragedMap am(exp.drift, exp.kernel);
    Trajectory traj = read_trajectory_csv(traj_path.string());
    std::vector<std::string> outputs;

    if (cfg.apt) {
        std::vector<Vec> dirs = direction_grid(cfg.dim, default_direction_count(cfg.dim));
        AptSeries series = apt_statistic(traj, am, cfg.apt->T, cfg.apt->t_grid, cfg.apt->dt, dirs);
        write_apt_csv(series, (out_dir / "apt.csv").string());
        outputs.push_back("apt.csv");
    }
    if (cfg.limit_set) {
        LimitSetEstimate est = limit_set_estimate(traj, cfg.limit_set->tail_fraction);
        json summary = {{"n_tail", est.tail.size()},
                        {"first_index", est.first_index},
                        {"diameter", est.diameter},
                        {"mean", std::vector<double>(est.mean.data(), est.mean.data() + est.mean.size())}};
        if (cfg.attractor) {
            ConvexBody A = ConvexBody::from_points(cfg.attractor->generators, cfg.attractor->radius);
            summary["containment"] = attractor_containment(est, A, cfg.attractor->eps);
            summary["containment_eps"] = cfg.attractor->eps;
        }
        std::ofstream f(out_dir / "limit_set.json");
        f << summary.dump(2) << "\n";
        outputs.push_back("limit_set.json");
    }
    if (cfg.support_dump) {
        int n_dirs = cfg.support_dump->n_dirs > 0 ? cfg.support_dump->n_dirs
                                                  : default_direction_count(cfg.dim);
        std::vector<Vec> dirs = direction_grid(cfg.dim, n_dirs);
        std::FILE* f = std::fopen((out_dir / "hhat_support.csv").string().c_str(), "w");
        if (!f) throw std::runtime_error("cannot open hhat_support.csv");
        std::fprintf(f, "x_index,dir_index,support\n");
        for (size_t xi = 0; xi < cfg.support_dump->x_values.size(); ++xi)
            for (size_t di = 0; di < dirs.size(); ++di)
                std::fprintf(f, "%zu,%zu,%.17g\n", xi, di,
                             am.hhat_support(cfg.support_dump->x_values[xi], dirs[di]));
        std::fclose(f);
        outputs.push_back("hhat_support.csv");
    }
    write_manifest(out_dir, cfg, outputs);
    std::cout << "analyze: wrote " << outputs.size() << " artifact(s) to " << out_dir << "\n";
    return 0;
}

int cmd_sweep(ExperimentConfig cfg, int n_seeds, const std::filesystem::path& out_dir) {
    if (n_seeds < 1) throw ConfigError("--seeds must be >= 1");
    std::uint64_t base = cfg.seed;
    for (int i = 0; i < n_seeds; ++i) {
        cfg.seed = base + static_cast<std::uint64_t>(i);
        int rc = cmd_run(cfg, out_dir / ("seed_" + std::to_string(cfg.seed)));
        if (rc != 0) return rc;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stochastic recursive inclusion toolkit"};
    app.require_subcommand(1);

    std::string config_path, preset, out = "out", traj_file;
    std::optional<std::uint64_t> seed;
    int n_seeds = 1;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "experiment config JSON");
        sub->add_option("--preset", preset, "named preset");
        sub->add_option("--seed", seed, "seed override");
        sub->add_option("--out", out, "output directory");
    };
    CLI::App* c_run = app.add_subcommand("run", "run the recursion and write artifacts");
    add_common(c_run);
    CLI::App* c_check = app.add_subcommand("check", "validate assumptions");
    add_common(c_check);
    CLI::App* c_analyze = app.add_subcommand("analyze", "trajectory analyses");
    add_common(c_analyze);
    c_analyze->add_option("--traj", traj_file, "trajectory.csv from a run")->required();
    CLI::App* c_sweep = app.add_subcommand("sweep", "run over consecutive seeds");
    add_common(c_sweep);
    c_sweep->add_option("--seeds", n_seeds, "number of seeds");

    CLI11_PARSE(app, argc, argv);

    try {
        ExperimentConfig cfg = load(config_path, preset, seed);
        if (c_run->parsed()) return cmd_run(cfg, out);
        if (c_check->parsed()) return cmd_check(cfg);
        if (c_analyze->parsed()) return cmd_analyze(cfg, traj_file, out);
        if (c_sweep->parsed()) return cmd_sweep(cfg, n_seeds, out);
    } catch (const ConfigError& e) {
        std::cerr << "{\"error\":\"validation\",\"message\":\"" << e.what() << "\"}\n";
        return kExitValidation;
    } catch (const StabilityViolation& e) {
        std::cerr << "{\"error\":\"assumption_guard\",\"message\":\"" << e.what() << "\"}\n";
        return kExitAssumption;
    } catch (const std::exception& e) {
        std::cerr << "{\"error\":\"numerical\",\"message\":\"" << e.what() << "\"}\n";
        return kExitNumerical;
    }
    return 0;
}
