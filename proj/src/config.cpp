#include "sri/config.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>

#ifndef SRI_PRESET_DIR
#define SRI_PRESET_DIR ""
#endif

namespace sri {

namespace {

Vec to_vec(const std::vector<double>& v) {
    return Eigen::Map<const Vec>(v.data(), static_cast<long>(v.size()));
}

template <typename T>
T field(const json& j, const std::string& key, const std::string& ctx) {
    if (!j.contains(key)) throw ConfigError("missing field: " + ctx + "." + key);
    try {
        return j.at(key).get<T>();
    } catch (const std::exception&) {
        throw ConfigError("bad value for field: " + ctx + "." + key);
    }
}

template <typename T>
T field_or(const json& j, const std::string& key, T def) {
    if (!j.contains(key)) return def;
    return j.at(key).get<T>();
}

}  // namespace

ExperimentConfig parse_config(const json& j, const std::filesystem::path& base_dir) {
    ExperimentConfig c;
    c.base_dir = base_dir;
    c.dim = field<int>(j, "dim", "config");
    c.n_states = field<int>(j, "n_states", "config");
    if (c.dim < 1) throw ConfigError("config.dim must be >= 1");
    if (c.n_states < 1) throw ConfigError("config.n_states must be >= 1");

    const json& drift = j.contains("drift") ? j.at("drift") : throw ConfigError("missing field: config.drift");
    c.drift_name = field<std::string>(drift, "name", "drift");
    c.drift_params = field_or<json>(drift, "params", json::object());

    const json& kernel = j.contains("kernel") ? j.at("kernel") : throw ConfigError("missing field: config.kernel");
    c.kernel_variant = field<std::string>(kernel, "variant", "kernel");
    c.kernel_matrix_file = field_or<std::string>(kernel, "matrix_file", "");
    c.control_matrix_files = field_or<std::vector<std::string>>(kernel, "control_matrix_files", {});
    c.policy_file = field_or<std::string>(kernel, "policy_file", "");
    c.kernel_params = field_or<json>(kernel, "params", json::object());

    const json& sched = j.contains("schedule") ? j.at("schedule") : throw ConfigError("missing field: config.schedule");
    c.a0 = field<double>(sched, "a0", "schedule");
    c.gamma = field<double>(sched, "gamma", "schedule");
    if (c.a0 <= 0.0 || c.a0 > 1.0) throw ConfigError("schedule.a0 must satisfy 0 < a0 <= 1");
    if (c.gamma <= 0.0) throw ConfigError("schedule.gamma must be positive");

    const json& noise = field_or<json>(j, "noise", json{{"kind", "none"}});
    c.noise_kind = field<std::string>(noise, "kind", "noise");
    c.noise_bound = field_or<double>(noise, "bound", 0.0);
    c.noise_sigma = field_or<double>(noise, "sigma", 0.0);
    c.noise_value = field_or<std::vector<double>>(noise, "value", {});
    if (c.noise_kind != "none" && c.noise_kind != "bounded_iid" && c.noise_kind != "gaussian_md" &&
        c.noise_kind != "constant")
        throw ConfigError("noise.kind must be one of none|bounded_iid|gaussian_md|constant");

    const json& policy = field_or<json>(j, "policy", json{{"kind", "least_norm"}});
    c.policy_kind = field<std::string>(policy, "kind", "policy");
    c.policy_target = field_or<std::vector<double>>(policy, "target", {});
    if (c.policy_kind != "random_vertex" && c.policy_kind != "least_norm" &&
        c.policy_kind != "toward_target" && c.policy_kind != "singleton")
        throw ConfigError("policy.kind must be one of random_vertex|least_norm|toward_target|singleton");

    c.x0 = field<std::vector<double>>(j, "x0", "config");
    if (static_cast<int>(c.x0.size()) != c.dim) throw ConfigError("config.x0 length must equal dim");
    c.s0 = field_or<int>(j, "s0", 0);
    if (c.s0 < 0 || c.s0 >= c.n_states) throw ConfigError("config.s0 out of range");
    c.n_steps = field<long>(j, "n_steps", "config");
    if (c.n_steps < 1) throw ConfigError("config.n_steps must be >= 1");
    c.seed = field_or<std::uint64_t>(j, "seed", 0);
    c.blowup_bound = field_or<double>(j, "blowup_bound", 1e6);

    if (j.contains("analysis")) {
        const json& a = j.at("analysis");
        if (a.contains("apt")) {
            AptAnalysisConfig ac;
            ac.T = field<double>(a.at("apt"), "T", "analysis.apt");
            ac.dt = field<double>(a.at("apt"), "dt", "analysis.apt");
            ac.t_grid = field<std::vector<double>>(a.at("apt"), "t_grid", "analysis.apt");
            if (ac.T <= 0.0 || ac.dt <= 0.0) throw ConfigError("analysis.apt.T and dt must be positive");
            c.apt = ac;
        }
        if (a.contains("limit_set")) {
            LimitSetAnalysisConfig lc;
            lc.tail_fraction = field<double>(a.at("limit_set"), "tail_fraction", "analysis.limit_set");
            if (lc.tail_fraction <= 0.0 || lc.tail_fraction >= 1.0)
                throw ConfigError("analysis.limit_set.tail_fraction must be in (0,1)");
            c.limit_set = lc;
        }
        if (a.contains("attractor")) {
            AttractorAnalysisConfig at;
            auto gens = field<std::vector<std::vector<double>>>(a.at("attractor"), "generators",
                                                                "analysis.attractor");
            for (auto& g : gens) {
                if (static_cast<int>(g.size()) != c.dim)
                    throw ConfigError("analysis.attractor.generators entries must have length dim");
                at.generators.push_back(to_vec(g));
            }
            at.radius = field_or<double>(a.at("attractor"), "radius", 0.0);
            at.eps = field<double>(a.at("attractor"), "eps", "analysis.attractor");
            if (at.radius < 0.0 || at.eps < 0.0)
                throw ConfigError("analysis.attractor.radius and eps must be nonnegative");
            c.attractor = at;
        }
        if (a.contains("support_dump")) {
            SupportDumpConfig sd;
            auto xs = field<std::vector<std::vector<double>>>(a.at("support_dump"), "x_values",
                                                              "analysis.support_dump");
            for (auto& x : xs) {
                if (static_cast<int>(x.size()) != c.dim)
                    throw ConfigError("analysis.support_dump.x_values entries must have length dim");
                sd.x_values.push_back(to_vec(x));
            }
            sd.n_dirs = field_or<int>(a.at("support_dump"), "n_dirs", 0);
            c.support_dump = sd;
        }
    }
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("config parse error in " + path.string() + ": " + e.what());
    }
    return parse_config(j, path.parent_path());
}

json dump_config(const ExperimentConfig& c) {
    json j;
    j["dim"] = c.dim;
    j["n_states"] = c.n_states;
    j["drift"] = {{"name", c.drift_name}, {"params", c.drift_params}};
    json kernel = {{"variant", c.kernel_variant}};
    if (!c.kernel_matrix_file.empty()) kernel["matrix_file"] = c.kernel_matrix_file;
    if (!c.control_matrix_files.empty()) kernel["control_matrix_files"] = c.control_matrix_files;
    if (!c.policy_file.empty()) kernel["policy_file"] = c.policy_file;
    if (!c.kernel_params.empty()) kernel["params"] = c.kernel_params;
    j["kernel"] = kernel;
    j["schedule"] = {{"a0", c.a0}, {"gamma", c.gamma}};
    json noise = {{"kind", c.noise_kind}};
    if (c.noise_kind == "bounded_iid") noise["bound"] = c.noise_bound;
    if (c.noise_kind == "gaussian_md") noise["sigma"] = c.noise_sigma;
    if (c.noise_kind == "constant") noise["value"] = c.noise_value;
    j["noise"] = noise;
    json policy = {{"kind", c.policy_kind}};
    if (!c.policy_target.empty()) policy["target"] = c.policy_target;
    j["policy"] = policy;
    j["x0"] = c.x0;
    j["s0"] = c.s0;
    j["n_steps"] = c.n_steps;
    j["seed"] = c.seed;
    j["blowup_bound"] = c.blowup_bound;
    json analysis = json::object();
    if (c.apt) analysis["apt"] = {{"T", c.apt->T}, {"dt", c.apt->dt}, {"t_grid", c.apt->t_grid}};
    if (c.limit_set) analysis["limit_set"] = {{"tail_fraction", c.limit_set->tail_fraction}};
    if (c.attractor) {
        std::vector<std::vector<double>> gens;
        for (const Vec& g : c.attractor->generators)
            gens.emplace_back(g.data(), g.data() + g.size());
        analysis["attractor"] = {{"generators", gens}, {"radius", c.attractor->radius}, {"eps", c.attractor->eps}};
    }
    if (c.support_dump) {
        std::vector<std::vector<double>> xs;
        for (const Vec& x : c.support_dump->x_values) xs.emplace_back(x.data(), x.data() + x.size());
        analysis["support_dump"] = {{"x_values", xs}, {"n_dirs", c.support_dump->n_dirs}};
    }
    if (!analysis.empty()) j["analysis"] = analysis;
    return j;
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
    std::string s = dump_config(cfg).dump();
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    return h;
}

namespace {

std::filesystem::path resolve(const ExperimentConfig& cfg, const std::string& file) {
    std::filesystem::path p(file);
    if (!p.is_absolute()) p = cfg.base_dir / p;
    if (!std::filesystem::exists(p))
        throw ConfigError("referenced file does not exist: " + p.string());
    return p;
}

DriftMap build_drift(const ExperimentConfig& cfg) {
    const json& p = cfg.drift_params;
    const int d = cfg.dim;
    const int ns = cfg.n_states;

    auto per_state_offsets = [&](const json& params) {
        std::vector<Vec> b(static_cast<size_t>(ns), Vec::Zero(d));
        if (params.contains("b")) {
            auto rows = params.at("b").get<std::vector<std::vector<double>>>();
            if (static_cast<int>(rows.size()) != ns)
                throw ConfigError("drift.params.b must have one row per state");
            for (int s = 0; s < ns; ++s) {
                if (static_cast<int>(rows[static_cast<size_t>(s)].size()) != d)
                    throw ConfigError("drift.params.b rows must have length dim");
                b[static_cast<size_t>(s)] = to_vec(rows[static_cast<size_t>(s)]);
            }
        }
        return b;
    };

    if (cfg.drift_name == "linear" || cfg.drift_name == "approx_linear") {
        double scale = field_or<double>(p, "scale", -1.0);
        auto b = per_state_offsets(p);
        double max_b = 0.0;
        for (const Vec& bs : b) max_b = std::max(max_b, bs.norm());
        double K = field_or<double>(p, "K", std::max(std::abs(scale), max_b) + 1e-12);
        DriftMap base = singleton_map(
            [scale, b](const Vec& x, int s) -> Vec { return scale * x + b[static_cast<size_t>(s)]; }, K,
            d, ns);
        if (cfg.drift_name == "linear") return base;
        double eps = field<double>(p, "eps", "drift.params");
        if (eps < 0.0) throw ConfigError("drift.params.eps must be nonnegative");
        return approximate_drift(base, eps);
    }
    if (cfg.drift_name == "subgrad_abs") {
        if (d != 1) throw ConfigError("drift subgrad_abs requires dim = 1");
        auto theta = field<std::vector<double>>(p, "theta", "drift.params");
        if (static_cast<int>(theta.size()) != ns)
            throw ConfigError("drift.params.theta must have one entry per state");
        std::vector<std::vector<AffinePiece>> pieces;
        for (double th : theta) {
            Vec plus(1), minus(1);
            plus << 1.0;
            minus << -1.0;
            pieces.push_back({{plus, -th}, {minus, th}});
        }
        return max_affine_subgradient(pieces, field_or<double>(p, "tie_tol", 1e-9));
    }
    if (cfg.drift_name == "max_affine") {
        auto raw = field<std::vector<std::vector<std::vector<double>>>>(p, "pieces", "drift.params");
        if (static_cast<int>(raw.size()) != ns)
            throw ConfigError("drift.params.pieces must have one list per state");
        std::vector<std::vector<AffinePiece>> pieces;
        for (const auto& state_pieces : raw) {
            std::vector<AffinePiece> ps;
            for (const auto& piece : state_pieces) {
                if (static_cast<int>(piece.size()) != d + 1)
                    throw ConfigError("drift.params.pieces entries must be [a_0..a_{d-1}, b]");
                Vec a(d);
                for (int i = 0; i < d; ++i) a(i) = piece[static_cast<size_t>(i)];
                ps.push_back({a, piece.back()});
            }
            pieces.push_back(std::move(ps));
        }
        return max_affine_subgradient(pieces, field_or<double>(p, "tie_tol", 1e-9));
    }
    if (cfg.drift_name == "controlled_linear") {
        double scale = field_or<double>(p, "scale", -1.0);
        auto controls = field<std::vector<double>>(p, "controls", "drift.params");
        if (controls.empty()) throw ConfigError("drift.params.controls must be nonempty");
        auto b = per_state_offsets(p);
        double max_b = 0.0, max_z = 0.0;
        for (const Vec& bs : b) max_b = std::max(max_b, bs.norm());
        for (double z : controls) max_z = std::max(max_z, std::abs(z));
        double K = field_or<double>(p, "K", std::abs(scale) + max_b + max_z * std::sqrt(double(d)));
        return controlled_hull(
            [scale, controls, b, d](const Vec& x, int z, int s) -> Vec {
                return scale * x + b[static_cast<size_t>(s)] +
                       Vec::Constant(d, controls[static_cast<size_t>(z)]);
            },
            static_cast<int>(controls.size()), K, d, ns);
    }
    if (cfg.drift_name == "filippov_sign") {
        double eps = field_or<double>(p, "eps", 0.05);
        int n_samples = field_or<int>(p, "n_samples", 32);
        double mag = field_or<double>(p, "magnitude", 1.0);
        return filippov_envelope(
            [mag](const Vec& x, int) -> Vec {
                Vec v(x.size());
                for (long i = 0; i < x.size(); ++i) v(i) = x(i) > 0 ? -mag : (x(i) < 0 ? mag : 0.0);
                return v;
            },
            eps, n_samples, mag, d, ns, cfg.seed ^ 0xf111u);
    }
    if (cfg.drift_name == "expanding") {
        return singleton_map([](const Vec& x, int) -> Vec { return x; }, 1.0, d, ns);
    }
    if (cfg.drift_name == "zero") {
        return singleton_map([d](const Vec&, int) -> Vec { return Vec::Zero(d); }, 1e-12, d, ns);
    }
    throw ConfigError("unknown drift.name: " + cfg.drift_name);
}

MarkovKernel build_kernel(const ExperimentConfig& cfg) {
    if (cfg.kernel_variant == "iterate_independent") {
        Mat P;
        if (!cfg.kernel_matrix_file.empty()) {
            P = load_matrix(resolve(cfg, cfg.kernel_matrix_file).string());
        } else if (cfg.kernel_params.contains("matrix")) {
            auto rows = cfg.kernel_params.at("matrix").get<std::vector<std::vector<double>>>();
            P.resize(rows.size(), rows.empty() ? 0 : rows.front().size());
            for (size_t i = 0; i < rows.size(); ++i)
                for (size_t k = 0; k < rows[i].size(); ++k)
                    P(static_cast<long>(i), static_cast<long>(k)) = rows[i][k];
        } else {
            throw ConfigError("kernel: iterate_independent needs matrix_file or params.matrix");
        }
        if (P.rows() != cfg.n_states)
            throw ConfigError("kernel matrix size disagrees with n_states");
        return MarkovKernel::iterate_independent(P);
    }
    if (cfg.kernel_variant == "iterate_dependent") {
        std::string name = field_or<std::string>(cfg.kernel_params, "name", "");
        if (name == "logistic2") {
            if (cfg.n_states != 2) throw ConfigError("kernel logistic2 requires n_states = 2");
            double gain = field_or<double>(cfg.kernel_params, "gain", 1.0);
            return MarkovKernel::iterate_dependent(2, [gain](const Vec& x, int) -> Vec {
                double pr = 1.0 / (1.0 + std::exp(-gain * x(0)));
                Vec row(2);
                row << 1.0 - pr, pr;
                return row;
            });
        }
        throw ConfigError("kernel: unknown iterate_dependent builtin: " + name);
    }
    if (cfg.kernel_variant == "controlled") {
        if (cfg.control_matrix_files.empty())
            throw ConfigError("kernel: controlled needs control_matrix_files");
        if (cfg.policy_file.empty()) throw ConfigError("kernel: controlled needs policy_file");
        std::vector<Mat> per_control;
        for (const auto& f : cfg.control_matrix_files)
            per_control.push_back(load_matrix(resolve(cfg, f).string()));
        Mat policy = load_matrix(resolve(cfg, cfg.policy_file).string());
        if (per_control.front().rows() != cfg.n_states)
            throw ConfigError("kernel control matrices disagree with n_states");
        return MarkovKernel::controlled(std::move(per_control), std::move(policy));
    }
    throw ConfigError("kernel.variant must be iterate_independent|iterate_dependent|controlled");
}

}  // namespace

Experiment build_experiment(const ExperimentConfig& cfg) {
    Experiment e{build_drift(cfg),
                 build_kernel(cfg),
                 StepSchedule(cfg.a0, cfg.gamma),
                 NoiseModel::none(),
                 SelectionPolicy::least_norm(),
                 to_vec(cfg.x0)};
    if (cfg.noise_kind == "bounded_iid") {
        if (cfg.noise_bound < 0.0) throw ConfigError("noise.bound must be nonnegative");
        e.noise = NoiseModel::bounded_iid(cfg.noise_bound);
    } else if (cfg.noise_kind == "gaussian_md") {
        if (cfg.noise_sigma < 0.0) throw ConfigError("noise.sigma must be nonnegative");
        e.noise = NoiseModel::gaussian_md(cfg.noise_sigma);
    } else if (cfg.noise_kind == "constant") {
        if (static_cast<int>(cfg.noise_value.size()) != cfg.dim)
            throw ConfigError("noise.value must have length dim");
        e.noise = NoiseModel::constant(to_vec(cfg.noise_value));
    }
    if (cfg.policy_kind == "random_vertex") e.policy = SelectionPolicy::random_vertex();
    else if (cfg.policy_kind == "least_norm") e.policy = SelectionPolicy::least_norm();
    else if (cfg.policy_kind == "singleton") e.policy = SelectionPolicy::singleton();
    else if (cfg.policy_kind == "toward_target") {
        if (static_cast<int>(cfg.policy_target.size()) != cfg.dim)
            throw ConfigError("policy.target must have length dim");
        e.policy = SelectionPolicy::toward_target(to_vec(cfg.policy_target));
    }
    return e;
}

std::filesystem::path find_preset(const std::string& name) {
    std::vector<std::filesystem::path> roots;
    roots.emplace_back("presets");
    if (std::string(SRI_PRESET_DIR).size() > 0) roots.emplace_back(SRI_PRESET_DIR);
    for (const auto& root : roots) {
        auto p = root / (name + ".json");
        if (std::filesystem::exists(p)) return p;
    }
    throw ConfigError("preset not found: " + name);
}

}  // namespace sri
