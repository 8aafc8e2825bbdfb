#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "ptgrad/ladder.hpp"
#include "ptgrad/rewards.hpp"
#include "ptgrad/target.hpp"

namespace ptgrad {

/// Configuration problem attributable to a specific key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& key, const std::string& what)
        : std::runtime_error("config error: " + key + ": " + what), key_(key) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

enum class TargetKind { gaussian_mixture, eggbox, rosenbrock };
enum class AdapterKind { policy_gradient, vousden, geometric };

struct TargetConfig {
    TargetKind kind = TargetKind::eggbox;
    std::size_t dim = 0;           // 0 = kind-specific default
    std::uint64_t seed = 0;        // mixture generation seed
    std::size_t n = 10;            // mixture components
    bool sigma_is_stddev = false;  // read mixture scales as std deviations
    double beta_power = 1000.0;    // eggbox / rosenbrock exponent
    double a = 4.0, b = 1.0, c = 0.1;
    bool classic_first_term = false;
};

struct ScheduleConfig {
    std::uint64_t L = 4000;            // policy iterations
    std::uint64_t N = 500;             // PT steps per observation window
    std::uint64_t final_samples = 10000;  // sampling steps at the frozen ladder
};

struct PgConfig {
    double sigma = 0.2;
    double alpha = 0.01;
    double epsilon_tau = 0.0;  // 0 = L / 4
    double grad_clip = 1.0;
    std::size_t buffer_len = 500;
    double d_min = 0.01;
    double d_max = 10.0;
    double theta0 = 1.0;
};

struct VousdenConfig {
    double kappa0 = 1.0;
    double t0 = 1000.0;
};

struct CorrelateConfig {
    std::size_t ladder_count = 0;
    std::uint64_t steps = 1000;
};

struct ExperimentConfig {
    TargetConfig target;
    AdapterKind adapter = AdapterKind::policy_gradient;
    RewardKind reward = RewardKind::swap_mean_distance;
    std::size_t M = 15;
    std::size_t walkers = 16;
    double stretch_a = 2.0;
    TopMode top_mode = TopMode::finite;
    std::size_t m = 50;  // history ring capacity
    ScheduleConfig schedule;
    PgConfig pg;
    VousdenConfig vousden;
    double geometric_beta_min = 0.01;
    CorrelateConfig correlate;
    std::size_t trials = 1;
    std::uint64_t seed = 0;
    std::string out_dir = "out";
    std::uint64_t thinning = 100;
    int threads = 1;

    std::size_t target_dim() const {
        if (target.dim != 0) return target.dim;
        switch (target.kind) {
            case TargetKind::gaussian_mixture: return 8;
            case TargetKind::eggbox: return 5;
            case TargetKind::rosenbrock: return 2;
        }
        return 0;
    }

    /// Dimension of the policy action space for the configured top mode.
    std::size_t action_dim() const { return top_mode == TopMode::finite ? M - 1 : M - 2; }

    double epsilon_tau_effective() const {
        if (pg.epsilon_tau > 0.0) return pg.epsilon_tau;
        return std::max(1.0, static_cast<double>(schedule.L) / 4.0);
    }

    DiffBounds bounds() const { return DiffBounds{pg.d_min, pg.d_max}; }

    std::shared_ptr<const Target> make_target() const {
        switch (target.kind) {
            case TargetKind::gaussian_mixture:
                return make_gaussian_mixture(target.seed, target.n, target_dim(), target.sigma_is_stddev);
            case TargetKind::eggbox:
                return std::make_shared<EggBox>(EggBoxSpec{target_dim(), target.beta_power});
            case TargetKind::rosenbrock:
                return std::make_shared<Rosenbrock>(
                    RosenbrockSpec{target.a, target.b, target.c, target.beta_power, target.classic_first_term});
        }
        throw ConfigError("target.kind", "unknown target kind");
    }
};

namespace detail {

template <typename T>
T get_or(const nlohmann::json& j, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(key, "has the wrong type");
    }
}

template <typename T>
T get_scoped(const nlohmann::json& j, const std::string& scope, const std::string& key, T fallback) {
    if (!j.contains(scope)) return fallback;
    const auto& sub = j.at(scope);
    if (!sub.is_object()) throw ConfigError(scope, "must be an object");
    if (!sub.contains(key)) return fallback;
    try {
        return sub.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(scope + "." + key, "has the wrong type");
    }
}

}  // namespace detail

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    using detail::get_or;
    using detail::get_scoped;
    ExperimentConfig cfg;

    if (!j.contains("target") || !j.at("target").is_object())
        throw ConfigError("target", "required object is missing");
    const std::string tkind = get_scoped<std::string>(j, "target", "kind", "");
    if (tkind == "gaussian_mixture") cfg.target.kind = TargetKind::gaussian_mixture;
    else if (tkind == "eggbox") cfg.target.kind = TargetKind::eggbox;
    else if (tkind == "rosenbrock") cfg.target.kind = TargetKind::rosenbrock;
    else throw ConfigError("target.kind", "unknown value \"" + tkind +
                           "\" (expected gaussian_mixture|eggbox|rosenbrock)");
    cfg.target.dim = get_scoped<std::size_t>(j, "target", "dim", 0);
    cfg.target.seed = get_scoped<std::uint64_t>(j, "target", "seed", 0);
    cfg.target.n = get_scoped<std::size_t>(j, "target", "n", 10);
    cfg.target.sigma_is_stddev = get_scoped<bool>(j, "target", "sigma_is_stddev", false);
    cfg.target.beta_power = get_scoped<double>(j, "target", "beta", 1000.0);
    cfg.target.a = get_scoped<double>(j, "target", "a", 4.0);
    cfg.target.b = get_scoped<double>(j, "target", "b", 1.0);
    cfg.target.c = get_scoped<double>(j, "target", "c", 0.1);
    cfg.target.classic_first_term = get_scoped<bool>(j, "target", "classic_first_term", false);
    if (cfg.target.kind == TargetKind::rosenbrock && cfg.target.dim != 0 && cfg.target.dim != 2)
        throw ConfigError("target.dim", "rosenbrock is two-dimensional");
    if (cfg.target.n == 0) throw ConfigError("target.n", "must be >= 1");
    if (!(cfg.target.beta_power > 0.0)) throw ConfigError("target.beta", "must be positive");
    if (!(cfg.target.c > 0.0)) throw ConfigError("target.c", "must be positive");

    const std::string adapter = get_or<std::string>(j, "adapter", "policy_gradient");
    if (adapter == "policy_gradient") cfg.adapter = AdapterKind::policy_gradient;
    else if (adapter == "vousden") cfg.adapter = AdapterKind::vousden;
    else if (adapter == "geometric") cfg.adapter = AdapterKind::geometric;
    else throw ConfigError("adapter", "unknown value \"" + adapter +
                           "\" (expected policy_gradient|vousden|geometric)");

    const std::string reward = get_or<std::string>(j, "reward", "swap_mean_distance");
    if (reward == "swap_mean_distance") cfg.reward = RewardKind::swap_mean_distance;
    else if (reward == "esjd") cfg.reward = RewardKind::esjd;
    else if (reward == "neg_acc_std") cfg.reward = RewardKind::neg_acc_std;
    else throw ConfigError("reward", "unknown value \"" + reward +
                           "\" (expected swap_mean_distance|esjd|neg_acc_std)");

    const std::string top = get_or<std::string>(j, "top_mode", "finite");
    if (top == "finite") cfg.top_mode = TopMode::finite;
    else if (top == "infinite") cfg.top_mode = TopMode::infinite;
    else throw ConfigError("top_mode", "unknown value \"" + top + "\" (expected finite|infinite)");

    cfg.M = get_or<std::size_t>(j, "M", 15);
    cfg.walkers = get_or<std::size_t>(j, "walkers", 16);
    cfg.stretch_a = get_or<double>(j, "stretch_a", 2.0);
    cfg.m = get_or<std::size_t>(j, "m", 50);
    cfg.trials = get_or<std::size_t>(j, "trials", 1);
    cfg.seed = get_or<std::uint64_t>(j, "seed", 0);
    cfg.out_dir = get_or<std::string>(j, "out", "out");
    cfg.thinning = get_or<std::uint64_t>(j, "thinning", 100);
    cfg.threads = get_or<int>(j, "threads", 1);

    cfg.schedule.L = get_scoped<std::uint64_t>(j, "schedule", "L", 4000);
    cfg.schedule.N = get_scoped<std::uint64_t>(j, "schedule", "N", 500);
    cfg.schedule.final_samples = get_scoped<std::uint64_t>(j, "schedule", "final_samples", 10000);

    cfg.pg.sigma = get_scoped<double>(j, "pg", "sigma", 0.2);
    cfg.pg.alpha = get_scoped<double>(j, "pg", "alpha", 0.01);
    cfg.pg.epsilon_tau = get_scoped<double>(j, "pg", "epsilon_tau", 0.0);
    cfg.pg.grad_clip = get_scoped<double>(j, "pg", "grad_clip", 1.0);
    cfg.pg.buffer_len = get_scoped<std::size_t>(j, "pg", "buffer_len", 500);
    cfg.pg.d_min = get_scoped<double>(j, "pg", "d_min", 0.01);
    cfg.pg.d_max = get_scoped<double>(j, "pg", "d_max", 10.0);
    cfg.pg.theta0 = get_scoped<double>(j, "pg", "theta0", 1.0);

    cfg.vousden.kappa0 = get_scoped<double>(j, "vousden", "kappa0", 1.0);
    cfg.vousden.t0 = get_scoped<double>(j, "vousden", "t0", 1000.0);
    cfg.geometric_beta_min = get_scoped<double>(j, "geometric", "beta_min", 0.01);

    cfg.correlate.ladder_count = get_scoped<std::size_t>(j, "correlate", "ladder_count", 0);
    cfg.correlate.steps = get_scoped<std::uint64_t>(j, "correlate", "steps", 1000);

    // Cross-field validation.
    if (cfg.M < 2) throw ConfigError("M", "must be >= 2");
    if (cfg.top_mode == TopMode::infinite && cfg.M < 3)
        throw ConfigError("M", "must be >= 3 with top_mode infinite");
    if (cfg.walkers < 2) throw ConfigError("walkers", "must be >= 2");
    if (!(cfg.stretch_a > 1.0)) throw ConfigError("stretch_a", "must be > 1");
    if (cfg.m == 0) throw ConfigError("m", "must be >= 1");
    if (cfg.trials == 0) throw ConfigError("trials", "must be >= 1");
    if (cfg.thinning == 0) throw ConfigError("thinning", "must be >= 1");
    if (cfg.threads < 1) throw ConfigError("threads", "must be >= 1");
    if (cfg.schedule.N == 0) throw ConfigError("schedule.N", "must be >= 1");
    if (cfg.schedule.final_samples != 0 && cfg.schedule.final_samples < 50)
        throw ConfigError("schedule.final_samples", "must be 0 (skip) or >= 50");
    if (!(cfg.pg.sigma > 0.0)) throw ConfigError("pg.sigma", "must be positive");
    if (!(cfg.pg.alpha > 0.0)) throw ConfigError("pg.alpha", "must be positive");
    if (cfg.pg.epsilon_tau < 0.0) throw ConfigError("pg.epsilon_tau", "must be >= 0");
    if (!(cfg.pg.grad_clip > 0.0)) throw ConfigError("pg.grad_clip", "must be positive");
    if (cfg.pg.buffer_len == 0) throw ConfigError("pg.buffer_len", "must be >= 1");
    if (!(cfg.pg.d_min > 0.0 && cfg.pg.d_min < cfg.pg.d_max))
        throw ConfigError("pg.d_min", "need 0 < d_min < d_max");
    if (!(cfg.pg.theta0 >= cfg.pg.d_min && cfg.pg.theta0 <= cfg.pg.d_max))
        throw ConfigError("pg.theta0", "must lie in [d_min, d_max]");
    if (!(cfg.vousden.kappa0 > 0.0)) throw ConfigError("vousden.kappa0", "must be positive");
    if (!(cfg.vousden.t0 > 0.0)) throw ConfigError("vousden.t0", "must be positive");
    if (!(cfg.geometric_beta_min > 0.0 && cfg.geometric_beta_min < 1.0))
        throw ConfigError("geometric.beta_min", "must be in (0, 1)");
    return cfg;
}

/// Canonical JSON image of the effective configuration (after overrides);
/// the config hash is computed from this.
inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json t;
    switch (cfg.target.kind) {
        case TargetKind::gaussian_mixture: t["kind"] = "gaussian_mixture"; break;
        case TargetKind::eggbox: t["kind"] = "eggbox"; break;
        case TargetKind::rosenbrock: t["kind"] = "rosenbrock"; break;
    }
    t["dim"] = cfg.target_dim();
    t["seed"] = cfg.target.seed;
    t["n"] = cfg.target.n;
    t["sigma_is_stddev"] = cfg.target.sigma_is_stddev;
    t["beta"] = cfg.target.beta_power;
    t["a"] = cfg.target.a;
    t["b"] = cfg.target.b;
    t["c"] = cfg.target.c;
    t["classic_first_term"] = cfg.target.classic_first_term;

    nlohmann::json j;
    j["target"] = t;
    j["adapter"] = cfg.adapter == AdapterKind::policy_gradient ? "policy_gradient"
                  : cfg.adapter == AdapterKind::vousden        ? "vousden"
                                                               : "geometric";
    j["reward"] = reward_kind_name(cfg.reward);
    j["top_mode"] = cfg.top_mode == TopMode::finite ? "finite" : "infinite";
    j["M"] = cfg.M;
    j["walkers"] = cfg.walkers;
    j["stretch_a"] = cfg.stretch_a;
    j["m"] = cfg.m;
    j["schedule"] = {{"L", cfg.schedule.L}, {"N", cfg.schedule.N}, {"final_samples", cfg.schedule.final_samples}};
    j["pg"] = {{"sigma", cfg.pg.sigma},       {"alpha", cfg.pg.alpha},
               {"epsilon_tau", cfg.pg.epsilon_tau}, {"grad_clip", cfg.pg.grad_clip},
               {"buffer_len", cfg.pg.buffer_len},   {"d_min", cfg.pg.d_min},
               {"d_max", cfg.pg.d_max},             {"theta0", cfg.pg.theta0}};
    j["vousden"] = {{"kappa0", cfg.vousden.kappa0}, {"t0", cfg.vousden.t0}};
    j["geometric"] = {{"beta_min", cfg.geometric_beta_min}};
    j["correlate"] = {{"ladder_count", cfg.correlate.ladder_count}, {"steps", cfg.correlate.steps}};
    j["trials"] = cfg.trials;
    j["seed"] = cfg.seed;
    j["out"] = cfg.out_dir;
    j["thinning"] = cfg.thinning;
    return j;
}

/// FNV-1a over the canonical dump; stable across runs and platforms.
/// Operational fields (output directory, trial batch size) are excluded so
/// trials of the same experiment can be joined wherever they were written.
inline std::string config_hash(const ExperimentConfig& cfg) {
    nlohmann::json j = config_to_json(cfg);
    j.erase("out");
    j.erase("trials");
    const std::string dump = j.dump();
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("config file " + path + " is not valid JSON: " + e.what());
    }
    if (!j.is_object()) throw std::runtime_error("config file " + path + " must hold a JSON object");
    return config_from_json(j);
}

}  // namespace ptgrad
