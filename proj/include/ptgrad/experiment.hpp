#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ptgrad/config.hpp"
#include "ptgrad/diagnostics.hpp"
#include "ptgrad/ensemble.hpp"
#include "ptgrad/ladder.hpp"
#include "ptgrad/policy.hpp"
#include "ptgrad/record.hpp"
#include "ptgrad/rewards.hpp"
#include "ptgrad/rng.hpp"
#include "ptgrad/target.hpp"
#include "ptgrad/tempering.hpp"

namespace ptgrad {

inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt) {
    std::uint64_t s = base ^ (0xD1B54A32D192ED03ULL * (salt + 1));
    return splitmix64(s);
}

/// Runs one observation window of N PT steps; swap counters are reset first
/// so the window's statistics reflect the current ladder only.
inline WindowStats run_window(PtState& state, const Target& target, const StretchConfig& stretch,
                              std::uint64_t n_steps, SwapDistanceTracker& tracker, int threads) {
    state.reset_window();
    WindowStats stats;
    for (std::uint64_t n = 0; n < n_steps; ++n) {
        const auto records = pt_step(state, target, stretch, threads);
        for (const auto& rec : records) {
            if (rec.pair_index != 0) continue;
            stats.omega_sum += tracker.observe(rec, state.cold());
            ++stats.omega_count;
        }
        tracker.push_positions(state.cold());
    }
    stats.betas = state.ladder().betas;
    stats.rates = acceptance_rates(state);
    return stats;
}

/// Drives one trial: adaptation loop (policy gradient, Vousden, or a static
/// geometric ladder), then a sampling phase at the frozen final ladder. The
/// joint chain persists across policy iterations; it is never reset.
class TrialRunner {
public:
    TrialRunner(const ExperimentConfig& cfg, const Target& target, std::uint64_t trial_seed)
        : cfg_(cfg), target_(target), stretch_{cfg.stretch_a},
          state_(target, initial_ladder(cfg), cfg.walkers, mix_seed(trial_seed, kChainSalt)),
          tracker_(cfg.walkers, target.dim(), cfg.m),
          policy_rng_(Rng::stream(mix_seed(trial_seed, kPolicySalt), 1)) {
        record_.seed = trial_seed;
        tracker_.push_positions(state_.cold());
        if (cfg_.adapter == AdapterKind::policy_gradient) {
            PolicyConfig pc;
            pc.sigma = cfg_.pg.sigma;
            pc.alpha = cfg_.pg.alpha;
            pc.grad_clip = cfg_.pg.grad_clip;
            pc.buffer_len = cfg_.pg.buffer_len;
            pc.epsilon_tau = cfg_.epsilon_tau_effective();
            pc.bounds = cfg_.bounds();
            policy_.emplace(std::vector<double>(cfg_.action_dim(), cfg_.pg.theta0), pc);
        } else if (cfg_.adapter == AdapterKind::vousden) {
            vousden_.emplace(state_.ladder(), cfg_.vousden.kappa0, cfg_.vousden.t0);
        }
    }

    static TemperatureLadder initial_ladder(const ExperimentConfig& cfg) {
        if (cfg.adapter == AdapterKind::policy_gradient) {
            LogDiffAction a{std::vector<double>(cfg.action_dim(), cfg.bounds().clip(cfg.pg.theta0))};
            return ladder_from_log_diffs(a, cfg.top_mode);
        }
        return geometric_ladder(cfg.M, cfg.geometric_beta_min);
    }

    /// The adaptation loop, t = 1..L.
    void adapt() {
        for (std::uint64_t t = 1; t <= cfg_.schedule.L; ++t) {
            TraceRow row;
            row.t = t;
            switch (cfg_.adapter) {
                case AdapterKind::policy_gradient: {
                    const double eps = policy_->epsilon();
                    const LogDiffAction action = policy_->sample_action(eps, policy_rng_);
                    state_.set_ladder(ladder_from_log_diffs(action, cfg_.top_mode));
                    const WindowStats stats = window();
                    const double reward = compute_reward(cfg_.reward, stats);
                    const double advantage = policy_->update(action, reward);
                    row.epsilon = eps;
                    row.reward = reward;
                    row.advantage = advantage;
                    row.log_diffs = policy_->theta();  // learner state after the update
                    row.betas = stats.betas;           // ladder the window actually ran at
                    row.rates = stats.rates;
                    break;
                }
                case AdapterKind::vousden: {
                    const WindowStats stats = window();
                    row.reward = compute_reward(cfg_.reward, stats);
                    row.log_diffs = log_diffs_of(state_.ladder());
                    row.betas = stats.betas;
                    row.rates = stats.rates;
                    state_.set_ladder(vousden_->update(stats.rates));
                    break;
                }
                case AdapterKind::geometric: {
                    const WindowStats stats = window();
                    row.reward = compute_reward(cfg_.reward, stats);
                    row.log_diffs = log_diffs_of(state_.ladder());
                    row.betas = stats.betas;
                    row.rates = stats.rates;
                    break;
                }
            }
            if (t % cfg_.thinning == 0 || t == cfg_.schedule.L) record_.rows.push_back(std::move(row));
        }
        freeze_final_ladder();
    }

    /// Sampling at the frozen ladder; fills the cold trace and mean ACT.
    void sample_final(std::uint64_t steps) {
        for (std::uint64_t s = 0; s < steps; ++s) {
            pt_step(state_, target_, stretch_, cfg_.threads);
            record_.cold.append(state_.cold());
        }
        if (steps > 0) record_.mean_act = mean_act(record_.cold.coordinate_series());
    }

    const RunRecord& record() const { return record_; }
    RunRecord take_record() { return std::move(record_); }
    PtState& state() { return state_; }
    const PolicyState* policy() const { return policy_ ? &*policy_ : nullptr; }

private:
    WindowStats window() {
        return run_window(state_, target_, stretch_, cfg_.schedule.N, tracker_, cfg_.threads);
    }

    void freeze_final_ladder() {
        if (cfg_.adapter == AdapterKind::policy_gradient) {
            // The policy mean is the learner's estimate of the optimal action.
            state_.set_ladder(ladder_from_log_diffs(LogDiffAction{policy_->theta()}, cfg_.top_mode));
            record_.final_log_diffs = policy_->theta();
        } else {
            record_.final_log_diffs = log_diffs_of(state_.ladder());
        }
        record_.final_betas = state_.ladder().betas;
    }

    static constexpr std::uint64_t kChainSalt = 0x636861696E;   // chain streams
    static constexpr std::uint64_t kPolicySalt = 0x706F6C6963;  // policy exploration

    const ExperimentConfig& cfg_;
    const Target& target_;
    StretchConfig stretch_;
    PtState state_;
    SwapDistanceTracker tracker_;
    Rng policy_rng_;
    std::optional<PolicyState> policy_;
    std::optional<VousdenState> vousden_;
    RunRecord record_;
};

/// Adaptation only (no final sampling phase); the record carries the traces
/// and the frozen final ladder.
inline RunRecord run_adaptive(const ExperimentConfig& cfg, const Target& target, std::uint64_t trial_seed) {
    TrialRunner runner(cfg, target, trial_seed);
    runner.adapt();
    return runner.take_record();
}

/// Full trial as executed by the CLI: adaptation, then final_samples steps
/// at the frozen ladder, then mean ACT.
inline RunRecord run_trial(const ExperimentConfig& cfg, const Target& target, std::uint64_t trial_seed) {
    const auto t0 = std::chrono::steady_clock::now();
    TrialRunner runner(cfg, target, trial_seed);
    runner.adapt();
    runner.sample_final(cfg.schedule.final_samples);
    RunRecord rec = runner.take_record();
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

/// ACT estimate that never throws: saturates at the last window when no
/// self-consistent one exists, and pins a zero-variance (frozen) series at
/// the series length. Only the correlation study uses this; the strict
/// estimator remains integrated_act.
inline double act_or_saturated(std::span<const double> values, double window_c = 5.0) {
    const std::size_t n = values.size();
    const double mean = detail::series_mean(values);
    const double c0 = detail::autocov(values, mean, 0);
    if (c0 <= 0.0) return static_cast<double>(n);
    double cum = 0.0;
    double tau = 1.0;
    for (std::size_t w = 1; w < n / 2; ++w) {
        cum += detail::autocov(values, mean, w) / c0;
        tau = 1.0 + 2.0 * cum;
        if (static_cast<double>(w) >= window_c * tau) break;
    }
    return tau < 1.0 ? 1.0 : tau;
}

struct CorrelatePoint {
    std::vector<double> log_diffs;
    double omega_mean = 0.0;
    double act_mean = 0.0;
};

/// Fixed-ladder PT run for one randomly drawn ladder: mean swap
/// mean-distance at the coldest pair and mean (saturated) ACT.
inline CorrelatePoint correlate_one(const ExperimentConfig& cfg, const Target& target,
                                    const LogDiffAction& action, std::uint64_t chain_seed) {
    CorrelatePoint pt;
    pt.log_diffs = action.d;
    PtState state(target, ladder_from_log_diffs(action, cfg.top_mode), cfg.walkers, chain_seed);
    SwapDistanceTracker tracker(cfg.walkers, target.dim(), cfg.m);
    tracker.push_positions(state.cold());
    StretchConfig stretch{cfg.stretch_a};
    ColdTrace trace;
    double omega_sum = 0.0;
    std::uint64_t omega_count = 0;
    for (std::uint64_t s = 0; s < cfg.correlate.steps; ++s) {
        const auto records = pt_step(state, target, stretch, cfg.threads);
        for (const auto& rec : records) {
            if (rec.pair_index != 0) continue;
            omega_sum += tracker.observe(rec, state.cold());
            ++omega_count;
        }
        tracker.push_positions(state.cold());
        trace.append(state.cold());
    }
    pt.omega_mean = omega_sum / static_cast<double>(omega_count);
    const auto series = trace.coordinate_series();
    double act_sum = 0.0;
    for (const auto& s : series) act_sum += act_or_saturated(s.values);
    pt.act_mean = act_sum / static_cast<double>(series.size());
    return pt;
}

// ---------------------------------------------------------------------------
// CLI command implementations.

struct CommandOverrides {
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::optional<int> threads;

    void apply(ExperimentConfig& cfg) const {
        if (out) cfg.out_dir = *out;
        if (seed) cfg.seed = *seed;
        if (trials) cfg.trials = *trials;
        if (threads) cfg.threads = *threads;
    }
};

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
    os << content;
    if (!os) throw std::runtime_error("failed while writing: " + path.string());
}

inline nlohmann::json summary_json(const ExperimentConfig& cfg, const RunRecord& rec, std::size_t trial) {
    nlohmann::json s;
    s["config_hash"] = config_hash(cfg);
    s["trial"] = trial;
    s["seed"] = rec.seed;
    s["adapter"] = cfg.adapter == AdapterKind::policy_gradient ? "policy_gradient"
                  : cfg.adapter == AdapterKind::vousden        ? "vousden"
                                                               : "geometric";
    s["reward"] = reward_kind_name(cfg.reward);
    s["M"] = cfg.M;
    s["walkers"] = cfg.walkers;
    s["L"] = cfg.schedule.L;
    s["N"] = cfg.schedule.N;
    s["final_samples"] = cfg.schedule.final_samples;
    if (std::isnan(rec.mean_act)) s["mean_act"] = nullptr;
    else s["mean_act"] = rec.mean_act;
    s["final_betas"] = rec.final_betas;
    s["final_log_diffs"] = rec.final_log_diffs;
    return s;
}

inline int run_trials(const ExperimentConfig& cfg) {
    const auto target = cfg.make_target();
    const std::filesystem::path out(cfg.out_dir);
    std::filesystem::create_directories(out);
    for (std::size_t k = 0; k < cfg.trials; ++k) {
        const std::uint64_t trial_seed = cfg.seed + k;
        RunRecord rec = run_trial(cfg, *target, trial_seed);
        const std::filesystem::path dir = out / ("trial_" + std::to_string(k));
        std::filesystem::create_directories(dir);
        std::ostringstream trace;
        write_trace_csv(trace, rec);
        write_file(dir / "trace.csv", trace.str());
        write_file(dir / "summary.json", summary_json(cfg, rec, k).dump(2) + "\n");
        if (rec.cold.steps > 0) {
            std::ostringstream nll;
            write_nll_csv(nll, nll_trace(rec));
            write_file(dir / "nll.csv", nll.str());
        }
        std::cout << "trial " << k << ": seed=" << trial_seed << " mean_act="
                  << (std::isnan(rec.mean_act) ? std::string("n/a") : fmt_double(rec.mean_act))
                  << " wall=" << fmt_double(rec.wall_seconds) << "s\n";
    }
    return 0;
}

}  // namespace detail

inline int cmd_run(const std::string& config_path, const CommandOverrides& ov = {}) {
    try {
        ExperimentConfig cfg = load_config(config_path);
        ov.apply(cfg);
        if (cfg.adapter != AdapterKind::policy_gradient)
            throw ConfigError("adapter", "run requires policy_gradient (use the baseline command)");
        return detail::run_trials(cfg);
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

inline int cmd_baseline(const std::string& config_path, const CommandOverrides& ov = {}) {
    try {
        ExperimentConfig cfg = load_config(config_path);
        ov.apply(cfg);
        if (cfg.adapter == AdapterKind::policy_gradient)
            throw ConfigError("adapter", "baseline requires geometric or vousden");
        return detail::run_trials(cfg);
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

inline int cmd_correlate(const std::string& config_path, const CommandOverrides& ov = {}) {
    try {
        ExperimentConfig cfg = load_config(config_path);
        ov.apply(cfg);
        if (cfg.correlate.ladder_count == 0)
            throw ConfigError("correlate.ladder_count", "must be >= 1");
        if (cfg.correlate.steps < 50)
            throw ConfigError("correlate.steps", "must be >= 50 for ACT estimation");
        const auto target = cfg.make_target();
        const DiffBounds bounds = cfg.bounds();
        Rng ladder_rng = Rng::stream(cfg.seed, 0x6C616464ULL);  // ladder draws
        std::vector<CorrelatePoint> points;
        points.reserve(cfg.correlate.ladder_count);
        std::vector<double> omegas, acts;
        for (std::size_t id = 0; id < cfg.correlate.ladder_count; ++id) {
            LogDiffAction action;
            action.d.resize(cfg.action_dim());
            for (double& d : action.d)
                d = std::exp(ladder_rng.uniform(std::log(bounds.d_min), std::log(bounds.d_max)));
            points.push_back(correlate_one(cfg, *target, action, mix_seed(cfg.seed, 0xC000 + id)));
            omegas.push_back(points.back().omega_mean);
            acts.push_back(points.back().act_mean);
        }
        const double rho = spearman(omegas, acts);

        const std::filesystem::path out(cfg.out_dir);
        std::filesystem::create_directories(out);
        std::ostringstream scatter;
        scatter << "ladder_id,omega_mean,act_mean";
        for (std::size_t i = 1; i <= cfg.action_dim(); ++i) scatter << ",D_" << i;
        scatter << "\n";
        for (std::size_t id = 0; id < points.size(); ++id) {
            scatter << id << ',' << fmt_double(points[id].omega_mean) << ','
                    << fmt_double(points[id].act_mean);
            for (double d : points[id].log_diffs) scatter << ',' << fmt_double(d);
            scatter << "\n";
        }
        detail::write_file(out / "scatter.csv", scatter.str());
        nlohmann::json cj;
        cj["config_hash"] = config_hash(cfg);
        cj["seed"] = cfg.seed;
        cj["spearman"] = rho;
        cj["n"] = cfg.correlate.ladder_count;
        cj["m"] = cfg.m;
        cj["steps"] = cfg.correlate.steps;
        detail::write_file(out / "correlate.json", cj.dump(2) + "\n");
        std::cout << "correlate: n=" << cfg.correlate.ladder_count << " spearman=" << fmt_double(rho)
                  << "\n";
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace ptgrad
