#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <span>
#include <stdexcept>
#include <vector>

#include "ptgrad/ladder.hpp"
#include "ptgrad/rng.hpp"

namespace ptgrad {

/// epsilon_t = exp(-t / tau), clamped below at 1e-4 so late windows keep an
/// infinitesimal amount of exploration (a zero-variance policy has an
/// identically zero score).
inline double epsilon_schedule(std::uint64_t t, double tau) {
    if (!(tau > 0.0)) throw std::invalid_argument("epsilon_schedule: tau must be positive");
    const double eps = std::exp(-static_cast<double>(t) / tau);
    return eps < 1e-4 ? 1e-4 : eps;
}

struct PolicyConfig {
    double sigma = 0.2;       // base policy scale (per-coordinate variance)
    double alpha = 0.01;      // learning rate
    double grad_clip = 1.0;   // componentwise clip of the score
    std::size_t buffer_len = 500;
    double epsilon_tau = 125.0;
    DiffBounds bounds;

    void validate() const {
        if (!(sigma > 0.0)) throw std::invalid_argument("PolicyConfig: sigma must be positive");
        if (!(alpha > 0.0)) throw std::invalid_argument("PolicyConfig: alpha must be positive");
        if (!(grad_clip > 0.0)) throw std::invalid_argument("PolicyConfig: grad_clip must be positive");
        if (buffer_len == 0) throw std::invalid_argument("PolicyConfig: buffer_len must be >= 1");
        if (!(epsilon_tau > 0.0)) throw std::invalid_argument("PolicyConfig: epsilon_tau must be positive");
        bounds.validate();
    }
};

/// The single-state policy-gradient learner. The policy is N(theta,
/// eps_t * sigma * I) over log-beta differences, clipped to the action box;
/// updates follow theta <- theta + alpha * advantage * clipped score, where
/// the advantage is the reward's z-score within the trailing reward window.
class PolicyState {
public:
    PolicyState(std::vector<double> theta0, PolicyConfig cfg) : theta_(std::move(theta0)), cfg_(cfg) {
        cfg_.validate();
        if (theta_.empty()) throw std::invalid_argument("PolicyState: theta must be non-empty");
        for (double& v : theta_) v = cfg_.bounds.clip(v);
    }

    const std::vector<double>& theta() const { return theta_; }
    const PolicyConfig& config() const { return cfg_; }
    std::uint64_t t() const { return t_; }
    double epsilon() const { return epsilon_schedule(t_, cfg_.epsilon_tau); }

    /// a = theta + sqrt(eps * sigma) * z, componentwise clipped to the box.
    LogDiffAction sample_action(double eps, Rng& rng) const {
        if (!(eps >= 0.0)) throw std::invalid_argument("PolicyState::sample_action: eps must be >= 0");
        const double sd = std::sqrt(eps * cfg_.sigma);
        LogDiffAction a;
        a.d.resize(theta_.size());
        for (std::size_t k = 0; k < theta_.size(); ++k)
            a.d[k] = cfg_.bounds.clip(theta_[k] + sd * rng.normal());
        return a;
    }

    /// Gaussian score with respect to the mean, (a - theta) / sigma.
    /// Deliberately not scaled by eps_t, so it vanishes with the exploration.
    std::vector<double> log_grad(const LogDiffAction& action) const {
        if (action.d.size() != theta_.size())
            throw std::invalid_argument("PolicyState::log_grad: dimension mismatch");
        std::vector<double> g(theta_.size());
        for (std::size_t k = 0; k < theta_.size(); ++k)
            g[k] = (action.d[k] - theta_[k]) / cfg_.sigma;
        return g;
    }

    /// One policy-gradient step; returns the normalized advantage used.
    /// The reward is appended to the trailing window first, so the advantage
    /// is the z-score of r_t among the most recent observations (mean and
    /// population std of the window, std floored at 1e-8). The very first
    /// observation therefore leaves theta unchanged.
    double update(const LogDiffAction& action, double reward) {
        if (!std::isfinite(reward)) throw std::invalid_argument("PolicyState::update: reward must be finite");
        auto grad = log_grad(action);
        rewards_.push_back(reward);
        if (rewards_.size() > cfg_.buffer_len) rewards_.pop_front();
        double mean = 0.0;
        for (double r : rewards_) mean += r;
        mean /= static_cast<double>(rewards_.size());
        double var = 0.0;
        for (double r : rewards_) var += (r - mean) * (r - mean);
        var /= static_cast<double>(rewards_.size());
        const double sd = std::sqrt(var < 0.0 ? 0.0 : var);
        const double advantage = (reward - mean) / (sd > 1e-8 ? sd : 1e-8);
        for (std::size_t k = 0; k < theta_.size(); ++k) {
            double g = grad[k];
            if (g > cfg_.grad_clip) g = cfg_.grad_clip;
            if (g < -cfg_.grad_clip) g = -cfg_.grad_clip;
            theta_[k] = cfg_.bounds.clip(theta_[k] + cfg_.alpha * advantage * g);
        }
        ++t_;
        return advantage;
    }

private:
    std::vector<double> theta_;
    PolicyConfig cfg_;
    std::deque<double> rewards_;
    std::uint64_t t_ = 0;
};

/// Acceptance-rate-equalizing baseline: S_i = log(T_{i+1} - T_i) moves by
/// kappa(t) (A_i - A_{i+1}) with hyperbolic decay kappa(t) = kappa0 t0 / (t + t0).
class VousdenState {
public:
    VousdenState(const TemperatureLadder& ladder, double kappa0, double t0)
        : kappa0_(kappa0), t0_(t0) {
        if (!(kappa0 > 0.0) || !(t0 > 0.0))
            throw std::invalid_argument("VousdenState: kappa0 and t0 must be positive");
        if (ladder.size() < 2) throw std::invalid_argument("VousdenState: need at least 2 chains");
        s_.reserve(ladder.size() - 1);
        for (std::size_t i = 0; i + 1 < ladder.size(); ++i) {
            if (!(ladder.betas[i + 1] > 0.0))
                throw std::invalid_argument("VousdenState: all betas must be positive");
            const double gap = 1.0 / ladder.betas[i + 1] - 1.0 / ladder.betas[i];
            s_.push_back(std::log(gap));
        }
    }

    double kappa() const { return kappa0_ * t0_ / (static_cast<double>(t_) + t0_); }
    std::uint64_t t() const { return t_; }
    const std::vector<double>& s() const { return s_; }

    /// One update from the window's per-pair acceptance rates. The chain-i
    /// rate is the mean of its adjacent pair rates (its single pair rate at
    /// the ends). Returns the rebuilt ladder T_1 = 1, T_{i+1} = T_i + exp(S_i).
    TemperatureLadder update(std::span<const double> pair_rates) {
        if (pair_rates.size() != s_.size())
            throw std::invalid_argument("VousdenState::update: need one rate per adjacent pair");
        const std::size_t M = s_.size() + 1;
        std::vector<double> chain_rate(M);
        for (std::size_t i = 0; i < M; ++i) {
            if (i == 0) chain_rate[i] = pair_rates[0];
            else if (i == M - 1) chain_rate[i] = pair_rates[M - 2];
            else chain_rate[i] = 0.5 * (pair_rates[i - 1] + pair_rates[i]);
        }
        const double k = kappa();
        for (std::size_t i = 0; i < s_.size(); ++i)
            s_[i] += k * (chain_rate[i] - chain_rate[i + 1]);
        ++t_;
        return ladder();
    }

    TemperatureLadder ladder() const {
        std::vector<double> betas;
        betas.reserve(s_.size() + 1);
        betas.push_back(1.0);
        double temp = 1.0;
        for (double s : s_) {
            temp += std::exp(s);
            betas.push_back(1.0 / temp);
        }
        return TemperatureLadder(std::move(betas));
    }

private:
    std::vector<double> s_;
    double kappa0_;
    double t0_;
    std::uint64_t t_ = 0;
};

}  // namespace ptgrad
