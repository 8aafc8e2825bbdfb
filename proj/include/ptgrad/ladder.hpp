#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace ptgrad {

/// Bounds of the log-beta-difference action space.
struct DiffBounds {
    double d_min = 0.01;
    double d_max = 10.0;

    void validate() const {
        if (!(d_min > 0.0 && d_min < d_max))
            throw std::invalid_argument("DiffBounds: need 0 < d_min < d_max");
    }
    double clip(double v) const { return v < d_min ? d_min : (v > d_max ? d_max : v); }
};

/// Action of the temperature-selection problem: D_i = log beta_i - log beta_{i+1}.
struct LogDiffAction {
    std::vector<double> d;
};

inline void validate_action(const LogDiffAction& action, const DiffBounds& bounds) {
    bounds.validate();
    for (double v : action.d)
        if (!(v >= bounds.d_min && v <= bounds.d_max))
            throw std::invalid_argument("LogDiffAction: components must lie in [d_min, d_max]");
}

/// Descending inverse temperatures, beta_1 = 1 > ... > beta_M >= 0.
struct TemperatureLadder {
    std::vector<double> betas;

    explicit TemperatureLadder(std::vector<double> b) : betas(std::move(b)) {
        if (betas.empty() || betas.front() != 1.0)
            throw std::invalid_argument("TemperatureLadder: beta_1 must be exactly 1");
        for (std::size_t i = 1; i < betas.size(); ++i)
            if (!(betas[i] < betas[i - 1]))
                throw std::invalid_argument("TemperatureLadder: betas must be strictly decreasing");
        if (!(betas.back() >= 0.0))
            throw std::invalid_argument("TemperatureLadder: betas must be nonnegative");
    }

    std::size_t size() const { return betas.size(); }
};

enum class TopMode { finite, infinite };

/// Builds the ladder from log-beta differences. Finite mode: M = len(D)+1
/// chains, all betas positive. Infinite mode appends beta_M = 0 (a chain
/// sampling the box uniformly).
inline TemperatureLadder ladder_from_log_diffs(const LogDiffAction& action, TopMode mode = TopMode::finite) {
    std::vector<double> betas;
    betas.reserve(action.d.size() + 2);
    betas.push_back(1.0);
    double b = 1.0;
    for (double d : action.d) {
        if (!(d > 0.0)) throw std::invalid_argument("ladder_from_log_diffs: log differences must be positive");
        b *= std::exp(-d);
        betas.push_back(b);
    }
    if (mode == TopMode::infinite) betas.push_back(0.0);
    return TemperatureLadder(std::move(betas));
}

/// beta_i = beta_min^((i-1)/(M-1)); constant ratio between adjacent betas.
inline TemperatureLadder geometric_ladder(std::size_t M, double beta_min) {
    if (M < 2) throw std::invalid_argument("geometric_ladder: M must be >= 2");
    if (!(beta_min > 0.0 && beta_min < 1.0))
        throw std::invalid_argument("geometric_ladder: beta_min must be in (0, 1)");
    std::vector<double> betas(M);
    for (std::size_t i = 0; i < M; ++i)
        betas[i] = std::pow(beta_min, static_cast<double>(i) / static_cast<double>(M - 1));
    betas[0] = 1.0;
    return TemperatureLadder(std::move(betas));
}

/// Log-beta differences of a ladder with all-positive betas (used to report
/// baseline ladders in the same coordinates as policy actions).
inline std::vector<double> log_diffs_of(const TemperatureLadder& ladder) {
    std::vector<double> d;
    if (ladder.size() < 2) return d;
    d.reserve(ladder.size() - 1);
    for (std::size_t i = 0; i + 1 < ladder.size(); ++i) {
        if (!(ladder.betas[i + 1] > 0.0))
            throw std::invalid_argument("log_diffs_of: betas must all be positive");
        d.push_back(std::log(ladder.betas[i]) - std::log(ladder.betas[i + 1]));
    }
    return d;
}

}  // namespace ptgrad
