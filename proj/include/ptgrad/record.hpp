#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ptgrad/diagnostics.hpp"
#include "ptgrad/ensemble.hpp"

namespace ptgrad {

/// Shortest round-trip decimal representation; deterministic for a given
/// double, and parsing it back recovers the exact value.
inline std::string fmt_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

/// One thinned row of the adaptation trace.
struct TraceRow {
    std::uint64_t t = 0;
    double epsilon = 0.0;
    double reward = 0.0;
    double advantage = 0.0;
    std::vector<double> log_diffs;
    std::vector<double> betas;
    std::vector<double> rates;
};

/// Cold-chain positions and cached log densities over the post-adaptation
/// sampling phase, stored at full resolution for ACT estimation.
struct ColdTrace {
    std::size_t walkers = 0;
    std::size_t dim = 0;
    std::size_t steps = 0;
    std::vector<double> positions;  // steps x walkers x dim
    std::vector<double> log_pi;     // steps x walkers

    void append(const Ensemble& cold) {
        if (steps == 0 && walkers == 0) {
            walkers = cold.n_walkers;
            dim = cold.dim;
        }
        if (cold.n_walkers != walkers || cold.dim != dim)
            throw std::invalid_argument("ColdTrace::append: ensemble shape changed");
        positions.insert(positions.end(), cold.positions.begin(), cold.positions.end());
        log_pi.insert(log_pi.end(), cold.log_pi.begin(), cold.log_pi.end());
        ++steps;
    }

    std::span<const double> position(std::size_t step, std::size_t walker) const {
        return {positions.data() + (step * walkers + walker) * dim, dim};
    }
    double log_pi_at(std::size_t step, std::size_t walker) const {
        return log_pi[step * walkers + walker];
    }

    /// One scalar series per (walker, coordinate).
    std::vector<ScalarSeries> coordinate_series() const {
        std::vector<ScalarSeries> out;
        out.reserve(walkers * dim);
        for (std::size_t w = 0; w < walkers; ++w)
            for (std::size_t k = 0; k < dim; ++k) {
                ScalarSeries s;
                s.label = "walker" + std::to_string(w) + ".x" + std::to_string(k);
                s.values.resize(steps);
                for (std::size_t t = 0; t < steps; ++t) s.values[t] = positions[(t * walkers + w) * dim + k];
                out.push_back(std::move(s));
            }
        return out;
    }
};

/// Full output of one trial: adaptation trace, final ladder, cold-chain
/// sampling trace and summary statistics.
struct RunRecord {
    std::vector<TraceRow> rows;
    std::vector<double> final_betas;
    std::vector<double> final_log_diffs;  // action coordinates of the final ladder
    ColdTrace cold;
    double mean_act = std::numeric_limits<double>::quiet_NaN();
    std::uint64_t seed = 0;
    double wall_seconds = 0.0;  // reported on stdout, not persisted
};

/// Per-step mean over cold-chain walkers of -log pi, from the cached log
/// densities of the sampling phase.
inline ScalarSeries nll_trace(const RunRecord& run) {
    if (run.cold.steps == 0) throw std::invalid_argument("nll_trace: run contains no cold-chain samples");
    ScalarSeries s;
    s.label = "nll";
    s.values.resize(run.cold.steps);
    for (std::size_t t = 0; t < run.cold.steps; ++t) {
        double acc = 0.0;
        for (std::size_t w = 0; w < run.cold.walkers; ++w) acc += -run.cold.log_pi_at(t, w);
        s.values[t] = acc / static_cast<double>(run.cold.walkers);
    }
    return s;
}

inline void write_trace_csv(std::ostream& os, const RunRecord& run) {
    const std::size_t nd = run.rows.empty() ? run.final_log_diffs.size() : run.rows.front().log_diffs.size();
    const std::size_t nb = run.rows.empty() ? run.final_betas.size() : run.rows.front().betas.size();
    const std::size_t nr = nb > 0 ? nb - 1 : 0;
    os << "t,epsilon,reward,advantage";
    for (std::size_t i = 1; i <= nd; ++i) os << ",D_" << i;
    for (std::size_t i = 1; i <= nb; ++i) os << ",beta_" << i;
    for (std::size_t i = 1; i <= nr; ++i) os << ",rate_" << i;
    os << "\n";
    for (const auto& row : run.rows) {
        os << row.t << ',' << fmt_double(row.epsilon) << ',' << fmt_double(row.reward) << ','
           << fmt_double(row.advantage);
        for (double v : row.log_diffs) os << ',' << fmt_double(v);
        for (double v : row.betas) os << ',' << fmt_double(v);
        for (double v : row.rates) os << ',' << fmt_double(v);
        os << "\n";
    }
}

inline void write_nll_csv(std::ostream& os, const ScalarSeries& s) {
    os << "step,nll\n";
    for (std::size_t t = 0; t < s.values.size(); ++t) os << t << ',' << fmt_double(s.values[t]) << "\n";
}

}  // namespace ptgrad
