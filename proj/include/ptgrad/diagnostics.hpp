#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ptgrad {

struct ScalarSeries {
    std::vector<double> values;
    std::string label;
};

namespace detail {

inline double series_mean(std::span<const double> x) {
    double m = 0.0;
    for (double v : x) m += v;
    return m / static_cast<double>(x.size());
}

// c(k) = (1/n) sum_t (x_t - mean)(x_{t+k} - mean), biased normalization.
inline double autocov(std::span<const double> x, double mean, std::size_t lag) {
    double c = 0.0;
    for (std::size_t t = 0; t + lag < x.size(); ++t)
        c += (x[t] - mean) * (x[t + lag] - mean);
    return c / static_cast<double>(x.size());
}

}  // namespace detail

/// Sample autocorrelation rho(lag) = c(lag)/c(0).
inline double autocorr(std::span<const double> values, std::size_t lag) {
    if (values.size() < 2) throw std::invalid_argument("autocorr: need at least 2 values");
    if (lag >= values.size()) throw std::invalid_argument("autocorr: lag out of range");
    const double mean = detail::series_mean(values);
    const double c0 = detail::autocov(values, mean, 0);
    if (c0 <= 0.0) throw std::runtime_error("autocorr: series has zero variance");
    return detail::autocov(values, mean, lag) / c0;
}

inline double autocorr(const ScalarSeries& s, std::size_t lag) { return autocorr(s.values, lag); }

/// Integrated autocorrelation time with the self-consistent window:
/// tau(W) = 1 + 2 sum_{k<=W} rho(k), stopping at the smallest W >= c * tau(W).
/// Throws when no such W exists below n/2 (chain too short for the estimate).
inline double integrated_act(std::span<const double> values, double window_c = 5.0) {
    const std::size_t n = values.size();
    if (n < 50) throw std::invalid_argument("integrated_act: need at least 50 values");
    if (!(window_c > 0.0)) throw std::invalid_argument("integrated_act: window_c must be positive");
    const double mean = detail::series_mean(values);
    const double c0 = detail::autocov(values, mean, 0);
    if (c0 <= 0.0) throw std::runtime_error("integrated_act: series has zero variance");
    double cum = 0.0;
    for (std::size_t w = 1; w < n / 2; ++w) {
        cum += detail::autocov(values, mean, w) / c0;
        const double tau = 1.0 + 2.0 * cum;
        if (static_cast<double>(w) >= window_c * tau) return tau < 1.0 ? 1.0 : tau;
    }
    throw std::runtime_error("integrated_act: no self-consistent window below n/2; chain too short");
}

inline double integrated_act(const ScalarSeries& s, double window_c = 5.0) {
    return integrated_act(s.values, window_c);
}

/// Mean integrated ACT over a collection of equal-length scalar series
/// (one per walker and coordinate of the coldest chain).
inline double mean_act(const std::vector<ScalarSeries>& series, double window_c = 5.0) {
    if (series.empty()) throw std::invalid_argument("mean_act: need at least one series");
    for (const auto& s : series)
        if (s.values.size() != series.front().values.size())
            throw std::invalid_argument("mean_act: all series must have the same length");
    double sum = 0.0;
    for (const auto& s : series) {
        try {
            sum += integrated_act(s.values, window_c);
        } catch (const std::exception& e) {
            throw std::runtime_error("mean_act: series '" + s.label + "': " + e.what());
        }
    }
    return sum / static_cast<double>(series.size());
}

/// Mid-ranks (ties get the average of the ranks they span), 1-based.
inline std::vector<double> mid_ranks(std::span<const double> x) {
    const std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

/// Spearman rank correlation: Pearson correlation of mid-ranks.
inline double spearman(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("spearman: length mismatch");
    if (xs.size() < 3) throw std::invalid_argument("spearman: need at least 3 observations");
    const auto rx = mid_ranks(xs);
    const auto ry = mid_ranks(ys);
    const double mx = detail::series_mean(rx);
    const double my = detail::series_mean(ry);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        const double dx = rx[i] - mx;
        const double dy = ry[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) throw std::runtime_error("spearman: zero rank variance");
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace ptgrad
