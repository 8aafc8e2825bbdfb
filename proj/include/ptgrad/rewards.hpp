#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ptgrad/ensemble.hpp"
#include "ptgrad/ladder.hpp"
#include "ptgrad/tempering.hpp"

namespace ptgrad {

/// Fixed-capacity memory of one cold-chain walker's most recent positions.
class HistoryRing {
public:
    HistoryRing(std::size_t capacity, std::size_t dim) : cap_(capacity), dim_(dim) {
        if (capacity == 0) throw std::invalid_argument("HistoryRing: capacity must be >= 1");
        if (dim == 0) throw std::invalid_argument("HistoryRing: dim must be positive");
        buf_.resize(capacity * dim);
    }

    std::size_t capacity() const { return cap_; }
    std::size_t size() const { return size_; }
    std::size_t dim() const { return dim_; }

    void push(std::span<const double> x) {
        if (x.size() != dim_) throw std::invalid_argument("HistoryRing::push: dimension mismatch");
        head_ = (head_ + cap_ - 1) % cap_;
        double* slot = buf_.data() + head_ * dim_;
        for (std::size_t k = 0; k < dim_; ++k) slot[k] = x[k];
        if (size_ < cap_) ++size_;
    }

    /// k-th most recent entry, k in [0, size).
    std::span<const double> entry(std::size_t k) const {
        const std::size_t slot = (head_ + k) % cap_;
        return {buf_.data() + slot * dim_, dim_};
    }

private:
    std::size_t cap_;
    std::size_t dim_;
    std::vector<double> buf_;
    std::size_t size_ = 0;
    std::size_t head_ = 0;
};

/// Mean Euclidean distance from y to the stored history, most recent first.
/// During warm-up (fewer than m entries) the mean runs over what is present.
inline double swap_mean_distance(const HistoryRing& ring, std::span<const double> y) {
    if (ring.size() == 0) throw std::invalid_argument("swap_mean_distance: empty history");
    if (y.size() != ring.dim()) throw std::invalid_argument("swap_mean_distance: dimension mismatch");
    double sum = 0.0;
    for (std::size_t k = 0; k < ring.size(); ++k) {
        auto h = ring.entry(k);
        double q = 0.0;
        for (std::size_t j = 0; j < y.size(); ++j) {
            const double d = y[j] - h[j];
            q += d * d;
        }
        sum += std::sqrt(q);
    }
    return sum / static_cast<double>(ring.size());
}

/// Everything a reward function may read about one observation window.
struct WindowStats {
    std::vector<double> betas;
    std::vector<double> rates;       // per adjacent pair, same window
    double omega_sum = 0.0;          // summed swap mean-distances, coldest pair
    std::uint64_t omega_count = 0;   // number of cold-pair swap attempts
};

/// Mean swap mean-distance over all coldest-pair attempts in the window,
/// accepted or not.
inline double reward_swap_mean_distance(const WindowStats& stats) {
    if (stats.omega_count == 0)
        throw std::runtime_error("reward_swap_mean_distance: no cold-chain swap attempts in window");
    return stats.omega_sum / static_cast<double>(stats.omega_count);
}

/// Expected squared jumping distance in beta units, averaged over adjacent
/// pairs: mean_i (beta_i - beta_{i+1})^2 rate_i.
inline double reward_esjd(const TemperatureLadder& ladder, std::span<const double> rates) {
    if (rates.size() + 1 != ladder.size())
        throw std::invalid_argument("reward_esjd: need one rate per adjacent pair");
    if (rates.empty()) throw std::invalid_argument("reward_esjd: need at least one pair");
    double sum = 0.0;
    for (std::size_t i = 0; i < rates.size(); ++i) {
        const double eps = ladder.betas[i] - ladder.betas[i + 1];
        sum += eps * eps * rates[i];
    }
    return sum / static_cast<double>(rates.size());
}

/// Negative population standard deviation of the acceptance rates; zero is
/// the maximum, attained exactly at uniform rates.
inline double reward_neg_acc_std(std::span<const double> rates) {
    if (rates.empty()) throw std::invalid_argument("reward_neg_acc_std: need at least one rate");
    double mean = 0.0;
    for (double r : rates) mean += r;
    mean /= static_cast<double>(rates.size());
    double var = 0.0;
    for (double r : rates) var += (r - mean) * (r - mean);
    var /= static_cast<double>(rates.size());
    return -std::sqrt(var < 0.0 ? 0.0 : var);
}

enum class RewardKind { swap_mean_distance, esjd, neg_acc_std };

inline const char* reward_kind_name(RewardKind kind) {
    switch (kind) {
        case RewardKind::swap_mean_distance: return "swap_mean_distance";
        case RewardKind::esjd: return "esjd";
        case RewardKind::neg_acc_std: return "neg_acc_std";
    }
    return "?";
}

inline double compute_reward(RewardKind kind, const WindowStats& stats) {
    switch (kind) {
        case RewardKind::swap_mean_distance: return reward_swap_mean_distance(stats);
        case RewardKind::esjd: return reward_esjd(TemperatureLadder(stats.betas), stats.rates);
        case RewardKind::neg_acc_std: return reward_neg_acc_std(stats.rates);
    }
    throw std::logic_error("compute_reward: unknown reward kind");
}

/// Maintains the per-walker history rings of the coldest ensemble and turns
/// cold-pair SwapRecords into swap mean-distance observations.
///
/// An attempt is scored on the realized post-attempt state of the cold
/// walker: the incoming hot state when the swap was accepted, the walker's
/// unchanged state when it was rejected. A rejected proposal therefore
/// counts at its actual impact, and an accepted swap right next to the
/// current state scores no better than a rejection.
class SwapDistanceTracker {
public:
    SwapDistanceTracker(std::size_t walkers, std::size_t dim, std::size_t m) {
        rings_.reserve(walkers);
        for (std::size_t w = 0; w < walkers; ++w) rings_.emplace_back(m, dim);
    }

    /// Push the current cold positions (call once at start, then after every
    /// PT step, so the rings track each walker's realized trajectory).
    void push_positions(const Ensemble& cold) {
        if (cold.n_walkers != rings_.size())
            throw std::invalid_argument("SwapDistanceTracker: walker count mismatch");
        for (std::size_t w = 0; w < cold.n_walkers; ++w) rings_[w].push(cold.walker(w));
    }

    /// Swap mean-distance of one coldest-pair attempt. The coldest pair is
    /// visited last in a swap round and each walker is matched exactly once,
    /// so the walker's position after the round is its realized post-attempt
    /// state. Call before push_positions for the step.
    double observe(const SwapRecord& rec, const Ensemble& cold) const {
        if (rec.pair_index != 0)
            throw std::invalid_argument("SwapDistanceTracker::observe: not a coldest-pair attempt");
        return swap_mean_distance(rings_[rec.cold_walker], cold.walker(rec.cold_walker));
    }

    const HistoryRing& ring(std::size_t w) const { return rings_[w]; }

private:
    std::vector<HistoryRing> rings_;
};

}  // namespace ptgrad
