#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "ptgrad/ensemble.hpp"
#include "ptgrad/ladder.hpp"
#include "ptgrad/rng.hpp"
#include "ptgrad/target.hpp"

namespace ptgrad {

/// One attempted state exchange between adjacent chains. proposed_state is
/// the hotter chain's state offered to the colder chain, captured at the
/// moment of the attempt.
struct SwapRecord {
    std::size_t pair_index;  // 0-based: pair (i, i+1)
    std::size_t cold_walker;
    std::size_t hot_walker;
    bool accepted;
    std::vector<double> proposed_state;
};

/// Log acceptance probability of swapping states x (colder chain, beta_i)
/// and y (hotter chain, beta_j <= beta_i):
/// min(0, (beta_i - beta_j) (log pi(y) - log pi(x))).
/// A zero-density state is never moved into a strictly colder chain.
inline double swap_log_accept(double lp_x, double lp_y, double beta_i, double beta_j) {
    if (!(beta_i >= beta_j)) throw std::invalid_argument("swap_log_accept: need beta_i >= beta_j");
    const double db = beta_i - beta_j;
    if (db == 0.0 || lp_x == lp_y) return 0.0;
    if (lp_y == kNegInf) return kNegInf;
    if (lp_x == kNegInf) return 0.0;
    const double la = db * (lp_y - lp_x);
    return la < 0.0 ? la : 0.0;
}

/// Windowed per-adjacent-pair swap counters.
struct PairStats {
    std::vector<std::uint64_t> attempts;
    std::vector<std::uint64_t> accepts;

    explicit PairStats(std::size_t pairs) : attempts(pairs, 0), accepts(pairs, 0) {}
    void reset() {
        std::fill(attempts.begin(), attempts.end(), 0);
        std::fill(accepts.begin(), accepts.end(), 0);
    }
};

/// The joint tempered chain: one walker ensemble per temperature plus
/// pre-assigned RNG streams (one per ensemble, one for swaps), so sweep
/// scheduling cannot change results.
class PtState {
public:
    PtState(const Target& target, TemperatureLadder ladder, std::size_t walkers, std::uint64_t seed)
        : ladder_(std::move(ladder)), swap_stats_(n_pairs_of(ladder_)), swap_rng_(Rng::stream(seed, kSwapStream)) {
        Rng init_rng = Rng::stream(seed, kInitStream);
        ensembles_.reserve(ladder_.size());
        for (std::size_t m = 0; m < ladder_.size(); ++m)
            ensembles_.push_back(Ensemble::init_uniform(target, walkers, init_rng));
        make_chain_rngs(seed);
    }

    PtState(TemperatureLadder ladder, std::vector<Ensemble> ensembles, std::uint64_t seed)
        : ladder_(std::move(ladder)), ensembles_(std::move(ensembles)),
          swap_stats_(n_pairs_of(ladder_)), swap_rng_(Rng::stream(seed, kSwapStream)) {
        if (ensembles_.size() != ladder_.size())
            throw std::invalid_argument("PtState: one ensemble per temperature required");
        for (const auto& e : ensembles_)
            if (e.n_walkers != ensembles_.front().n_walkers || e.dim != ensembles_.front().dim)
                throw std::invalid_argument("PtState: ensembles must share walker count and dimension");
        make_chain_rngs(seed);
    }

    // Ladder can change between observation windows; size must match.
    void set_ladder(TemperatureLadder ladder) {
        if (ladder.size() != ladder_.size())
            throw std::invalid_argument("PtState::set_ladder: ladder size cannot change");
        ladder_ = std::move(ladder);
    }

    const TemperatureLadder& ladder() const { return ladder_; }
    std::size_t n_chains() const { return ensembles_.size(); }
    std::size_t n_walkers() const { return ensembles_.front().n_walkers; }
    std::size_t dim() const { return ensembles_.front().dim; }
    std::uint64_t step_count() const { return step_count_; }

    Ensemble& ensemble(std::size_t m) { return ensembles_[m]; }
    const Ensemble& ensemble(std::size_t m) const { return ensembles_[m]; }
    const Ensemble& cold() const { return ensembles_.front(); }

    const PairStats& swap_stats() const { return swap_stats_; }
    void reset_window() { swap_stats_.reset(); }

    Rng& chain_rng(std::size_t m) { return chain_rngs_[m]; }
    Rng& swap_rng() { return swap_rng_; }

    void bump_step() { ++step_count_; }
    void record_attempt(std::size_t pair, bool accepted) {
        ++swap_stats_.attempts[pair];
        if (accepted) ++swap_stats_.accepts[pair];
    }

private:
    static std::size_t n_pairs_of(const TemperatureLadder& l) { return l.size() - (l.size() ? 1 : 0); }
    void make_chain_rngs(std::uint64_t seed) {
        chain_rngs_.reserve(ensembles_.size());
        for (std::size_t m = 0; m < ensembles_.size(); ++m)
            chain_rngs_.push_back(Rng::stream(seed, kChainStreamBase + m));
    }

    static constexpr std::uint64_t kSwapStream = 0x73776170;       // "swap"
    static constexpr std::uint64_t kInitStream = 0x696E6974;       // "init"
    static constexpr std::uint64_t kChainStreamBase = 0x10000;

    TemperatureLadder ladder_;
    std::vector<Ensemble> ensembles_;
    PairStats swap_stats_;
    std::uint64_t step_count_ = 0;
    std::vector<Rng> chain_rngs_;
    Rng swap_rng_;
};

/// One swap round: pairs are visited hottest to coldest so a state can
/// propagate down the whole ladder within a round. For each adjacent pair a
/// fresh uniform random perfect matching of walkers is drawn and one swap is
/// attempted per matched pair.
inline std::vector<SwapRecord> swap_round(PtState& state) {
    std::vector<SwapRecord> records;
    const std::size_t M = state.n_chains();
    if (M < 2) return records;
    const std::size_t W = state.n_walkers();
    records.reserve((M - 1) * W);
    Rng& rng = state.swap_rng();
    for (std::size_t pair = M - 1; pair-- > 0;) {
        Ensemble& colder = state.ensemble(pair);
        Ensemble& hotter = state.ensemble(pair + 1);
        if (colder.n_walkers != hotter.n_walkers)
            throw std::invalid_argument("swap_round: mismatched walker counts");
        const double beta_i = state.ladder().betas[pair];
        const double beta_j = state.ladder().betas[pair + 1];
        const std::vector<std::size_t> match = rng.permutation(W);
        for (std::size_t w = 0; w < W; ++w) {
            const std::size_t h = match[w];
            const double la = swap_log_accept(colder.log_pi[w], hotter.log_pi[h], beta_i, beta_j);
            const double u = rng.uniform();
            const bool accepted = la >= 0.0 || std::log(u) < la;
            SwapRecord rec{pair, w, h, accepted,
                           std::vector<double>(hotter.walker(h).begin(), hotter.walker(h).end())};
            if (accepted) {
                auto xc = colder.walker(w);
                auto xh = hotter.walker(h);
                std::swap_ranges(xc.begin(), xc.end(), xh.begin());
                std::swap(colder.log_pi[w], hotter.log_pi[h]);
            }
            state.record_attempt(pair, accepted);
            records.push_back(std::move(rec));
        }
    }
    return records;
}

/// Runs one stretch sweep per ensemble at its beta. Sweeps touch disjoint
/// state and use pre-assigned streams, so the threaded path is bit-identical
/// to the sequential one.
inline void sweep_all(PtState& state, const Target& target, const StretchConfig& cfg, int threads = 1) {
    const std::size_t M = state.n_chains();
    auto sweep_one = [&](std::size_t m) {
        stretch_sweep(state.ensemble(m), target, state.ladder().betas[m], cfg, state.chain_rng(m));
    };
    if (threads <= 1 || M < 2) {
        for (std::size_t m = 0; m < M; ++m) sweep_one(m);
        return;
    }
    const std::size_t n_thr = std::min<std::size_t>(static_cast<std::size_t>(threads), M);
    std::vector<std::thread> pool;
    pool.reserve(n_thr);
    for (std::size_t tid = 0; tid < n_thr; ++tid)
        pool.emplace_back([&, tid] {
            for (std::size_t m = tid; m < M; m += n_thr) sweep_one(m);
        });
    for (auto& t : pool) t.join();
}

/// One full PT step: a stretch sweep of every ensemble, then a swap round.
inline std::vector<SwapRecord> pt_step(PtState& state, const Target& target,
                                       const StretchConfig& cfg, int threads = 1) {
    sweep_all(state, target, cfg, threads);
    auto records = swap_round(state);
    state.bump_step();
    return records;
}

/// Windowed swap acceptance rate per adjacent pair. A pair with zero
/// attempts means the observation window was too short.
inline std::vector<double> acceptance_rates(const PtState& state) {
    const auto& s = state.swap_stats();
    std::vector<double> rates(s.attempts.size());
    for (std::size_t i = 0; i < rates.size(); ++i) {
        if (s.attempts[i] == 0)
            throw std::runtime_error("acceptance_rates: no swap attempts recorded for pair " + std::to_string(i));
        rates[i] = static_cast<double>(s.accepts[i]) / static_cast<double>(s.attempts[i]);
    }
    return rates;
}

}  // namespace ptgrad
