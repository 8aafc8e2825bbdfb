#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "ptgrad/rng.hpp"
#include "ptgrad/target.hpp"

namespace ptgrad {

struct StretchConfig {
    double a = 2.0;  // stretch parameter, > 1
};

/// One ensemble of walkers at a single temperature. log_pi caches the
/// untempered log target density at each walker, so retempering the chain
/// never invalidates the cache.
struct Ensemble {
    std::size_t n_walkers = 0;
    std::size_t dim = 0;
    std::vector<double> positions;  // n_walkers x dim, row-major
    std::vector<double> log_pi;     // untempered log density per walker

    Ensemble(std::size_t walkers, std::size_t d) : n_walkers(walkers), dim(d) {
        if (walkers < 2) throw std::invalid_argument("Ensemble: need at least 2 walkers");
        if (d == 0) throw std::invalid_argument("Ensemble: dim must be positive");
        positions.assign(walkers * d, 0.0);
        log_pi.assign(walkers, kNegInf);
    }

    std::span<double> walker(std::size_t w) { return {positions.data() + w * dim, dim}; }
    std::span<const double> walker(std::size_t w) const { return {positions.data() + w * dim, dim}; }

    void set_walker(std::size_t w, std::span<const double> x, double lp) {
        auto dst = walker(w);
        for (std::size_t k = 0; k < dim; ++k) dst[k] = x[k];
        log_pi[w] = lp;
    }

    void refresh_log_pi(const Target& target) {
        for (std::size_t w = 0; w < n_walkers; ++w) log_pi[w] = target.log_density(walker(w));
    }

    static Ensemble init_uniform(const Target& target, std::size_t walkers, Rng& rng) {
        Ensemble e(walkers, target.dim());
        auto pts = uniform_init(target.domain(), walkers, rng);
        for (std::size_t w = 0; w < walkers; ++w)
            e.set_walker(w, pts[w], target.log_density(std::span<const double>(pts[w])));
        return e;
    }
};

/// Inverse-CDF sample of g(z) proportional to 1/sqrt(z) on [1/a, a]:
/// z = (1/sqrt(a) + u (sqrt(a) - 1/sqrt(a)))^2.
inline double draw_stretch_z(double a, double u) {
    if (!(a > 1.0)) throw std::invalid_argument("draw_stretch_z: stretch parameter a must be > 1");
    const double sa = std::sqrt(a);
    const double r = 1.0 / sa + u * (sa - 1.0 / sa);
    return r * r;
}

/// beta * (lp_prop - lp_cur) with the -inf conventions: a proposal with
/// zero density is rejected at every beta (including beta = 0), and a
/// current state with zero density is always escaped.
inline double tempered_log_ratio(double beta, double lp_cur, double lp_prop) {
    if (lp_prop == kNegInf) return kNegInf;
    if (lp_cur == kNegInf) return std::numeric_limits<double>::infinity();
    return beta * (lp_prop - lp_cur);
}

/// Log acceptance probability of a stretch move in `dim` dimensions.
inline double stretch_log_accept(std::size_t dim, double z, double beta, double lp_cur,
                                 double lp_prop) {
    const double ratio = tempered_log_ratio(beta, lp_cur, lp_prop);
    if (ratio == kNegInf) return kNegInf;
    const double la = static_cast<double>(dim - 1) * std::log(z) + ratio;
    return la < 0.0 ? la : 0.0;
}

/// One sequential pass of stretch moves over the ensemble, targeting
/// pi^beta. Walker i may see already-updated partners. Returns the number
/// of accepted moves. Consumes exactly three rng draws per walker so that
/// the stream stays aligned across accept/reject outcomes.
inline std::size_t stretch_sweep(Ensemble& ensemble, const Target& target, double beta,
                                 const StretchConfig& cfg, Rng& rng) {
    if (ensemble.n_walkers < 2) throw std::invalid_argument("stretch_sweep: need at least 2 walkers");
    if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("stretch_sweep: beta must be in [0, 1]");
    const std::size_t dim = ensemble.dim;
    std::vector<double> prop(dim);
    std::size_t accepted = 0;
    for (std::size_t i = 0; i < ensemble.n_walkers; ++i) {
        const std::size_t j = rng.index_excluding(ensemble.n_walkers, i);
        const double z = draw_stretch_z(cfg.a, rng.uniform());
        const double u = rng.uniform();
        auto xi = ensemble.walker(i);
        auto xj = ensemble.walker(j);
        for (std::size_t k = 0; k < dim; ++k) prop[k] = xj[k] + z * (xi[k] - xj[k]);
        const double lp_prop = target.log_density(prop);
        const double la = stretch_log_accept(dim, z, beta, ensemble.log_pi[i], lp_prop);
        if (la >= 0.0 || std::log(u) < la) {
            ensemble.set_walker(i, prop, lp_prop);
            ++accepted;
        }
    }
    return accepted;
}

}  // namespace ptgrad
