#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ptgrad/rng.hpp"

namespace ptgrad {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Axis-aligned box the sampler is restricted to.
struct BoundedDomain {
    std::vector<double> lower;
    std::vector<double> upper;

    BoundedDomain(std::vector<double> lo, std::vector<double> hi)
        : lower(std::move(lo)), upper(std::move(hi)) {
        if (lower.empty() || lower.size() != upper.size())
            throw std::invalid_argument("BoundedDomain: lower/upper must be non-empty and equal length");
        for (std::size_t k = 0; k < lower.size(); ++k)
            if (!(lower[k] < upper[k]))
                throw std::invalid_argument("BoundedDomain: lower must be < upper in every coordinate");
    }

    static BoundedDomain cube(std::size_t dim, double lo, double hi) {
        return BoundedDomain(std::vector<double>(dim, lo), std::vector<double>(dim, hi));
    }

    std::size_t dim() const { return lower.size(); }

    bool contains(std::span<const double> x) const {
        for (std::size_t k = 0; k < lower.size(); ++k)
            if (x[k] < lower[k] || x[k] > upper[k]) return false;
        return true;
    }
};

/// Unnormalized target distribution, evaluated in log space. Immutable after
/// construction; log_density is safe to call from many threads at once.
/// Returns -inf outside the domain and at exact zeros of the density.
class Target {
public:
    explicit Target(BoundedDomain domain) : domain_(std::move(domain)) {}
    virtual ~Target() = default;

    const BoundedDomain& domain() const { return domain_; }
    std::size_t dim() const { return domain_.dim(); }

    double log_density(std::span<const double> x) const {
        if (x.size() != domain_.dim())
            throw std::invalid_argument("Target::log_density: dimension mismatch");
        if (!domain_.contains(x)) return kNegInf;
        return log_density_in_domain(x);
    }

protected:
    virtual double log_density_in_domain(std::span<const double> x) const = 0;

private:
    BoundedDomain domain_;
};

/// Isotropic Gaussian mixture. `scales` are the diagonal covariance entries
/// (variances); set sigma_is_stddev to read them as standard deviations.
struct GaussianMixtureSpec {
    std::vector<double> weights;             // nonnegative, sum to 1
    std::vector<std::vector<double>> means;  // n x dim
    std::vector<double> scales;              // n, all positive
    bool sigma_is_stddev = false;

    void validate() const {
        const std::size_t n = weights.size();
        if (n == 0 || means.size() != n || scales.size() != n)
            throw std::invalid_argument("GaussianMixtureSpec: need n >= 1 components with matching weights/means/scales");
        const std::size_t dim = means.front().size();
        double wsum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (weights[i] < 0.0) throw std::invalid_argument("GaussianMixtureSpec: weights must be nonnegative");
            if (!(scales[i] > 0.0)) throw std::invalid_argument("GaussianMixtureSpec: scales must be positive");
            if (means[i].size() != dim) throw std::invalid_argument("GaussianMixtureSpec: inconsistent mean dimensions");
            wsum += weights[i];
        }
        if (std::abs(wsum - 1.0) > 1e-12)
            throw std::invalid_argument("GaussianMixtureSpec: weights must sum to 1");
    }
};

class GaussianMixture : public Target {
public:
    GaussianMixture(GaussianMixtureSpec spec, BoundedDomain domain)
        : Target(std::move(domain)), spec_(std::move(spec)) {
        spec_.validate();
        if (spec_.means.front().size() != dim())
            throw std::invalid_argument("GaussianMixture: component dimension does not match domain");
        const double k = static_cast<double>(dim());
        log_w_plus_const_.resize(spec_.weights.size());
        inv_two_var_.resize(spec_.weights.size());
        for (std::size_t i = 0; i < spec_.weights.size(); ++i) {
            const double var = spec_.sigma_is_stddev ? spec_.scales[i] * spec_.scales[i] : spec_.scales[i];
            inv_two_var_[i] = 0.5 / var;
            const double log_norm = -0.5 * k * std::log(2.0 * std::numbers::pi * var);
            log_w_plus_const_[i] =
                (spec_.weights[i] > 0.0 ? std::log(spec_.weights[i]) : kNegInf) + log_norm;
        }
    }

    const GaussianMixtureSpec& spec() const { return spec_; }

protected:
    double log_density_in_domain(std::span<const double> x) const override {
        // Running log-sum-exp over component log densities; raw densities
        // underflow double range for the beta powers used here.
        double best = kNegInf;
        double acc = 0.0;
        for (std::size_t i = 0; i < spec_.weights.size(); ++i) {
            double q = 0.0;
            const auto& mu = spec_.means[i];
            for (std::size_t k = 0; k < mu.size(); ++k) {
                const double d = x[k] - mu[k];
                q += d * d;
            }
            const double c = log_w_plus_const_[i] - q * inv_two_var_[i];
            if (c == kNegInf) continue;
            if (c <= best) {
                acc += std::exp(c - best);
            } else {
                acc = acc * std::exp(best - c) + 1.0;
                best = c;
            }
        }
        if (best == kNegInf) return kNegInf;
        return best + std::log(acc);
    }

private:
    GaussianMixtureSpec spec_;
    std::vector<double> log_w_plus_const_;
    std::vector<double> inv_two_var_;
};

/// Egg-box density (1/2 prod cos(x_k) + 1/2)^beta; isolated modes under
/// large beta.
struct EggBoxSpec {
    std::size_t dim = 5;
    double beta_power = 1000.0;
};

class EggBox : public Target {
public:
    explicit EggBox(EggBoxSpec spec)
        : Target(BoundedDomain::cube(spec.dim, -1.5 * std::numbers::pi, 1.5 * std::numbers::pi)),
          spec_(spec) {
        if (spec_.dim == 0) throw std::invalid_argument("EggBox: dim must be positive");
        if (!(spec_.beta_power > 0.0)) throw std::invalid_argument("EggBox: beta_power must be positive");
    }

    const EggBoxSpec& spec() const { return spec_; }

protected:
    double log_density_in_domain(std::span<const double> x) const override {
        double prod = 1.0;
        for (double xk : x) prod *= std::cos(xk);
        const double arg = 0.5 * prod + 0.5;
        if (arg <= 0.0) return kNegInf;
        return spec_.beta_power * std::log(arg);
    }

private:
    EggBoxSpec spec_;
};

/// Two-mode Rosenbrock density (1/(c+f(x,y)) + 1/(c+f(-x,y)))^beta with
/// f(x,y) = (a - x^2)^2 + b (y - x^2)^2. The quartic first term makes the
/// density even in x; classic_first_term switches to (a - x)^2.
struct RosenbrockSpec {
    double a = 4.0;
    double b = 1.0;
    double c = 0.1;
    double beta_power = 1000.0;
    bool classic_first_term = false;
};

class Rosenbrock : public Target {
public:
    explicit Rosenbrock(RosenbrockSpec spec)
        : Target(BoundedDomain::cube(2, -6.0, 6.0)), spec_(spec) {
        if (!(spec_.a > 0.0) || !(spec_.b > 0.0) || !(spec_.c > 0.0))
            throw std::invalid_argument("Rosenbrock: a, b, c must be positive");
        if (!(spec_.beta_power > 0.0))
            throw std::invalid_argument("Rosenbrock: beta_power must be positive");
    }

    const RosenbrockSpec& spec() const { return spec_; }

    double valley(double x, double y) const {
        const double t = spec_.classic_first_term ? (spec_.a - x) : (spec_.a - x * x);
        const double u = y - x * x;
        return t * t + spec_.b * u * u;
    }

protected:
    double log_density_in_domain(std::span<const double> x) const override {
        const double s = 1.0 / (spec_.c + valley(x[0], x[1])) + 1.0 / (spec_.c + valley(-x[0], x[1]));
        if (s <= 0.0) return kNegInf;
        return spec_.beta_power * std::log(s);
    }

private:
    RosenbrockSpec spec_;
};

/// Random mixture instance: means uniform in [-1,1]^dim, scales uniform in
/// [0.01, 0.3], uniform weights, domain [-2,2]^dim. Deterministic in seed.
inline std::shared_ptr<const Target> make_gaussian_mixture(std::uint64_t seed, std::size_t n = 10,
                                                           std::size_t dim = 8,
                                                           bool sigma_is_stddev = false) {
    if (n == 0 || dim == 0)
        throw std::invalid_argument("make_gaussian_mixture: n and dim must be >= 1");
    Rng rng = Rng::stream(seed, 0x6D697867656EULL);  // target generation stream
    GaussianMixtureSpec spec;
    spec.sigma_is_stddev = sigma_is_stddev;
    spec.weights.assign(n, 1.0 / static_cast<double>(n));
    spec.means.resize(n);
    spec.scales.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        spec.means[i].resize(dim);
        for (std::size_t k = 0; k < dim; ++k) spec.means[i][k] = rng.uniform(-1.0, 1.0);
        spec.scales[i] = rng.uniform(0.01, 0.3);
    }
    return std::make_shared<GaussianMixture>(std::move(spec), BoundedDomain::cube(dim, -2.0, 2.0));
}

/// count i.i.d. uniform points in the box.
inline std::vector<std::vector<double>> uniform_init(const BoundedDomain& domain, std::size_t count,
                                                     Rng& rng) {
    if (count == 0) throw std::invalid_argument("uniform_init: count must be >= 1");
    std::vector<std::vector<double>> pts(count);
    for (auto& p : pts) {
        p.resize(domain.dim());
        for (std::size_t k = 0; k < domain.dim(); ++k)
            p[k] = rng.uniform(domain.lower[k], domain.upper[k]);
    }
    return pts;
}

}  // namespace ptgrad
