#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "ptgrad/ensemble.hpp"
#include "ptgrad/ladder.hpp"
#include "ptgrad/target.hpp"
#include "ptgrad/tempering.hpp"

using namespace ptgrad;
using Catch::Approx;

namespace {

/// Piecewise-constant density on [0, 2]: p0 on [0,1), p1 on [1,2]. Region
/// occupancy at stationarity is computable in closed form, which gives an
/// exact discrete analogue of the joint tempered chain.
class StepTarget : public Target {
public:
    StepTarget(double p0, double p1)
        : Target(BoundedDomain::cube(1, 0.0, 2.0)), l0_(std::log(p0)), l1_(std::log(p1)) {}

protected:
    double log_density_in_domain(std::span<const double> x) const override {
        return x[0] < 1.0 ? l0_ : l1_;
    }

private:
    double l0_, l1_;
};

Ensemble two_walkers_at(const Target& t, double x0, double x1) {
    Ensemble e(2, 1);
    const std::vector<double> a{x0}, b{x1};
    e.set_walker(0, a, t.log_density(a));
    e.set_walker(1, b, t.log_density(b));
    return e;
}

}  // namespace

TEST_CASE("ladder from log differences", "[tempering]") {
    const double ln2 = std::log(2.0);
    const auto fin = ladder_from_log_diffs(LogDiffAction{{ln2, ln2}}, TopMode::finite);
    REQUIRE(fin.size() == 3);
    CHECK(fin.betas[0] == 1.0);
    CHECK(fin.betas[1] == Approx(0.5).epsilon(1e-14));
    CHECK(fin.betas[2] == Approx(0.25).epsilon(1e-14));

    const auto single = ladder_from_log_diffs(LogDiffAction{{}}, TopMode::finite);
    REQUIRE(single.size() == 1);
    CHECK(single.betas[0] == 1.0);

    const auto inf = ladder_from_log_diffs(LogDiffAction{{ln2}}, TopMode::infinite);
    REQUIRE(inf.size() == 3);
    CHECK(inf.betas[1] == Approx(0.5).epsilon(1e-14));
    CHECK(inf.betas[2] == 0.0);

    CHECK_THROWS(ladder_from_log_diffs(LogDiffAction{{-0.1}}, TopMode::finite));
}

TEST_CASE("ladder invariants", "[tempering]") {
    CHECK_THROWS(TemperatureLadder({0.9, 0.5}));
    CHECK_THROWS(TemperatureLadder({1.0, 0.5, 0.5}));
    CHECK_THROWS(TemperatureLadder({1.0, 0.5, -0.1}));
    CHECK_NOTHROW(TemperatureLadder({1.0, 0.5, 0.0}));
}

TEST_CASE("action box validation", "[tempering]") {
    const DiffBounds bounds;  // [0.01, 10]
    CHECK_NOTHROW(validate_action(LogDiffAction{{0.01, 10.0, 1.0}}, bounds));
    CHECK_THROWS_AS(validate_action(LogDiffAction{{0.005}}, bounds), std::invalid_argument);
    CHECK_THROWS_AS(validate_action(LogDiffAction{{11.0}}, bounds), std::invalid_argument);
    CHECK_THROWS_AS(validate_action(LogDiffAction{{1.0}}, DiffBounds{2.0, 1.0}), std::invalid_argument);
}

TEST_CASE("geometric ladder", "[tempering]") {
    const auto g3 = geometric_ladder(3, 0.25);
    CHECK(g3.betas == std::vector<double>{1.0, 0.5, 0.25});
    const auto g2 = geometric_ladder(2, 0.1);
    CHECK(g2.betas == std::vector<double>{1.0, 0.1});
    CHECK_THROWS_AS(geometric_ladder(3, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(geometric_ladder(1, 0.5), std::invalid_argument);

    const auto g15 = geometric_ladder(15, 1e-3);
    const auto d = log_diffs_of(g15);
    for (double v : d) CHECK(v == Approx(d.front()).margin(1e-12));
}

TEST_CASE("swap log acceptance", "[tempering]") {
    CHECK(swap_log_accept(-3.0, -7.0, 0.5, 0.5) == 0.0);   // equal betas
    CHECK(swap_log_accept(-3.0, -3.0, 1.0, 0.25) == 0.0);  // equal densities
    CHECK(swap_log_accept(0.0, -2.0, 1.0, 0.5) == Approx(-1.0));
    // Zero-density states never move into a strictly colder chain, but are
    // always handed up.
    CHECK(swap_log_accept(-1.0, kNegInf, 1.0, 0.5) == kNegInf);
    CHECK(swap_log_accept(kNegInf, -1.0, 1.0, 0.5) == 0.0);
    CHECK(swap_log_accept(kNegInf, kNegInf, 1.0, 0.5) == 0.0);
    CHECK_THROWS_AS(swap_log_accept(0.0, 0.0, 0.5, 1.0), std::invalid_argument);
}

TEST_CASE("swap acceptance satisfies pairwise detailed balance", "[tempering]") {
    // log A(x,y) - log A(y,x) = (beta_i - beta_j)(log pi(y) - log pi(x)).
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
        const double lx = rng.uniform(-10.0, 0.0);
        const double ly = rng.uniform(-10.0, 0.0);
        const double bj = rng.uniform(0.0, 1.0);
        const double bi = bj + rng.uniform(0.0, 1.0 - bj);
        const double forward = swap_log_accept(lx, ly, bi, bj);
        const double backward = swap_log_accept(ly, lx, bi, bj);
        CHECK(forward - backward == Approx((bi - bj) * (ly - lx)).margin(1e-12));
    }
}

TEST_CASE("swap round degenerate cases", "[tempering]") {
    StepTarget t(1.0, 0.2);
    // Single chain: no adjacent pairs, nothing to do.
    {
        std::vector<Ensemble> es;
        es.push_back(two_walkers_at(t, 0.2, 0.4));
        PtState state(TemperatureLadder({1.0}), std::move(es), 11);
        CHECK(swap_round(state).empty());
    }
    // Equal cached densities at every walker: every attempt accepted.
    {
        std::vector<Ensemble> es;
        es.push_back(two_walkers_at(t, 0.2, 0.4));
        es.push_back(two_walkers_at(t, 0.1, 0.3));
        PtState state(TemperatureLadder({1.0, 0.5}), std::move(es), 12);
        const auto recs = swap_round(state);
        REQUIRE(recs.size() == 2);
        for (const auto& r : recs) CHECK(r.accepted);
    }
    // Walker count mismatch is rejected at construction.
    {
        std::vector<Ensemble> es;
        es.push_back(two_walkers_at(t, 0.2, 0.4));
        es.push_back(Ensemble(3, 1));
        CHECK_THROWS_AS(PtState(TemperatureLadder({1.0, 0.5}), std::move(es), 13),
                        std::invalid_argument);
    }
}

TEST_CASE("swap round conserves walker positions and counts attempts", "[tempering]") {
    const auto target = make_gaussian_mixture(9, 3, 2);
    PtState state(*target, geometric_ladder(3, 0.1), 6, 77);
    std::vector<double> before;
    for (std::size_t m = 0; m < 3; ++m)
        before.insert(before.end(), state.ensemble(m).positions.begin(), state.ensemble(m).positions.end());
    std::sort(before.begin(), before.end());

    const int rounds = 25;
    for (int r = 0; r < rounds; ++r) swap_round(state);

    std::vector<double> after;
    for (std::size_t m = 0; m < 3; ++m)
        after.insert(after.end(), state.ensemble(m).positions.begin(), state.ensemble(m).positions.end());
    std::sort(after.begin(), after.end());
    CHECK(before == after);  // swaps only exchange states

    const auto& stats = state.swap_stats();
    for (std::size_t pair = 0; pair < 2; ++pair)
        CHECK(stats.attempts[pair] == static_cast<std::uint64_t>(rounds) * 6);

    // Cache stays exact through exchanges.
    for (std::size_t m = 0; m < 3; ++m)
        for (std::size_t w = 0; w < 6; ++w)
            CHECK(state.ensemble(m).log_pi[w] == target->log_density(state.ensemble(m).walker(w)));
}

TEST_CASE("swap matching is a fresh uniform permutation", "[tempering]") {
    StepTarget t(1.0, 1.0);  // flat: every attempt accepted, matching fully visible
    std::vector<Ensemble> es;
    es.push_back(two_walkers_at(t, 0.2, 0.4));
    es.push_back(two_walkers_at(t, 0.6, 0.8));
    PtState state(TemperatureLadder({1.0, 0.5}), std::move(es), 2024);
    int crossed = 0;
    const int rounds = 10000;
    for (int r = 0; r < rounds; ++r) {
        const auto recs = swap_round(state);
        REQUIRE(recs.size() == 2);
        if (recs[0].hot_walker != recs[0].cold_walker) ++crossed;
        CHECK(recs[0].hot_walker != recs[1].hot_walker);  // perfect matching
    }
    CHECK(static_cast<double>(crossed) / rounds == Approx(0.5).margin(0.02));
}

TEST_CASE("swap acceptance frequency matches the analytic rate", "[tempering]") {
    // Configuration engineered so the analytic acceptance is exp(-1).
    StepTarget t(1.0, std::exp(-2.0));
    std::vector<Ensemble> es;
    es.push_back(two_walkers_at(t, 0.5, 0.5));  // cold chain in the tall region
    es.push_back(two_walkers_at(t, 1.5, 1.5));  // hot chain in the short region
    PtState state(TemperatureLadder({1.0, 0.5}), std::move(es), 31337);
    std::uint64_t accepted = 0, attempts = 0;
    const std::vector<double> cold_pos{0.5}, hot_pos{1.5};
    for (int r = 0; r < 50000; ++r) {
        // Reset the configuration so every attempt sees the same state.
        for (std::size_t w = 0; w < 2; ++w) {
            state.ensemble(0).set_walker(w, cold_pos, t.log_density(cold_pos));
            state.ensemble(1).set_walker(w, hot_pos, t.log_density(hot_pos));
        }
        for (const auto& rec : swap_round(state)) {
            ++attempts;
            if (rec.accepted) ++accepted;
        }
    }
    REQUIRE(attempts == 100000);
    CHECK(static_cast<double>(accepted) / static_cast<double>(attempts) ==
          Approx(std::exp(-1.0)).margin(0.01));
}

TEST_CASE("pt step degenerate cases", "[tempering]") {
    const auto target = make_gaussian_mixture(4, 2, 2);
    // M = 1 reduces to a single stretch sweep: positions move, no swaps.
    {
        std::vector<Ensemble> es;
        Rng init(9);
        es.push_back(Ensemble::init_uniform(*target, 4, init));
        PtState state(TemperatureLadder({1.0}), std::move(es), 55);
        const auto before = state.ensemble(0).positions;
        const auto recs = pt_step(state, *target, StretchConfig{});
        CHECK(recs.empty());
        CHECK(state.step_count() == 1);
        CHECK(state.ensemble(0).positions != before);
    }
    // All walkers at one point: every stretch proposal is the point itself
    // and swaps exchange identical states, so positions cannot change.
    {
        const std::vector<double> p{0.25, -0.5};
        const double lp = target->log_density(p);
        std::vector<Ensemble> es;
        for (int m = 0; m < 2; ++m) {
            Ensemble e(3, 2);
            for (std::size_t w = 0; w < 3; ++w) e.set_walker(w, p, lp);
            es.push_back(std::move(e));
        }
        PtState state(TemperatureLadder({1.0, 0.5}), std::move(es), 66);
        pt_step(state, *target, StretchConfig{});
        for (std::size_t m = 0; m < 2; ++m)
            for (std::size_t w = 0; w < 3; ++w) {
                CHECK(state.ensemble(m).walker(w)[0] == p[0]);
                CHECK(state.ensemble(m).walker(w)[1] == p[1]);
            }
    }
}

TEST_CASE("threaded sweeps are bit-identical to sequential", "[tempering]") {
    const auto target = make_gaussian_mixture(6, 4, 3);
    PtState s1(*target, geometric_ladder(4, 0.05), 8, 404);
    PtState s2(*target, geometric_ladder(4, 0.05), 8, 404);
    for (int step = 0; step < 50; ++step) {
        pt_step(s1, *target, StretchConfig{}, 1);
        pt_step(s2, *target, StretchConfig{}, 3);
    }
    for (std::size_t m = 0; m < 4; ++m) {
        CHECK(s1.ensemble(m).positions == s2.ensemble(m).positions);
        CHECK(s1.ensemble(m).log_pi == s2.ensemble(m).log_pi);
    }
}

TEST_CASE("acceptance rates require attempts and reset per window", "[tempering]") {
    const auto target = make_gaussian_mixture(2, 2, 2);
    PtState state(*target, geometric_ladder(3, 0.2), 4, 5);
    CHECK_THROWS_AS(acceptance_rates(state), std::runtime_error);
    for (int i = 0; i < 10; ++i) pt_step(state, *target, StretchConfig{});
    const auto rates = acceptance_rates(state);
    REQUIRE(rates.size() == 2);
    for (double r : rates) {
        CHECK(r >= 0.0);
        CHECK(r <= 1.0);
    }
    state.reset_window();
    CHECK_THROWS_AS(acceptance_rates(state), std::runtime_error);
}

TEST_CASE("joint chain preserves the product of tempered laws", "[tempering]") {
    // Two-region analogue of a 2-state discrete chain. At stationarity
    // region occupancy per chain is p_r^beta / sum, and the joint law is the
    // product across chains; compare in total variation.
    const double p1 = 0.2;
    StepTarget t(1.0, p1);
    const double b1 = 1.0, b2 = 0.5;
    auto mass0 = [&](double beta) {
        const double w0 = 1.0;  // p0^beta
        const double w1 = std::pow(p1, beta);
        return w0 / (w0 + w1);
    };
    PtState state(t, TemperatureLadder({b1, b2}), 2, 909);
    std::vector<std::uint64_t> counts(4, 0);
    const int total = 1000000;
    const int burn = 5000;
    for (int s = 0; s < total + burn; ++s) {
        pt_step(state, t, StretchConfig{});
        if (s < burn) continue;
        const int r1 = state.ensemble(0).walker(0)[0] < 1.0 ? 0 : 1;
        const int r2 = state.ensemble(1).walker(0)[0] < 1.0 ? 0 : 1;
        ++counts[r1 * 2 + r2];
    }
    const double m1 = mass0(b1), m2 = mass0(b2);
    const double expect[4] = {m1 * m2, m1 * (1 - m2), (1 - m1) * m2, (1 - m1) * (1 - m2)};
    double tv = 0.0;
    for (int c = 0; c < 4; ++c)
        tv += std::abs(static_cast<double>(counts[c]) / total - expect[c]);
    tv *= 0.5;
    CHECK(tv < 0.01);
}
