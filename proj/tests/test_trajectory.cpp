#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "qtraj/analytic.hpp"
#include "qtraj/trajectory.hpp"

using namespace qtraj;

namespace {

SystemParams strong_coupling_params() { return SystemParams{5.0, 0.9, 0.1, 0.5, 0.1}; }

SystemParams resonant_params() { return SystemParams{100.0, 0.9, 0.1, 0.5, 0.0}; }

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) {
        g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return g;
}

std::vector<double> jump_times(const EnsembleEstimate& e) {
    std::vector<double> out;
    for (const auto& rec : e.records) {
        if (rec.jump) out.push_back(rec.jump->time);
    }
    return out;
}

}  // namespace

TEST_SUITE("trajectory") {

TEST_CASE("jump-time sampling preconditions") {
    CHECK_THROWS_AS(sample_jump_time(strong_coupling_params(), 0.0, 5.0), std::invalid_argument);
    CHECK_THROWS_AS(sample_jump_time(strong_coupling_params(), 1.0, 5.0), std::invalid_argument);
    CHECK_THROWS_AS(sample_jump_time(strong_coupling_params(), -0.2, 5.0), std::invalid_argument);
    CHECK_THROWS_AS(sample_jump_time(strong_coupling_params(), 0.5, 0.0), std::invalid_argument);
}

TEST_CASE("u close to one jumps immediately") {
    const auto t = sample_jump_time(strong_coupling_params(), 1.0 - 1e-12, 5.0);
    REQUIRE(t.has_value());
    CHECK(*t >= 0.0);
    CHECK(*t < 1e-6);
}

TEST_CASE("u below the survival at the horizon means no jump") {
    // p_no(2) is still about 0.2 for the strong-coupling working point
    CHECK_FALSE(sample_jump_time(strong_coupling_params(), 1e-3, 2.0).has_value());
}

TEST_CASE("sampled jump times invert the survival probability") {
    const SystemParams p = strong_coupling_params();
    for (double u : {0.9, 0.6, 0.3, 0.05}) {
        const auto t = sample_jump_time(p, u, 40.0);
        REQUIRE(t.has_value());
        CHECK(p_no(p, *t) == doctest::Approx(u).epsilon(1e-7));
    }
}

TEST_CASE("resonant strong coupling reduces to exponential waiting times") {
    const SystemParams p = resonant_params();
    const double total = p.kappa() + p.gamma;
    for (double u : {0.9, 0.5, 0.2, 0.05}) {
        const auto t = sample_jump_time(p, u, 40.0);
        REQUIRE(t.has_value());
        CHECK(*t == doctest::Approx(-2.0 * std::log(u) / total).epsilon(0.01));
    }
}

TEST_CASE("channel selection follows the instantaneous rates") {
    SUBCASE("no spontaneous channel without atomic decay") {
        const SystemParams p{5.0, 0.9, 0.1, 0.0, 0.0};
        const NoJumpAmplitudes amp{complexd(0.6, 0.0), complexd(0.5, 0.3), 1.0};
        for (double u : linspace(0.001, 0.999, 41)) {
            CHECK(sample_channel(p, amp, u) != JumpChannel::Spontaneous);
        }
    }
    SUBCASE("single open channel always wins") {
        const SystemParams p{5.0, 1.0, 0.0, 0.0, 0.0};
        const NoJumpAmplitudes amp{complexd(0.6, 0.0), complexd(0.5, 0.3), 1.0};
        for (double u : linspace(0.001, 0.999, 41)) {
            CHECK(sample_channel(p, amp, u) == JumpChannel::Extraction);
        }
    }
    SUBCASE("empty cavity can only emit spontaneously") {
        const SystemParams p{5.0, 0.9, 0.1, 0.5, 0.0};
        const NoJumpAmplitudes amp{complexd(0.8, 0.0), complexd(0.0, 0.0), 1.0};
        for (double u : linspace(0.001, 0.999, 11)) {
            CHECK(sample_channel(p, amp, u) == JumpChannel::Spontaneous);
        }
    }
    SUBCASE("zero total rate is rejected") {
        const SystemParams p{5.0, 0.9, 0.1, 0.0, 0.0};
        const NoJumpAmplitudes amp{complexd(1.0, 0.0), complexd(0.0, 0.0), 0.0};
        CHECK_THROWS_AS(sample_channel(p, amp, 0.5), std::invalid_argument);
    }
}

TEST_CASE("ensemble preconditions") {
    CHECK_THROWS_AS(run_ensemble(strong_coupling_params(), 0, linspace(0, 5, 11), 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(run_ensemble(strong_coupling_params(), 10, {0.0, 0.5, 0.4}, 1),
                    std::invalid_argument);
}

TEST_CASE("a single trajectory still yields a consistent estimate") {
    const auto est = run_ensemble(strong_coupling_params(), 1, linspace(0, 5, 21), 7);
    CHECK(est.records.size() == 1);
    for (std::size_t i = 0; i < est.t_grid.size(); ++i) {
        CHECK(est.est_p_a[i] + est.est_p_b[i] + est.est_p_c[i] == 1.0);
    }
}

TEST_CASE("decoupled atom emits spontaneously with exponential waiting times") {
    const SystemParams p{0.0, 0.6, 0.4, 0.5, 0.0};
    const auto grid = linspace(0.0, 20.0, 51);
    const auto est = run_ensemble(p, 5000, grid, 99);
    std::size_t jumps = 0;
    for (const auto& rec : est.records) {
        if (!rec.jump) continue;
        ++jumps;
        CHECK(rec.jump->channel == JumpChannel::Spontaneous);
    }
    CHECK(jumps > 4900);  // p_no(20) = e^{-10}, nearly everything has decayed
    const double d = testing::ks_distance_survival(
        jump_times(est), est.n_trajectories,
        [&](double t) { return std::exp(-p.gamma * t); });
    CHECK(d < 3.0 * std::sqrt(std::log(2.0 / 0.05) / (2.0 * 5000)));
}

TEST_CASE("ensembles are reproducible and thread-count independent") {
    const auto grid = linspace(0.0, 8.0, 101);
    const auto a = run_ensemble(strong_coupling_params(), 3000, grid, 20250810, 1);
    const auto b = run_ensemble(strong_coupling_params(), 3000, grid, 20250810, 4);
    CHECK(a.est_p_a == b.est_p_a);
    CHECK(a.est_p_b == b.est_p_b);
    CHECK(a.est_p_c == b.est_p_c);
    CHECK(a.se_b == b.se_b);
    CHECK(a.channel_counts == b.channel_counts);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].jump.has_value() == b.records[i].jump.has_value());
        if (a.records[i].jump) {
            CHECK(a.records[i].jump->time == b.records[i].jump->time);
            CHECK(a.records[i].jump->channel == b.records[i].jump->channel);
        }
    }
    const auto c = run_ensemble(strong_coupling_params(), 3000, grid, 99, 1);
    CHECK(c.est_p_c != a.est_p_c);  // a different seed gives a different ensemble
}

TEST_CASE("population estimates sum to one exactly") {
    const auto grid = linspace(0.0, 9.0, 301);
    const auto est = run_ensemble(strong_coupling_params(), 4000, grid, 5);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(est.est_p_a[i] + est.est_p_b[i] + est.est_p_c[i] == 1.0);
    }
    const TruncatedScenario scen{strong_coupling_params(), 0.3142};
    const auto est2 = run_ensemble(scen, 4000, grid, 5);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(est2.est_p_a[i] + est2.est_p_b[i] + est2.est_p_c[i] == 1.0);
    }
}

TEST_CASE("records hold at most one jump inside the horizon") {
    const auto grid = linspace(0.0, 6.0, 61);
    const auto est = run_ensemble(strong_coupling_params(), 2000, grid, 31);
    std::int64_t total = 0;
    for (const auto& rec : est.records) {
        CHECK(rec.horizon == 6.0);
        if (rec.jump) {
            ++total;
            CHECK(rec.jump->time > 0.0);
            CHECK(rec.jump->time <= 6.0);
        }
    }
    CHECK(total == est.channel_counts[0] + est.channel_counts[1] + est.channel_counts[2]);
}

TEST_CASE("empirical survival matches the closed form (KS)") {
    const SystemParams p = strong_coupling_params();
    const std::size_t n = 20000;
    const auto est = run_ensemble(p, n, linspace(0.0, 10.0, 41), 424242);
    const double d = testing::ks_distance_survival(
        jump_times(est), n, [&](double t) { return p_no(p, t); });
    CHECK(d < 3.0 * std::sqrt(std::log(2.0 / 0.05) / (2.0 * static_cast<double>(n))));
}

TEST_CASE("ensemble means track the analytic populations within three sigma") {
    const SystemParams p = strong_coupling_params();
    const std::size_t n = 20000;
    const auto grid = linspace(0.0, 10.0, 201);
    const auto est = run_ensemble(p, n, grid, 20240131);
    const AmplitudeSolution sol(p);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const NoJumpAmplitudes a = sol.eval(grid[i]);
        const double pa = std::norm(a.alpha);
        const double pb = std::norm(a.beta);
        const double survive = pa + pb;
        const double se_alive = std::sqrt(survive * (1.0 - survive) / static_cast<double>(n));
        const double slack = 1e-9;
        CHECK(std::abs(est.est_p_a[i] - pa) <= 3.0 * (pa / std::max(survive, 1e-300)) * se_alive + slack);
        CHECK(std::abs(est.est_p_b[i] - pb) <= 3.0 * (pb / std::max(survive, 1e-300)) * se_alive + slack);
        CHECK(std::abs(est.est_p_c[i] - (1.0 - survive)) <= 3.0 * se_alive + slack);
    }
}

TEST_CASE("channel fractions converge to the cumulative channel probabilities") {
    const SystemParams p = strong_coupling_params();
    const std::size_t n = 20000;
    const double horizon = 12.0;
    const auto est = run_ensemble(p, n, linspace(0.0, horizon, 41), 777);
    const double ib = integral_beta_sq(p, 0.0, horizon);
    const double ia = integral_alpha_sq(p, 0.0, horizon);
    const double expected[3] = {p.kappa1 * ib, p.kappa2 * ib, p.gamma * ia};
    for (int c = 0; c < 3; ++c) {
        const double frac =
            static_cast<double>(est.channel_counts[c]) / static_cast<double>(n);
        const double se = std::sqrt(expected[c] * (1.0 - expected[c]) / static_cast<double>(n));
        CHECK(std::abs(frac - expected[c]) <= 3.0 * se);
    }
}

TEST_CASE("truncated ensembles follow the stored-photon dynamics") {
    const SystemParams p = strong_coupling_params();
    const double tau = M_PI / std::abs(compute_omega(p).value);
    const TruncatedScenario scen{p, tau};
    const std::size_t n = 20000;
    const auto grid = linspace(0.0, 10.0, 101);
    const auto est = run_ensemble(scen, n, grid, 13579);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double expected = p_in(scen, grid[i]);
        const double se = std::sqrt(expected * (1.0 - expected) / static_cast<double>(n));
        CHECK(std::abs(est.est_p_b[i] - expected) <= 3.0 * se + 1e-9);
        if (grid[i] > tau) CHECK(est.est_p_a[i] == 0.0);
    }
    // channel totals against the truncated bookkeeping
    const double expect_ext = p_ext_bar_infinity(scen);
    const double expect_abs = p_abs_bar_infinity(scen);
    const double expect_spo = p.gamma * integral_alpha_sq(p, 0.0, tau);
    const double fractions[3] = {
        static_cast<double>(est.channel_counts[0]) / static_cast<double>(n),
        static_cast<double>(est.channel_counts[1]) / static_cast<double>(n),
        static_cast<double>(est.channel_counts[2]) / static_cast<double>(n)};
    const double expected[3] = {expect_ext, expect_abs, expect_spo};
    for (int c = 0; c < 3; ++c) {
        const double se =
            std::sqrt(expected[c] * (1.0 - expected[c]) / static_cast<double>(n));
        CHECK(std::abs(fractions[c] - expected[c]) <= 3.0 * se + 1e-4);
    }
}

TEST_CASE("click histogram estimates the extraction rate") {
    const SystemParams p = strong_coupling_params();
    const std::size_t n = 100000;
    const double horizon = 10.0;
    const auto est = run_ensemble(p, n, linspace(0.0, horizon, 21), 2024);
    const double bin = 0.05;
    const auto hist = click_histogram(est, JumpChannel::Extraction, bin);

    SUBCASE("bin counts follow the bin-averaged rate within three sigma") {
        for (std::size_t k = 0; k < hist.counts.size(); ++k) {
            const double lo = static_cast<double>(k) * bin;
            const double hi = std::min(lo + bin, horizon);
            const double q = p.kappa1 * integral_beta_sq(p, lo, hi);
            const double sd = std::sqrt(static_cast<double>(n) * q * (1.0 - q));
            // the 3-count floor covers Poisson discreteness in near-empty bins
            CHECK(std::abs(static_cast<double>(hist.counts[k]) - static_cast<double>(n) * q) <=
                  3.0 * sd + 3.0);
        }
    }
    SUBCASE("histogram mass adds up to the extraction probability") {
        double mass = 0.0;
        for (std::size_t k = 0; k < hist.counts.size(); ++k) {
            mass += hist.density[k] * bin;
        }
        CHECK(mass == doctest::Approx(p.kappa1 * integral_beta_sq(p, 0.0, horizon)).epsilon(0.01));
    }
    SUBCASE("closed extraction channel leaves an empty histogram") {
        const SystemParams closed{5.0, 0.0, 1.0, 0.5, 0.1};
        const auto est2 = run_ensemble(closed, 2000, linspace(0.0, 8.0, 11), 6);
        const auto hist2 = click_histogram(est2, JumpChannel::Extraction, 0.1);
        for (const auto c : hist2.counts) CHECK(c == 0);
    }
}

}  // TEST_SUITE
