#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "qtraj/analytic.hpp"
#include "qtraj/pulse.hpp"
#include "qtraj/trajectory.hpp"

using namespace qtraj;

namespace {

SystemParams strong_coupling_params() { return SystemParams{5.0, 0.9, 0.1, 0.5, 0.1}; }

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) {
        g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return g;
}

double abs_omega() { return std::abs(compute_omega(strong_coupling_params()).value); }

}  // namespace

TEST_SUITE("pulse") {

TEST_CASE("continuous envelope is the scaled photon amplitude") {
    const SystemParams p = strong_coupling_params();
    const auto grid = linspace(0.0, 7.0, 400);
    const PulseEnvelope env = envelope_continuous(p, grid);
    const double scale = std::sqrt(p.kappa1 / env.p_ext_inf);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double expected = scale * std::abs(amplitudes(p, grid[i]).beta);
        CHECK(env.epsilon[i] == doctest::Approx(expected).epsilon(1e-13));
        CHECK(env.epsilon[i] >= 0.0);
    }
    CHECK(env.p_ext_inf == doctest::Approx(p_ext_infinity(p)).epsilon(1e-12));
}

TEST_CASE("continuous envelope is normalized") {
    const PulseEnvelope env = envelope_continuous(strong_coupling_params(), linspace(0.0, 40.0, 4000));
    CHECK(envelope_norm_sq(env) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("grid trapezoid with tail bound reproduces the unit norm") {
    // dense sampling so the trapezoid error sits below the 1e-6 budget
    const SystemParams p = strong_coupling_params();
    const double horizon = tail_time(p);
    const auto grid = linspace(0.0, horizon, 300000);
    const PulseEnvelope env = envelope_continuous(p, grid);
    double trapz = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        trapz += 0.5 * (env.epsilon[i - 1] * env.epsilon[i - 1] + env.epsilon[i] * env.epsilon[i]) *
                 (grid[i] - grid[i - 1]);
    }
    CHECK(trapz == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("partial norm equals the relative extraction probability") {
    const SystemParams p = strong_coupling_params();
    const PulseEnvelope env = envelope_continuous(p, linspace(0.0, 7.0, 100));
    const double p_ext_inf = env.p_ext_inf;
    for (double t : {0.5, 1.0, 2.5, 5.0}) {
        const double partial =
            (p.kappa1 / p_ext_inf) * integral_beta_sq(p, 0.0, t);
        const double expected = (p.kappa1 * integral_beta_sq(p, 0.0, t)) / p_ext_inf;
        CHECK(partial == doctest::Approx(expected).epsilon(1e-12));
        // cumulative square of the envelope itself, integrated independently
        double acc = 0.0;
        const auto fine = linspace(0.0, t, 20000);
        for (std::size_t i = 1; i < fine.size(); ++i) {
            const double e0 = env.eval(fine[i - 1]);
            const double e1 = env.eval(fine[i]);
            acc += 0.5 * (e0 * e0 + e1 * e1) * (fine[i] - fine[i - 1]);
        }
        CHECK(acc == doctest::Approx(expected).epsilon(2e-4));
    }
}

TEST_CASE("envelope zeros sit at the photon-amplitude nodes") {
    const SystemParams p = strong_coupling_params();
    const auto grid = linspace(0.0, 7.0, 4001);
    const PulseEnvelope env = envelope_continuous(p, grid);
    const double peak = *std::max_element(env.epsilon.begin(), env.epsilon.end());
    // interior local minima of the sampled envelope
    const double abs_om = abs_omega();
    for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
        if (env.epsilon[i] < env.epsilon[i - 1] && env.epsilon[i] < env.epsilon[i + 1] &&
            grid[i] > 0.05) {
            // node times of |beta| are multiples of the Rabi period 2 pi/|Omega|
            const double cycles = grid[i] * abs_om / (2.0 * M_PI);
            CHECK(std::abs(cycles - std::round(cycles)) < 0.02);
            CHECK(env.epsilon[i] < 0.02 * peak);
        }
    }
}

TEST_CASE("missing extraction channel leaves no mode to normalize") {
    const SystemParams p{5.0, 0.0, 1.0, 0.5, 0.0};
    CHECK_THROWS_AS(envelope_continuous(p, linspace(0.0, 5.0, 10)), std::runtime_error);
}

TEST_CASE("truncated envelope") {
    const SystemParams p = strong_coupling_params();
    SUBCASE("is continuous at the cutoff and decays at kappa/2 afterwards") {
        const TruncatedScenario s{p, M_PI / abs_omega()};
        const PulseEnvelope env = envelope_truncated(s, linspace(0.0, 7.0, 100));
        const double at_tau = env.eval(s.tau);
        CHECK(at_tau > 0.0);
        for (double dt : {0.01, 0.3, 1.0, 2.5}) {
            CHECK(env.eval(s.tau + dt) ==
                  doctest::Approx(at_tau * std::exp(-p.kappa() * dt / 2.0)).epsilon(1e-12));
        }
    }
    SUBCASE("is normalized for the cutoffs of interest") {
        for (double tau : {M_PI / abs_omega(), 2.0 * M_PI / abs_omega(), 2.2}) {
            const TruncatedScenario s{p, tau};
            const PulseEnvelope env = envelope_truncated(s, linspace(0.0, 7.0, 100));
            CHECK(envelope_norm_sq(env) == doctest::Approx(1.0).epsilon(1e-6));
            CHECK(env.p_ext_inf == doctest::Approx(p_ext_bar_infinity(s)).epsilon(1e-12));
        }
    }
    SUBCASE("a full Rabi cycle yields a compact pulse") {
        const TruncatedScenario s{p, 2.0 * M_PI / abs_omega()};
        const PulseEnvelope env = envelope_truncated(s, linspace(0.0, 7.0, 2000));
        const double peak = *std::max_element(env.epsilon.begin(), env.epsilon.end());
        for (double t : linspace(s.tau + 0.1, 7.0, 50)) {
            CHECK(env.eval(t) < 1e-2 * peak);
        }
    }
    SUBCASE("late cutoffs recover the continuous envelope") {
        const TruncatedScenario s{p, 50.0};
        const auto grid = linspace(0.0, 7.0, 200);
        const PulseEnvelope trunc = envelope_truncated(s, grid);
        const PulseEnvelope cont = envelope_continuous(p, grid);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            CHECK(trunc.epsilon[i] == doctest::Approx(cont.epsilon[i]).epsilon(1e-9));
        }
    }
}

TEST_CASE("retarded-time evaluation") {
    const SystemParams p = strong_coupling_params();
    const PulseEnvelope env = envelope_continuous(p, linspace(0.0, 7.0, 50));
    SUBCASE("zero distance is the local envelope") {
        for (double t : {0.0, 0.4, 1.3, 6.0}) {
            CHECK(envelope_at_z(env, 0.0, 1.0, t) == env.eval(t));
        }
    }
    SUBCASE("shifting the distance shifts the profile exactly") {
        const double dz = 1.7;
        for (double t : {2.0, 3.5, 5.0}) {
            CHECK(envelope_at_z(env, dz, 1.0, t + dz) == envelope_at_z(env, 0.0, 1.0, t));
        }
    }
    SUBCASE("nothing arrives before the light front") {
        CHECK(envelope_at_z(env, 3.0, 1.0, 2.9) == 0.0);
        CHECK(envelope_at_z(env, 3.0, 1.0, 3.0) == 0.0);  // beta(0) = 0
        CHECK(envelope_at_z(env, 6.0, 2.0, 2.9) == 0.0);
    }
    SUBCASE("negative distances are rejected") {
        CHECK_THROWS_AS(envelope_at_z(env, -0.1, 1.0, 1.0), std::invalid_argument);
    }
}

TEST_CASE("detector response") {
    const SystemParams p = strong_coupling_params();
    const PulseEnvelope env = envelope_continuous(p, linspace(0.0, 7.0, 50));
    SUBCASE("a blind detector never clicks") {
        CHECK(detector_response(env, 0.0, 0.05, 1.0) == 0.0);
    }
    SUBCASE("both algebraic forms coincide") {
        for (double t : {0.2, 0.9, 2.4, 5.5}) {
            const double via_envelope = detector_response(env, 0.7, 0.05, t);
            const double via_rate =
                0.7 * p.kappa1 * std::norm(amplitudes(p, t).beta) * 0.05;
            CHECK(via_envelope == doctest::Approx(via_rate).epsilon(1e-13));
        }
    }
    SUBCASE("unit-efficiency response integrates to the extraction probability") {
        const double T = 0.01;
        const double horizon = tail_time(p);
        double acc = 0.0;
        const auto fine = linspace(0.0, horizon, 200000);
        for (std::size_t i = 1; i < fine.size(); ++i) {
            const double r0 = detector_response(env, 1.0, T, fine[i - 1]) / T;
            const double r1 = detector_response(env, 1.0, T, fine[i]) / T;
            acc += 0.5 * (r0 + r1) * (fine[i] - fine[i - 1]);
        }
        CHECK(acc == doctest::Approx(env.p_ext_inf).epsilon(1e-5));
    }
}

TEST_CASE("output field statistics") {
    SUBCASE("lossless mirrors put the photon in the mode with certainty") {
        const SystemParams p{1.0, 1.0, 0.0, 0.0, 0.0};
        const OutputFieldState out = output_state(p);
        CHECK(out.weight_one_photon == doctest::Approx(1.0).epsilon(1e-8));
        CHECK(out.weight_vacuum == doctest::Approx(0.0).epsilon(1e-8));
    }
    SUBCASE("strong-coupling resonant weights follow the rate ratios") {
        const SystemParams p{100.0, 0.9, 0.1, 0.5, 0.0};
        const OutputFieldState out = output_state(p);
        CHECK(out.weight_one_photon == doctest::Approx(0.6).epsilon(0.01));
        CHECK(out.weight_vacuum == doctest::Approx(0.4).epsilon(0.015));
    }
    SUBCASE("vacuum weight is the lost-photon probability") {
        const SystemParams p = strong_coupling_params();
        const OutputFieldState out = output_state(p);
        CHECK(out.weight_vacuum ==
              doctest::Approx(p_abs_infinity(p) + p_spo_infinity(p)).epsilon(1e-8));
        CHECK(out.weight_one_photon + out.weight_vacuum == 1.0);
    }
    SUBCASE("full-Rabi cutoff freezes the extraction probability") {
        const SystemParams p = strong_coupling_params();
        const TruncatedScenario s{p, 2.0 * M_PI / abs_omega()};
        const OutputFieldState out = output_state(s);
        const double p_ext_tau = p.kappa1 * integral_beta_sq(p, 0.0, s.tau);
        CHECK(std::abs(out.weight_one_photon - p_ext_tau) < 1e-5);
    }
}

TEST_CASE("envelope agrees with the extraction click histogram") {
    const SystemParams p = strong_coupling_params();
    const std::size_t n = 30000;
    const double horizon = 10.0;
    const auto est = run_ensemble(p, n, linspace(0.0, horizon, 11), 808);
    const double bin = 0.1;
    const auto hist = click_histogram(est, JumpChannel::Extraction, bin);
    const PulseEnvelope env = envelope_continuous(p, linspace(0.0, horizon, 50));
    for (std::size_t k = 0; k < hist.counts.size(); ++k) {
        const double lo = static_cast<double>(k) * bin;
        const double hi = std::min(lo + bin, horizon);
        const double q = p.kappa1 * integral_beta_sq(p, lo, hi);
        // bin-averaged envelope rate: p_ext_inf * mean(epsilon^2) over the bin
        double eps_mass = 0.0;
        const auto fine = linspace(lo, hi, 200);
        for (std::size_t i = 1; i < fine.size(); ++i) {
            const double e0 = env.eval(fine[i - 1]);
            const double e1 = env.eval(fine[i]);
            eps_mass += 0.5 * (e0 * e0 + e1 * e1) * (fine[i] - fine[i - 1]);
        }
        CHECK(env.p_ext_inf * eps_mass == doctest::Approx(q).epsilon(1e-3));
        const double sd = std::sqrt(static_cast<double>(n) * q * (1.0 - q));
        CHECK(std::abs(static_cast<double>(hist.counts[k]) - static_cast<double>(n) * q) <=
              3.0 * sd + 3.0);
    }
}

}  // TEST_SUITE
