// analytic.hpp — closed-form no-jump amplitudes, the probability bookkeeping
// of the three decay channels, and the piecewise dynamics when the atom-field
// interaction is switched off at a finite time tau.

#pragma once

#include <utility>
#include <vector>

#include "qtraj/model.hpp"

namespace qtraj {

// Populations and cumulative channel probabilities at one instant.
struct ProbabilityBundle {
    double t = 0.0;
    double p_a = 0.0;    // |alpha|^2
    double p_b = 0.0;    // |beta|^2
    double p_ext = 0.0;  // kappa1 * int_0^t |beta|^2
    double p_abs = 0.0;  // kappa2 * int_0^t |beta|^2
    double p_spo = 0.0;  // gamma  * int_0^t |alpha|^2
    double p_yes = 0.0;  // 1 - |alpha|^2 - |beta|^2
};

// Interaction switched off at time tau >= 0; afterwards the cavity field
// decays freely at rate kappa and the atom is out of the problem.
struct TruncatedScenario {
    SystemParams params;
    double tau = 0.0;
};

// Cached closed-form solution of the non-Hermitian two-level problem
//   d alpha/dt = -i (delta - i gamma/2) alpha - i g beta
//   d beta/dt  = -i g alpha - kappa/2 beta
// with alpha(0) = 1, beta(0) = 0.  Cheap to construct, cheaper to evaluate;
// the trajectory sampler calls eval() in a tight loop.
class AmplitudeSolution {
  public:
    explicit AmplitudeSolution(const SystemParams& p);
    // Evaluate with an explicit branch of Omega (the result is branch-even;
    // tests exercise both signs).
    AmplitudeSolution(const SystemParams& p, complexd omega);

    NoJumpAmplitudes eval(double t) const;  // t >= 0 required
    double norm_sq(double t) const { return eval(t).norm_sq(); }
    complexd omega() const { return omega_; }

  private:
    complexd omega_;      // Rabi-type complex rate
    complexd lin_coef_;   // kappa/2 - i (delta - i gamma/2)
    double g2_;           // 2 g
    double decay_;        // (kappa + gamma)/4
    double drift_;        // delta/2
};

NoJumpAmplitudes amplitudes(const SystemParams& p, double t);

// |alpha(t)|^2 + |beta(t)|^2, the no-jump survival probability.
double p_no(const SystemParams& p, double t);

// int_{t0}^{t1} |beta|^2 dt and int_{t0}^{t1} |alpha|^2 dt by adaptive
// Gauss-Kronrod quadrature, absolute accuracy well below 1e-9.
double integral_beta_sq(const SystemParams& p, double t0, double t1);
double integral_alpha_sq(const SystemParams& p, double t0, double t1);

// Smallest horizon T with |alpha(T)|^2 + |beta(T)|^2 < 1e-12, from the
// exponential envelope of the closed-form solution.  Throws when the
// excitation does not decay (kappa + gamma = 0, or g = 0 with gamma = 0)
// or when T would exceed 1e5 / kappa.
double tail_time(const SystemParams& p);

// Populations and cumulative channel probabilities on an ascending grid.
std::vector<ProbabilityBundle> populations_and_cumulative(
    const SystemParams& p, const std::vector<double>& t_grid);

// t -> infinity channel probabilities.  p_ext + p_abs + p_spo = 1.
double p_ext_infinity(const SystemParams& p);
double p_abs_infinity(const SystemParams& p);
double p_spo_infinity(const SystemParams& p);

// Probability to find a photon inside the cavity at time t when the
// interaction stops at tau:
//   theta(tau - t) |beta(t)|^2 + theta(t - tau) |beta(tau)|^2 e^{-kappa (t-tau)}
double p_in(const TruncatedScenario& s, double t);

// Extraction probability accumulated in [0, t] for the truncated interaction,
// and its t -> infinity limit  p_ext(tau) + (kappa1/kappa) |beta(tau)|^2.
double p_ext_bar(const TruncatedScenario& s, double t);
double p_ext_bar_infinity(const TruncatedScenario& s);

// Total absorption probability for the truncated interaction,
//   p_abs(tau) + (kappa2/kappa) |beta(tau)|^2.
double p_abs_bar_infinity(const TruncatedScenario& s);

// Damped Rabi limit (delta = 0, g >> kappa, gamma):
//   p_a = cos^2(g t) e^{-(kappa+gamma) t / 2},  p_b = sin^2(g t) e^{-...}.
// Validation target only, not a production path.
std::pair<double, double> resonant_limit_populations(const SystemParams& p, double t);

}  // namespace qtraj
