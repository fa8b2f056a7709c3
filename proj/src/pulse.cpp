#include "qtraj/pulse.hpp"

#include <cmath>
#include <stdexcept>

#include "quadrature.hpp"

namespace qtraj {

namespace {

// Unnormalized envelope sqrt(pbar_ext/kappa1) * epsilon(t): |beta(t)| while
// the interaction lasts, then |beta(tau)| e^{-kappa (t-tau)/2}.
double raw_envelope(const SystemParams& p, const std::optional<double>& tau, double t) {
    if (t < 0.0) return 0.0;
    if (!tau || t <= *tau) return std::abs(amplitudes(p, t).beta);
    const double beta_tau = std::abs(amplitudes(p, *tau).beta);
    return beta_tau * std::exp(-p.kappa() * (t - *tau) / 2.0);
}

PulseEnvelope build(const SystemParams& p, std::optional<double> tau, double weight,
                    const std::vector<double>& t_grid) {
    if (weight <= 0.0) {
        throw std::runtime_error("pulse envelope: no extracted mode exists (p_ext = 0)");
    }
    PulseEnvelope env;
    env.params = p;
    env.tau = tau;
    env.p_ext_inf = weight;
    env.t_grid = t_grid;
    env.epsilon.reserve(t_grid.size());
    env.phase.reserve(t_grid.size());
    const double scale = std::sqrt(p.kappa1 / weight);
    for (double t : t_grid) {
        env.epsilon.push_back(scale * raw_envelope(p, tau, t));
        const complexd beta =
            (tau && t > *tau) ? amplitudes(p, *tau).beta : amplitudes(p, std::max(t, 0.0)).beta;
        env.phase.push_back(std::arg(beta));
    }
    return env;
}

}  // namespace

double PulseEnvelope::eval(double t) const {
    return std::sqrt(params.kappa1 / p_ext_inf) * raw_envelope(params, tau, t);
}

PulseEnvelope envelope_continuous(const SystemParams& p, const std::vector<double>& t_grid) {
    p.validate();
    return build(p, std::nullopt, p_ext_infinity(p), t_grid);
}

PulseEnvelope envelope_truncated(const TruncatedScenario& s, const std::vector<double>& t_grid) {
    s.params.validate();
    if (s.tau < 0.0) throw std::invalid_argument("envelope_truncated: tau must be nonnegative");
    return build(s.params, s.tau, p_ext_bar_infinity(s), t_grid);
}

double envelope_at_z(const PulseEnvelope& env, double z, double c, double t) {
    if (z < 0.0) throw std::invalid_argument("envelope_at_z: z must be nonnegative");
    if (!(c > 0.0)) throw std::invalid_argument("envelope_at_z: c must be positive");
    const double retarded = t - z / c;
    if (retarded < 0.0) return 0.0;  // the front has not arrived yet
    return env.eval(retarded);
}

double detector_response(const PulseEnvelope& env, double eta, double T, double t) {
    if (eta < 0.0 || eta > 1.0) {
        throw std::invalid_argument("detector_response: eta must lie in [0, 1]");
    }
    if (!(T > 0.0)) throw std::invalid_argument("detector_response: T must be positive");
    const double eps = env.eval(t);
    return eta * env.p_ext_inf * eps * eps * T;
}

double envelope_norm_sq(const PulseEnvelope& env) {
    const SystemParams& p = env.params;
    const complexd omega = compute_omega(p).value;
    const auto eps_sq = [&](double t) {
        const double e = env.eval(t);
        return e * e;
    };
    if (env.tau) {
        // Exact exponential tail beyond tau, decay rate kappa for epsilon^2.
        const double at_tau = env.eval(*env.tau);
        const double k = p.kappa();
        const double tail = k > 0.0 ? at_tau * at_tau / k : 0.0;
        return detail::integrate_chunked(eps_sq, 0.0, *env.tau, p, omega) + tail;
    }
    // The surviving norm beyond the tail horizon is below 1e-12.
    const double horizon = tail_time(p);
    return detail::integrate_chunked(eps_sq, 0.0, horizon, p, omega);
}

OutputFieldState output_state(const SystemParams& p) {
    const double w = p_ext_infinity(p);
    return OutputFieldState{w, 1.0 - w};
}

OutputFieldState output_state(const TruncatedScenario& s) {
    const double w = p_ext_bar_infinity(s);
    return OutputFieldState{w, 1.0 - w};
}

}  // namespace qtraj
