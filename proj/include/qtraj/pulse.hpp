// pulse.hpp — spatiotemporal mode of the photon extracted from the cavity.
// Photodetection statistics determine the amplitude envelope of the mode:
// at the output mirror it is proportional to |beta(t)|, normalized so that
// the squared envelope integrates to one.  At a distance z the envelope is
// the z = 0 one evaluated at the retarded time t - z/c.

#pragma once

#include <optional>
#include <vector>

#include "qtraj/analytic.hpp"
#include "qtraj/model.hpp"

namespace qtraj {

// Sampled amplitude envelope epsilon(t) (units 1/sqrt(time)) together with
// the scenario it was built from, so it can be re-evaluated at arbitrary
// times and positions.  phase holds arg beta(t), the natural phase
// candidate; photodetection fixes only the magnitude, so the phase is
// informative, not normative.
struct PulseEnvelope {
    std::vector<double> t_grid;
    std::vector<double> epsilon;
    std::vector<double> phase;
    double p_ext_inf = 0.0;  // normalization weight actually used
    SystemParams params;
    std::optional<double> tau;  // set for truncated scenarios

    // Closed-form envelope at arbitrary t (zero for t < 0).
    double eval(double t) const;
};

// epsilon(t) = sqrt(kappa1 / p_ext(inf)) |beta(t)| sampled on t_grid.
// Throws when no extracted mode exists (p_ext(inf) = 0).
PulseEnvelope envelope_continuous(const SystemParams& p, const std::vector<double>& t_grid);

// sqrt(pbar_ext(inf)/kappa1) epsilon(t) =
//   theta(tau - t) |beta(t)| + theta(t - tau) |beta(tau)| e^{-kappa (t-tau)/2},
// continuous at tau and normalized with weight pbar_ext(inf).
PulseEnvelope envelope_truncated(const TruncatedScenario& s, const std::vector<double>& t_grid);

// Envelope at distance z >= 0 from the output mirror: epsilon(0, t - z/c)
// for t > z/c, zero before the front arrives.
double envelope_at_z(const PulseEnvelope& env, double z, double c, double t);

// Response probability of a detector of efficiency eta and resolution time T
// centered at t:  eta p_ext(inf) epsilon^2(t) T  ( = eta kappa1 |beta(t)|^2 T ).
double detector_response(const PulseEnvelope& env, double eta, double T, double t);

// int_0^inf epsilon^2 dt by quadrature over the support plus the analytic
// exponential tail; equal to one for a correctly normalized envelope.
double envelope_norm_sq(const PulseEnvelope& env);

// The output field is a statistical mixture of one photon in the extracted
// mode and vacuum.
struct OutputFieldState {
    double weight_one_photon = 0.0;
    double weight_vacuum = 0.0;
};

OutputFieldState output_state(const SystemParams& p);
OutputFieldState output_state(const TruncatedScenario& s);

}  // namespace qtraj
