// model.hpp — parameters, basis conventions and operator matrices for a
// two-level atom coupled to a single lossy cavity mode.

#pragma once

#include <complex>

#include <Eigen/Dense>

namespace qtraj {

using complexd = std::complex<double>;

// Physical rates, all in the same unit of inverse time.  The CLI works in
// units where kappa = kappa1 + kappa2 = 1; the library is unit-agnostic.
struct SystemParams {
    double g = 0.0;       // atom-cavity coupling
    double kappa1 = 0.0;  // photon escape rate through the output mirror
    double kappa2 = 0.0;  // mirror absorption/scattering rate
    double gamma = 0.0;   // spontaneous emission rate out the side of the cavity
    double delta = 0.0;   // atom-cavity detuning, may have either sign

    double kappa() const { return kappa1 + kappa2; }

    // Throws std::invalid_argument if any rate is negative or non-finite.
    void validate() const;
};

// Single-excitation basis:
//   A = |2,0>  atom excited, cavity empty   (initial state)
//   B = |1,1>  atom in the ground state, one photon in the cavity
//   C = |1,0>  excitation lost to one of the decay channels (absorbing)
enum class BasisState : int { A = 0, B = 1, C = 2 };

// Unnormalized no-jump state alpha|a> + beta|b> at time t.
struct NoJumpAmplitudes {
    complexd alpha{1.0, 0.0};
    complexd beta{0.0, 0.0};
    double t = 0.0;

    double norm_sq() const { return std::norm(alpha) + std::norm(beta); }
};

// Reduced density operator on span{|a>,|b>,|c>}.
using DensityMatrix3 = Eigen::Matrix3cd;

// Complex Rabi-type rate of the no-jump solution,
//   Omega^2 = kappa^2/4 - 4 g^2 - i kappa (delta - i gamma/2) - (delta - i gamma/2)^2.
// The principal square root is stored; every consumer must be (and is, by
// evenness of the closed-form solution) insensitive to the sign branch.
struct Omega {
    complexd value{0.0, 0.0};
};

Omega compute_omega(const SystemParams& p);

// Interaction Hamiltonian restricted to span{|a>,|b>} with hbar = 1:
//   [[delta, g], [g, 0]]
Eigen::Matrix2cd hamiltonian_matrix(const SystemParams& p);

// Instantaneous jump rates per unit time for the three decay channels.
struct JumpRates {
    double extraction = 0.0;   // kappa1 |beta|^2
    double absorption = 0.0;   // kappa2 |beta|^2
    double spontaneous = 0.0;  // gamma  |alpha|^2

    double total() const { return extraction + absorption + spontaneous; }
};

JumpRates jump_rates(const NoJumpAmplitudes& state, const SystemParams& p);
JumpRates jump_rates(const DensityMatrix3& rho, const SystemParams& p);

// max |rho - rho^dagger| entrywise
double hermiticity_defect(const DensityMatrix3& rho);

// Hermitian within herm_tol, trace 1 within trace_tol, diagonal in [0,1].
bool is_valid_density_matrix(const DensityMatrix3& rho, double herm_tol = 1e-12,
                             double trace_tol = 1e-10);

}  // namespace qtraj
