// lindblad.hpp — direct Runge-Kutta integration of the master equation on
// the three-state basis.  This is the ground-truth oracle used to validate
// the closed-form solution and the trajectory ensembles, so it is kept as
// plain and auditable as possible: explicit 3x3 matrix algebra, fixed step,
// no trace renormalization (trace drift is a diagnostic, not a knob).

#pragma once

#include <vector>

#include "qtraj/model.hpp"

namespace qtraj {

// Precomputed operator matrices entering
//   d rho/dt = -i [H, rho]
//            + sum_i kappa_i/2 (2 a rho a^+ - a^+ a rho - rho a^+ a)
//            + gamma/2 (2 L rho L^+ - L^+ L rho - rho L^+ L)
// with a = |c><b| (photon annihilation) and L = |c><a| (atomic lowering).
struct LindbladGenerator {
    SystemParams params;
    Eigen::Matrix3cd hamiltonian;   // g (|a><b| + |b><a|) + delta |a><a|
    Eigen::Matrix3cd photon_lower;  // a
    Eigen::Matrix3cd atom_lower;    // L
    Eigen::Matrix3cd photon_number; // a^+ a = |b><b|
    Eigen::Matrix3cd atom_excited;  // L^+ L = |a><a|

    explicit LindbladGenerator(const SystemParams& p);
};

DensityMatrix3 lindblad_rhs(const LindbladGenerator& gen, const DensityMatrix3& rho);

struct IntegrationResult {
    std::vector<DensityMatrix3> states;  // one per grid point
    double max_trace_drift = 0.0;        // max |tr rho - tr rho0| observed
};

// Largest admissible RK4 step, 1 / (20 max(g, kappa, gamma, |delta|)).
double max_step(const SystemParams& p);
// Default step, a factor 20 below the ceiling.
double default_step(const SystemParams& p);

// Classical fixed-step RK4 from rho0 at t_grid.front() through the ascending
// grid.  step = 0 picks the default; a step above the ceiling is rejected.
IntegrationResult integrate(const LindbladGenerator& gen, const DensityMatrix3& rho0,
                            const std::vector<double>& t_grid, double step = 0.0);

}  // namespace qtraj
