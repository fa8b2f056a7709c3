#include "qtraj/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qtraj {

namespace {
constexpr complexd kI{0.0, 1.0};
constexpr int kA = static_cast<int>(BasisState::A);
constexpr int kB = static_cast<int>(BasisState::B);
constexpr int kC = static_cast<int>(BasisState::C);
}  // namespace

LindbladGenerator::LindbladGenerator(const SystemParams& p) : params(p) {
    params.validate();
    hamiltonian.setZero();
    hamiltonian(kA, kA) = p.delta;
    hamiltonian(kA, kB) = p.g;
    hamiltonian(kB, kA) = p.g;

    photon_lower.setZero();
    photon_lower(kC, kB) = 1.0;  // |1,1> -> |1,0|

    atom_lower.setZero();
    atom_lower(kC, kA) = 1.0;  // |2,0> -> |1,0>

    photon_number.setZero();
    photon_number(kB, kB) = 1.0;

    atom_excited.setZero();
    atom_excited(kA, kA) = 1.0;
}

DensityMatrix3 lindblad_rhs(const LindbladGenerator& gen, const DensityMatrix3& rho) {
    const SystemParams& p = gen.params;
    DensityMatrix3 out = -kI * (gen.hamiltonian * rho - rho * gen.hamiltonian);
    const double kappa = p.kappa();
    if (kappa > 0.0) {
        out += (kappa / 2.0) *
               (2.0 * (gen.photon_lower * rho * gen.photon_lower.adjoint()) -
                gen.photon_number * rho - rho * gen.photon_number);
    }
    if (p.gamma > 0.0) {
        out += (p.gamma / 2.0) *
               (2.0 * (gen.atom_lower * rho * gen.atom_lower.adjoint()) -
                gen.atom_excited * rho - rho * gen.atom_excited);
    }
    return out;
}

double max_step(const SystemParams& p) {
    const double fastest =
        std::max({p.g, p.kappa(), p.gamma, std::abs(p.delta)});
    if (fastest <= 0.0) return 1.0;  // free evolution, any modest step works
    return 1.0 / (20.0 * fastest);
}

double default_step(const SystemParams& p) { return max_step(p) / 20.0; }

IntegrationResult integrate(const LindbladGenerator& gen, const DensityMatrix3& rho0,
                            const std::vector<double>& t_grid, double step) {
    if (t_grid.empty()) return {};
    for (std::size_t i = 1; i < t_grid.size(); ++i) {
        if (t_grid[i] <= t_grid[i - 1]) {
            throw std::invalid_argument("integrate: grid must be ascending");
        }
    }
    const double ceiling = max_step(gen.params);
    if (step == 0.0) step = default_step(gen.params);
    if (!(step > 0.0) || step > ceiling) {
        throw std::invalid_argument("integrate: step must lie in (0, 1/(20 max rate)]");
    }
    const double span = t_grid.back() - t_grid.front();
    if (span / step > 1e8) {
        throw std::runtime_error("integrate: step count cap reached");
    }

    IntegrationResult result;
    result.states.reserve(t_grid.size());
    const double trace0 = rho0.trace().real();
    DensityMatrix3 rho = rho0;
    result.states.push_back(rho);
    result.max_trace_drift = 0.0;

    const auto rk4_step = [&](DensityMatrix3& r, double h) {
        const DensityMatrix3 k1 = lindblad_rhs(gen, r);
        const DensityMatrix3 k2 = lindblad_rhs(gen, r + (h / 2.0) * k1);
        const DensityMatrix3 k3 = lindblad_rhs(gen, r + (h / 2.0) * k2);
        const DensityMatrix3 k4 = lindblad_rhs(gen, r + h * k3);
        r += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    };

    for (std::size_t i = 1; i < t_grid.size(); ++i) {
        const double span_i = t_grid[i] - t_grid[i - 1];
        const auto n_steps = static_cast<long>(std::ceil(span_i / step - 1e-12));
        const double h = span_i / static_cast<double>(std::max(n_steps, 1L));
        for (long s = 0; s < n_steps; ++s) rk4_step(rho, h);
        result.states.push_back(rho);
        result.max_trace_drift =
            std::max(result.max_trace_drift, std::abs(rho.trace().real() - trace0));
    }
    return result;
}

}  // namespace qtraj
