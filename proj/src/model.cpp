#include "qtraj/model.hpp"

#include <cmath>
#include <stdexcept>

namespace qtraj {

namespace {
constexpr complexd kI{0.0, 1.0};
}

void SystemParams::validate() const {
    auto check = [](double v, const char* name, bool allow_negative = false) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument(std::string(name) + " must be finite");
        }
        if (!allow_negative && v < 0.0) {
            throw std::invalid_argument(std::string(name) + " must be nonnegative");
        }
    };
    check(g, "g");
    check(kappa1, "kappa1");
    check(kappa2, "kappa2");
    check(gamma, "gamma");
    check(delta, "delta", true);
}

Omega compute_omega(const SystemParams& p) {
    const double k = p.kappa();
    const complexd d = p.delta - kI * (p.gamma / 2.0);  // delta - i gamma/2
    const complexd om_sq = 0.25 * k * k - 4.0 * p.g * p.g - kI * k * d - d * d;
    return Omega{std::sqrt(om_sq)};
}

Eigen::Matrix2cd hamiltonian_matrix(const SystemParams& p) {
    Eigen::Matrix2cd h;
    h << complexd(p.delta, 0.0), complexd(p.g, 0.0),
         complexd(p.g, 0.0),     complexd(0.0, 0.0);
    return h;
}

JumpRates jump_rates(const NoJumpAmplitudes& state, const SystemParams& p) {
    const double pa = std::norm(state.alpha);
    const double pb = std::norm(state.beta);
    return JumpRates{p.kappa1 * pb, p.kappa2 * pb, p.gamma * pa};
}

JumpRates jump_rates(const DensityMatrix3& rho, const SystemParams& p) {
    const auto a = static_cast<int>(BasisState::A);
    const auto b = static_cast<int>(BasisState::B);
    const double pa = std::max(0.0, rho(a, a).real());
    const double pb = std::max(0.0, rho(b, b).real());
    return JumpRates{p.kappa1 * pb, p.kappa2 * pb, p.gamma * pa};
}

double hermiticity_defect(const DensityMatrix3& rho) {
    return (rho - rho.adjoint().eval()).cwiseAbs().maxCoeff();
}

bool is_valid_density_matrix(const DensityMatrix3& rho, double herm_tol, double trace_tol) {
    if (hermiticity_defect(rho) > herm_tol) return false;
    if (std::abs(rho.trace().real() - 1.0) > trace_tol) return false;
    if (std::abs(rho.trace().imag()) > trace_tol) return false;
    for (int i = 0; i < 3; ++i) {
        const double d = rho(i, i).real();
        if (d < -trace_tol || d > 1.0 + trace_tol) return false;
    }
    return true;
}

}  // namespace qtraj
