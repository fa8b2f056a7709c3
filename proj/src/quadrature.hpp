// quadrature.hpp — internal helper: adaptive Gauss-Kronrod integration of the
// oscillatory-decaying integrands of this model, chunked so the adaptive
// depth stays small over horizons spanning many Rabi periods.

#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "qtraj/model.hpp"

namespace qtraj::detail {

template <typename F>
double integrate_chunked(const F& f, double t0, double t1, const SystemParams& p,
                         complexd omega) {
    if (t1 <= t0) return 0.0;
    double chunk = t1 - t0;
    const double abs_om = std::abs(omega);
    if (abs_om > 0.0) chunk = std::min(chunk, 2.0 * M_PI / abs_om);
    const double total_rate = p.kappa() + p.gamma;
    if (total_rate > 0.0) chunk = std::min(chunk, 4.0 / total_rate);
    const double n_chunks = std::ceil((t1 - t0) / chunk - 1e-12);
    if (n_chunks > 2e6) {
        throw std::runtime_error("quadrature range too long for the oscillation scale");
    }
    using quad = boost::math::quadrature::gauss_kronrod<double, 15>;
    const auto n = static_cast<long>(n_chunks);
    const double h = (t1 - t0) / static_cast<double>(n);
    double sum = 0.0;
    for (long i = 0; i < n; ++i) {
        const double a = t0 + static_cast<double>(i) * h;
        const double b = (i + 1 == n) ? t1 : a + h;
        sum += quad::integrate(f, a, b, 10, 1e-12);
    }
    return sum;
}

}  // namespace qtraj::detail
