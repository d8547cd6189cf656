#pragma once

// Transformation operator  v(x,t) = u(x,t) + int_0^x K(x,y) u(y,t) dy
// and the residual of the equation it should satisfy when u solves the
// p-equation and K is the (p,q) kernel:
//     d_t^alpha v - v_xx + q v = -K(x,0) u_x(0,t).

#include <algorithm>
#include <cmath>
#include <vector>

#include "fracinv/core.hpp"
#include "fracinv/errors.hpp"
#include "fracinv/forward_l1.hpp"
#include "fracinv/goursat_kernel.hpp"

namespace fracinv {

struct TransformedField {
    FieldSolution field;

    CauchyTrace trace() const { return extract_trace(field); }
};

inline TransformedField apply_transform(const FieldSolution& u, const TransmutationKernel& k) {
    if (!u.space().same_as(k.grid())) throw InvalidArgument("apply_transform: solution and kernel grids differ");
    const auto& space = u.space();
    const double h = space.step();
    FieldSolution v(u.config(), space, u.time());
    std::vector<double> integrand(space.size());
    for (std::size_t j = 0; j < u.time().size(); ++j) {
        const auto uj = u.slice(j);
        auto vj = v.slice(j);
        for (std::size_t i = 0; i < space.size(); ++i) {
            for (std::size_t m = 0; m <= i; ++m) integrand[m] = k(i, m) * uj[m];
            vj[i] = uj[i] + trapezoid(integrand, h, i);
        }
    }
    return {std::move(v)};
}

struct ResidualOptions {
    bool include_boundary_term = true;  ///< the K(x,0) u_x(0,t) source
    L1Options l1{};                     ///< must match the forward solve
};

/// Pointwise residual d_t^alpha v - D2 v + q v + K(x,0) du0(t) on interior nodes
/// 1 <= i <= N-1, t >= 2 dt; zero elsewhere.
inline FieldSolution residual_field(const TransformedField& v, const CoefficientField& q, const CauchyTrace& u_trace,
                                    const TransmutationKernel& k, double alpha, const ResidualOptions& options = {}) {
    const FieldSolution& f = v.field;
    const auto& space = f.space();
    const auto& time = f.time();
    q.require_on(space);
    if (!space.same_as(k.grid())) throw InvalidArgument("residual_field: kernel grid differs from field grid");
    if (u_trace.du0.size() != time.size()) throw InvalidArgument("residual_field: trace length does not match time grid");

    const L1Scheme scheme(alpha, time, options.l1.starting_correction);
    const double inv_h2 = 1.0 / (space.step() * space.step());
    const auto k_axis = k.on_axis();
    FieldSolution r(f.config(), space, time);
    for (std::size_t i = 1; i + 1 < space.size(); ++i) {
        const auto series = f.at_node(i);
        for (std::size_t n = 2; n < time.size(); ++n) {
            const double vxx = (f(i + 1, n) - 2.0 * f(i, n) + f(i - 1, n)) * inv_h2;
            double res = scheme.caputo(series, n) - vxx + q[i] * f(i, n);
            if (options.include_boundary_term) res += k_axis[i] * u_trace.du0[n];
            r(i, n) = res;
        }
    }
    return r;
}

/// Sup of residual_field.
inline double residual_2_3(const TransformedField& v, const CoefficientField& q, const CauchyTrace& u_trace,
                           const TransmutationKernel& k, double alpha, const ResidualOptions& options = {}) {
    return max_abs(residual_field(v, q, u_trace, k, alpha, options).raw());
}

} // namespace fracinv
