#pragma once

// Forward solver for
//     d_t^alpha u = u_xx - p(x) u   on (0, ell) x (0, T],
//     u(x, 0) = a(x),  u_x(0, t) = g0(t),  closure at x = ell from ProblemConfig.
// Time: L1 discretization of the Caputo derivative on a uniform grid, with one
// starting correction for the t^alpha layer at t = 0.
// Space: centered second differences, Neumann data through ghost-node
// elimination (second order). One tridiagonal solve per step, factored once.

#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fracinv/core.hpp"
#include "fracinv/errors.hpp"
#include "fracinv/tridiagonal.hpp"

namespace fracinv {

/// Neumann flux at x = 0, u_x(0,t) = g0(t). Empty means homogeneous.
struct LeftBoundary {
    ScalarFunction flux;

    double operator()(double t) const { return flux ? flux(t) : 0.0; }
    bool homogeneous() const noexcept { return !flux; }
};

/// b_k = (k+1)^(1-alpha) - k^(1-alpha), k = 0..n_steps-1.
inline std::vector<double> l1_weights(double alpha, int n_steps) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw InvalidArgument("l1_weights: alpha must lie in (0,1), got " + std::to_string(alpha));
    if (n_steps < 1) throw InvalidArgument("l1_weights: need at least one step");
    const double e = 1.0 - alpha;
    std::vector<double> b(static_cast<std::size_t>(n_steps));
    for (int k = 0; k < n_steps; ++k) b[static_cast<std::size_t>(k)] = std::pow(k + 1.0, e) - std::pow(double(k), e);
    return b;
}

/// L1 approximation of the Caputo derivative on a uniform time grid,
///   d_t^alpha v(t_n) ~ mu * [ sum_{k=0}^{n-1} b_k (v^{n-k} - v^{n-k-1}) + w_n (v^1 - v^0) ],
/// mu = dt^-alpha / Gamma(2-alpha). The starting correction w_n makes the rule exact
/// for v(t) = t^alpha, the leading singular term of solutions with smooth initial data;
/// without it the error near t = 0 is only O(dt^alpha). w_n == 0 when disabled.
class L1Scheme {
public:
    L1Scheme(double alpha, const TimeGrid& time, bool starting_correction = true)
        : alpha_(alpha), weights_(l1_weights(alpha, time.cells())),
          correction_(static_cast<std::size_t>(time.cells()) + 1, 0.0),
          prefactor_(std::pow(time.step(), -alpha) / std::tgamma(2.0 - alpha)) {
        if (!starting_correction) return;
        // Dimensionless: exact Caputo of t^alpha is Gamma(1+alpha); the L1 sum of the
        // scaled samples j^alpha is divided by Gamma(2-alpha).
        const double exact = std::tgamma(1.0 + alpha) * std::tgamma(2.0 - alpha);
        std::vector<double> powers(correction_.size());
        for (std::size_t j = 0; j < powers.size(); ++j) powers[j] = std::pow(double(j), alpha);
        for (std::size_t n = 1; n < correction_.size(); ++n) {
            double l1 = 0.0;
            for (std::size_t k = 0; k < n; ++k) l1 += weights_[k] * (powers[n - k] - powers[n - k - 1]);
            correction_[n] = exact - l1;
        }
    }

    double alpha() const noexcept { return alpha_; }
    double prefactor() const noexcept { return prefactor_; }
    std::span<const double> weights() const noexcept { return weights_; }
    /// w_n, index 0 unused.
    std::span<const double> correction() const noexcept { return correction_; }
    bool corrected() const noexcept { return correction_.size() > 1 && correction_[1] != 0.0; }

    /// Caputo approximation at step n from samples v[0..n].
    double caputo(std::span<const double> v, std::size_t n) const {
        if (n == 0 || n >= v.size() || n >= correction_.size())
            throw InvalidArgument("L1Scheme::caputo: step index out of range");
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) acc += weights_[k] * (v[n - k] - v[n - k - 1]);
        acc += correction_[n] * (v[1] - v[0]);
        return prefactor_ * acc;
    }

private:
    double alpha_;
    std::vector<double> weights_;
    std::vector<double> correction_;
    double prefactor_;
};

struct L1Options {
    bool starting_correction = true;
};

/// Solves the initial-boundary value problem and returns the full space-time field.
/// Throws SolverFailure when the step matrix is singular.
inline FieldSolution solve_ibvp(const ProblemConfig& config, const CoefficientField& p, const CoefficientField& a,
                                const LeftBoundary& left, const SpatialGrid& space, const TimeGrid& time,
                                const L1Options& options = {}) {
    config.validate();
    p.require_on(space);
    a.require_on(space);
    if (std::abs(space.length() - config.ell) > 1e-12 * config.ell)
        throw InvalidArgument("solve_ibvp: spatial grid length does not match ell");
    if (std::abs(time.length() - config.horizon) > 1e-12 * config.horizon)
        throw InvalidArgument("solve_ibvp: time grid length does not match horizon");
    if (space.cells() < 2) throw InvalidArgument("solve_ibvp: need at least 2 spatial cells");

    const L1Scheme scheme(config.alpha, time, options.starting_correction);
    const double mu = scheme.prefactor();
    const auto b = scheme.weights();
    const auto w = scheme.correction();
    const double h = space.step();
    const double inv_h2 = 1.0 / (h * h);
    const std::size_t n_nodes = space.size();
    const std::size_t last = n_nodes - 1;
    const bool dirichlet = config.right_bc.kind == BoundaryKind::dirichlet;
    const std::size_t n_unknowns = dirichlet ? last : n_nodes;

    // Step matrix (c*I - D2 + diag(p)); c = mu for n >= 2, mu*(1 + w_1) for the first step.
    auto assemble = [&](double c) {
        Tridiagonal m(n_unknowns);
        for (std::size_t i = 0; i < n_unknowns; ++i) {
            m.lower[i] = -inv_h2;
            m.diag[i] = c + 2.0 * inv_h2 + p[i];
            m.upper[i] = -inv_h2;
        }
        m.upper[0] = -2.0 * inv_h2;  // ghost node u_{-1} = u_1 - 2h g0
        if (!dirichlet) m.lower[last] = -2.0 * inv_h2;  // ghost node u_{N+1} = u_{N-1} + 2h gR
        return TridiagonalLU(m);
    };
    const double c1 = mu * (1.0 + w[1]);
    const TridiagonalLU first_step = assemble(c1);
    const TridiagonalLU later_steps = assemble(mu);

    FieldSolution sol(config, space, time);
    for (std::size_t i = 0; i < n_nodes; ++i) sol(i, 0) = a[i];

    std::vector<double> rhs(n_unknowns);
    for (std::size_t n = 1; n < time.size(); ++n) {
        const double t = time[n];
        if (n == 1) {
            for (std::size_t i = 0; i < n_unknowns; ++i) rhs[i] = c1 * sol(i, 0);
        } else {
            for (std::size_t i = 0; i < n_unknowns; ++i) {
                double hist = w[n] * (sol(i, 1) - sol(i, 0));
                for (std::size_t k = 1; k < n; ++k) hist += b[k] * (sol(i, n - k) - sol(i, n - k - 1));
                rhs[i] = mu * (sol(i, n - 1) - hist);
            }
        }
        rhs[0] -= 2.0 * left(t) / h;
        if (dirichlet) {
            rhs[last - 1] += config.right_bc(t) * inv_h2;
        } else {
            rhs[last] += 2.0 * config.right_bc(t) / h;
        }
        (n == 1 ? first_step : later_steps).solve(rhs);
        for (std::size_t i = 0; i < n_unknowns; ++i) sol(i, n) = rhs[i];
        if (dirichlet) sol(last, n) = config.right_bc(t);
    }
    return sol;
}

/// Cauchy data at x = 0: u(0, t_j) and the one-sided derivative of each time slice.
inline CauchyTrace extract_trace(const FieldSolution& sol) {
    if (sol.space().size() < 3) throw InvalidArgument("extract_trace: need at least 3 spatial nodes");
    CauchyTrace tr{std::vector<double>(sol.time().size()), std::vector<double>(sol.time().size()), sol.time()};
    for (std::size_t j = 0; j < sol.time().size(); ++j) {
        const auto s = sol.slice(j);
        tr.u0[j] = s[0];
        tr.du0[j] = boundary_derivative(s, sol.space().step());
    }
    return tr;
}

/// The same extraction at x = ell in the mirrored coordinate x' = ell - x.
inline CauchyTrace extract_mirrored_trace(const FieldSolution& sol) {
    if (sol.space().size() < 3) throw InvalidArgument("extract_mirrored_trace: need at least 3 spatial nodes");
    CauchyTrace tr{std::vector<double>(sol.time().size()), std::vector<double>(sol.time().size()), sol.time()};
    for (std::size_t j = 0; j < sol.time().size(); ++j) {
        const auto s = sol.slice(j);
        tr.u0[j] = s.back();
        tr.du0[j] = -right_boundary_derivative(s, sol.space().step());
    }
    return tr;
}

} // namespace fracinv
