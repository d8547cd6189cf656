#pragma once

// Separation-of-variables solver: eigenpairs of the same ghost-node
// discretization of -d^2/dx^2 + p used by forward_l1, combined with exact
// Mittag-Leffler time factors. Only homogeneous boundary data.
//
// The ghost-node matrix A is not symmetric, but W A is, with W the trapezoid
// weights diag(1/2, 1, ..., 1, 1/2). We diagonalize S = W^(1/2) A W^(-1/2)
// and map back, which makes the modes orthonormal in the trapezoid inner product.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "fracinv/core.hpp"
#include "fracinv/errors.hpp"
#include "fracinv/mittag_leffler.hpp"

namespace fracinv {

struct EigenSystem {
    SpatialGrid grid;
    BoundaryKind right_bc = BoundaryKind::neumann;
    std::vector<double> eigenvalues;         ///< ascending
    std::vector<std::vector<double>> modes;  ///< phi_n on every grid node

    std::size_t n_modes() const noexcept { return eigenvalues.size(); }

    /// Trapezoid inner product on the grid.
    double inner(std::span<const double> f, std::span<const double> g) const {
        if (f.size() != grid.size() || g.size() != grid.size())
            throw InvalidArgument("EigenSystem::inner: sample count does not match grid");
        std::vector<double> prod(f.size());
        for (std::size_t i = 0; i < f.size(); ++i) prod[i] = f[i] * g[i];
        return trapezoid(prod, grid.step(), prod.size() - 1);
    }

    std::vector<double> project(std::span<const double> f) const {
        std::vector<double> c(modes.size());
        for (std::size_t n = 0; n < modes.size(); ++n) c[n] = inner(f, modes[n]);
        return c;
    }

    /// || f - sum_n <f,phi_n> phi_n ||, the truncation tail.
    double projection_residual(std::span<const double> f) const {
        const auto c = project(f);
        std::vector<double> r(f.begin(), f.end());
        for (std::size_t n = 0; n < modes.size(); ++n)
            for (std::size_t i = 0; i < r.size(); ++i) r[i] -= c[n] * modes[n][i];
        return l2_norm(r, grid.step());
    }
};

inline int default_mode_count(const SpatialGrid& grid) { return std::max(1, grid.cells() / 4); }

inline EigenSystem eigendecompose(const CoefficientField& p, const SpatialGrid& grid, BoundaryKind right_bc,
                                  int n_modes) {
    p.require_on(grid);
    const int n_cells = grid.cells();
    if (n_cells < 2) throw InvalidArgument("eigendecompose: need at least 2 cells");
    if (n_modes < 1 || n_modes > n_cells - 1)
        throw InvalidArgument("eigendecompose: n_modes must lie in [1, N-1] = [1, " + std::to_string(n_cells - 1) +
                              "], got " + std::to_string(n_modes));

    const bool dirichlet = right_bc == BoundaryKind::dirichlet;
    const std::size_t m = dirichlet ? static_cast<std::size_t>(n_cells) : static_cast<std::size_t>(n_cells) + 1;
    const double h = grid.step();
    const double inv_h2 = 1.0 / (h * h);

    Eigen::VectorXd diag(static_cast<Eigen::Index>(m));
    Eigen::VectorXd sub(static_cast<Eigen::Index>(m - 1));
    std::vector<double> weight(m, 1.0);
    weight[0] = 0.5;
    if (!dirichlet) weight[m - 1] = 0.5;
    for (std::size_t i = 0; i < m; ++i) diag[static_cast<Eigen::Index>(i)] = 2.0 * inv_h2 + p[i];
    // Off-diagonals of A are -1/h^2 except the ghost rows (-2/h^2); after the
    // similarity transform both become -sqrt(w_i/w_{i+1}) A_{i,i+1}, symmetric.
    for (std::size_t i = 0; i + 1 < m; ++i) {
        const double a_up = (i == 0) ? -2.0 * inv_h2 : -inv_h2;
        sub[static_cast<Eigen::Index>(i)] = std::sqrt(weight[i] / weight[i + 1]) * a_up;
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success) throw SolverFailure("eigendecompose: tridiagonal eigensolver did not converge");

    EigenSystem sys{grid, right_bc, {}, {}};
    const auto& vals = solver.eigenvalues();
    const auto& vecs = solver.eigenvectors();
    const double scale = 1.0 / std::sqrt(h);
    for (int n = 0; n < n_modes; ++n) {
        std::vector<double> phi(grid.size(), 0.0);  // Dirichlet node stays 0
        for (std::size_t i = 0; i < m; ++i)
            phi[i] = vecs(static_cast<Eigen::Index>(i), n) * scale / std::sqrt(weight[i]);
        // Fix the sign: first clearly nonzero entry positive.
        for (double v : phi) {
            if (std::abs(v) > 1e-8) {
                if (v < 0.0)
                    for (double& x : phi) x = -x;
                break;
            }
        }
        sys.eigenvalues.push_back(vals[n]);
        sys.modes.push_back(std::move(phi));
    }
    return sys;
}

inline EigenSystem eigendecompose(const CoefficientField& p, const SpatialGrid& grid, BoundaryKind right_bc) {
    return eigendecompose(p, grid, right_bc, default_mode_count(grid));
}

/// u(x,t) = sum_n <a,phi_n> E_alpha(-lambda_n t^alpha) phi_n(x).
inline FieldSolution spectral_solve(const EigenSystem& eig, const CoefficientField& a, double alpha,
                                    const TimeGrid& times) {
    a.require_on(eig.grid);
    ProblemConfig config{alpha, eig.grid.length(), times.length(),
                         eig.right_bc == BoundaryKind::dirichlet ? BoundaryCondition::dirichlet()
                                                                 : BoundaryCondition::neumann()};
    config.validate();
    // A zero eigenvalue comes out of the eigensolver as +-eps*||A||; clamp those.
    const double h = eig.grid.step();
    const double roundoff = 64.0 * std::numeric_limits<double>::epsilon() * (4.0 / (h * h));
    std::vector<double> rates(eig.eigenvalues);
    for (double& lam : rates) {
        if (lam < -roundoff)
            throw InvalidArgument("spectral_solve: negative eigenvalue " + std::to_string(lam) +
                                  " (shift p so the operator is nonnegative)");
        lam = std::max(lam, 0.0);
    }

    const auto coef = eig.project(a.samples);
    const auto decay = ml_decay_table(alpha, rates, times, 1e-12);
    FieldSolution sol(config, eig.grid, times);
    for (std::size_t j = 0; j < times.size(); ++j) {
        auto slice = sol.slice(j);
        for (std::size_t n = 0; n < eig.n_modes(); ++n) {
            const double c = coef[n] * decay[n][j];
            const auto& phi = eig.modes[n];
            for (std::size_t i = 0; i < slice.size(); ++i) slice[i] += c * phi[i];
        }
    }
    return sol;
}

} // namespace fracinv
