#pragma once

// Transformation kernel K(x,y) on 0 <= y <= x <= ell:
//     K_xx - K_yy = (q(x) - p(y)) K,
//     K(x,x) = 1/2 int_0^x (q - p),   K_y(x,0) = 0.
// The Neumann condition is absorbed by reflecting K and p evenly to y < 0.
// In xi = x + y, eta = x - y the reflected problem is the Goursat problem
//     W_{xi eta} = c W / 4,   c = q(x) - p(|y|),
// with W(xi,0) = g(xi/2), W(0,eta) = g(eta/2), g(x) = 1/2 int_0^x (q - p),
// solved by Picard iteration on
//     W = W(xi,0) + W(0,eta) + 1/4 int_0^xi int_0^eta c W.
// The characteristic grid has step h in both xi and eta, so its nodes sit at
// x = (a+b)h/2, y = (a-b)h/2: every original node plus the cell midpoints.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fracinv/core.hpp"
#include "fracinv/errors.hpp"

namespace fracinv {

class TransmutationKernel {
public:
    TransmutationKernel() = default;
    TransmutationKernel(SpatialGrid grid, std::vector<double> p, std::vector<double> q)
        : grid_(std::move(grid)), p_(std::move(p)), q_(std::move(q)),
          values_(grid_.size() * (grid_.size() + 1) / 2, 0.0) {}

    const SpatialGrid& grid() const noexcept { return grid_; }
    std::span<const double> p() const noexcept { return p_; }
    std::span<const double> q() const noexcept { return q_; }

    /// K(x_i, y_j), j <= i. Off-triangle access is a contract violation.
    double operator()(std::size_t i, std::size_t j) const { return values_[index(i, j)]; }
    double& operator()(std::size_t i, std::size_t j) { return values_[index(i, j)]; }

    std::vector<double> diagonal() const {
        std::vector<double> d(grid_.size());
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = (*this)(i, i);
        return d;
    }
    /// K(x_i, 0).
    std::vector<double> on_axis() const {
        std::vector<double> d(grid_.size());
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = (*this)(i, 0);
        return d;
    }
    /// Row K(x_i, y_0..y_i).
    std::vector<double> row(std::size_t i) const {
        std::vector<double> r(i + 1);
        for (std::size_t j = 0; j <= i; ++j) r[j] = (*this)(i, j);
        return r;
    }

    /// max |K| over the sub-triangle 0 <= y <= x <= x_upto.
    double max_abs_upto(std::size_t upto) const {
        if (upto >= grid_.size()) throw InvalidArgument("TransmutationKernel: index out of range");
        return max_abs(std::span<const double>(values_).first(index(upto, upto) + 1));
    }
    double max_abs_all() const { return max_abs(values_); }

    int iterations = 0;
    double final_update_norm = 0.0;
    /// max |W(x,y) - W(x,-y)| on the reflected characteristic grid.
    double reflection_defect = 0.0;

private:
    std::size_t index(std::size_t i, std::size_t j) const {
        if (i >= grid_.size() || j > i)
            throw InvalidArgument("TransmutationKernel: (" + std::to_string(i) + "," + std::to_string(j) +
                                  ") lies outside the triangle 0 <= y <= x");
        return i * (i + 1) / 2 + j;
    }

    SpatialGrid grid_;
    std::vector<double> p_;
    std::vector<double> q_;
    std::vector<double> values_;
};

namespace goursat_detail {

/// f at the cell midpoints x_{i+1/2}, cubic through the four nearest nodes.
inline std::vector<double> midpoints(std::span<const double> f) {
    const std::size_t n = f.size() - 1;
    std::vector<double> m(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (i == 0)
            m[i] = (5.0 * f[0] + 15.0 * f[1] - 5.0 * f[2] + f[3]) / 16.0;
        else if (i == n - 1)
            m[i] = (f[n - 3] - 5.0 * f[n - 2] + 15.0 * f[n - 1] + 5.0 * f[n]) / 16.0;
        else
            m[i] = (-f[i - 1] + 9.0 * f[i] + 9.0 * f[i + 1] - f[i + 2]) / 16.0;
    }
    return m;
}

/// Samples of a grid function at x = k h / 2, k = 0..2N.
inline std::vector<double> half_step(std::span<const double> nodes, std::span<const double> mids) {
    std::vector<double> out(2 * nodes.size() - 1);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = (k % 2 == 0) ? nodes[k / 2] : mids[k / 2];
    return out;
}

} // namespace goursat_detail

/// g(x) = 1/2 int_0^x (q - p) at x = k h / 2. Whole nodes use the trapezoid rule,
/// midpoints the average of their neighbours minus the h^2 g''/8 correction.
inline std::vector<double> kernel_diagonal_data(std::span<const double> p, std::span<const double> q, double h) {
    std::vector<double> r(p.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = q[i] - p[i];
    auto g = cumulative_trapezoid(r, h);
    for (double& v : g) v *= 0.5;
    std::vector<double> mids(g.size() - 1);
    for (std::size_t i = 0; i + 1 < g.size(); ++i)
        mids[i] = 0.5 * (g[i] + g[i + 1]) - h * (r[i + 1] - r[i]) / 16.0;
    return goursat_detail::half_step(g, mids);
}

inline TransmutationKernel solve_kernel(const CoefficientField& p, const CoefficientField& q, const SpatialGrid& grid,
                                        double tol = 1e-12, int max_iter = 100) {
    p.require_on(grid);
    q.require_on(grid);
    if (!(tol > 0.0)) throw InvalidArgument("solve_kernel: tol must be positive");
    if (max_iter < 1) throw InvalidArgument("solve_kernel: max_iter must be at least 1");
    if (grid.cells() < 3) throw InvalidArgument("solve_kernel: need at least 3 cells");

    const double h = grid.step();
    const std::size_t n2 = 2 * static_cast<std::size_t>(grid.cells());  // last xi (or eta) index
    const auto q_half = goursat_detail::half_step(q.samples, goursat_detail::midpoints(q.samples));
    const auto p_half = goursat_detail::half_step(p.samples, goursat_detail::midpoints(p.samples));
    const auto g_half = kernel_diagonal_data(p.samples, q.samples, h);

    // Row a holds b = 0..n2-a. x index (half steps) is a+b, |y| index is |a-b|.
    std::vector<std::vector<double>> c(n2 + 1), base(n2 + 1);
    for (std::size_t a = 0; a <= n2; ++a) {
        c[a].resize(n2 - a + 1);
        base[a].resize(n2 - a + 1);
        for (std::size_t b = 0; b <= n2 - a; ++b) {
            const std::size_t d = a > b ? a - b : b - a;
            c[a][b] = q_half[a + b] - p_half[d];
            base[a][b] = g_half[a] + g_half[b];
        }
    }

    auto w = base;
    auto next = base;
    std::vector<std::vector<double>> cum(n2 + 1);
    for (std::size_t a = 0; a <= n2; ++a) cum[a].resize(n2 - a + 1);

    double update = 0.0;
    int it = 0;
    while (true) {
        ++it;
        // cum[a][b] = int_0^eta (c W)(xi_a, .) by the trapezoid rule.
        for (std::size_t a = 0; a <= n2; ++a) {
            auto& row = cum[a];
            row[0] = 0.0;
            for (std::size_t b = 1; b < row.size(); ++b)
                row[b] = row[b - 1] + 0.5 * h * (c[a][b - 1] * w[a][b - 1] + c[a][b] * w[a][b]);
        }
        // Accumulate in xi; `acc` carries int_0^xi cum over the current row.
        update = 0.0;
        std::vector<double> acc(n2 + 1, 0.0);
        for (std::size_t a = 0; a <= n2; ++a) {
            for (std::size_t b = 0; b <= n2 - a; ++b) {
                if (a > 0) acc[b] += 0.5 * h * (cum[a - 1][b] + cum[a][b]);
                const double v = base[a][b] + 0.25 * acc[b];
                update = std::max(update, std::abs(v - w[a][b]));
                next[a][b] = v;
            }
        }
        std::swap(w, next);
        if (update <= tol) break;
        if (it >= max_iter)
            throw NonConvergence("solve_kernel: Picard iteration stopped after " + std::to_string(it) +
                                     " iterations with update norm " + std::to_string(update),
                                 update, it);
    }

    TransmutationKernel k(grid, p.samples, q.samples);
    for (std::size_t i = 0; i < grid.size(); ++i)
        for (std::size_t j = 0; j <= i; ++j) k(i, j) = w[i + j][i - j];
    double defect = 0.0;
    for (std::size_t a = 0; a <= n2; ++a)
        for (std::size_t b = 0; b <= n2 - a; ++b) defect = std::max(defect, std::abs(w[a][b] - w[b][a]));
    k.iterations = it;
    k.final_update_norm = update;
    k.reflection_defect = defect;
    return k;
}

/// max over nodes at least two cells inside the triangle of
/// |D_xx K - D_yy K - (q(x) - p(y)) K| with centered second differences.
inline double kernel_pde_residual(const TransmutationKernel& k, const CoefficientField& p, const CoefficientField& q) {
    const auto& grid = k.grid();
    p.require_on(grid);
    q.require_on(grid);
    const double inv_h2 = 1.0 / (grid.step() * grid.step());
    const std::size_t n = grid.size() - 1;
    double worst = 0.0;
    for (std::size_t i = 4; i + 2 <= n; ++i) {
        for (std::size_t j = 2; j + 2 <= i; ++j) {
            const double kxx = (k(i + 1, j) - 2.0 * k(i, j) + k(i - 1, j)) * inv_h2;
            const double kyy = (k(i, j + 1) - 2.0 * k(i, j) + k(i, j - 1)) * inv_h2;
            worst = std::max(worst, std::abs(kxx - kyy - (q[i] - p[j]) * k(i, j)));
        }
    }
    return worst;
}

struct KernelNormSample {
    double x = 0.0;
    double ratio = 0.0;  ///< sup_{y<=x'<=x} |K| / ||p - q||_{C[0,x]}
};

struct KernelNormReport {
    std::vector<std::vector<KernelNormSample>> per_pair;
    double max_ratio = 0.0;
};

struct CoefficientPair {
    CoefficientField p;
    CoefficientField q;
};

/// Empirical constant in sup|K| <= C ||p - q|| over growing sub-triangles.
/// `sample_nodes` empty means every node from 1 to N.
inline KernelNormReport kernel_norm_probe(std::span<const CoefficientPair> pairs, const SpatialGrid& grid,
                                          std::vector<std::size_t> sample_nodes = {}, double tol = 1e-12) {
    if (sample_nodes.empty())
        for (std::size_t i = 1; i < grid.size(); ++i) sample_nodes.push_back(i);
    KernelNormReport report;
    for (const auto& pair : pairs) {
        const auto k = solve_kernel(pair.p, pair.q, grid, tol);
        std::vector<KernelNormSample> samples;
        for (std::size_t i : sample_nodes) {
            if (i >= grid.size()) throw InvalidArgument("kernel_norm_probe: sample node out of range");
            double diff = 0.0;
            for (std::size_t m = 0; m <= i; ++m) diff = std::max(diff, std::abs(pair.p[m] - pair.q[m]));
            const double ratio = diff > 0.0 ? k.max_abs_upto(i) / diff : 0.0;
            samples.push_back({grid[i], ratio});
            report.max_ratio = std::max(report.max_ratio, ratio);
        }
        report.per_pair.push_back(std::move(samples));
    }
    return report;
}

} // namespace fracinv
