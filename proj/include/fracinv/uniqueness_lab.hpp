#pragma once

// Experiments around uniqueness of p from Cauchy data at x = 0:
//   distinguishability     different p, q give different traces u(0,t)
//   kernel vanishing       p = q on [0,x0]  =>  K = 0 on the sub-triangle up to x0
//   axis vanishing         p = q on [0,e0]  =>  K(x,0) = 0 for x <= min(2 e0, ell)
//   moment identity        M(x) = int_0^x K(x,y) a(y) dy satisfies
//       M'' = (q-p)a + K(x,0)a'(0) + int_0^x (q(x)-p(y)) K a dy + int_0^x K a'' dy
//   contraction probe      the last three terms, over |a|, shrink relative to ||p-q||.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <future>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

#include "fracinv/core.hpp"
#include "fracinv/errors.hpp"
#include "fracinv/forward_l1.hpp"
#include "fracinv/forward_spectral.hpp"
#include "fracinv/goursat_kernel.hpp"
#include "fracinv/report.hpp"

namespace fracinv {

struct LabSettings {
    ProblemConfig problem{};
    int nx = 200;
    int nt = 400;
    int n_modes = 0;                 ///< 0: default_mode_count
    double distinguish_factor = 100.0;
    double slope_tolerance = 0.3;
    double picard_tol = 1e-12;
    int max_iter = 100;
    L1Options l1{};

    SpatialGrid space() const { return make_uniform_grid(problem.ell, nx); }
    TimeGrid time() const { return make_time_grid(problem.horizon, nt); }

    void echo_into(ExperimentReport& r) const {
        r.echo("alpha", problem.alpha);
        r.echo("ell", problem.ell);
        r.echo("T", problem.horizon);
        r.echo("N", std::to_string(nx));
        r.echo("M", std::to_string(nt));
        r.echo("right_bc", to_string(problem.right_bc.kind));
        r.echo("l1_correction", l1.starting_correction ? "true" : "false");
    }
};

/// Rejects initial values that come close to zero anywhere on the grid.
inline void require_nonvanishing(const CoefficientField& a, double relative_floor = 1e-6) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (double v : a.samples) {
        lo = std::min(lo, std::abs(v));
        hi = std::max(hi, std::abs(v));
    }
    if (!(hi > 0.0) || lo < relative_floor * hi)
        throw PreconditionViolation("initial value a must stay away from zero: min|a| = " + std::to_string(lo) +
                                    ", max|a| = " + std::to_string(hi) + " (need min|a| >= " +
                                    std::to_string(relative_floor) + " max|a|)");
}

namespace lab_detail {

inline bool same_samples(const CoefficientField& p, const CoefficientField& q) { return p.samples == q.samples; }

/// a'' from samples: centered inside, one-sided second order at the ends.
inline std::vector<double> second_difference(std::span<const double> f, double h) {
    const std::size_t n = f.size() - 1;
    if (n < 3) throw InvalidArgument("second_difference needs at least 4 nodes");
    std::vector<double> d(f.size());
    const double inv = 1.0 / (h * h);
    for (std::size_t i = 1; i < n; ++i) d[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) * inv;
    d[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) * inv;
    d[n] = (2.0 * f[n] - 5.0 * f[n - 1] + 4.0 * f[n - 2] - f[n - 3]) * inv;
    return d;
}

/// Largest node index with x_i <= x (with a little slack for roundoff).
inline std::size_t node_at_or_below(const SpatialGrid& g, double x) {
    const double k = std::floor(x / g.step() + 1e-9);
    return static_cast<std::size_t>(std::clamp(k, 0.0, double(g.cells())));
}

/// Least-squares slope of log y against log x.
inline double loglog_slope(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= double(n);
    my /= double(n);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

} // namespace lab_detail

/// L2(0,T) distance between the two u(0,t) series.
inline double trace_gap(const CauchyTrace& a, const CauchyTrace& b) {
    if (!a.time.same_as(b.time)) throw InvalidArgument("trace_gap: traces live on different time grids");
    return l2_distance(a.u0, b.u0, a.time.step());
}

/// Cross-solver discrepancy of the trace at x = 0 for one coefficient: L1
/// time stepping against the spectral solution on the same spatial grid.
inline double cross_solver_floor(const CoefficientField& p, const CoefficientField& a, const LabSettings& s) {
    const auto space = s.space();
    const auto time = s.time();
    const auto l1 = solve_ibvp(s.problem, p, a, {}, space, time, s.l1);
    const auto eig = eigendecompose(p, space, s.problem.right_bc.kind,
                                    s.n_modes > 0 ? s.n_modes : default_mode_count(space));
    const auto sp = spectral_solve(eig, a, s.problem.alpha, time);
    return trace_gap(extract_trace(l1), extract_trace(sp));
}

/// Solves the p- and q-problems with the same a and zero flux at x = 0 and compares
/// the traces u(0,t). For p != q the gap must exceed factor x noise floor; for p = q
/// it must stay below the floor.
inline ExperimentReport distinguishability(const ScalarFunction& p_fn, const ScalarFunction& q_fn,
                                           const ScalarFunction& a_fn, const LabSettings& s,
                                           std::string scenario = "distinguishability") {
    s.problem.validate();
    if (!s.problem.right_bc.homogeneous())
        throw InvalidArgument("distinguishability: the spectral noise floor needs homogeneous data at x = ell");
    const auto space = s.space();
    const auto time = s.time();
    const auto p = CoefficientField::sample(space, p_fn, CoefficientLabel::p);
    const auto q = CoefficientField::sample(space, q_fn, CoefficientLabel::q);
    const auto a = CoefficientField::sample(space, a_fn, CoefficientLabel::a);
    require_nonvanishing(a);

    ExperimentReport r(std::move(scenario));
    s.echo_into(r);
    r.echo("distinguish_factor", s.distinguish_factor);

    const auto u = solve_ibvp(s.problem, p, a, {}, space, time, s.l1);
    const auto q_as_p = CoefficientField{q.samples, CoefficientLabel::p};
    const auto ut = solve_ibvp(s.problem, q_as_p, a, {}, space, time, s.l1);
    const auto tr_u = extract_trace(u);
    const auto tr_ut = extract_trace(ut);
    const double gap = trace_gap(tr_u, tr_ut);
    const double floor = std::max(cross_solver_floor(p, a, s), cross_solver_floor(q_as_p, a, s));

    r.add_metric("noise_floor", floor, Comparison::info);
    if (lab_detail::same_samples(p, q)) {
        r.note("p = q on every node: the two traces must coincide");
        r.add_metric("gap", gap, Comparison::less_equal, floor);
    } else {
        r.add_metric("gap", gap, Comparison::greater, s.distinguish_factor * floor);
    }
    r.add_metric("gap_over_floor", floor > 0.0 ? gap / floor : 0.0, Comparison::info);

    Table t{{"t", "u0_p", "u0_q", "du0_p", "du0_q"}, {}};
    for (std::size_t j = 0; j < time.size(); ++j)
        t.rows.push_back({time[j], tr_u.u0[j], tr_ut.u0[j], tr_u.du0[j], tr_ut.du0[j]});
    r.add_table("traces", std::move(t));
    return r;
}

/// max |K| on the sub-triangle up to x0 against the Picard tolerance.
inline ExperimentReport kernel_vanishing_check(const ScalarFunction& p_fn, const ScalarFunction& q_fn, double x0,
                                               const LabSettings& s, std::string scenario = "kernel_vanishing") {
    const auto space = s.space();
    if (!(x0 >= 0.0 && x0 <= space.length())) throw InvalidArgument("kernel_vanishing_check: x0 must lie in [0, ell]");
    const auto p = CoefficientField::sample(space, p_fn, CoefficientLabel::p);
    const auto q = CoefficientField::sample(space, q_fn, CoefficientLabel::q);
    const auto k = solve_kernel(p, q, space, s.picard_tol, s.max_iter);
    const std::size_t i0 = lab_detail::node_at_or_below(space, x0);

    ExperimentReport r(std::move(scenario));
    s.echo_into(r);
    r.echo("x0", x0);
    r.echo("picard_tol", s.picard_tol);
    r.add_metric("sub_triangle_max", k.max_abs_upto(i0), Comparison::less_equal, s.picard_tol);
    r.add_metric("global_max", k.max_abs_all(), Comparison::info);
    r.add_metric("picard_iterations", k.iterations, Comparison::info);
    return r;
}

/// p = q on [0, eps0]: K(x,0) vanishes for x <= min(2 eps0, ell).
inline ExperimentReport axis_vanishing_check(const ScalarFunction& p_fn, const ScalarFunction& q_fn, double eps0,
                                             const LabSettings& s, double threshold = 1e-8,
                                             std::string scenario = "axis_vanishing") {
    const auto space = s.space();
    if (!(eps0 > 0.0)) throw InvalidArgument("axis_vanishing_check: eps0 must be positive");
    const auto p = CoefficientField::sample(space, p_fn, CoefficientLabel::p);
    const auto q = CoefficientField::sample(space, q_fn, CoefficientLabel::q);
    const auto k = solve_kernel(p, q, space, s.picard_tol, s.max_iter);
    const double delta0 = std::min(2.0 * eps0, space.length());
    const std::size_t i1 = lab_detail::node_at_or_below(space, delta0);
    const auto axis = k.on_axis();

    ExperimentReport r(std::move(scenario));
    s.echo_into(r);
    r.echo("eps0", eps0);
    r.echo("delta0", delta0);
    r.add_metric("axis_max_upto_delta0",
                 max_abs(std::span<const double>(axis).first(i1 + 1)), Comparison::less_equal, threshold);
    r.add_metric("axis_max_global", max_abs(axis), Comparison::info);
    return r;
}

/// Both sides of the differentiated moment identity on one grid.
struct MomentIdentityCurves {
    std::vector<double> x;
    std::vector<double> lhs;            ///< M'' by centered differences
    std::vector<double> rhs;
    std::vector<double> boundary_term;  ///< K(x,0) a'(0)
    std::vector<double> remainder;      ///< the two integrals plus boundary_term
    double discrepancy = 0.0;           ///< max |lhs - rhs| over interior nodes
};

inline MomentIdentityCurves moment_identity_curves(const CoefficientField& p, const CoefficientField& q,
                                                   const CoefficientField& a, const SpatialGrid& space,
                                                   double picard_tol = 1e-12, int max_iter = 100) {
    a.require_on(space);
    require_nonvanishing(a);
    const auto k = solve_kernel(p, q, space, picard_tol, max_iter);
    const double h = space.step();
    const std::size_t n = space.size() - 1;
    const auto a2 = lab_detail::second_difference(a.samples, h);
    const double a1_0 = boundary_derivative(a.samples, h);

    std::vector<double> moment(space.size(), 0.0);
    std::vector<double> f(space.size());
    for (std::size_t i = 0; i <= n; ++i) {
        for (std::size_t m = 0; m <= i; ++m) f[m] = k(i, m) * a[m];
        moment[i] = trapezoid(f, h, i);
    }

    MomentIdentityCurves c;
    std::vector<double> g1(space.size()), g2(space.size());
    for (std::size_t i = 1; i < n; ++i) {
        for (std::size_t m = 0; m <= i; ++m) {
            g1[m] = (q[i] - p[m]) * k(i, m) * a[m];
            g2[m] = k(i, m) * a2[m];
        }
        const double bterm = k(i, 0) * a1_0;
        const double rest = bterm + trapezoid(g1, h, i) + trapezoid(g2, h, i);
        const double lhs = (moment[i + 1] - 2.0 * moment[i] + moment[i - 1]) / (h * h);
        const double rhs = (q[i] - p[i]) * a[i] + rest;
        c.x.push_back(space[i]);
        c.lhs.push_back(lhs);
        c.rhs.push_back(rhs);
        c.boundary_term.push_back(bterm);
        c.remainder.push_back(rest);
        c.discrepancy = std::max(c.discrepancy, std::abs(lhs - rhs));
    }
    return c;
}

/// Discrepancy of the moment identity on a sequence of grids (nx, 2nx, 4nx, ...)
/// with the fitted order of its decay.
inline ExperimentReport moment_identity(const ScalarFunction& p_fn, const ScalarFunction& q_fn,
                                        const ScalarFunction& a_fn, const LabSettings& s, int levels = 3,
                                        double min_order = 1.7, std::string scenario = "moment_identity") {
    if (levels < 1) throw InvalidArgument("moment_identity: need at least one grid level");
    ExperimentReport r(std::move(scenario));
    s.echo_into(r);
    r.echo("levels", std::to_string(levels));

    std::vector<double> hs, ds;
    bool all_zero = true;
    for (int lev = 0; lev < levels; ++lev) {
        const auto space = make_uniform_grid(s.problem.ell, s.nx << lev);
        const auto p = CoefficientField::sample(space, p_fn, CoefficientLabel::p);
        const auto q = CoefficientField::sample(space, q_fn, CoefficientLabel::q);
        const auto a = CoefficientField::sample(space, a_fn, CoefficientLabel::a);
        const auto c = moment_identity_curves(p, q, a, space, s.picard_tol, s.max_iter);
        hs.push_back(space.step());
        ds.push_back(c.discrepancy);
        all_zero = all_zero && c.discrepancy == 0.0;
        r.add_metric("discrepancy_N" + std::to_string(space.cells()), c.discrepancy, Comparison::info);
        if (lev == 0) {
            r.add_metric("boundary_term_max", max_abs(c.boundary_term), Comparison::info);
            Table t{{"x", "lhs", "rhs", "boundary_term", "divided_discrepancy"}, {}};
            for (std::size_t i = 0; i < c.x.size(); ++i)
                t.rows.push_back({c.x[i], c.lhs[i], c.rhs[i], c.boundary_term[i],
                                  (c.lhs[i] - c.rhs[i]) / a[i + 1]});
            r.add_table("moment_identity", std::move(t));
        }
    }
    if (all_zero) {
        r.note("identity holds exactly on every grid (zero kernel)");
    } else if (levels >= 2) {
        r.add_metric("fitted_order", lab_detail::loglog_slope(hs, ds), Comparison::greater_equal, min_order);
    }
    return r;
}

/// rho(x) = sup_{[0,x]} |remainder| / |a|  divided by  ||p - q||_{C[0,x]}
/// on x = ell/2, ell/4, ... (`samples` points). The contraction step needs
/// rho(x) <= C x; the fitted log-log slope must reach 1 - slope_tolerance.
inline ExperimentReport contraction_probe(const ScalarFunction& p_fn, const ScalarFunction& q_fn,
                                          const ScalarFunction& a_fn, const LabSettings& s, int samples = 5,
                                          std::string scenario = "contraction_probe") {
    const auto space = s.space();
    const auto p = CoefficientField::sample(space, p_fn, CoefficientLabel::p);
    const auto q = CoefficientField::sample(space, q_fn, CoefficientLabel::q);
    const auto a = CoefficientField::sample(space, a_fn, CoefficientLabel::a);
    const auto c = moment_identity_curves(p, q, a, space, s.picard_tol, s.max_iter);

    ExperimentReport r(std::move(scenario));
    s.echo_into(r);
    r.echo("slope_tolerance", s.slope_tolerance);

    std::vector<double> xs, rhos;
    Table t{{"x", "rho"}, {}};
    for (int k = 1; k <= samples; ++k) {
        const double x = s.problem.ell / double(1 << k);
        const std::size_t ix = lab_detail::node_at_or_below(space, x);
        if (ix < 2) break;
        double diff = 0.0, num = 0.0;
        for (std::size_t m = 0; m <= ix; ++m) diff = std::max(diff, std::abs(p[m] - q[m]));
        // remainder is stored for nodes 1..N-1
        for (std::size_t m = 1; m <= ix; ++m) num = std::max(num, std::abs(c.remainder[m - 1]) / std::abs(a[m]));
        if (diff == 0.0) continue;
        xs.push_back(space[ix]);
        rhos.push_back(num / diff);
        t.rows.push_back({space[ix], num / diff});
    }
    r.add_table("contraction", std::move(t));
    if (xs.size() < 2) {
        r.note("fewer than two sample points with p != q; probe is vacuous");
        return r;
    }
    for (std::size_t i = 0; i < xs.size(); ++i)
        r.add_metric("rho_x" + format_double(xs[i]), rhos[i], Comparison::info);
    r.add_metric("fitted_slope", lab_detail::loglog_slope(xs, rhos), Comparison::greater_equal, 1.0 - s.slope_tolerance);
    return r;
}

/// Runs independent experiment jobs on up to `jobs` threads; results keep job order.
inline std::vector<ExperimentReport> run_jobs(const std::vector<std::function<ExperimentReport()>>& tasks, int jobs) {
    std::vector<ExperimentReport> out(tasks.size());
    const std::size_t width = static_cast<std::size_t>(std::max(1, jobs));
    for (std::size_t start = 0; start < tasks.size(); start += width) {
        std::vector<std::future<ExperimentReport>> batch;
        const std::size_t stop = std::min(tasks.size(), start + width);
        for (std::size_t i = start; i < stop; ++i)
            batch.push_back(std::async(width > 1 ? std::launch::async : std::launch::deferred, tasks[i]));
        for (std::size_t i = start; i < stop; ++i) out[i] = batch[i - start].get();
    }
    return out;
}

} // namespace fracinv
