#pragma once

// Recovery of p from the trace u(0,t) by regularized output least squares:
//     J(theta) = sum_j (u_p(0,t_j) - d_j)^2 dt + lambda * sum_k (theta_{k+1} - theta_k)^2 / H,
// with p the C^1 cubic Hermite interpolant of a few coarse values theta_k.
// Minimized by BFGS with central finite-difference gradients and Armijo
// backtracking. Synthetic data come from a finer grid than the inversion grid.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "fracinv/core.hpp"
#include "fracinv/errors.hpp"
#include "fracinv/forward_l1.hpp"

namespace fracinv {

/// C^1 piecewise cubic through equispaced values on [0, ell]; slopes from
/// centered differences (one-sided second order at the ends).
class CoarseProfile {
public:
    CoarseProfile(double ell, std::vector<double> values) : ell_(ell), values_(std::move(values)) {
        if (values_.size() < 2) throw InvalidArgument("CoarseProfile: need at least 2 parameters");
        if (!(ell > 0.0)) throw InvalidArgument("CoarseProfile: ell must be positive");
        const std::size_t n = values_.size() - 1;
        const double H = spacing();
        slopes_.resize(values_.size());
        if (n == 1) {
            slopes_[0] = slopes_[1] = (values_[1] - values_[0]) / H;
            return;
        }
        for (std::size_t k = 1; k < n; ++k) slopes_[k] = (values_[k + 1] - values_[k - 1]) / (2.0 * H);
        slopes_[0] = (-3.0 * values_[0] + 4.0 * values_[1] - values_[2]) / (2.0 * H);
        slopes_[n] = (3.0 * values_[n] - 4.0 * values_[n - 1] + values_[n - 2]) / (2.0 * H);
    }

    double spacing() const noexcept { return ell_ / double(values_.size() - 1); }
    std::span<const double> values() const noexcept { return values_; }

    double operator()(double x) const {
        const double H = spacing();
        const std::size_t n = values_.size() - 1;
        const double s = std::clamp(x / H, 0.0, double(n));
        const std::size_t k = std::min(static_cast<std::size_t>(s), n - 1);
        const double t = s - double(k);
        const double t2 = t * t, t3 = t2 * t;
        return (2 * t3 - 3 * t2 + 1) * values_[k] + (t3 - 2 * t2 + t) * H * slopes_[k] +
               (-2 * t3 + 3 * t2) * values_[k + 1] + (t3 - t2) * H * slopes_[k + 1];
    }

    CoefficientField sample(const SpatialGrid& grid) const {
        return CoefficientField::sample(grid, [this](double x) { return (*this)(x); }, CoefficientLabel::p);
    }

private:
    double ell_;
    std::vector<double> values_;
    std::vector<double> slopes_;
};

struct InverseProblemInstance {
    ProblemConfig config{};
    LeftBoundary left{};
    int nx = 40;                   ///< inversion grid
    int nt = 80;
    CoefficientField a{};          ///< known initial value on the inversion grid
    std::vector<double> observed;  ///< d_j = u(0,t_j), j = 0..nt
    double sigma = 0.0;
    double lambda_reg = 0.0;
    int n_params = 10;
    std::uint64_t seed = 0;
    L1Options l1{};

    SpatialGrid space() const { return make_uniform_grid(config.ell, nx); }
    TimeGrid time() const { return make_time_grid(config.horizon, nt); }

    void validate() const {
        config.validate();
        if (n_params < 2 || n_params > 20) throw InvalidArgument("n_params must lie in [2, 20]");
        if (!(sigma >= 0.0)) throw InvalidArgument("sigma must be nonnegative");
        if (!(lambda_reg >= 0.0)) throw InvalidArgument("lambda_reg must be nonnegative");
        a.require_on(space());
        if (observed.size() != time().size())
            throw InvalidArgument("observed trace has " + std::to_string(observed.size()) + " samples, time grid has " +
                                  std::to_string(time().size()));
    }
};

/// Forward solve on a grid `refine` times finer in x and t, trace at x = 0 taken
/// at the inversion times, plus N(0, (sigma * rms(d))^2) noise from a seeded mt19937_64.
inline InverseProblemInstance synthesize_data(const ScalarFunction& p_true, const ScalarFunction& a,
                                              const ProblemConfig& config, int nx, int nt, double sigma,
                                              std::uint64_t seed, int n_params = 10, const LeftBoundary& left = {},
                                              int refine = 2, const L1Options& l1 = {}) {
    config.validate();
    if (refine < 1) throw InvalidArgument("synthesize_data: refine must be at least 1");
    if (!(sigma >= 0.0)) throw InvalidArgument("synthesize_data: sigma must be nonnegative");
    const auto fine_space = make_uniform_grid(config.ell, nx * refine);
    const auto fine_time = make_time_grid(config.horizon, nt * refine);
    const auto p_f = CoefficientField::sample(fine_space, p_true, CoefficientLabel::p);
    const auto a_f = CoefficientField::sample(fine_space, a, CoefficientLabel::a);
    const auto sol = solve_ibvp(config, p_f, a_f, left, fine_space, fine_time, l1);

    InverseProblemInstance inst;
    inst.config = config;
    inst.left = left;
    inst.nx = nx;
    inst.nt = nt;
    inst.a = CoefficientField::sample(inst.space(), a, CoefficientLabel::a);
    inst.sigma = sigma;
    inst.n_params = n_params;
    inst.seed = seed;
    inst.l1 = l1;
    inst.observed.resize(static_cast<std::size_t>(nt) + 1);
    for (std::size_t j = 0; j < inst.observed.size(); ++j) inst.observed[j] = sol(0, j * static_cast<std::size_t>(refine));

    if (sigma > 0.0) {
        double ms = 0.0;
        for (double v : inst.observed) ms += v * v;
        const double rms = std::sqrt(ms / double(inst.observed.size()));
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (double& v : inst.observed) v += sigma * rms * gauss(rng);
    }
    inst.validate();
    return inst;
}

/// u_p(0, t_j) for p given by coarse parameters.
inline std::vector<double> predicted_trace(std::span<const double> theta, const InverseProblemInstance& inst) {
    const CoarseProfile profile(inst.config.ell, {theta.begin(), theta.end()});
    const auto space = inst.space();
    const auto sol = solve_ibvp(inst.config, profile.sample(space), inst.a, inst.left, space, inst.time(), inst.l1);
    return sol.at_node(0);
}

/// sqrt(sum_{j>=1} (u_p(0,t_j) - d_j)^2 dt).
inline double trace_misfit(std::span<const double> predicted, std::span<const double> observed, double dt) {
    double s = 0.0;
    for (std::size_t j = 1; j < predicted.size(); ++j) s += (predicted[j] - observed[j]) * (predicted[j] - observed[j]);
    return std::sqrt(s * dt);
}

inline double regularization_term(std::span<const double> theta, double ell) {
    const double H = ell / double(theta.size() - 1);
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < theta.size(); ++k) s += (theta[k + 1] - theta[k]) * (theta[k + 1] - theta[k]);
    return s / H;
}

inline double objective(std::span<const double> theta, const InverseProblemInstance& inst) {
    if (theta.size() != static_cast<std::size_t>(inst.n_params))
        throw InvalidArgument("objective: expected " + std::to_string(inst.n_params) + " parameters, got " +
                              std::to_string(theta.size()));
    const auto u0 = predicted_trace(theta, inst);
    const double m = trace_misfit(u0, inst.observed, inst.time().step());
    return m * m + inst.lambda_reg * regularization_term(theta, inst.config.ell);
}

struct OptimizerConfig {
    int max_iter = 200;
    double grad_tol = 1e-8;
    double fd_relative_step = 1e-4;
    double armijo = 1e-4;
    int max_halvings = 40;
    int jobs = 1;  ///< threads for the gradient components
};

/// Central differences, step fd_relative_step * max(|theta_k|, 1).
inline std::vector<double> fd_gradient(std::span<const double> theta, const InverseProblemInstance& inst,
                                       double relative_step = 1e-4, int jobs = 1) {
    const std::size_t n = theta.size();
    auto component = [&](std::size_t k) {
        const double s = relative_step * std::max(std::abs(theta[k]), 1.0);
        std::vector<double> plus(theta.begin(), theta.end()), minus(theta.begin(), theta.end());
        plus[k] += s;
        minus[k] -= s;
        return (objective(plus, inst) - objective(minus, inst)) / (2.0 * s);
    };
    std::vector<double> g(n);
    if (jobs <= 1) {
        for (std::size_t k = 0; k < n; ++k) g[k] = component(k);
        return g;
    }
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(jobs)) {
        std::vector<std::future<double>> batch;
        const std::size_t stop = std::min(n, start + static_cast<std::size_t>(jobs));
        for (std::size_t k = start; k < stop; ++k) batch.push_back(std::async(std::launch::async, component, k));
        for (std::size_t k = start; k < stop; ++k) g[k] = batch[k - start].get();
    }
    return g;
}

/// Largest |g_s - g_{s/2}| relative to |g_{s/2}| over the components.
inline double fd_gradient_halving_defect(std::span<const double> theta, const InverseProblemInstance& inst,
                                         double relative_step = 1e-4) {
    const auto g1 = fd_gradient(theta, inst, relative_step);
    const auto g2 = fd_gradient(theta, inst, 0.5 * relative_step);
    double worst = 0.0;
    for (std::size_t k = 0; k < g1.size(); ++k) worst = std::max(worst, std::abs(g1[k] - g2[k]) / std::abs(g2[k]));
    return worst;
}

struct ReconstructionResult {
    std::vector<double> estimate;   ///< coarse parameters
    std::vector<double> objective;  ///< J after each accepted iterate, starting with J(theta0)
    std::vector<double> grad_norm;
    int iterations = 0;
    bool converged = false;  ///< gradient tolerance reached
    bool degraded = false;   ///< line search failed; estimate is the best iterate
    double misfit = 0.0;     ///< sqrt(data term) at the estimate
};

inline double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

inline ReconstructionResult reconstruct(const InverseProblemInstance& inst, std::vector<double> theta0,
                                        const OptimizerConfig& opt = {}) {
    inst.validate();
    const std::size_t n = static_cast<std::size_t>(inst.n_params);
    if (theta0.size() != n) throw InvalidArgument("reconstruct: start vector has the wrong length");

    ReconstructionResult res;
    std::vector<double> x = std::move(theta0);
    double f = objective(x, inst);
    auto g = fd_gradient(x, inst, opt.fd_relative_step, opt.jobs);
    res.objective.push_back(f);
    res.grad_norm.push_back(norm2(g));

    // Inverse Hessian approximation, row-major.
    std::vector<double> hinv(n * n, 0.0);
    auto reset = [&](double scale) {
        std::fill(hinv.begin(), hinv.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) hinv[i * n + i] = scale;
    };
    reset(1.0);
    bool scaled = false;

    for (int it = 0; it < opt.max_iter; ++it) {
        if (norm2(g) <= opt.grad_tol) {
            res.converged = true;
            break;
        }
        std::vector<double> d(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) d[i] -= hinv[i * n + j] * g[j];
        double slope = std::inner_product(d.begin(), d.end(), g.begin(), 0.0);
        if (!(slope < 0.0)) {
            reset(1.0);
            for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
            slope = -norm2(g) * norm2(g);
        }

        double step = 1.0;
        std::vector<double> xn(n);
        double fn = f;
        bool accepted = false;
        for (int h = 0; h <= opt.max_halvings; ++h, step *= 0.5) {
            for (std::size_t i = 0; i < n; ++i) xn[i] = x[i] + step * d[i];
            fn = objective(xn, inst);
            if (fn <= f + opt.armijo * step * slope && fn < f) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            res.degraded = true;
            break;
        }
        const auto gn = fd_gradient(xn, inst, opt.fd_relative_step, opt.jobs);
        std::vector<double> s(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = xn[i] - x[i];
            y[i] = gn[i] - g[i];
        }
        const double sy = std::inner_product(s.begin(), s.end(), y.begin(), 0.0);
        if (sy > 1e-12 * norm2(s) * norm2(y)) {
            if (!scaled) {
                reset(sy / std::inner_product(y.begin(), y.end(), y.begin(), 0.0));
                scaled = true;
            }
            // H <- (I - r s y^T) H (I - r y s^T) + r s s^T
            const double r = 1.0 / sy;
            std::vector<double> hy(n, 0.0);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) hy[i] += hinv[i * n + j] * y[j];
            const double yhy = std::inner_product(y.begin(), y.end(), hy.begin(), 0.0);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    hinv[i * n + j] += (1.0 + r * yhy) * r * s[i] * s[j] - r * (hy[i] * s[j] + s[i] * hy[j]);
        }
        x = std::move(xn);
        f = fn;
        g = gn;
        res.iterations = it + 1;
        res.objective.push_back(f);
        res.grad_norm.push_back(norm2(g));
    }
    if (!res.degraded && norm2(g) <= opt.grad_tol) res.converged = true;
    res.estimate = x;
    res.misfit = trace_misfit(predicted_trace(x, inst), inst.observed, inst.time().step());
    return res;
}

/// Relative L2(0,ell) error of the interpolated estimate against p_true on `grid`.
inline double relative_l2_error(std::span<const double> theta, const ScalarFunction& p_true, double ell,
                                const SpatialGrid& grid) {
    const CoarseProfile profile(ell, {theta.begin(), theta.end()});
    std::vector<double> diff(grid.size()), ref(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        ref[i] = p_true(grid[i]);
        diff[i] = profile(grid[i]) - ref[i];
    }
    return l2_norm(diff, grid.step()) / l2_norm(ref, grid.step());
}

/// Misfit between the inversion-grid trace and a trace computed on a grid twice
/// as fine, for the same parameters: the part of the data the model cannot fit
/// even with exact parameters.
inline double model_error_estimate(std::span<const double> theta, const InverseProblemInstance& inst) {
    InverseProblemInstance fine = inst;
    fine.nx = 2 * inst.nx;
    fine.nt = 2 * inst.nt;
    fine.a = CoefficientField::sample(fine.space(), [&](double x) {
        // a is only known on the coarse grid; linear interpolation is enough for an error level
        const double s = x / inst.space().step();
        const std::size_t k = std::min(static_cast<std::size_t>(s), inst.a.size() - 2);
        const double t = s - double(k);
        return (1.0 - t) * inst.a[k] + t * inst.a[k + 1];
    }, CoefficientLabel::a);
    const auto coarse = predicted_trace(theta, inst);
    const auto refined = predicted_trace(theta, fine);
    std::vector<double> sub(coarse.size());
    for (std::size_t j = 0; j < sub.size(); ++j) sub[j] = refined[2 * j];
    return trace_misfit(coarse, sub, inst.time().step());
}

struct DiscrepancyResult {
    ReconstructionResult best;
    double lambda = 0.0;
    double target = 0.0;  ///< tau * max(sigma ||d||, model error) for the accepted lambda
    std::vector<double> lambdas_tried;
    std::vector<double> misfits;
    std::vector<double> targets;
};

/// Runs reconstructions for decreasing lambda (warm-started) and keeps the first
/// whose misfit drops to tau * max(sigma ||d||_{L2(0,T)}, model error); the
/// smallest lambda if none does. The model error (see model_error_estimate) is
/// evaluated at each estimate so noise-free data are not fitted below the
/// discretization level.
inline DiscrepancyResult reconstruct_discrepancy(InverseProblemInstance inst, std::vector<double> theta0,
                                                 std::vector<double> lambdas, double tau = 1.0,
                                                 const OptimizerConfig& opt = {}, bool include_model_error = true) {
    if (lambdas.empty()) throw InvalidArgument("reconstruct_discrepancy: no regularization weights given");
    std::sort(lambdas.begin(), lambdas.end(), std::greater<>());
    DiscrepancyResult out;
    const double noise_level = inst.sigma * l2_norm(inst.observed, inst.time().step());
    std::vector<double> start = std::move(theta0);
    for (double lam : lambdas) {
        inst.lambda_reg = lam;
        auto r = reconstruct(inst, start, opt);
        const double level = include_model_error ? std::max(noise_level, model_error_estimate(r.estimate, inst))
                                                 : noise_level;
        out.lambdas_tried.push_back(lam);
        out.misfits.push_back(r.misfit);
        out.targets.push_back(tau * level);
        start = r.estimate;
        out.best = std::move(r);
        out.lambda = lam;
        out.target = tau * level;
        if (out.best.misfit <= out.target) break;
    }
    return out;
}

} // namespace fracinv
