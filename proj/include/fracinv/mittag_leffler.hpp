#pragma once

// One-parameter Mittag-Leffler function E_alpha(z) = sum_k z^k / Gamma(alpha*k + 1)
// for real z <= 1 and 0 < alpha <= 2.
//
// Three evaluation routes are combined:
//   * power series with Neumaier-compensated summation. Exact in principle, but
//     for z < 0 the largest term grows like exp(|z|^(1/alpha)), so cancellation
//     limits it to moderate |z|^(1/alpha);
//   * the algebraic asymptotic expansion -sum_{k>=1} z^-k / Gamma(1 - alpha*k),
//     truncated at its smallest term (plus the two oscillating exponential
//     terms when 1 < alpha <= 2);
//   * for 0 < alpha < 1, the Laplace-type integral
//       E_alpha(-x) = sin(a pi)/(a pi) * int_0^inf exp(-(x s)^(1/a)) / (s^2 + 2 s cos(a pi) + 1) ds,
//     which covers the band where neither expansion reaches the tolerance.
// ml_eval picks the first route whose own error estimate meets the tolerance.

#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/sin_pi.hpp>

#include "fracinv/core.hpp"
#include "fracinv/errors.hpp"

namespace fracinv {

enum class MLBranch { exact, series, asymptotic, integral };

inline const char* to_string(MLBranch b) {
    switch (b) {
    case MLBranch::exact: return "exact";
    case MLBranch::series: return "series";
    case MLBranch::asymptotic: return "asymptotic";
    case MLBranch::integral: return "integral";
    }
    return "?";
}

struct MLRequest {
    double alpha = 0.5;
    double z = 0.0;
    double rel_tol = 1e-10;

    void validate() const {
        if (!(alpha > 0.0 && alpha <= 2.0))
            throw InvalidArgument("Mittag-Leffler order alpha must lie in (0,2], got " + std::to_string(alpha));
        if (!(z <= 1.0) || std::isnan(z))
            throw InvalidArgument("Mittag-Leffler argument must satisfy z <= 1, got " + std::to_string(z));
        if (!(rel_tol > 0.0 && rel_tol <= 1e-2))
            throw InvalidArgument("Mittag-Leffler rel_tol must lie in (0, 1e-2], got " + std::to_string(rel_tol));
    }
};

struct MLResult {
    double value = 0.0;
    double error_estimate = 0.0;  ///< absolute
    MLBranch branch = MLBranch::exact;
    bool accuracy_warning = false;  ///< requested tolerance not reached by any route
};

/// Value of one evaluation route together with its absolute error estimate.
struct MLEstimate {
    double value = 0.0;
    double error = 0.0;
};

namespace ml_detail {

constexpr double eps = std::numeric_limits<double>::epsilon();

/// Neumaier's variant of Kahan summation.
class CompensatedSum {
public:
    void add(double v) {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            comp_ += (sum_ - t) + v;
        else
            comp_ += (v - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// z^k / Gamma(alpha k + 1), direct where representable, log-form otherwise.
inline double series_term(double alpha, double z, int k) {
    if (k == 0) return 1.0;
    const double g_arg = alpha * k + 1.0;
    if (g_arg < 170.0) {
        const double num = std::pow(z, k);
        if (std::isfinite(num)) return num / std::tgamma(g_arg);
    }
    const double log_mag = k * std::log(std::abs(z)) - std::lgamma(g_arg);
    const double mag = std::exp(log_mag);
    return (z < 0.0 && (k % 2) == 1) ? -mag : mag;
}

} // namespace ml_detail

/// Power series route. Valid for every z; accurate while exp(|z|^(1/alpha)) * eps
/// stays small compared with the result.
inline MLEstimate ml_series(double alpha, double z) {
    using namespace ml_detail;
    if (z == 0.0) return {1.0, 0.0};
    CompensatedSum sum;
    double abs_sum = 0.0;
    double prev = std::numeric_limits<double>::infinity();
    double last = 0.0;
    constexpr int max_terms = 20000;
    for (int k = 0; k < max_terms; ++k) {
        const double term = series_term(alpha, z, k);
        sum.add(term);
        abs_sum += std::abs(term);
        last = std::abs(term);
        const double s = std::abs(sum.value());
        if (last < prev && last <= 1e-18 * std::max(s, abs_sum * 1e-300) && k > 2) break;
        if (last == 0.0 && k > 2) break;
        prev = last;
    }
    // Each term carries a few ulps from pow/tgamma (or lgamma in log form).
    const double err = 8.0 * eps * abs_sum + last;
    return {sum.value(), err};
}

/// Asymptotic expansion for z < 0, truncated just before its smallest term.
inline MLEstimate ml_asymptotic(double alpha, double z) {
    if (!(z < 0.0)) throw InvalidArgument("ml_asymptotic requires z < 0");
    const double x = -z;
    const double log_x = std::log(x);
    ml_detail::CompensatedSum sum;
    // Envelope |Gamma(alpha k)| x^-k / pi bounds |1/Gamma(1 - alpha k)| x^-k; track its minimum.
    double prev_env = std::numeric_limits<double>::infinity();
    double err = std::numeric_limits<double>::infinity();
    constexpr int max_terms = 5000;
    for (int k = 1; k <= max_terms; ++k) {
        const double s = alpha * k;
        const double env = std::exp(std::lgamma(s) - k * log_x) / std::numbers::pi;
        if (env >= prev_env) {
            err = prev_env;
            break;
        }
        // 1/Gamma(1-s) = sin(pi s) Gamma(s) / pi ; z^-k = (-1)^k x^-k.
        const double sgn = (k % 2 == 0) ? 1.0 : -1.0;
        const double term = -sgn * env * boost::math::sin_pi(s);
        sum.add(term);
        prev_env = env;
        err = env;
        if (env <= 1e-18 * std::abs(sum.value())) break;
    }
    double value = sum.value();
    if (alpha > 1.0) {
        // Oscillating exponential contributions from z^(1/alpha) e^(+-i pi/alpha).
        const double r = std::pow(x, 1.0 / alpha);
        const double expo = (2.0 / alpha) * std::exp(r * std::cos(std::numbers::pi / alpha));
        value += expo * std::cos(r * std::sin(std::numbers::pi / alpha));
        // On the negative axis these terms are exponentially small for alpha < 2
        // and their Stokes weight is not resolved here; count them as uncertainty.
        if (alpha < 2.0) err += expo;
    }
    return {value, err};
}

/// Laplace-type integral route for 0 < alpha < 1 and z <= 0.
/// `quad_tol` is the relative tolerance handed to tanh-sinh quadrature, which
/// copes with the s^(1/alpha) endpoint behaviour at s = 0.
inline MLEstimate ml_integral(double alpha, double z, double quad_tol = 1e-13) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("ml_integral requires 0 < alpha < 1");
    if (z > 0.0) throw InvalidArgument("ml_integral requires z <= 0");
    const double x = -z;
    const double c = std::cos(alpha * std::numbers::pi);
    const double inv_alpha = 1.0 / alpha;
    // [1, inf) is folded onto [0, 1] by s -> 1/s; the denominator is invariant.
    auto integrand = [&](double s) {
        const double denom = s * s + 2.0 * s * c + 1.0;
        double num = std::exp(-std::pow(x * s, inv_alpha));
        if (s > 0.0) num += std::exp(-std::pow(x / s, inv_alpha));
        return num / denom;
    };
    static thread_local boost::math::quadrature::tanh_sinh<double> rule;
    double quad_err = 0.0;
    double l1 = 0.0;
    const double integral = rule.integrate(integrand, 0.0, 1.0, quad_tol, &quad_err, &l1);
    const double pref = std::sin(alpha * std::numbers::pi) / (alpha * std::numbers::pi);
    return {pref * integral, std::abs(pref) * (quad_err + 8.0 * ml_detail::eps * l1)};
}

inline MLResult ml_eval(const MLRequest& req) {
    req.validate();
    const double alpha = req.alpha;
    const double z = req.z;
    if (z == 0.0) return {1.0, 0.0, MLBranch::exact, false};

    auto good = [&](const MLEstimate& e) { return e.error <= req.rel_tol * std::abs(e.value); };

    MLEstimate best{0.0, std::numeric_limits<double>::infinity()};
    MLBranch best_branch = MLBranch::series;

    // Largest series term is about exp(|z|^(1/alpha)); past ~40 it cannot help.
    const double growth = std::pow(std::abs(z), 1.0 / alpha);
    if (z > 0.0 || growth <= 40.0) {
        const MLEstimate s = ml_series(alpha, z);
        if (good(s) || z > 0.0) return {s.value, s.error, MLBranch::series, !good(s)};
        best = s;
    }
    // The algebraic expansion vanishes identically at alpha = 1.
    if (alpha == 1.0) return {std::exp(z), ml_detail::eps * std::exp(z), MLBranch::exact, false};
    const MLEstimate a = ml_asymptotic(alpha, z);
    if (good(a)) return {a.value, a.error, MLBranch::asymptotic, false};
    if (a.error < best.error) {
        best = a;
        best_branch = MLBranch::asymptotic;
    }
    if (alpha < 1.0) {
        const MLEstimate q = ml_integral(alpha, z, std::min(1e-13, 0.01 * req.rel_tol));
        if (good(q) || q.error < best.error) return {q.value, q.error, MLBranch::integral, !good(q)};
    }
    return {best.value, best.error, best_branch, true};
}

/// Convenience wrapper returning only the value.
inline double mittag_leffler(double alpha, double z, double rel_tol = 1e-10) {
    return ml_eval({alpha, z, rel_tol}).value;
}

/// Table of E_alpha(-lambda_i t_j^alpha), rows indexed by lambda, columns by time.
inline std::vector<std::vector<double>> ml_decay_table(double alpha, std::span<const double> lambdas,
                                                       const TimeGrid& times, double rel_tol = 1e-10) {
    if (!(alpha > 0.0 && alpha <= 2.0))
        throw InvalidArgument("ml_decay_table: alpha must lie in (0,2], got " + std::to_string(alpha));
    for (double lam : lambdas)
        if (!(lam >= 0.0)) throw InvalidArgument("ml_decay_table: negative decay rate " + std::to_string(lam));
    std::vector<std::vector<double>> table(lambdas.size(), std::vector<double>(times.size(), 1.0));
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        if (lambdas[i] == 0.0) continue;
        for (std::size_t j = 1; j < times.size(); ++j)
            table[i][j] = ml_eval({alpha, -lambdas[i] * std::pow(times[j], alpha), rel_tol}).value;
    }
    return table;
}

} // namespace fracinv
