#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "fracinv/errors.hpp"

namespace fracinv {

/// General (not necessarily symmetric) tridiagonal matrix.
/// Row i reads lower[i]*x[i-1] + diag[i]*x[i] + upper[i]*x[i+1];
/// lower[0] and upper[n-1] are ignored.
struct Tridiagonal {
    std::vector<double> lower;
    std::vector<double> diag;
    std::vector<double> upper;

    explicit Tridiagonal(std::size_t n = 0) : lower(n, 0.0), diag(n, 0.0), upper(n, 0.0) {}
    std::size_t size() const noexcept { return diag.size(); }
};

/// LU factors of a Tridiagonal matrix without pivoting (Thomas algorithm).
/// Factor once, solve every time step.
class TridiagonalLU {
public:
    explicit TridiagonalLU(const Tridiagonal& m) : lower_(m.lower), upper_(m.upper), pivot_(m.size()) {
        const std::size_t n = m.size();
        if (n == 0) throw InvalidArgument("empty tridiagonal system");
        double scale = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            scale = std::max(scale, std::abs(m.diag[i]) + std::abs(m.lower[i]) + std::abs(m.upper[i]));
        const double tiny = 1e-14 * scale;
        pivot_[0] = m.diag[0];
        check_pivot(0, tiny);
        for (std::size_t i = 1; i < n; ++i) {
            pivot_[i] = m.diag[i] - lower_[i] * upper_[i - 1] / pivot_[i - 1];
            check_pivot(i, tiny);
        }
    }

    /// Solves in place.
    void solve(std::span<double> rhs) const {
        const std::size_t n = pivot_.size();
        if (rhs.size() != n) throw InvalidArgument("tridiagonal solve: rhs size mismatch");
        for (std::size_t i = 1; i < n; ++i) rhs[i] -= lower_[i] / pivot_[i - 1] * rhs[i - 1];
        rhs[n - 1] /= pivot_[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - upper_[i] * rhs[i + 1]) / pivot_[i];
    }

private:
    void check_pivot(std::size_t i, double tiny) const {
        if (!(std::abs(pivot_[i]) > tiny) || !std::isfinite(pivot_[i]))
            throw SolverFailure("singular tridiagonal system: pivot " + std::to_string(pivot_[i]) + " at row " +
                                std::to_string(i) + " (operator mu*I - D2 + diag(p) is not invertible; "
                                "check for strongly negative p)");
    }

    std::vector<double> lower_;
    std::vector<double> upper_;
    std::vector<double> pivot_;
};

} // namespace fracinv
