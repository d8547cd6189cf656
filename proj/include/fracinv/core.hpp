#pragma once

// Grids, sampled fields, quadrature and boundary traces shared by every
// solver in the library. Everything here is immutable after construction.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fracinv/errors.hpp"

namespace fracinv {

using ScalarFunction = std::function<double(double)>;

// ---------------------------------------------------------------- grids

struct SpaceTag {};
struct TimeTag {};

/// Uniform partition of [0, length] into `cells` cells. Node k sits at
/// k*length/cells (computed directly, never accumulated).
template <class Tag>
class UniformGrid {
public:
    UniformGrid() = default;

    UniformGrid(double length, int cells) : length_(length), cells_(cells) {
        if (!(length > 0.0) || !std::isfinite(length))
            throw InvalidArgument("grid length must be positive and finite, got " + std::to_string(length));
        if (cells < 1)
            throw InvalidArgument("grid needs at least one cell, got " + std::to_string(cells));
        nodes_.resize(static_cast<std::size_t>(cells) + 1);
        for (int k = 0; k <= cells; ++k)
            nodes_[static_cast<std::size_t>(k)] = static_cast<double>(k) * length / static_cast<double>(cells);
        nodes_.back() = length;
    }

    double length() const noexcept { return length_; }
    int cells() const noexcept { return cells_; }
    std::size_t size() const noexcept { return nodes_.size(); }
    double step() const noexcept { return length_ / static_cast<double>(cells_); }
    double operator[](std::size_t k) const { return nodes_[k]; }
    std::span<const double> nodes() const noexcept { return nodes_; }

    bool same_as(const UniformGrid& other) const noexcept {
        return cells_ == other.cells_ && length_ == other.length_;
    }

    /// Samples `f` at every node.
    std::vector<double> sample(const ScalarFunction& f) const {
        std::vector<double> out(nodes_.size());
        for (std::size_t k = 0; k < nodes_.size(); ++k) out[k] = f(nodes_[k]);
        return out;
    }

private:
    double length_ = 0.0;
    int cells_ = 0;
    std::vector<double> nodes_;
};

using SpatialGrid = UniformGrid<SpaceTag>;
using TimeGrid = UniformGrid<TimeTag>;

inline SpatialGrid make_uniform_grid(double ell, int n_cells) { return SpatialGrid(ell, n_cells); }
inline TimeGrid make_time_grid(double horizon, int n_steps) { return TimeGrid(horizon, n_steps); }

// ------------------------------------------------------- problem setup

enum class BoundaryKind { dirichlet, neumann };

inline const char* to_string(BoundaryKind kind) {
    return kind == BoundaryKind::dirichlet ? "dirichlet" : "neumann";
}

/// Boundary condition at x = ell. An empty value function means homogeneous data.
struct BoundaryCondition {
    BoundaryKind kind = BoundaryKind::neumann;
    ScalarFunction value;

    static BoundaryCondition neumann(ScalarFunction g = {}) { return {BoundaryKind::neumann, std::move(g)}; }
    static BoundaryCondition dirichlet(ScalarFunction g = {}) { return {BoundaryKind::dirichlet, std::move(g)}; }

    double operator()(double t) const { return value ? value(t) : 0.0; }
    bool homogeneous() const noexcept { return !value; }
};

struct ProblemConfig {
    double alpha = 0.5;
    double ell = 1.0;
    double horizon = 1.0;
    BoundaryCondition right_bc{};

    void validate() const {
        if (!(alpha > 0.0 && alpha < 1.0))
            throw InvalidArgument("alpha must lie in the open interval (0,1), got " + std::to_string(alpha));
        if (!(ell > 0.0) || !std::isfinite(ell))
            throw InvalidArgument("ell must be positive, got " + std::to_string(ell));
        if (!(horizon > 0.0) || !std::isfinite(horizon))
            throw InvalidArgument("horizon T must be positive, got " + std::to_string(horizon));
    }
};

// -------------------------------------------------------------- fields

enum class CoefficientLabel { p, q, a };

inline const char* to_string(CoefficientLabel label) {
    switch (label) {
    case CoefficientLabel::p: return "p";
    case CoefficientLabel::q: return "q";
    case CoefficientLabel::a: return "a";
    }
    return "?";
}

/// Spatial samples of a coefficient (p or q) or of the initial value a.
struct CoefficientField {
    std::vector<double> samples;
    CoefficientLabel label = CoefficientLabel::p;

    static CoefficientField sample(const SpatialGrid& grid, const ScalarFunction& f, CoefficientLabel label) {
        return {grid.sample(f), label};
    }
    static CoefficientField constant(const SpatialGrid& grid, double c, CoefficientLabel label) {
        return {std::vector<double>(grid.size(), c), label};
    }

    std::size_t size() const noexcept { return samples.size(); }
    double operator[](std::size_t i) const { return samples[i]; }

    void require_on(const SpatialGrid& grid) const {
        if (samples.size() != grid.size())
            throw InvalidArgument(std::string("coefficient ") + to_string(label) + " has " +
                                  std::to_string(samples.size()) + " samples, grid has " +
                                  std::to_string(grid.size()) + " nodes");
    }
};

/// u(x_i, t_j) on a tensor grid, stored time-slice by time-slice.
class FieldSolution {
public:
    FieldSolution() = default;
    FieldSolution(ProblemConfig config, SpatialGrid space, TimeGrid time)
        : config_(std::move(config)), space_(std::move(space)), time_(std::move(time)),
          values_(space_.size() * time_.size(), 0.0) {}

    const ProblemConfig& config() const noexcept { return config_; }
    const SpatialGrid& space() const noexcept { return space_; }
    const TimeGrid& time() const noexcept { return time_; }

    double operator()(std::size_t i, std::size_t j) const { return values_[j * space_.size() + i]; }
    double& operator()(std::size_t i, std::size_t j) { return values_[j * space_.size() + i]; }

    std::span<const double> slice(std::size_t j) const {
        return std::span<const double>(values_).subspan(j * space_.size(), space_.size());
    }
    std::span<double> slice(std::size_t j) {
        return std::span<double>(values_).subspan(j * space_.size(), space_.size());
    }

    /// Time series at spatial node i.
    std::vector<double> at_node(std::size_t i) const {
        std::vector<double> out(time_.size());
        for (std::size_t j = 0; j < time_.size(); ++j) out[j] = (*this)(i, j);
        return out;
    }

    std::span<const double> raw() const noexcept { return values_; }

private:
    ProblemConfig config_;
    SpatialGrid space_;
    TimeGrid time_;
    std::vector<double> values_;
};

/// Lateral Cauchy data at x = 0.
struct CauchyTrace {
    std::vector<double> u0;
    std::vector<double> du0;
    TimeGrid time;
};

// ---------------------------------------------------------- quadrature

/// Composite trapezoid on [0, upto*step] for uniformly spaced samples.
inline double trapezoid(std::span<const double> values, double step, std::size_t upto) {
    if (upto >= values.size())
        throw InvalidArgument("trapezoid: upper index " + std::to_string(upto) + " out of range for " +
                              std::to_string(values.size()) + " samples");
    if (upto == 0) return 0.0;
    double interior = 0.0;
    for (std::size_t k = 1; k < upto; ++k) interior += values[k];
    return step * (0.5 * (values[0] + values[upto]) + interior);
}

inline double trapezoid(std::span<const double> values, const SpatialGrid& grid, std::size_t upto) {
    if (values.size() != grid.size())
        throw InvalidArgument("trapezoid: sample count does not match grid");
    return trapezoid(values, grid.step(), upto);
}

/// Running trapezoid integrals I[k] = int_0^{x_k} f.
inline std::vector<double> cumulative_trapezoid(std::span<const double> values, double step) {
    std::vector<double> out(values.size(), 0.0);
    for (std::size_t k = 1; k < values.size(); ++k)
        out[k] = out[k - 1] + 0.5 * step * (values[k - 1] + values[k]);
    return out;
}

/// Trapezoid-weighted discrete L2 norm over the whole grid.
inline double l2_norm(std::span<const double> values, double step) {
    std::vector<double> sq(values.size());
    for (std::size_t k = 0; k < values.size(); ++k) sq[k] = values[k] * values[k];
    return std::sqrt(trapezoid(sq, step, sq.size() - 1));
}

inline double l2_distance(std::span<const double> a, std::span<const double> b, double step) {
    if (a.size() != b.size()) throw InvalidArgument("l2_distance: size mismatch");
    std::vector<double> d(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) d[k] = a[k] - b[k];
    return l2_norm(d, step);
}

inline double max_abs(std::span<const double> values) {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

// ------------------------------------------------------ boundary traces

/// One-sided second-order derivative at the first node: (-3u0 + 4u1 - u2)/(2h).
inline double boundary_derivative(std::span<const double> u, double h) {
    if (u.size() < 3) throw InvalidArgument("boundary_derivative needs at least 3 nodes");
    return (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h);
}

inline double boundary_derivative(std::span<const double> u, const SpatialGrid& grid) {
    if (u.size() != grid.size()) throw InvalidArgument("boundary_derivative: sample count does not match grid");
    return boundary_derivative(u, grid.step());
}

/// Same stencil mirrored to the last node: (3u_N - 4u_{N-1} + u_{N-2})/(2h).
inline double right_boundary_derivative(std::span<const double> u, double h) {
    if (u.size() < 3) throw InvalidArgument("right_boundary_derivative needs at least 3 nodes");
    const std::size_t n = u.size() - 1;
    return (3.0 * u[n] - 4.0 * u[n - 1] + u[n - 2]) / (2.0 * h);
}

} // namespace fracinv
