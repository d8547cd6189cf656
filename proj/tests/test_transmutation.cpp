#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fracinv/forward_l1.hpp"
#include "fracinv/transmutation.hpp"

using namespace fracinv;

namespace {

const double pi = std::numbers::pi;

struct Setup {
    SpatialGrid space;
    TimeGrid time;
    CoefficientField p, q, a;
    FieldSolution u;
    TransmutationKernel k;
};

Setup make(int nx, int nt, const ScalarFunction& p, const ScalarFunction& q, const ScalarFunction& a,
           const LeftBoundary& left = {}) {
    Setup s{make_uniform_grid(1.0, nx), make_time_grid(1.0, nt), {}, {}, {}, {}, {}};
    s.p = CoefficientField::sample(s.space, p, CoefficientLabel::p);
    s.q = CoefficientField::sample(s.space, q, CoefficientLabel::q);
    s.a = CoefficientField::sample(s.space, a, CoefficientLabel::a);
    s.u = solve_ibvp({0.5, 1.0, 1.0, BoundaryCondition::neumann()}, s.p, s.a, left, s.space, s.time);
    s.k = solve_kernel(s.p, s.q, s.space);
    return s;
}

auto p_fn = [](double x) { return std::sin(3 * x); };
auto q_fn = [](double x) { return 1 + x * x; };
auto a_fn = [](double x) { return 2 + std::cos(pi * x); };

} // namespace

TEST(ApplyTransform, ZeroKernelIsIdentity) {
    const auto s = make(40, 40, q_fn, q_fn, a_fn);
    const auto v = apply_transform(s.u, s.k);
    for (std::size_t n = 0; n < s.u.raw().size(); ++n) EXPECT_EQ(v.field.raw()[n], s.u.raw()[n]);
}

TEST(ApplyTransform, PreservesCauchyData) {
    const auto s = make(100, 100, p_fn, q_fn, a_fn, LeftBoundary{[](double t) { return t; }});
    const auto v = apply_transform(s.u, s.k);
    const auto tu = extract_trace(s.u), tv = v.trace();
    for (std::size_t j = 0; j < tu.u0.size(); ++j) {
        EXPECT_EQ(tv.u0[j], tu.u0[j]);
        EXPECT_NEAR(tv.du0[j], tu.du0[j], 1e-3);
    }
}

TEST(ApplyTransform, BoundaryDerivativeGapIsSecondOrder) {
    double prev = 0.0;
    for (int n : {50, 100, 200}) {
        const auto s = make(n, 50, p_fn, q_fn, a_fn, LeftBoundary{[](double t) { return t; }});
        const auto tu = extract_trace(s.u), tv = apply_transform(s.u, s.k).trace();
        double e = 0.0;
        for (std::size_t j = 0; j < tu.du0.size(); ++j) e = std::max(e, std::abs(tu.du0[j] - tv.du0[j]));
        if (prev > 0.0) EXPECT_GE(prev / e, 3.0);
        prev = e;
    }
}

TEST(ApplyTransform, LinearInSolution) {
    auto s = make(30, 20, p_fn, q_fn, a_fn);
    FieldSolution w = s.u;
    for (std::size_t j = 0; j < s.time.size(); ++j)
        for (std::size_t i = 0; i < s.space.size(); ++i) w(i, j) = 3.0 * s.u(i, j) - std::sin(double(i + j));
    FieldSolution z(s.u.config(), s.space, s.time);
    for (std::size_t j = 0; j < s.time.size(); ++j)
        for (std::size_t i = 0; i < s.space.size(); ++i) z(i, j) = std::sin(double(i + j));
    const auto tw = apply_transform(w, s.k), tu = apply_transform(s.u, s.k), tz = apply_transform(z, s.k);
    for (std::size_t n = 0; n < tw.field.raw().size(); ++n)
        EXPECT_NEAR(tw.field.raw()[n], 3.0 * tu.field.raw()[n] - tz.field.raw()[n], 1e-12);
}

TEST(ApplyTransform, GridMismatchThrows) {
    const auto s = make(30, 10, p_fn, q_fn, a_fn);
    const auto g = make_uniform_grid(1.0, 40);
    const auto k = solve_kernel(CoefficientField::sample(g, p_fn, CoefficientLabel::p),
                                CoefficientField::sample(g, q_fn, CoefficientLabel::q), g);
    EXPECT_THROW(apply_transform(s.u, k), InvalidArgument);
}

TEST(ApplyTransform, ComposedWithReverseKernelIsNearIdentity) {
    const auto s = make(100, 20, p_fn, q_fn, a_fn);
    const auto back = solve_kernel(CoefficientField{s.q.samples, CoefficientLabel::p},
                                   CoefficientField{s.p.samples, CoefficientLabel::q}, s.space);
    const auto round = apply_transform(apply_transform(s.u, s.k).field, back);
    // not an exact inverse; the defect is O(h) + O(||p - q||^2 l^2)
    double d = 0.0, ref = 0.0;
    for (std::size_t n = 0; n < s.u.raw().size(); ++n) {
        d = std::max(d, std::abs(round.field.raw()[n] - s.u.raw()[n]));
        ref = std::max(ref, std::abs(s.u.raw()[n]));
    }
    RecordProperty("composition_defect", std::to_string(d / ref));
    EXPECT_LE(d / ref, 0.5);
}

TEST(Residual, EqualPotentialsLeaveSchemeResidualOnly) {
    const auto s = make(100, 200, q_fn, q_fn, a_fn);
    EXPECT_LE(residual_2_3(apply_transform(s.u, s.k), s.q, extract_trace(s.u), s.k, 0.5), 1e-9);
}

TEST(Residual, ConvergesUnderJointRefinement) {
    double prev = 0.0;
    for (int n : {50, 100, 200}) {
        const auto s = make(n, 2 * n, p_fn, q_fn, a_fn);
        const double r = residual_2_3(apply_transform(s.u, s.k), s.q, extract_trace(s.u), s.k, 0.5);
        if (prev > 0.0) EXPECT_GE(prev / r, 2.5) << n;
        prev = r;
    }
}

TEST(Residual, BoundaryTermAblation) {
    const auto s = make(100, 200, p_fn, q_fn, a_fn, LeftBoundary{[](double t) { return std::sin(pi * t); }});
    const auto v = apply_transform(s.u, s.k);
    const auto tr = extract_trace(s.u);
    const double with = residual_2_3(v, s.q, tr, s.k, 0.5);
    const double without = residual_2_3(v, s.q, tr, s.k, 0.5, {false, {}});
    EXPECT_GE(without, 10.0 * with);
}
