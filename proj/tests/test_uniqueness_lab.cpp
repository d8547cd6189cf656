#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fracinv/uniqueness_lab.hpp"

using namespace fracinv;

namespace {

const double pi = std::numbers::pi;

LabSettings small() {
    LabSettings s;
    s.nx = 100;
    s.nt = 200;
    return s;
}

ScalarFunction constant(double c) {
    return [c](double) { return c; };
}

} // namespace

TEST(RequireNonvanishing, RejectsInitialValueTouchingZero) {
    const auto g = make_uniform_grid(1.0, 50);
    EXPECT_THROW(require_nonvanishing(CoefficientField::sample(g, [](double x) { return std::sin(pi * x); },
                                                               CoefficientLabel::a)),
                 PreconditionViolation);
    EXPECT_THROW(require_nonvanishing(CoefficientField::sample(g, [](double x) { return 1e-8 + x; }, CoefficientLabel::a)),
                 PreconditionViolation);
    EXPECT_NO_THROW(require_nonvanishing(CoefficientField::sample(g, [](double x) { return -1 - x; }, CoefficientLabel::a)));
    EXPECT_THROW(distinguishability(constant(0), constant(1), [](double x) { return x - 0.5; }, small()),
                 PreconditionViolation);
}

TEST(Distinguishability, EqualPotentialsGiveIdenticalTraces) {
    const auto r = distinguishability([](double x) { return 1 + x * x; }, [](double x) { return 1 + x * x; },
                                      [](double x) { return 2 + std::cos(pi * x); }, small());
    EXPECT_LE(r.metric("gap").value, 1e-8);
    EXPECT_EQ(r.metric("gap").comparison, Comparison::less_equal);
    EXPECT_TRUE(r.passed());
}

TEST(Distinguishability, ZeroVersusOne) {
    const auto r = distinguishability(constant(0), constant(1), constant(1), small());
    EXPECT_GT(r.metric("gap").value, 1e-3);
    EXPECT_TRUE(r.passed());
}

TEST(Distinguishability, DifferenceOnlyBeyondMidpoint) {
    const auto r = distinguishability(constant(0), [](double x) { return 2 * std::pow(std::max(x - 0.5, 0.0), 2); },
                                      constant(1), small());
    EXPECT_GT(r.metric("gap").value, 100 * r.metric("noise_floor").value);
}

TEST(Distinguishability, ThresholdsAreEchoed) {
    LabSettings s = small();
    s.distinguish_factor = 42;
    const auto r = distinguishability(constant(0), constant(1), constant(1), s);
    const auto j = r.to_json();
    EXPECT_EQ(j["config"]["distinguish_factor"], "42");
    EXPECT_EQ(j["config"]["right_bc"], "neumann");
    EXPECT_DOUBLE_EQ(r.metric("gap").threshold, 42 * r.metric("noise_floor").value);
}

TEST(Distinguishability, RejectsInhomogeneousRightData) {
    LabSettings s = small();
    s.problem.right_bc = BoundaryCondition::neumann([](double t) { return t; });
    EXPECT_THROW(distinguishability(constant(0), constant(1), constant(1), s), InvalidArgument);
}

TEST(KernelVanishing, WholeIntervalAndHalfInterval) {
    LabSettings s = small();
    s.picard_tol = 1e-10;
    const auto all = kernel_vanishing_check(constant(1), constant(1), 1.0, s);
    EXPECT_EQ(all.metric("sub_triangle_max").value, 0.0);
    const auto half = kernel_vanishing_check([](double x) { return 1 + x * x; },
                                             [](double x) { return 1 + x * x + 3 * std::pow(std::max(x - 0.5, 0.0), 2); },
                                             0.5, s);
    EXPECT_LE(half.metric("sub_triangle_max").value, 1e-10);
    EXPECT_GT(half.metric("global_max").value, 1e-3);
    EXPECT_THROW(kernel_vanishing_check(constant(1), constant(1), 1.5, s), InvalidArgument);
}

TEST(AxisVanishing, DoubledIntervalOfAgreement) {
    LabSettings s = small();
    const auto r = axis_vanishing_check([](double x) { return std::cos(x); },
                                        [](double x) { return std::cos(x) + std::pow(std::max(x - 0.3, 0.0), 2); }, 0.3, s);
    EXPECT_TRUE(r.passed());
    EXPECT_GT(r.metric("axis_max_global").value, 1e-4);
}

TEST(MomentIdentity, EqualPotentialsBothSidesVanish) {
    LabSettings s = small();
    s.nx = 40;
    const auto r = moment_identity(constant(2), constant(2), constant(1), s, 2);
    EXPECT_EQ(r.metric("discrepancy_N40").value, 0.0);
    EXPECT_EQ(r.metric("discrepancy_N80").value, 0.0);
}

TEST(MomentIdentity, ConstantPairSecondOrder) {
    LabSettings s = small();
    s.nx = 50;
    const auto r = moment_identity(constant(0), constant(1), constant(1), s, 3);
    EXPECT_GE(r.metric("discrepancy_N100").value / r.metric("discrepancy_N200").value, 3.0);
    EXPECT_GE(r.metric("fitted_order").value, 1.7);
    EXPECT_EQ(r.metric("boundary_term_max").value, 0.0);  // a'(0) = 0
}

TEST(MomentIdentity, CurvedInitialValueActivatesSecondDerivativeTerm) {
    LabSettings s = small();
    s.nx = 50;
    const auto r = moment_identity([](double x) { return std::sin(3 * x); }, [](double x) { return 1 + x * x; },
                                   [](double x) { return 2 + std::sin(x); }, s, 3);
    EXPECT_GE(r.metric("fitted_order").value, 1.7);
    EXPECT_GT(r.metric("boundary_term_max").value, 0.0);  // a'(0) = 1
}

TEST(ContractionProbe, RampAndEqualPotentials) {
    LabSettings s = small();
    const auto ramp = contraction_probe(constant(0), [](double x) { return x; }, constant(1), s);
    EXPECT_TRUE(ramp.passed());
    EXPECT_GE(ramp.metric("fitted_slope").value, 0.7);
    const auto sq = contraction_probe(constant(0), [](double x) { return x * x; }, constant(1), s);
    EXPECT_TRUE(sq.passed());
    const auto same = contraction_probe(constant(1), constant(1), constant(1), s);
    EXPECT_THROW(same.metric("fitted_slope"), std::out_of_range);
    ASSERT_FALSE(same.notes().empty());
}

TEST(RunJobs, ParallelMatchesSequentialInOrder) {
    std::vector<std::function<ExperimentReport()>> tasks;
    for (double c : {0.5, 1.0, 2.0, 3.0})
        tasks.push_back([c] { return distinguishability(constant(0), constant(c), constant(1), small(), "c"); });
    const auto seq = run_jobs(tasks, 1);
    const auto par = run_jobs(tasks, 3);
    ASSERT_EQ(seq.size(), par.size());
    for (std::size_t n = 0; n < seq.size(); ++n) EXPECT_EQ(seq[n].to_json().dump(), par[n].to_json().dump());
    EXPECT_LT(seq[0].metric("gap").value, seq[3].metric("gap").value);
}
