#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fracinv/mittag_leffler.hpp"

using namespace fracinv;

namespace {

// e^{t^2} erfc(t) = 2/sqrt(pi) * int_0^inf exp(-s^2 - 2ts) ds, composite Simpson.
double scaled_erfc_oracle(double t) {
    const double upper = 12.0;
    const int n = 24000;
    const double h = upper / n;
    auto f = [t](double s) { return std::exp(-s * s - 2.0 * t * s); };
    double sum = f(0.0) + f(upper);
    for (int k = 1; k < n; ++k) sum += (k % 2 ? 4.0 : 2.0) * f(k * h);
    return 2.0 / std::sqrt(std::numbers::pi) * sum * h / 3.0;
}

} // namespace

TEST(MittagLeffler, ValueAtZeroIsOne) {
    for (double a : {0.1, 0.5, 0.9, 1.0, 1.5, 2.0}) EXPECT_EQ(mittag_leffler(a, 0.0), 1.0);
}

TEST(MittagLeffler, ExponentialAtOrderOne) {
    EXPECT_NEAR(mittag_leffler(1.0, -1.0), 0.36787944117144233, 1e-8);
    for (double z : {-0.1, -2.5, -10.0, -30.0, 0.8}) EXPECT_NEAR(mittag_leffler(1.0, z), std::exp(z), 1e-8 * std::exp(std::max(z, 0.0)));
}

TEST(MittagLeffler, HalfOrderAgainstErfcQuadrature) {
    EXPECT_NEAR(scaled_erfc_oracle(1.0), 0.42758357615580705, 1e-12);
    EXPECT_NEAR(mittag_leffler(0.5, -1.0), 0.42758358, 1e-6);
    for (double t = 0.0; t <= 6.0; t += 0.25) EXPECT_NEAR(mittag_leffler(0.5, -t), scaled_erfc_oracle(t), 1e-9) << t;
}

TEST(MittagLeffler, CosineAtOrderTwo) {
    EXPECT_NEAR(mittag_leffler(2.0, -4.0), std::cos(2.0), 1e-8);
    EXPECT_NEAR(mittag_leffler(2.0, -4.0), -0.41614684, 1e-8);
}

TEST(MittagLeffler, RejectsOutOfDomain) {
    EXPECT_THROW(ml_eval({0.0, -1.0, 1e-10}), InvalidArgument);
    EXPECT_THROW(ml_eval({2.5, -1.0, 1e-10}), InvalidArgument);
    EXPECT_THROW(ml_eval({0.5, 2.0, 1e-10}), InvalidArgument);
    EXPECT_THROW(ml_eval({0.5, std::nan(""), 1e-10}), InvalidArgument);
}

TEST(MittagLeffler, BoundedAndMonotoneOnNegativeAxis) {
    for (double a : {0.2, 0.5, 0.8, 1.0}) {
        double prev = 1.0;
        for (double z = 0.0; z >= -60.0; z -= 0.5) {
            const double v = mittag_leffler(a, z);
            EXPECT_GT(v, 0.0) << a << " " << z;
            EXPECT_LE(v, 1.0);
            EXPECT_LE(v, prev * (1.0 + 1e-12)) << a << " " << z;
            prev = v;
        }
    }
}

TEST(MittagLeffler, IndependentRoutesAgreeOnCrossoverBand) {
    for (double a : {0.3, 0.5, 0.7}) {
        for (double z = -12.0; z <= -8.0; z += 0.5) {
            const auto asy = ml_asymptotic(a, z);
            const auto quad = ml_integral(a, z);
            EXPECT_NEAR(asy.value, quad.value, 1e-6 * std::abs(quad.value)) << a << " " << z;
        }
        // where the series loses digits to cancellation its own error estimate says so
        for (double z = -3.0; z <= 0.0; z += 0.5) {
            const auto s = ml_series(a, z);
            EXPECT_LE(std::abs(s.value - ml_integral(a, z).value), std::max(s.error, 1e-13)) << a << " " << z;
        }
    }
}

TEST(MittagLeffler, AsymptoticTailMatchesLeadingTerm) {
    // E_a(-x) ~ x^{-1} / Gamma(1-a) for large x
    const double a = 0.5, x = 400.0;
    EXPECT_NEAR(mittag_leffler(a, -x) * x * std::tgamma(1.0 - a), 1.0, 1e-2);
}

TEST(MLDecayTable, ZeroRateAndExponential) {
    const auto times = make_time_grid(1.0, 4);
    const std::vector<double> lams{0.0, 2.0};
    const auto tab = ml_decay_table(1.0, lams, times);
    for (double v : tab[0]) EXPECT_EQ(v, 1.0);
    EXPECT_NEAR(tab[1][2], std::exp(-1.0), 1e-10);
}

TEST(MLDecayTable, WeaklyDecreasingInTime) {
    const auto times = make_time_grid(2.0, 50);
    const std::vector<double> lams{0.5, 3.0, 40.0, 900.0};
    const auto tab = ml_decay_table(0.6, lams, times);
    for (const auto& row : tab)
        for (std::size_t j = 1; j < row.size(); ++j) EXPECT_LE(row[j], row[j - 1] * (1.0 + 1e-12));
}

TEST(MLDecayTable, NegativeRateRejected) {
    const auto times = make_time_grid(1.0, 4);
    const std::vector<double> lams{-1.0};
    EXPECT_THROW(ml_decay_table(0.5, lams, times), InvalidArgument);
}
