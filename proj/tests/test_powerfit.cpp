#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "epw/powerfit.hpp"

using namespace epw;

namespace {
std::vector<double> logspace(double a, double b, int n) {
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = a * std::pow(b / a, static_cast<double>(i) / (n - 1));
    return x;
}
}  // namespace

TEST(FitLine, ExactLine) {
    const auto f = fit_line({0, 1, 2, 3}, {1, 3, 5, 7});
    EXPECT_NEAR(f.slope, 2.0, 1e-14);
    EXPECT_NEAR(f.intercept, 1.0, 1e-14);
    EXPECT_NEAR(f.r_squared, 1.0, 1e-14);
}

TEST(FitPower, ExactSynthetic) {
    const auto xi = logspace(1e-3, 1.0, 100);
    std::vector<double> y;
    for (double x : xi) y.push_back(7.0 * std::pow(x, 1.5));
    const auto f = fit_power(xi, y, {1e-3, 1.0});
    EXPECT_NEAR(f.exponent, 1.5, 1e-12);
    EXPECT_NEAR(f.coefficient, 7.0, 1e-10);
    EXPECT_EQ(f.n_points, 100u);
    EXPECT_FALSE(f.pinned);
}

TEST(FitPower, UsesAbsoluteXiAndWindow) {
    std::vector<double> xi, y;
    for (double x : logspace(1e-6, 1.0, 300)) {
        xi.push_back(-x);
        y.push_back(std::pow(x, 4.0 / 3.0) * (1.0 + x));
    }
    const auto f = fit_power(xi, y, {1e-5, 1e-3});
    EXPECT_NEAR(f.exponent, 4.0 / 3.0, 1e-3);
    EXPECT_GE(f.window.first, 1e-5);
    EXPECT_LE(f.window.second, 1e-3);
}

TEST(FitPower, Errors) {
    const auto xi = logspace(1e-3, 1.0, 50);
    std::vector<double> y(xi.size(), 1.0);
    EXPECT_THROW(fit_power(xi, y, {2.0, 3.0}), DomainError);
    EXPECT_THROW(fit_power(xi, y, {1e-3, 2e-3}), DomainError);
    y[10] = -1.0;
    EXPECT_THROW(fit_power(xi, y, {1e-3, 1.0}), DomainError);
}

TEST(FitPowerPinned, RecoversCoefficient) {
    const auto xi = logspace(1e-4, 1e-2, 80);
    std::vector<double> y;
    for (double x : xi) y.push_back(2.5 * std::pow(x, 2.0 / 3.0));
    const auto f = fit_power_pinned(xi, y, {1e-4, 1e-2}, 2.0 / 3.0);
    EXPECT_TRUE(f.pinned);
    EXPECT_DOUBLE_EQ(f.exponent, 2.0 / 3.0);
    EXPECT_NEAR(f.coefficient, 2.5, 1e-12);
}
