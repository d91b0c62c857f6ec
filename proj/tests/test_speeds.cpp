#include <gtest/gtest.h>

#include <cmath>

#include "epw/speeds.hpp"

using namespace epw;

namespace {

// Plain bisection, independent of the library's root finder.
template <class F>
double bisect_plain(F f, double lo, double hi) {
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if ((f(mid) > 0) == (f(lo) > 0)) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

// 50-digit reference from an arbitrary precision solve of z^2 + 1 = exp(z^2 / 2).
constexpr double kC0 = 1.585201065244513;
constexpr double kC1MinusSqrt2 = 0.1552702843112507;

}  // namespace

TEST(FLogResidual, ArithmeticValues) {
    EXPECT_NEAR(f_log_residual(1.0, 0.0), std::log(2.0) - 0.5, 1e-15);
    EXPECT_NEAR(f_log_residual(2.0, 0.0), std::log(5.0) - 2.0, 1e-15);
    EXPECT_NEAR(f_log_residual(0.5, 0.25), 0.0, 1e-15);
}

TEST(FLogResidual, VanishesAtSqrtKappa) {
    for (double k : {1e-6, 1e-3, 0.1, 1.0, 4.0, 9.0}) EXPECT_NEAR(f_log_residual(std::sqrt(k), k), 0.0, 1e-14) << k;
}

TEST(FLogResidual, RejectsNonPositiveZ) {
    EXPECT_THROW(f_log_residual(0.0, 0.0), DomainError);
    EXPECT_THROW(f_log_residual(-1.0, 1.0), DomainError);
    EXPECT_THROW(f_log_residual(1.0, -1.0), DomainError);
}

TEST(FLogResidual, DerivativeMatchesCentralDifference) {
    for (double k : {0.0, 0.01, 1.0})
        for (double z : {1.2, 1.6, 2.5}) {
            const double h = 1e-6;
            const double fd = (f_log_residual(z + h, k) - f_log_residual(z - h, k)) / (2 * h);
            EXPECT_NEAR(f_log_residual_dz(z, k), fd, 1e-8);
        }
}

TEST(SolveC0, MatchesReferenceAndBisectionOracle) {
    const auto r = solve_c0(1e-9);
    EXPECT_NEAR(r.c, kC0, 1e-9);
    const double oracle = bisect_plain([](double z) { return std::log(z * z + 1) - z * z / 2; }, 1.0, 3.0);
    EXPECT_NEAR(solve_c0().c, oracle, 1e-13);
    EXPECT_LT(std::abs(r.residual), 1e-12);
    EXPECT_NEAR(r.c * r.c + 1.0, std::exp(r.c * r.c / 2.0), 1e-8);
}

TEST(SolveCKappa, KappaOne) {
    const auto r = solve_c_kappa(1.0, 1e-10);
    EXPECT_NEAR(r.c - std::sqrt(2.0), kC1MinusSqrt2, 1e-10);
    EXPECT_GT(r.c, std::sqrt(2.0));
    EXPECT_LT(r.bracket.first, r.c);
    EXPECT_GT(r.bracket.second, r.c);
    EXPECT_LT(f_log_residual(r.bracket.first, 1.0) * f_log_residual(r.bracket.second, 1.0), 0.0);
}

TEST(SolveCKappa, SmallKappaNearC0) {
    EXPECT_NEAR(solve_c_kappa(1e-6).c, kC0, 1e-2);
    EXPECT_THROW(solve_c_kappa(0.0), DomainError);
}

TEST(SolveCKappa, SupersonicAndSignStructure) {
    for (double k : {1e-8, 1e-4, 1e-2, 0.3, 1.0, 5.0}) {
        const double tol = 1e-12;
        const auto r = solve_c_kappa(k, tol);
        EXPECT_GT(r.c, std::sqrt(1.0 + k)) << k;
        EXPECT_LE(std::abs(r.residual), tol) << k;
        const double step = 1e-6 * r.c;
        EXPECT_GT(f_log_residual(r.c - step, k), 0.0) << k;
        EXPECT_LT(f_log_residual(r.c + step, k), 0.0) << k;
    }
}

TEST(SolveRhoHat, FixedPointOfExpH) {
    for (double k : {0.0, 0.01, 1.0}) {
        const double c = critical_speed(k).c;
        const double rh = solve_rho_hat(k, c);
        const double H = 0.5 * c * c * (1 - 1 / (rh * rh)) - k * std::log(rh);
        EXPECT_NEAR(rh, std::exp(H), 1e-11 * rh) << k;
        EXPECT_GT(rh, c / std::sqrt(1 + k));
        if (k > 0) EXPECT_LT(rh, c / std::sqrt(k));
    }
}

TEST(SolveRhoHat, KappaOneBracket) {
    const double c1 = solve_c_kappa(1.0).c;
    const double rh = solve_rho_hat(1.0, c1);
    EXPECT_GT(rh, c1 / std::sqrt(2.0));
    EXPECT_LT(rh, c1);
    const double oracle = bisect_plain(
        [c1](double r) { return std::log(r) - (0.5 * c1 * c1 * (1 - 1 / (r * r)) - std::log(r)); }, c1 / std::sqrt(2.0), c1);
    EXPECT_NEAR(rh, oracle, 1e-12);
}

TEST(SpeedGap, ScanRatioStabilises) {
    const auto rows = speed_gap_scan({1e-2, 1e-4, 1e-6});
    ASSERT_EQ(rows.size(), 3u);
    for (const auto& r : rows) EXPECT_GT(r.gap, 0.0);
    const double a = rows[1].gap_over_sqrt_kappa, b = rows[2].gap_over_sqrt_kappa;
    EXPECT_LT(std::abs(a - b) / b, 0.1);
    EXPECT_NEAR(b, speed_gap_limit(), 0.02 * b);
}

TEST(SpeedGap, TinyKappaAndEmpty) {
    const auto rows = speed_gap_scan({1e-8});
    EXPECT_GT(rows[0].gap, 0.0);
    EXPECT_LT(rows[0].gap, 1e-3);
    EXPECT_TRUE(speed_gap_scan({}).empty());
    EXPECT_THROW(speed_gap_scan({1e-4, 1e-2}), DomainError);
}

TEST(SpeedGap, MonotoneTowardC0) {
    double prev = 0.0;
    for (double k : {1e-1, 1e-2, 1e-3, 1e-4, 1e-5}) {
        const double c = solve_c_kappa(k).c;
        EXPECT_GT(c, prev);
        EXPECT_LT(c, kC0);
        prev = c;
    }
}
