#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "epw/asympt.hpp"

using namespace epw;

namespace {

const WaveProfile& cold() {
    static const WaveProfile w = shoot_wave(critical_params(0.0));
    return w;
}

const WaveProfile& iso() {
    static const WaveProfile w = shoot_wave(critical_params(1.0));
    return w;
}

const WaveProfile& small_kappa() {
    static const WaveProfile w = shoot_wave(critical_params(1e-3));
    return w;
}

}  // namespace

TEST(PeakCold, ExponentsAndCoefficients) {
    const auto rep = verify_peak_cold(cold());
    ASSERT_EQ(rep.rows.size(), 4u);
    for (const auto& r : rep.rows) {
        EXPECT_LT(r.exponent_error, 0.02) << r.quantity;
        EXPECT_LT(r.coefficient_rel_error, 0.02) << r.quantity;
    }
    EXPECT_TRUE(rep.ok());
}

TEST(PeakCold, ConstantFromSpeed) {
    const double c0 = 1.585201065244513;
    EXPECT_NEAR(cold_peak_constant(c0), 0.5 * std::pow(9.0 * c0 / 2.0, 2.0 / 3.0), 1e-14);
}

TEST(PeakIsothermal, LinearAndQuadraticLaws) {
    const auto rep = verify_peak_isothermal(iso());
    for (const auto& r : rep.rows) {
        EXPECT_LT(r.exponent_error, 0.02) << r.quantity;
        EXPECT_LT(r.coefficient_rel_error, 0.02) << r.quantity;
    }
    const auto t = isothermal_targets(iso().params);
    EXPECT_NEAR(t.phi_second, 2.0 * t.phi_quadratic, 1e-14);
    EXPECT_NEAR(t.v_slope, iso().params.c / std::pow(*iso().params.rho_star, 2) * t.rho_slope, 1e-14);
}

TEST(PeakFit, WrongWaveOrUnresolvedWindow) {
    EXPECT_THROW(verify_peak_cold(iso()), DomainError);
    EXPECT_THROW(verify_peak_cold(cold(), {1e-8, 1e-3}), DomainError);
}

TEST(PeakFit, GridDensityStable) {
    const auto fine = shoot_wave(critical_params(0.0), {}, GridSpec{4000, 1e-6, 20.0});
    const auto a = verify_peak_cold(cold());
    const auto b = verify_peak_cold(fine);
    for (std::size_t i = 0; i < a.rows.size(); ++i)
        EXPECT_LT(std::abs(a.rows[i].free_fit.exponent - b.rows[i].free_fit.exponent), 1e-3) << a.rows[i].quantity;
}

TEST(Holder, ConstantAndPowerLaw) {
    std::vector<double> xi, c, f;
    for (int i = 0; i <= 4000; ++i) {
        const double x = 4.0 * i / 4000.0;
        xi.push_back(x);
        c.push_back(3.0);
        f.push_back(std::cbrt(x));
    }
    EXPECT_EQ(holder_seminorm(xi, c, 0.5), 0.0);
    // |x^{1/3} - y^{1/3}| <= |x - y|^{1/3}, equality at y = 0
    EXPECT_NEAR(holder_seminorm(xi, f, 1.0 / 3.0), 1.0, 1e-12);
    EXPECT_THROW(holder_seminorm(xi, f, 0.0), DomainError);
    EXPECT_THROW(holder_seminorm(xi, f, 1.0), DomainError);
    EXPECT_NEAR(holder_norm(xi, f, 1.0 / 3.0), std::cbrt(4.0) + 1.0, 1e-12);
}

TEST(Thickness, SmallKappa) {
    const double t = transition_thickness(small_kappa());
    // same order as the reference width 0.0056
    EXPECT_GT(t, 0.0056 / 2);
    EXPECT_LT(t, 0.0056 * 2);
    const double t4 = transition_thickness(small_kappa(), 4.0);
    EXPECT_GT(t4, t);
    EXPECT_THROW(transition_thickness(small_kappa(), 1.5), DomainError);
    EXPECT_THROW(transition_thickness(cold()), DomainError);
}

TEST(Thickness, ProfileCrossesTarget) {
    const auto& w = small_kappa();
    const double t = transition_thickness(w);
    const double target = *w.params.rho_star / 2.0;
    for (std::size_t i = w.peak_index; i < w.xi.size(); ++i) {
        if (w.xi[i] < t) EXPECT_GT(w.rho[i], target);
        else {
            EXPECT_LE(w.rho[i], target * (1 + 1e-9));
            break;
        }
    }
}

TEST(Thickness, ThreeQuarterLawAsKappaVanishes) {
    const auto deep = thickness_scan({1e-6, 3e-6, 1e-5}, 2.0, {}, {}, 1);
    EXPECT_NEAR(deep.loglog.slope, 0.75, 0.005);
    // the local slope drifts upward with kappa, so the law is asymptotic
    const auto wide = thickness_scan({1e-4, 1e-2}, 2.0, {}, {}, 1);
    EXPECT_GT(wide.loglog.slope, deep.loglog.slope);
}

TEST(ColdLimit, MismatchedGridsRejected) {
    const auto other = shoot_wave(critical_params(0.1), {}, GridSpec{1000, 1e-6, 20.0});
    EXPECT_THROW(cold_limit_report({other}, cold(), {0.2}, {0.5}, {1.0}), DomainError);
    EXPECT_THROW(cold_limit_report({cold()}, iso(), {0.2}, {0.5}, {1.0}), DomainError);
    EXPECT_THROW(lp_norm_rho_difference(small_kappa(), cold(), 1.5), DomainError);
}

TEST(ColdLimit, NormsShrinkAndWitnessStays) {
    const auto rep = cold_limit_sweep({1e-2, 1e-3}, {0.2}, {0.5}, {1.0}, {}, {}, 1);
    auto value = [&](double k, const std::string& name) {
        for (const auto& r : rep.rows)
            if (r.kappa == k && r.norm_name == name) return r.value;
        return -1.0;
    };
    for (const char* n : {"C1alpha", "Lp", "Cbeta"}) EXPECT_LT(value(1e-3, n), value(1e-2, n)) << n;
    EXPECT_GT(value(1e-3, "Calpha_seminorm"), rep.witness_floor);
}

TEST(ScalingBand, RatioBounded) {
    const auto b = scaling_band(small_kappa(), 2.0, 0.1);
    EXPECT_GT(b.n_points, 10u);
    EXPECT_GT(b.j_half_length, b.i_half_length);
    EXPECT_GT(b.min_ratio, 0.0);
    EXPECT_LT(b.max_ratio / b.min_ratio, 10.0);
}

TEST(Tail, DecayMatchesSaddleEigenvalue) {
    for (const WaveProfile* w : {&cold(), &iso()}) {
        // far enough out that the quadratic correction to the linear decay is negligible
        const auto t = tail_decay_rate(*w, 12.0, 19.0);
        EXPECT_NEAR(t.rate, t.saddle_rate, 3e-4 * t.saddle_rate);
        EXPECT_GT(t.r_squared, 0.999999);
        EXPECT_GT(tail_decay_rate(*w).rate, t.rate);
    }
}

TEST(Inflection, RhoHatCrossing) {
    const auto& w = iso();
    const double x = inflection_point(w);
    EXPECT_GT(x, 0.0);
    EXPECT_LT(x, w.xi.back());
}
