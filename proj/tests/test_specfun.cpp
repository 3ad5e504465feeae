#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "trimer1d/specfun.hpp"

using namespace trimer1d;

namespace {

std::vector<double> log_samples(double a, double b, int n) {
    std::vector<double> v;
    for (int k = 0; k < n; ++k) v.push_back(a * std::pow(b / a, k / double(n - 1)));
    return v;
}

} // namespace

TEST(LambertW0, ExactValues) {
    EXPECT_EQ(lambert_w0(0.0), 0.0);
    EXPECT_NEAR(lambert_w0(M_E), 1.0, 1e-15);
    EXPECT_NEAR(lambert_w0(-1.0 / M_E), -1.0, 1e-7);
}

TEST(LambertW0, OmegaConstantMatchesFixedPointOracle) {
    const double frozen = 0.5671432904097838;  // fixed-point oracle at z = 1
    EXPECT_NEAR(oracle::w0_fixed_point(1.0), frozen, 1e-15);
    EXPECT_NEAR(lambert_w0(1.0), frozen, 1e-15);
}

TEST(LambertW0, AgreesWithFixedPointOracleOnPositiveAxis) {
    for (double z : log_samples(1e-6, 50.0, 40))
        EXPECT_NEAR(lambert_w0(z), oracle::w0_fixed_point(z), 1e-13 * std::max(1.0, lambert_w0(z))) << z;
}

TEST(LambertW0, DefiningEquationResidual) {
    std::vector<double> zs;
    for (double d : log_samples(1e-6, 1.0 / M_E, 30)) zs.push_back(-1.0 / M_E + d);
    for (double z : log_samples(1e-10, 1e6, 60)) zs.push_back(z);
    for (double z : zs) {
        const double w = lambert_w0(z);
        EXPECT_GE(w, -1.0);
        EXPECT_LE(std::abs(w * std::exp(w) - z), 1e-12 * std::max(1.0, std::abs(z))) << z;
    }
}

TEST(LambertW0, MonotoneIncreasing) {
    double prev = lambert_w0(-1.0 / M_E);
    for (double d : log_samples(1e-9, 1e6, 400)) {
        const double w = lambert_w0(-1.0 / M_E + d);
        EXPECT_GE(w, prev) << d;
        prev = w;
    }
}

TEST(LambertW0, BranchPointBand) {
    EXPECT_NEAR(lambert_w0(-1.0 / M_E - 5e-13), -1.0, 1e-5);
    try {
        lambert_w0(-1.0 / M_E - 1e-9);
        FAIL() << "expected a domain error";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::domain);
    }
}

TEST(BesselK0, ValueAtOneMatchesIntegralOracle) {
    const double frozen = 0.42102443824070833;  // trapezoid oracle of int exp(-cosh t) dt
    EXPECT_NEAR(oracle::k0_integral(1.0), frozen, 1e-15);
    EXPECT_NEAR(bessel_k0(1.0), frozen, 1e-12 * frozen);
}

TEST(BesselK0, AgreesWithIntegralOracle) {
    for (double x : log_samples(1e-6, 50.0, 80)) {
        const double ref = oracle::k0_integral(x);
        EXPECT_NEAR(bessel_k0(x), ref, 1e-10 * ref) << x;
    }
}

TEST(BesselK0, SmallArgumentLogExpansion) {
    const double x = 1e-6;
    const double lead = -std::log(0.5 * x) - 0.57721566490153286;
    EXPECT_NEAR(bessel_k0(x), lead, 1e-10);
}

TEST(BesselK0, LargeArgumentUnderflowsCleanly) {
    const double v = bessel_k0(700.0);
    EXPECT_FALSE(std::isnan(v));
    EXPECT_GE(v, 0.0);
    EXPECT_LT(v, 1e-300);
    EXPECT_EQ(bessel_k0(1e4), 0.0);
}

TEST(BesselK0, PositiveAndDecreasing) {
    double prev = INFINITY;
    for (double x : log_samples(1e-8, 700.0, 300)) {
        const double v = bessel_k0(x);
        EXPECT_GT(v, 0.0) << x;
        EXPECT_LT(v, prev) << x;
        prev = v;
    }
}

TEST(BesselK0, DomainErrors) {
    for (double x : {0.0, -1.0, std::nan("")}) {
        try {
            bessel_k0(x);
            FAIL() << "expected a domain error for " << x;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::domain);
        }
    }
}
