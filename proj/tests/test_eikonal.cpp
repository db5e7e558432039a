// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "sgfio/eikonal.hpp"

using namespace sgfio;

namespace {

const TensorGrid kGrid{SampleGrid(4, 4, 33, 33)};

struct Closed {
    const char* a;
    std::function<double(double, double, double)> phi, phix, phixi;  // (x, xi, t - s)
};

const Closed kClosed[] = {
    {"xi", [](double x, double xi, double d) { return x * xi + d * xi; },
     [](double, double xi, double) { return xi; }, [](double x, double, double d) { return x + d; }},
    {"x*xi", [](double x, double xi, double d) { return x * xi * std::exp(d); },
     [](double, double xi, double d) { return xi * std::exp(d); },
     [](double x, double, double d) { return x * std::exp(d); }},
    {"ang(xi)", [](double x, double xi, double d) { return x * xi + d * std::sqrt(1 + xi * xi); },
     [](double, double xi, double) { return xi; },
     [](double x, double xi, double d) { return x + d * xi / std::sqrt(1 + xi * xi); }},
};

double sup_error(const EikonalPhase& phi, int bx, int bxi, const std::function<double(double, double)>& f)
{
    const auto& g = phi.grid();
    const GridField& v = phi.field(bx, bxi);
    double e = 0.0;
    for (std::size_t i = 0; i < g.x.n; ++i)
        for (std::size_t j = 0; j < g.xi.n; ++j) e = std::max(e, std::abs(v(i, j) - f(g.x.at(i), g.xi.at(j))));
    return e;
}

}  // namespace

TEST(CharacteristicFlow, MomentumConservedWithoutX)
{
    CharacteristicFlow flow(SgSymbol::parse("ang(xi) + xi^3/10", {0, 1}), 1e-3);
    for (double xi : {-2.0, 0.3, 3.0}) {
        auto st = flow.integrate(0.7, xi, 0.0, 0.2);
        EXPECT_EQ(st.p, xi);
    }
}

TEST(CharacteristicFlow, UnitTransport)
{
    CharacteristicFlow flow(SgSymbol::parse("xi", {0, 1}), 1e-3);
    for (double th : {0.01, 0.05, 0.1}) {
        auto st = flow.integrate(1.25, -0.5, 0.02, 0.02 + th);
        EXPECT_NEAR(st.q, 1.25 - th, 1e-13);  // rounding over <= 100 steps
        EXPECT_NEAR(st.M[0], 1.0, 1e-15);
    }
}

TEST(CharacteristicFlow, FourthOrder)
{
    const auto a = SgSymbol::parse("ang(xi) + 0.1*sin(x)*ang(xi)", {0, 1});
    const double T = 0.8;
    auto ref = CharacteristicFlow(a, 0.1 / 256).integrate(1.0, 2.0, 0.0, T);
    std::vector<double> err;
    for (double h : {0.1, 0.05, 0.025}) {
        auto st = CharacteristicFlow(a, h).integrate(1.0, 2.0, 0.0, T);
        err.push_back(std::hypot(st.q - ref.q, st.p - ref.p));
    }
    const double slope = std::log2(err[0] / err[2]) / 2.0;
    EXPECT_GE(slope, 3.5) << err[0] << " " << err[1] << " " << err[2];
}

TEST(Eikonal, ClosedForms)
{
    const TensorGrid g{SampleGrid(4, 4, 65, 65)};
    for (const auto& c : kClosed) {
        auto a = SgSymbol::parse(c.a, {0, 1});
        for (double d : {0.05, 0.1}) {
            auto phi = solve_eikonal(a, 0.3 + d, 0.3, g);
            using namespace std::placeholders;
            EXPECT_LE(sup_error(*phi, 0, 0, [&](double x, double xi) { return c.phi(x, xi, d); }), 1e-6) << c.a;
            EXPECT_LE(sup_error(*phi, 1, 0, [&](double x, double xi) { return c.phix(x, xi, d); }), 1e-6) << c.a;
            EXPECT_LE(sup_error(*phi, 0, 1, [&](double x, double xi) { return c.phixi(x, xi, d); }), 1e-6) << c.a;
            EXPECT_LE(phi->diagnostics().max_newton, 3) << c.a;
        }
    }
}

TEST(Eikonal, SecondDerivativesFromVariation)
{
    // x xi e^d: phi_xx = phi_xixi = 0, phi_x_xi = e^d
    auto phi = solve_eikonal(SgSymbol::parse("x*xi", {1, 1}), 0.1, 0.0, kGrid);
    EXPECT_LE(sup_error(*phi, 1, 1, [](double, double) { return std::exp(0.1); }), 1e-10);
    EXPECT_LE(sup_error(*phi, 2, 0, [](double, double) { return 0.0; }), 1e-10);
    EXPECT_LE(sup_error(*phi, 0, 2, [](double, double) { return 0.0; }), 1e-10);
    // <xi>: phi_xixi = d / <xi>^3
    auto psi = solve_eikonal(SgSymbol::parse("ang(xi)", {0, 1}), 0.1, 0.0, kGrid);
    EXPECT_LE(sup_error(*psi, 0, 2, [](double, double xi) { return 0.1 / std::pow(1 + xi * xi, 1.5); }), 1e-10);
}

TEST(Eikonal, InitialTimeIsExact)
{
    auto phi = solve_eikonal(SgSymbol::parse("ang(xi) + 0.1*sin(x)*ang(xi)", {0, 1}), 0.04, 0.04, kGrid);
    for (std::size_t i = 0; i < kGrid.x.n; ++i)
        for (std::size_t j = 0; j < kGrid.xi.n; ++j) {
            EXPECT_EQ(phi->field(0, 0)(i, j), kGrid.x.at(i) * kGrid.xi.at(j));
            EXPECT_EQ(phi->field(1, 1)(i, j), 1.0);
        }
}

TEST(Eikonal, ShootingResidual)
{
    auto phi = solve_eikonal(SgSymbol::parse("ang(xi) + 0.1*sin(x)*ang(xi)", {0, 1}), 0.1, 0.0, kGrid);
    EXPECT_LE(phi->diagnostics().max_residual, 4e-12);
}

TEST(Eikonal, BackwardEquation)
{
    // centred difference truncation delta^2/6 |d^3 phi|: zero for xi, at most 16 e^0.101 for x xi,
    // 0.1 for <xi> (third s-derivative of a linear-in-time phase vanishes)
    const double delta = 1e-3;
    const std::pair<const char*, double> cases[] = {{"xi", 0.0}, {"x*xi", 16 * std::exp(0.101)}, {"ang(xi)", 0.0}};
    for (const auto& [text, d3] : cases) {
        auto a = SgSymbol::parse(text, {1, 1});
        auto phi = solve_eikonal(a, 0.1, 0.0, kGrid);
        const double bound = delta * delta / 6 * d3 + 1e-9;
        EXPECT_LE(verify_backward(*phi, a, {}, delta), bound) << text;
        EXPECT_LE(verify_forward(*phi, a, {}, delta), bound) << text;
    }
    auto a = SgSymbol::parse("ang(xi) + 0.1*sin(x)*ang(xi)", {0, 1});
    auto phi = solve_eikonal(a, 0.1, 0.0, kGrid);
    EXPECT_LE(verify_backward(*phi, a), 1e-4);
    EXPECT_LE(verify_forward(*phi, a), 1e-4);
}

TEST(Eikonal, TimeDependentSymbol)
{
    // a = (1 + t) xi: phi = x xi + xi ((t + t^2/2) - (s + s^2/2))
    auto a = SgSymbol::parse("(1 + t)*xi", {0, 1});
    auto phi = solve_eikonal(a, 0.15, 0.05, kGrid);
    const double shift = (0.15 + 0.15 * 0.15 / 2) - (0.05 + 0.05 * 0.05 / 2);
    EXPECT_LE(sup_error(*phi, 0, 0, [&](double x, double xi) { return x * xi + shift * xi; }), 1e-12);
    EXPECT_LE(verify_backward(*phi, a), 1e-8);
}

TEST(Eikonal, SeminormLinearInTime)
{
    for (const char* text : {"ang(xi)", "ang(xi) + 0.1*sin(x)*ang(xi)"}) {
        auto a = SgSymbol::parse(text, {0, 1});
        std::vector<double> ds = {0.0125, 0.025, 0.05, 0.1}, tau;
        for (double d : ds) tau.push_back(j_seminorm(*solve_eikonal(a, d, 0.0, kGrid), 0, kGrid).jl);
        double sxy = 0, sxx = 0;
        for (std::size_t k = 0; k < ds.size(); ++k) {
            sxy += ds[k] * tau[k];
            sxx += ds[k] * ds[k];
        }
        const double c = sxy / sxx;
        for (std::size_t k = 0; k < ds.size(); ++k) {
            EXPECT_LE(tau[k], 1.2 * c * ds[k]) << text;
            EXPECT_GE(tau[k], 0.8 * c * ds[k]) << text;
        }
    }
}

TEST(Eikonal, NonConvergenceReportsNode)
{
    EikonalOptions opt;
    opt.max_newton = 0;
    try {
        solve_eikonal(SgSymbol::parse("ang(xi) + 0.1*sin(x)*ang(xi)", {0, 1}), 0.1, 0.0, kGrid, opt);
        FAIL();
    } catch (const ShootingError& e) {
        EXPECT_EQ(e.x(), kGrid.x.at(0));
    }
}

TEST(Eikonal, LevelsMatchIndividualSolves)
{
    auto a = SgSymbol::parse("ang(xi) + 0.1*sin(x)*ang(xi)", {0, 1});
    auto levels = solve_eikonal_levels(a, 0.0, {0.025, 0.05}, kGrid);
    auto single = solve_eikonal(a, 0.05, 0.0, kGrid);
    double e = 0.0;
    for (std::size_t i = 0; i < kGrid.x.n; ++i)
        for (std::size_t j = 0; j < kGrid.xi.n; ++j)
            e = std::max(e, std::abs(levels[1]->field(0, 0)(i, j) - single->field(0, 0)(i, j)));
    EXPECT_LE(e, 1e-10);  // shooting tolerance 1e-12 |x| times |xi| <= 4, two Newton paths
}
