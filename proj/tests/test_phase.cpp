// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>

#include "sgfio/phase.hpp"

using namespace sgfio;

namespace {

const TensorGrid kGrid{SampleGrid(4, 4, 65, 65)};

// sup over the grid of a weight-normalised closed-form quantity
template <typename F>
double grid_sup(const TensorGrid& g, F f)
{
    double s = 0.0;
    for (std::size_t i = 0; i < g.x.n; ++i)
        for (std::size_t j = 0; j < g.xi.n; ++j) s = std::max(s, std::abs(f(g.x.at(i), g.xi.at(j))));
    return s;
}

}  // namespace

TEST(Interp, LagrangeExactOnPolynomials)
{
    TensorGrid g{SampleGrid(2, 3, 17, 21)};
    GridField f(g.x.n, g.xi.n);
    auto poly = [](double x, double xi) { return 1 + x - 2 * x * x * x + xi * xi * x - 0.5 * xi * xi * xi * xi * xi; };
    for (std::size_t i = 0; i < g.x.n; ++i)
        for (std::size_t j = 0; j < g.xi.n; ++j) f(i, j) = poly(g.x.at(i), g.xi.at(j));
    for (double x : {-2.0, -1.93, 0.01, 1.99, 2.0})
        for (double xi : {-3.0, -0.3, 2.71, 3.0}) EXPECT_NEAR(interpolate(f, g, x, xi, 6), poly(x, xi), 1e-11);
    // node values are returned untouched
    EXPECT_EQ(interpolate(f, g, g.x.at(3), g.xi.at(7), 6), f(3, 7));
    EXPECT_THROW(interpolate(f, g, 2.1, 0.0, 6), DomainError);
}

TEST(Interp, FornbergWeights)
{
    auto w = fd_weights(1, 0.0, {-1.0, 0.0, 1.0});
    EXPECT_NEAR(w[0], -0.5, 1e-15);
    EXPECT_NEAR(w[1], 0.0, 1e-15);
    EXPECT_NEAR(w[2], 0.5, 1e-15);
    auto w2 = fd_weights(2, 0.0, {-1.0, 0.0, 1.0});
    EXPECT_NEAR(w2[0], 1.0, 1e-15);
    EXPECT_NEAR(w2[1], -2.0, 1e-15);
}

TEST(PhaseFunction, JIdentity)
{
    auto phi = ExprPhase::parse("x*xi + 0.1*sin(x)*ang(xi)");
    for (double x : {-1.0, 0.3, 2.0})
        for (double xi : {-2.0, 0.0, 1.5}) {
            EXPECT_EQ(j_derivative(*phi, 0, 0, x, xi) + x * xi, (*phi)(x, xi));
            EXPECT_EQ(j_derivative(*phi, 1, 1, x, xi), phi->derivative(1, 1, x, xi) - 1.0);
        }
}

TEST(GriddedPhase, MatchesOracle)
{
    auto phi = ExprPhase::parse("x*xi + 0.1*sin(x)*ang(xi)");
    auto gp = tabulate(*phi, kGrid, 1);
    EXPECT_TRUE(gp->supplied(1, 0));
    EXPECT_FALSE(gp->supplied(2, 0));
    // differenced second and third derivatives at nodes
    double err2 = 0.0, err3 = 0.0;
    for (std::size_t i = 0; i < kGrid.x.n; ++i)
        for (std::size_t j = 0; j < kGrid.xi.n; ++j) {
            const double x = kGrid.x.at(i), xi = kGrid.xi.at(j);
            err2 = std::max(err2, std::abs(gp->field(1, 1)(i, j) - phi->derivative(1, 1, x, xi)));
            err2 = std::max(err2, std::abs(gp->field(2, 0)(i, j) - phi->derivative(2, 0, x, xi)));
            err3 = std::max(err3, std::abs(gp->field(2, 1)(i, j) - phi->derivative(2, 1, x, xi)));
        }
    EXPECT_LE(err2, 1e-6);
    EXPECT_LE(err3, 1e-4);
    // off-grid values
    for (double x : {-3.97, -1.1, 0.06, 2.5})
        for (double xi : {-3.3, 0.77, 3.9}) EXPECT_NEAR((*gp)(x, xi), (*phi)(x, xi), 1e-7);
}

TEST(JSeminorm, IdentityIsZero)
{
    auto js = j_seminorm(*identity_phase(), 2, kGrid);
    EXPECT_EQ(js.jl, 0.0);
    EXPECT_EQ(js.j2l, 0.0);
    auto c = certify_regular(*identity_phase(), kGrid, 2);
    EXPECT_EQ(c.r, 1.0);
    EXPECT_EQ(c.tau, 0.0);
    EXPECT_EQ(c.tau_ell, 0.0);
    EXPECT_EQ(c.cls, "P_r(tau,ell)");
}

TEST(JSeminorm, LinearShift)
{
    // J = 0.05 xi: only D_xi J = 0.05 is nonzero, weighted by 1/<x>, largest at x = 0
    auto phi = ExprPhase::parse("x*xi + 0.05*xi");
    auto js = j_seminorm(*phi, 0, kGrid);
    EXPECT_NEAR(js.jl, 0.05, 1e-15);
    EXPECT_EQ(js.j2l, 0.0);
    auto c = certify_regular(*phi, kGrid, 0);
    EXPECT_EQ(c.r, 1.0);
    EXPECT_NEAR(c.tau, 0.05, 1e-15);
}

TEST(JSeminorm, DilationSumVersusSup)
{
    // J = c x xi: the order-one sup approaches c at the corners, the mixed second derivative is c
    const double c = std::exp(0.1) - 1.0;
    auto phi = ExprPhase::parse("x*xi*exp(0.1)");
    auto js = j_seminorm(*phi, 0, kGrid);
    const double first = grid_sup(kGrid, [&](double x, double xi) {
        return std::max({c * std::abs(x * xi) / (ang(x) * ang(xi)), c * std::abs(xi) / ang(xi), c * std::abs(x) / ang(x)});
    });
    EXPECT_NEAR(js.first, first, 1e-15);
    EXPECT_NEAR(js.j2l, c, 1e-15);
    EXPECT_NEAR(js.jl, first + c, 1e-15);
    EXPECT_NEAR(js.sup_form, c, 1e-15);
}

TEST(JSeminorm, Homogeneous)
{
    const std::string j = "0.07*sin(x)*ang(xi) + 0.02*x*cos(xi)";
    auto base = j_seminorm(*ExprPhase::parse("x*xi + " + j), 2, kGrid);
    for (double c : {-2.0, 0.5, 4.0}) {
        auto sc = j_seminorm(*ExprPhase::parse("x*xi + (" + std::to_string(c) + ")*(" + j + ")"), 2, kGrid);
        EXPECT_EQ(sc.j2l, std::abs(c) * base.j2l);
        EXPECT_EQ(sc.first, std::abs(c) * base.first);
    }
}

TEST(Certify, SmallTauGivesDeterminantBound)
{
    for (const char* text : {"x*xi + 0.03*sin(x)*ang(xi)", "x*xi + 0.02*ang(x)*ang(xi)", "x*xi + 0.05*xi"}) {
        auto c = certify_regular(*ExprPhase::parse(text), kGrid, 1);
        ASSERT_LT(c.tau, 0.25) << text;
        EXPECT_GE(c.r, 1.0 - c.tau) << text;
        EXPECT_TRUE(c.in_P);
    }
}

TEST(Certify, BandViolation)
{
    // phi'_x = 0 everywhere: <phi'_x>/<xi> -> 0 on the annulus
    auto c = certify_regular(*ExprPhase::parse("0.1*xi"), kGrid, 0);
    EXPECT_FALSE(c.in_P);
    EXPECT_EQ(c.cls, "fail");
}

TEST(Certify, OrderCap)
{
    auto phi = ExprPhase::parse("x*xi", 2);
    EXPECT_THROW(j_seminorm(*phi, 1, kGrid), SymbolError);
}
