// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>

#include "sgfio/hyperbolic.hpp"

using namespace sgfio;

namespace {

HyperbolicSystem scalar(const std::string& lambda, Order lo, const std::string& r = "")
{
    HyperbolicSystem s;
    s.lambda.push_back(SgSymbol::parse(lambda, lo));
    s.R.assign(1, std::vector<std::optional<SgSymbol>>(1));
    if (!r.empty()) s.R[0][0] = SgSymbol::parse(r, {-1.0, 0.0});
    return s;
}

HyperbolicOptions opts()
{
    HyperbolicOptions o;
    o.grid = QuantGrid(128, 12.0);
    return o;
}

CVector sample(const QuantGrid& g, const std::function<double(double)>& f)
{
    return GridFunction::sample(g, [&](double x) { return cplx(f(x), 0.0); }).v;
}

double gauss(double x) { return std::exp(-x * x / 2.0); }

struct Built {
    SystemPhases ph;
    FundamentalSolution E;
};

Built build(const HyperbolicSystem& s, const HyperbolicOptions& o = opts())
{
    Built b;
    b.ph = build_phases(s, o);
    b.E = picard_series(s, b.ph, o);
    return b;
}

}  // namespace

TEST(Simpson, ExactOnCubics)
{
    const double h = 0.1;
    for (int n = 2; n <= 9; ++n) {
        const auto w = simpson_weights(n, h);
        double q = 0.0;
        for (int k = 0; k <= n; ++k) {
            const double t = k * h;
            q += w[k] * (t * t * t - 2.0 * t + 1.0);
        }
        const double T = n * h;
        EXPECT_NEAR(q, T * T * T * T / 4.0 - T * T + T, 1e-13) << n;
    }
    const auto w1 = simpson_weights(1, h);
    EXPECT_DOUBLE_EQ(w1[0] + w1[1], h);
    EXPECT_EQ(simpson_weights(0, h), std::vector<double>{0.0});
}

TEST(PairIndex, LayoutAndRange)
{
    PairIndex inv(true, 4), full(false, 4);
    EXPECT_EQ(inv.size(), 9u);
    EXPECT_EQ(inv(5, 2), 3u);
    EXPECT_EQ(full(3, 1), 7u);
    EXPECT_THROW(full(1, 2), HyperbolicError);
    EXPECT_THROW(inv(9, 0), HyperbolicError);
}

TEST(System, ValidatesOrders)
{
    auto s = scalar("xi", {0, 1});
    EXPECT_NO_THROW(s.validate());
    s.R[0][0] = SgSymbol::parse("sin(x)", {0.5, 0});
    EXPECT_THROW(s.validate(), HyperbolicError);
    auto t = scalar("x*xi", {1, 1});
    t.eps = 0.5;
    EXPECT_THROW(t.validate(), HyperbolicError);
    EXPECT_TRUE(scalar("ang(xi)", {0, 1}).time_invariant());
    EXPECT_FALSE(scalar("(1 + t)*xi", {0, 1}).time_invariant());
}

TEST(Phases, ClosedFormsAndIdentityDiagonal)
{
    const auto o = opts();
    const auto ph = build_phases(scalar("1.5*xi", {0, 1}), o);
    const double tau = o.time.at(7);
    const auto& p = *ph.phi[ph.index(7, 0)][0];
    double err = 0.0;
    for (double x : {-3.0, 0.0, 2.5})
        for (double xi : {-4.0, 1.0, 3.0}) err = std::max(err, std::abs(p.derivative(0, 0, x, xi) - (x * xi - 1.5 * tau * xi)));
    EXPECT_LT(err, 1e-8);
    EXPECT_TRUE(ph.block(3, 3, 0) == CMatrix::Identity(128, 128));

    const auto ph2 = build_phases(scalar("x*xi", {1, 1}), o);
    const auto& q = *ph2.phi[ph2.index(16, 0)][0];
    EXPECT_NEAR(q.derivative(0, 0, 2.0, 3.0), 6.0 * std::exp(-0.1), 1e-8);
}

TEST(ResidualW1, ConstantTransportCancels)
{
    const auto o = opts();
    const auto s = scalar("1.5*xi", {0, 1});
    const auto ph = build_phases(s, o);
    const CMatrix P = hermite_basis(o.grid, 32);
    for (int a : {1, 8, 16}) EXPECT_LT(subspace_norm(residual_W1(s, ph, a, 0), P), 1e-4) << a;
}

TEST(ResidualW1, OnlyLowerOrderTermSurvives)
{
    const auto o = opts();
    const auto s = scalar("1.5*xi", {0, 1}, "0.5/ang(x)");
    const auto ph = build_phases(s, o);
    const CMatrix P = hermite_basis(o.grid, 32);
    const CMatrix R = pseudo_matrix(*s.R[0][0], o.grid).m;
    for (int a : {0, 5, 16}) {
        const CMatrix expect = -cplx(0, 1) * R * ph.block(a, 0, 0);
        EXPECT_LT(subspace_norm(residual_W1(s, ph, a, 0) - expect, P), 1e-4) << a;
    }
}

TEST(Picard, IdentityOnDiagonalBitExact)
{
    auto o = opts();
    o.time = {0.05, 8};
    const auto b = build(scalar("(1 + t)*xi", {0, 1}, "0.5/ang(x)"), o);
    const std::size_t N = b.E.grid.N;
    for (int k = 0; k <= b.E.time.K; ++k) EXPECT_TRUE(b.E.at(k, k) == CMatrix::Identity(N, N)) << k;
}

TEST(Cauchy, ConstantTransportClosedForm)
{
    const auto b = build(scalar("1.5*xi", {0, 1}));
    EXPECT_EQ(b.E.N, 1);
    const QuantGrid& g = b.E.grid;
    const auto tr = solve_cauchy(b.E, sample(g, gauss));
    const CVector exact = sample(g, [](double x) { return gauss(x - 0.15); });
    EXPECT_LT(relative_l2(tr.W.back(), exact), 1e-3);
    EXPECT_DOUBLE_EQ(tr.t.back(), 0.1);
}

TEST(Cauchy, DilationClosedForm)
{
    const auto b = build(scalar("x*xi", {1, 1}));
    const QuantGrid& g = b.E.grid;
    const auto tr = solve_cauchy(b.E, sample(g, gauss));
    const CVector exact = sample(g, [](double x) { return gauss(x * std::exp(-0.1)); });
    EXPECT_LT(relative_l2(tr.W.back(), exact), 1e-2);
}

TEST(Cauchy, TimeDependentSpeed)
{
    const auto b = build(scalar("(1 + t)*xi", {0, 1}));
    const QuantGrid& g = b.E.grid;
    const auto tr = solve_cauchy(b.E, sample(g, gauss));
    for (int k : {5, 16}) {
        const double t = tr.t[k];
        const CVector exact = sample(g, [t](double x) { return gauss(x - t - t * t / 2.0); });
        EXPECT_LT(relative_l2(tr.W[k], exact), 1e-3) << k;
    }
}

TEST(Picard, LowerOrderTermScalar)
{
    const auto s = scalar("1.5*xi", {0, 1}, "0.5/ang(x)");
    const auto o = opts();
    const auto b = build(s, o);
    const auto& E = b.E;
    ASSERT_GE(E.order_norms.size(), 4u);
    for (std::size_t k = 1; k < E.order_norms.size(); ++k) EXPECT_LT(E.order_norms[k], E.order_norms[k - 1]);

    const auto fit = fit_factorial(E.order_norms, o.time.T0);
    EXPECT_GE(fit.used, 4u);
    EXPECT_LE(fit.spread, 3.0);
    EXPECT_LE(fit.slope, std::log(fit.C_max * o.time.T0) + 1e-9);

    EXPECT_LT(E.telescoping_residual, 1e-3);
    ASSERT_FALSE(E.le_mismatch.empty());
    EXPECT_LT(E.le_mismatch.back(), 1e-3);
    EXPECT_LT(E.le_norms.back(), E.le_norms.front());

    const QuantGrid& g = E.grid;
    const CVector G = sample(g, gauss);
    const auto tr = solve_cauchy(E, G);
    const auto ref = reference_solve(s, g, o.time, G);
    for (int k : {4, 16}) EXPECT_LT(relative_l2(tr.W[k], ref.W[k]), 1e-4) << k;

    // E(t, s) E(s, r) against E(t, r)
    const CMatrix P = hermite_basis(g, 32);
    const CMatrix lhs = E.at(10, 0) * E.at(6, 0);
    EXPECT_LT(subspace_norm(lhs - E.at(16, 0), P) / subspace_norm(E.at(16, 0), P), 1e-2);
}

TEST(Picard, TimeDependentColumnsAgreeWithReference)
{
    const auto s = scalar("(1 + t)*xi", {0, 1}, "0.5/ang(x)");
    const auto o = opts();
    const auto b = build(s, o);
    const QuantGrid& g = b.E.grid;
    const CVector G = sample(g, gauss);
    auto F = [&](double t) { return sample(g, [t](double x) { return std::cos(t) * gauss(x - 1.0); }); };
    const auto tr = solve_cauchy(b.E, G, F);
    const auto ref = reference_solve(s, g, o.time, G, F);
    EXPECT_LT(relative_l2(tr.W.back(), ref.W.back()), 1e-3);
    EXPECT_LT(b.E.telescoping_residual, 1e-3);
}

TEST(Picard, CertifiedHorizon)
{
    const auto o = opts();
    const auto ph = build_phases(scalar("ang(xi)", {0, 1}), o);
    EXPECT_DOUBLE_EQ(largest_certified_T0(ph), o.time.T0);
}

TEST(Reference, SelfConvergenceOrder)
{
    const auto s = scalar("ang(xi)", {0, 1}, "0.5/ang(x)");
    const QuantGrid g(128, 12.0);
    const TimeGrid tg{0.1, 4};
    const CVector G = sample(g, gauss);
    const CVector fine = reference_solve(s, g, tg, G, {}, {32}).W.back();
    const double e1 = (reference_solve(s, g, tg, G, {}, {1}).W.back() - fine).norm();
    const double e2 = (reference_solve(s, g, tg, G, {}, {2}).W.back() - fine).norm();
    EXPECT_GE(std::log2(e1 / e2), 3.5);
}

TEST(Reference, EnergyConservedWithoutCoupling)
{
    const auto s = scalar("ang(xi)", {0, 1});
    const QuantGrid g(128, 12.0);
    const CVector G = sample(g, [](double x) { return gauss(x) * std::cos(3.0 * x); });
    const auto tr = reference_solve(s, g, TimeGrid{}, G);
    EXPECT_LT(std::abs(tr.W.back().norm() / G.norm() - 1.0), 1e-6);
}

TEST(Reference, BlowUpGuard)
{
    const auto s = scalar("x*xi", {1, 1});
    const QuantGrid g(256, 12.0);
    EXPECT_THROW(reference_solve(s, g, TimeGrid{50.0, 50}, sample(g, gauss), {}, {1}), HyperbolicError);
}

TEST(System, CoupledPairMatchesReference)
{
    HyperbolicSystem s;
    s.lambda = {SgSymbol::parse("ang(xi)", {0, 1}), SgSymbol::parse("-ang(xi)", {0, 1})};
    s.R.assign(2, std::vector<std::optional<SgSymbol>>(2));
    s.R[0][1] = SgSymbol::parse("0.5/ang(x)", {-1, 0});
    s.R[1][0] = SgSymbol::parse("0.5/ang(x)", {-1, 0});
    const auto o = opts();
    const auto b = build(s, o);
    const QuantGrid& g = b.E.grid;
    CVector G(2 * g.N);
    G << sample(g, gauss), sample(g, [](double x) { return 0.5 * gauss(x - 1.0); });
    const auto tr = solve_cauchy(b.E, G);
    const auto ref = reference_solve(s, g, o.time, G);
    EXPECT_LT(relative_l2(tr.W.back(), ref.W.back()), 1e-2);
    EXPECT_LT(b.E.telescoping_residual, 1e-3);
    const std::size_t M = 2 * g.N;
    EXPECT_TRUE(b.E.at(0, 0) == CMatrix::Identity(M, M));
}

TEST(Factorial, FitOnExactEnvelope)
{
    std::vector<double> n;
    for (int k = 1; k <= 6; ++k) n.push_back(std::pow(2.0 * 0.1, k - 1) / std::tgamma(k));
    const auto f = fit_factorial(n, 0.1);
    EXPECT_NEAR(f.C, 2.0, 1e-12);
    EXPECT_NEAR(f.spread, 1.0, 1e-12);
    EXPECT_NEAR(f.slope, std::log(0.2), 1e-12);
}
