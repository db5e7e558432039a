// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "sgfio/eikonal.hpp"
#include "sgfio/multiproduct.hpp"

using namespace sgfio;

namespace {

const TensorGrid kTarget{SampleGrid(4, 4, 33, 33)};
// room for two nested rounds of critical points
const TensorGrid kWide = kTarget.padded(16, 16);

const char* kFamilies[] = {"ang(xi)", "ang(xi) + 0.1*sin(x)*ang(xi)"};

EikonalPtr eik(const char* a, double t, double s)
{
    return solve_eikonal(SgSymbol::parse(a, {0, 1}), t, s, kWide);
}

double grid_diff(const GridField& a, const GridField& b)
{
    double e = 0.0;
    for (std::size_t i = 0; i < a.nx(); ++i)
        for (std::size_t j = 0; j < a.nxi(); ++j) e = std::max(e, std::abs(a(i, j) - b(i, j)));
    return e;
}

GridField on_target(const PhaseFunction& p) { return p.sample(0, 0, kTarget); }

}  // namespace

TEST(DetBound, Examples)
{
    EXPECT_TRUE(det_bound_check(Eigen::MatrixXd::Zero(3, 3), 0.0).ok);
    EXPECT_EQ(det_bound_check(Eigen::MatrixXd::Zero(3, 3), 0.0).det, 1.0);
    Eigen::MatrixXd A = Eigen::Vector2d(0.2, -0.2).asDiagonal();
    auto r = det_bound_check(A, 0.2);
    EXPECT_TRUE(r.ok);
    EXPECT_NEAR(r.det, 0.96, 1e-15);
    EXPECT_NEAR(r.lower, 0.64, 1e-15);
    EXPECT_NEAR(r.upper, 1.44, 1e-15);
    EXPECT_THROW(det_bound_check(A, 0.1), std::invalid_argument);
    EXPECT_THROW(det_bound_check(A, 1.0), std::invalid_argument);
}

TEST(DetBound, RandomSweep)
{
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-1.0, 1.0), s(0.0, 1.0);
    for (int k = 0; k < 1000; ++k) {
        Eigen::MatrixXd A(4, 4);
        for (int i = 0; i < 16; ++i) A.data()[i] = u(rng);
        A *= 0.7 * s(rng) / A.cwiseAbs().colwise().sum().maxCoeff();
        // direct cofactor expansion as the oracle
        Eigen::Matrix4d B = Eigen::Matrix4d::Identity() - A;
        auto r = det_bound_check(A, 0.7);
        EXPECT_NEAR(r.det, Eigen::Matrix4d(B).determinant(), 1e-12);
        EXPECT_TRUE(r.ok) << r.det;
    }
}

TEST(PhaseChain, Admissibility)
{
    EXPECT_THROW(PhaseChain({identity_phase(), identity_phase()}, {0.2, 0.05}), ChainError);
    EXPECT_THROW(PhaseChain({identity_phase()}, {0.0}), ChainError);
    PhaseChain c({identity_phase(), identity_phase(), identity_phase()}, {0.1, 0.0, 0.1});
    EXPECT_EQ(c.M(), 2u);
    EXPECT_DOUBLE_EQ(c.tau0(), 0.2);
    EXPECT_DOUBLE_EQ(c.tau_bar(2), 0.1);
}

TEST(SolveCritical, IdentityFirstFactorDecouples)
{
    auto phi2 = ExprPhase::parse("x*xi + 0.05*sin(x)*ang(xi)");
    PhaseChain c({identity_phase(), phi2}, {0.0, 0.1});
    for (double x : {-2.0, 0.5})
        for (double xi : {-1.0, 3.0}) {
            auto cp = solve_critical(c, x, xi);
            EXPECT_EQ(cp.Y[1], x);
            EXPECT_EQ(cp.N[1], phi2->phi_x(x, xi));
            EXPECT_EQ(cp.iterations, 1);
        }
}

TEST(SolveCritical, AllIdentity)
{
    PhaseChain c({identity_phase(), identity_phase(), identity_phase()}, {0, 0, 0});
    auto cp = solve_critical(c, 1.3, -0.4);
    EXPECT_EQ(cp.iterations, 0);
    for (std::size_t k = 1; k <= 2; ++k) {
        EXPECT_EQ(cp.y[k], 0.0);
        EXPECT_EQ(cp.eta[k], 0.0);
    }
}

TEST(SolveCritical, ReconstructionExact)
{
    auto p = ExprPhase::parse("x*xi + 0.03*sin(x)*ang(xi)");
    PhaseChain c({p, p, p}, {0.06, 0.06, 0.06});
    auto cp = solve_critical(c, 0.7, -1.1);
    for (std::size_t j = 1; j <= 2; ++j) {
        EXPECT_EQ(cp.Y[j], 0.7 + cp.z[j]);
        EXPECT_EQ(cp.N[j], -1.1 + cp.zeta[j]);
    }
}

TEST(SolveCritical, MatchesNewtonOracle)
{
    for (const char* a : kFamilies) {
        auto p1 = eik(a, 0.1, 0.05), p2 = eik(a, 0.05, 0.0);
        PhaseChain c = PhaseChain::certified({p1, p2}, kTarget);
        const double x = 1.0, xi = 1.0;
        auto cp = solve_critical(c, x, xi);
        // Newton on Y = phi1_xi(x, N), N = phi2_x(Y, xi)
        double Y = x, N = xi;
        for (int it = 0; it < 50; ++it) {
            const double F1 = Y - p1->phi_xi(x, N), F2 = N - p2->phi_x(Y, xi);
            const double a12 = -p1->derivative(0, 2, x, N), a21 = -p2->derivative(2, 0, Y, xi);
            const double det = 1.0 - a12 * a21;
            const double dY = (-F1 + a12 * F2) / det, dN = (-F2 + a21 * F1) / det;
            Y += dY;
            N += dN;
            if (std::abs(dY) + std::abs(dN) < 1e-15) break;
        }
        EXPECT_NEAR(cp.Y[1], Y, 1e-10) << a;
        EXPECT_NEAR(cp.N[1], N, 1e-10) << a;
    }
}

TEST(Multiproduct, IdentityElement)
{
    auto expr = ExprPhase::parse("x*xi + 0.02*sin(x)*ang(xi) + 0.01*x*cos(xi)");
    auto e = eik(kFamilies[1], 0.04, 0.0);
    for (PhasePtr phi : {PhasePtr(expr), PhasePtr(e)}) {
        const double tau = certify_regular(*phi, kTarget, 0).tau;
        auto right = multiproduct(PhaseChain({phi, identity_phase()}, {tau, 0.0}), kTarget);
        auto left = multiproduct(PhaseChain({identity_phase(), phi}, {0.0, tau}), kTarget);
        auto mid = multiproduct(PhaseChain({identity_phase(), phi, identity_phase()}, {0.0, tau, 0.0}), kTarget);
        const GridField ref = on_target(*phi);
        EXPECT_LE(grid_diff(right.phase->field(0, 0), ref), 1e-8) << phi->name();
        EXPECT_LE(grid_diff(left.phase->field(0, 0), ref), 1e-8) << phi->name();
        EXPECT_LE(grid_diff(mid.phase->field(0, 0), ref), 1e-8) << phi->name();
    }
    // phi_0 # phi_0 is phi_0 exactly
    auto id = multiproduct(PhaseChain({identity_phase(), identity_phase()}, {0, 0}), kTarget);
    EXPECT_EQ(grid_diff(id.phase->field(0, 0), on_target(*identity_phase())), 0.0);
}

TEST(Multiproduct, GroupLaw)
{
    for (const char* a : kFamilies) {
        auto ts = eik(a, 0.1, 0.05), sr = eik(a, 0.05, 0.0), tr = eik(a, 0.1, 0.0);
        PhaseChain c = PhaseChain::certified({ts, sr}, kTarget);
        auto prod = multiproduct(c, kTarget);
        EXPECT_LE(grid_diff(prod.phase->field(0, 0), on_target(*tr)), 1e-5) << a;
        EXPECT_EQ(prod.stats.bound_violations, 0u);
        EXPECT_LE(prod.stats.max_ratio, 3 * c.tau0() + 0.05);
    }
}

TEST(Multiproduct, ThreeFactorStructure)
{
    for (const char* a : kFamilies) {
        auto p1 = eik(a, 0.075, 0.05), p2 = eik(a, 0.05, 0.025), p3 = eik(a, 0.025, 0.0);
        PhaseChain c = PhaseChain::certified({p1, p2, p3}, kWide);
        ASSERT_LT(c.tau0(), 0.25);
        auto prod = multiproduct(c, kTarget);
        EXPECT_EQ(prod.stats.bound_violations, 0u) << a;
        EXPECT_LE(prod.stats.max_ratio, 3 * c.tau0() + 0.05) << a;
        auto rep = verify_structure(c, prod, kTarget);
        EXPECT_LE(rep.dphi_x, 1e-5) << a;
        EXPECT_LE(rep.dphi_xi, 1e-5) << a;
        ASSERT_TRUE(rep.has_associativity);
        EXPECT_LE(rep.assoc, 1e-5) << a;
        EXPECT_TRUE(std::isfinite(rep.c_Y));
        EXPECT_TRUE(std::isfinite(rep.c_N));
        EXPECT_LT(rep.k * c.tau0(), 1.0);
        // group law for the whole chain
        EXPECT_LE(grid_diff(prod.phase->field(0, 0), on_target(*eik(a, 0.075, 0.0))), 1e-5) << a;
    }
}

TEST(Multiproduct, IdentityChainStructure)
{
    auto phi = ExprPhase::parse("x*xi + 0.03*sin(x)*ang(xi)");
    PhaseChain c = PhaseChain::certified({phi, identity_phase()}, kTarget);
    auto prod = multiproduct(c, kTarget);
    auto rep = verify_structure(c, prod, kTarget);
    EXPECT_LE(rep.dphi_x, 1e-5);
    EXPECT_LE(rep.dphi_xi, 1e-5);
}

TEST(SolveCritical, UniqueUnderRandomRestart)
{
    auto p1 = eik(kFamilies[1], 0.075, 0.05), p2 = eik(kFamilies[1], 0.05, 0.025), p3 = eik(kFamilies[1], 0.025, 0.0);
    PhaseChain c = PhaseChain::certified({p1, p2, p3}, kWide);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    CriticalOptions opt;
    for (double x : {-3.5, 0.0, 2.25})
        for (double xi : {-4.0, 0.5, 3.0}) {
            auto base = solve_critical(c, x, xi, opt);
            // random point of Sigma: sum |y_k| <= <x>/3, sum |eta_k| <= <xi>/3
            std::vector<double> start(4);
            for (auto& v : start) v = u(rng);
            const double sy = std::abs(start[0]) + std::abs(start[1]), se = std::abs(start[2]) + std::abs(start[3]);
            start[0] *= ang(x) / 3 / sy;
            start[1] *= ang(x) / 3 / sy;
            start[2] *= ang(xi) / 3 / se;
            start[3] *= ang(xi) / 3 / se;
            auto other = solve_critical(c, x, xi, opt, &start);
            std::vector<double> dy(3), de(3);
            for (std::size_t k = 1; k <= 2; ++k) {
                dy[k] = other.y[k] - base.y[k];
                de[k] = other.eta[k] - base.eta[k];
            }
            EXPECT_LE(sigma_norm(dy, de, x, xi), 10 * opt.tol);
        }
}

TEST(SolveCritical, MaxIterReported)
{
    auto p = ExprPhase::parse("x*xi + 0.05*sin(x)*ang(xi)");
    PhaseChain c({p, p}, {0.1, 0.1});
    CriticalOptions opt;
    opt.max_iter = 2;
    EXPECT_THROW(solve_critical(c, 1.0, 1.0, opt), ChainError);
}
