// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "sgfio/expr.hpp"

using namespace sgfio::expr;

namespace {

const std::vector<std::string> kCorpus = {
    "x*xi",
    "ang(xi)",
    "x*xi + 0.5*sin(x)*ang(xi)",
    "exp(sin(x))*ang(xi)",
    "ang(xi) + 0.1*sin(x)*ang(xi)",
    "x^3*xi - 2*xi^2 + 1",
    "log(1 + x^2)*cos(xi)",
    "sqrt(4 + x*x)/ang(xi)",
    "exp(x*xi/10) - x/(2 + sin(xi))",
    "ang(x)^-2*xi + t*s*x",
    "-(x - xi)^2/ang(x*xi)",
};

double central(const Expr& e, Var v, Point p, double h)
{
    Point a = p, b = p;
    double* pa = v == Var::x ? &a.x : v == Var::xi ? &a.xi : v == Var::t ? &a.t : &a.s;
    double* pb = v == Var::x ? &b.x : v == Var::xi ? &b.xi : v == Var::t ? &b.t : &b.s;
    *pa += h;
    *pb -= h;
    return (eval(e, a) - eval(e, b)) / (2 * h);
}

}  // namespace

TEST(Parse, SimpleProduct)
{
    Expr e = parse("x*xi");
    ASSERT_EQ(e.op(), Op::Mul);
    EXPECT_EQ(e.node().lhs->op, Op::Variable);
    EXPECT_EQ(e.node().lhs->var, Var::x);
    EXPECT_EQ(e.node().rhs->var, Var::xi);
}

TEST(Parse, AngAtZero)
{
    Expr e = parse("ang(xi)");
    ASSERT_EQ(e.op(), Op::Ang);
    EXPECT_EQ(eval(e, Env{{Var::xi, 0.0}}), 1.0);
}

TEST(Parse, MixedExpressionVanishesAtOrigin)
{
    // 0*0 + 0.5*sin(0)*sqrt(1) by hand
    Expr e = parse("x*xi + 0.5*sin(x)*ang(xi)");
    EXPECT_EQ(eval(e, Env{{Var::x, 0.0}, {Var::xi, 0.0}}), 0.0);
    const double x = 0.7, xi = -1.3;
    EXPECT_NEAR(eval(e, Env{{Var::x, x}, {Var::xi, xi}}), x * xi + 0.5 * std::sin(x) * std::sqrt(1 + xi * xi), 1e-15);
}

TEST(Parse, Precedence)
{
    // pow binds tighter than unary minus, which binds tighter than mul
    EXPECT_DOUBLE_EQ(eval(parse("-x^2"), Env{{Var::x, 3.0}}), -9.0);
    EXPECT_DOUBLE_EQ(eval(parse("2*x^2 + 1"), Env{{Var::x, 3.0}}), 19.0);
    EXPECT_DOUBLE_EQ(eval(parse("x - xi - 1"), Env{{Var::x, 3.0}, {Var::xi, 1.0}}), 1.0);
    EXPECT_DOUBLE_EQ(eval(parse("x/xi/2"), Env{{Var::x, 8.0}, {Var::xi, 2.0}}), 2.0);
    EXPECT_DOUBLE_EQ(eval(parse("x^-1"), Env{{Var::x, 4.0}}), 0.25);
    EXPECT_DOUBLE_EQ(eval(parse("(x+1)^(2)"), Env{{Var::x, 1.0}}), 4.0);
}

TEST(Parse, Errors)
{
    try {
        parse("x $ xi");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.kind(), ParseError::Kind::Lexical);
        EXPECT_EQ(e.position(), 2u);
    }
    try {
        parse("x * (xi + 1");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.kind(), ParseError::Kind::Syntax);
    }
    try {
        parse("tan(x)");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.kind(), ParseError::Kind::UnknownIdentifier);
        EXPECT_EQ(e.position(), 0u);
    }
    EXPECT_THROW(parse("x^1.5"), ParseError);
    EXPECT_THROW(parse("x^xi"), ParseError);
    EXPECT_THROW(parse(""), ParseError);
    EXPECT_THROW(parse("x xi"), ParseError);
}

TEST(Eval, Examples)
{
    EXPECT_EQ(eval(parse("ang(x)"), Env{{Var::x, 0.0}}), 1.0);
    EXPECT_EQ(eval(parse("x*xi"), Env{{Var::x, 2.0}, {Var::xi, 3.0}}), 6.0);
    EXPECT_NEAR(eval(parse("exp(x)*ang(xi)"), Env{{Var::x, 1.0}, {Var::xi, 1.0}}), std::exp(1.0) * std::sqrt(2.0), 1e-15);
}

TEST(Eval, FromMap)
{
    EXPECT_EQ(eval(parse("x*xi"), Env::from_map({{"x", 2.0}, {"xi", 4.0}})), 8.0);
    EXPECT_THROW(Env::from_map({{"y", 1.0}}), EvalError);
}

TEST(Eval, Errors)
{
    EXPECT_THROW(eval(parse("x*xi"), Env{{Var::x, 1.0}}), EvalError);
    EXPECT_THROW(eval(parse("log(x)"), Env{{Var::x, 0.0}}), EvalError);
    EXPECT_THROW(eval(parse("log(x)"), Env{{Var::x, -1.0}}), EvalError);
    EXPECT_THROW(eval(parse("1/x"), Env{{Var::x, 0.0}}), EvalError);
    EXPECT_THROW(eval(parse("sqrt(x)"), Env{{Var::x, -1.0}}), EvalError);
    EXPECT_THROW(eval(parse("exp(x)"), Env{{Var::x, 1000.0}}), EvalError);
    EXPECT_THROW(Program(parse("1/x"))(Point{0, 0, 0, 0}), EvalError);
}

TEST(Differentiate, Examples)
{
    Expr d = differentiate(parse("x*xi"), Var::x);
    for (double xi : {-2.0, 0.5, 3.0}) EXPECT_EQ(eval(d, Point{0, 0, 1.7, xi}), xi);

    Expr da = differentiate(parse("ang(xi)"), Var::xi);
    for (double xi : {-2.0, 0.0, 0.5}) EXPECT_NEAR(eval(da, Point{0, 0, 0, xi}), xi / std::sqrt(1 + xi * xi), 1e-15);

    Expr de = differentiate(parse("exp(x*xi)"), Var::x);
    const double exact = 2 * std::exp(2.0);
    EXPECT_NEAR(eval(de, Point{0, 0, 1, 2}), exact, 1e-13 * exact);
    EXPECT_NEAR(central(parse("exp(x*xi)"), Var::x, Point{0, 0, 1, 2}, 1e-5), exact, 1e-6 * exact);
}

TEST(Differentiate, AgreesWithFiniteDifferences)
{
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    const double h = 1e-5;
    for (const auto& text : kCorpus) {
        Expr e = parse(text);
        for (Var v : {Var::x, Var::xi, Var::t}) {
            Expr d = differentiate(e, v);
            Program prog(d);
            for (int k = 0; k < 1000; ++k) {
                Point p{u(rng), u(rng), u(rng), u(rng)};
                const double exact = eval(d, p);
                EXPECT_EQ(prog(p), exact);
                const double fd = central(e, v, p, h);
                EXPECT_LE(std::abs(fd - exact), 1e-5 * std::max(1.0, std::abs(exact))) << text << " d/" << var_name(v);
            }
        }
    }
}

TEST(Differentiate, Linearity)
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (std::size_t i = 0; i + 1 < kCorpus.size(); ++i) {
        Expr e1 = parse(kCorpus[i]), e2 = parse(kCorpus[i + 1]);
        const double a = -1.75;
        Expr lhs = differentiate(Expr::number(a) * e1 + e2, Var::xi);
        Expr d1 = differentiate(e1, Var::xi), d2 = differentiate(e2, Var::xi);
        for (int k = 0; k < 100; ++k) {
            Point p{0.3, 0.1, u(rng), u(rng)};
            const double rhs = a * eval(d1, p) + eval(d2, p);
            EXPECT_NEAR(eval(lhs, p), rhs, 1e-12 * std::max(1.0, std::abs(rhs)));
        }
    }
}

TEST(Differentiate, DepthCap)
{
    Expr e = parse("exp(sin(x*xi))");
    EXPECT_THROW(differentiate(e, Var::x, 3), std::length_error);
    EXPECT_NO_THROW(differentiate(e, Var::x));
}

TEST(Differentiate, ConstantInVariable)
{
    Expr d = differentiate(parse("sin(x)*exp(x)"), Var::xi);
    EXPECT_EQ(eval(d, Point{}), 0.0);
    EXPECT_FALSE(d.depends_on(Var::x));
}

TEST(Print, RoundTrip)
{
    std::vector<Expr> all;
    for (const auto& text : kCorpus) {
        Expr e = parse(text);
        all.push_back(e);
        all.push_back(differentiate(e, Var::x));
        all.push_back(differentiate(differentiate(e, Var::xi), Var::x));
    }
    all.push_back(Expr::number(-2.5) * Expr::variable(Var::x));
    all.push_back(-(-Expr::variable(Var::x)));
    all.push_back(pow(-Expr::variable(Var::x), 3));
    all.push_back(Expr::variable(Var::x) - (Expr::variable(Var::xi) - Expr::number(1)));
    all.push_back(Expr::number(0.1) / (Expr::variable(Var::xi) * Expr::variable(Var::x)));
    for (const auto& e : all) {
        const std::string s = print(e);
        EXPECT_TRUE(structurally_equal(parse(s), e)) << s;
    }
}

TEST(Expr, FreeVariables)
{
    Expr e = parse("t*x + ang(xi)");
    EXPECT_TRUE(e.depends_on(Var::t));
    EXPECT_FALSE(e.depends_on(Var::s));
    EXPECT_TRUE(e.depends_on(Var::x));
    EXPECT_TRUE(e.depends_on(Var::xi));
}
