// SPDX-License-Identifier: Apache-2.0
#include "sgfio/symbols.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sgfio {

using expr::Expr;
using expr::Var;

struct SgSymbol::ExprTables {
    std::map<DerivIndex, expr::Program> programs;
    std::map<DerivIndex, std::string> failures;
};

namespace {

DerivIndex bump(DerivIndex d, Var v, int by = 1)
{
    switch (v) {
    case Var::x: d.x += by; break;
    case Var::xi: d.xi += by; break;
    case Var::t: d.t += by; break;
    case Var::s: d.s += by; break;
    }
    return d;
}

}  // namespace

SgSymbol SgSymbol::from_expr(const Expr& e, Order order, int max_order)
{
    if (max_order < 0) throw std::invalid_argument("SgSymbol: negative derivative cap");
    SgSymbol a;
    a.provenance_ = expr::print(e);
    a.order_ = order;
    a.max_order_ = max_order;
    a.depends_on_t_ = e.depends_on(Var::t);
    a.expr_ = e;

    auto tables = std::make_shared<ExprTables>();
    const auto free = e.free_variables();
    std::map<DerivIndex, Expr> trees;
    trees.emplace(DerivIndex{}, e);
    tables->programs.emplace(DerivIndex{}, expr::Program(e));
    // Breadth-first over total order; each index is reached from its predecessor in the
    // first variable with a positive count so every tree is built once.
    std::vector<DerivIndex> frontier{DerivIndex{}};
    const Var vars[] = {Var::x, Var::xi, Var::t, Var::s};
    for (int order_k = 1; order_k <= max_order; ++order_k) {
        std::vector<DerivIndex> next;
        for (const DerivIndex& base : frontier) {
            auto it = trees.find(base);
            for (Var v : vars) {
                if (!free[static_cast<std::size_t>(v)]) continue;
                const DerivIndex target = bump(base, v);
                if (trees.count(target) || tables->failures.count(target)) continue;
                if (it == trees.end()) {
                    tables->failures.emplace(target, tables->failures.at(base));
                    continue;
                }
                try {
                    Expr d = expr::differentiate(it->second, v);
                    tables->programs.emplace(target, expr::Program(d));
                    trees.emplace(target, std::move(d));
                } catch (const std::length_error& err) {
                    tables->failures.emplace(target, err.what());
                }
                next.push_back(target);
            }
        }
        frontier = std::move(next);
    }
    a.tables_ = std::move(tables);
    return a;
}

SgSymbol SgSymbol::parse(const std::string& text, Order order, int max_order)
{
    SgSymbol a = from_expr(expr::parse(text), order, max_order);
    a.provenance_ = text;
    return a;
}

SgSymbol SgSymbol::from_oracle(std::string name, Order order, int max_order, Oracle oracle, bool depends_on_time)
{
    if (!oracle) throw std::invalid_argument("SgSymbol: empty oracle");
    SgSymbol a;
    a.provenance_ = std::move(name);
    a.order_ = order;
    a.max_order_ = max_order;
    a.depends_on_t_ = depends_on_time;
    a.oracle_ = std::move(oracle);
    return a;
}

double SgSymbol::derivative(const DerivIndex& d, const Point& p) const
{
    if (d.total() > max_order_)
        throw SymbolError("derivative order " + std::to_string(d.total()) + " exceeds cap " +
                          std::to_string(max_order_) + " for symbol '" + provenance_ + "'");
    if (oracle_) return oracle_(d, p);
    if (!tables_) throw SymbolError("uninitialised symbol");
    auto it = tables_->programs.find(d);
    if (it != tables_->programs.end()) return it->second(p);
    auto f = tables_->failures.find(d);
    if (f != tables_->failures.end()) throw SymbolError(f->second);
    return 0.0;  // derivative in a variable the expression does not contain
}

std::function<double(const Point&)> SgSymbol::evaluator(const DerivIndex& d) const
{
    if (d.total() > max_order_)
        throw SymbolError("derivative order " + std::to_string(d.total()) + " exceeds cap " +
                          std::to_string(max_order_) + " for symbol '" + provenance_ + "'");
    if (oracle_) {
        return [oracle = oracle_, d](const Point& p) { return oracle(d, p); };
    }
    auto it = tables_->programs.find(d);
    if (it != tables_->programs.end()) {
        return [tables = tables_, prog = &it->second](const Point& p) { return (*prog)(p); };
    }
    auto f = tables_->failures.find(d);
    if (f != tables_->failures.end()) throw SymbolError(f->second);
    return [](const Point&) { return 0.0; };
}

SgSymbol SgSymbol::scaled(double c) const
{
    if (expr_) {
        SgSymbol out = from_expr(Expr::number(c) * *expr_, order_, max_order_);
        return out;
    }
    auto inner = oracle_;
    return from_oracle(std::to_string(c) + "*(" + provenance_ + ")", order_, max_order_,
                       [inner, c](const DerivIndex& d, const Point& p) { return c * inner(d, p); }, depends_on_t_);
}

SgSymbol SgSymbol::times(const SgSymbol& other) const
{
    const Order o{order_.m + other.order_.m, order_.mu + other.order_.mu};
    const int k = std::min(max_order_, other.max_order_);
    if (expr_ && other.expr_) return from_expr(*expr_ * *other.expr_, o, k);

    // Leibniz rule over the four variables.
    SgSymbol a = *this;
    SgSymbol b = other;
    auto binom = [](int n, int r) {
        double v = 1.0;
        for (int i = 1; i <= r; ++i) v = v * (n - r + i) / i;
        return v;
    };
    return from_oracle(
        "(" + provenance_ + ")*(" + other.provenance_ + ")", o, k,
        [a, b, binom](const DerivIndex& d, const Point& p) {
            double sum = 0.0;
            for (int ix = 0; ix <= d.x; ++ix)
                for (int ixi = 0; ixi <= d.xi; ++ixi)
                    for (int it = 0; it <= d.t; ++it)
                        for (int is = 0; is <= d.s; ++is) {
                            const double c = binom(d.x, ix) * binom(d.xi, ixi) * binom(d.t, it) * binom(d.s, is);
                            sum += c * a.derivative({ix, ixi, it, is}, p) *
                                   b.derivative({d.x - ix, d.xi - ixi, d.t - it, d.s - is}, p);
                        }
            return sum;
        },
        depends_on_t_ || other.depends_on_t_);
}

SgSymbol SgSymbol::with_order(Order order) const
{
    SgSymbol out = *this;
    out.order_ = order;
    return out;
}

double SgSymbol::self_test(const SampleGrid& g, double h, double t, double s) const
{
    double worst = 0.0;
    for (std::size_t i = 0; i < g.nx; ++i) {
        for (std::size_t j = 0; j < g.nxi; ++j) {
            const Point p{t, s, g.x(i), g.xi(j)};
            const double fx = ((*this)({t, s, p.x + h, p.xi}) - (*this)({t, s, p.x - h, p.xi})) / (2.0 * h);
            const double fxi = ((*this)({t, s, p.x, p.xi + h}) - (*this)({t, s, p.x, p.xi - h})) / (2.0 * h);
            const double ox = derivative({1, 0, 0, 0}, p);
            const double oxi = derivative({0, 1, 0, 0}, p);
            worst = std::max(worst, std::abs(fx - ox) / std::max(1.0, std::abs(ox)));
            worst = std::max(worst, std::abs(fxi - oxi) / std::max(1.0, std::abs(oxi)));
        }
    }
    return worst;
}

namespace {

template <typename Visit>
void sweep_weighted(const SgSymbol& a, int l, double m, double mu, const SampleGrid& g, SymbolTime time, Visit&& visit)
{
    g.validate();
    if (l < 0) throw std::invalid_argument("seminorm: negative order");
    if (l > a.max_order())
        throw SymbolError("seminorm order " + std::to_string(l) + " exceeds derivative cap " +
                          std::to_string(a.max_order()));
    for (int alpha = 0; alpha <= l; ++alpha) {
        for (int beta = 0; alpha + beta <= l; ++beta) {
            auto f = a.evaluator({beta, alpha, 0, 0});
            for (std::size_t i = 0; i < g.nx; ++i) {
                const double x = g.x(i);
                const double wx = std::pow(ang(x), -m + beta);
                for (std::size_t j = 0; j < g.nxi; ++j) {
                    const double xi = g.xi(j);
                    const double w = wx * std::pow(ang(xi), -mu + alpha);
                    visit(alpha, beta, x, xi, w * std::abs(f({time.t, time.s, x, xi})));
                }
            }
        }
    }
}

}  // namespace

double seminorm(const SgSymbol& a, int l, double m, double mu, const SampleGrid& g, SymbolTime time)
{
    double sup = 0.0;
    sweep_weighted(a, l, m, mu, g, time, [&](int, int, double, double, double v) { sup = std::max(sup, v); });
    return sup;
}

OrderReport check_order(const SgSymbol& a, double m, double mu, int l, const SampleGrid& g, double C,
                        SymbolTime time)
{
    OrderReport r;
    r.bound = C;
    r.value = -1.0;
    sweep_weighted(a, l, m, mu, g, time, [&](int alpha, int beta, double x, double xi, double v) {
        if (v > r.value) {
            r.value = v;
            r.worst_alpha = alpha;
            r.worst_beta = beta;
            r.worst_x = x;
            r.worst_xi = xi;
        }
    });
    r.ok = r.value <= C;
    return r;
}

EllipticReport check_elliptic(const SgSymbol& a, double m, double mu, double R, const SampleGrid& g,
                              SymbolTime time)
{
    g.validate();
    EllipticReport r;
    r.constant = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < g.nx; ++i) {
        const double x = g.x(i);
        for (std::size_t j = 0; j < g.nxi; ++j) {
            const double xi = g.xi(j);
            if (std::abs(x) + std::abs(xi) < R) continue;
            ++r.points_tested;
            const double c = std::abs(a({time.t, time.s, x, xi})) / (std::pow(ang(x), m) * std::pow(ang(xi), mu));
            if (c < r.constant) {
                r.constant = c;
                r.worst_x = x;
                r.worst_xi = xi;
            }
        }
    }
    if (r.points_tested == 0) throw std::invalid_argument("check_elliptic: grid has no points with |x|+|xi| >= R");
    r.ok = r.constant > 0.0;
    return r;
}

}  // namespace sgfio
