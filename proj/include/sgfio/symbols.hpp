// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>

#include "sgfio/expr.hpp"
#include "sgfio/grid.hpp"

namespace sgfio {

using expr::Point;

/// Orders of differentiation in each variable.
struct DerivIndex {
    int x = 0;
    int xi = 0;
    int t = 0;
    int s = 0;

    int total() const { return x + xi + t + s; }
    auto operator<=>(const DerivIndex&) const = default;
};

/// SG order (m, mu): growth <x>^m <xi>^mu.
struct Order {
    double m = 0.0;
    double mu = 0.0;
};

inline constexpr int kDefaultMaxOrder = 4;

class SymbolError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Real scalar symbol a(t, s, x, xi) with a derivative oracle and a declared order.
class SgSymbol {
public:
    using Oracle = std::function<double(const DerivIndex&, const Point&)>;

    SgSymbol() = default;

    static SgSymbol from_expr(const expr::Expr& e, Order order, int max_order = kDefaultMaxOrder);
    static SgSymbol parse(const std::string& text, Order order, int max_order = kDefaultMaxOrder);
    /// `depends_on_time` tells callers whether the symbol varies in t (used for caching).
    static SgSymbol from_oracle(std::string name, Order order, int max_order, Oracle oracle,
                                bool depends_on_time = false);

    double operator()(const Point& p) const { return derivative({}, p); }
    double operator()(double x, double xi, double t = 0.0, double s = 0.0) const { return (*this)({t, s, x, xi}); }
    double derivative(const DerivIndex& d, const Point& p) const;

    /// Callable for one fixed derivative, cheap to invoke in inner loops.
    std::function<double(const Point&)> evaluator(const DerivIndex& d) const;

    Order order() const { return order_; }
    int max_order() const { return max_order_; }
    const std::string& provenance() const { return provenance_; }
    bool depends_on_time() const { return depends_on_t_; }
    const std::optional<expr::Expr>& expression() const { return expr_; }

    SgSymbol scaled(double c) const;
    SgSymbol times(const SgSymbol& other) const;
    SgSymbol negated() const { return scaled(-1.0); }
    SgSymbol with_order(Order order) const;

    /// Largest relative deviation between first-order oracle derivatives and central differences.
    double self_test(const SampleGrid& g, double h = 1e-5, double t = 0.0, double s = 0.0) const;

private:
    struct ExprTables;

    std::string provenance_;
    Order order_{};
    int max_order_ = kDefaultMaxOrder;
    bool depends_on_t_ = false;
    std::optional<expr::Expr> expr_;
    std::shared_ptr<const ExprTables> tables_;
    Oracle oracle_;
};

struct SymbolTime {
    double t = 0.0;
    double s = 0.0;
};

/// Grid lower bound of the seminorm ||a||_l^{m,mu}.
double seminorm(const SgSymbol& a, int l, double m, double mu, const SampleGrid& g, SymbolTime time = {});

struct OrderReport {
    bool ok = false;
    double value = 0.0;  // grid seminorm
    double bound = 0.0;  // the constant C tested against
    int worst_alpha = 0; // xi-derivative order
    int worst_beta = 0;  // x-derivative order
    double worst_x = 0.0;
    double worst_xi = 0.0;
};

OrderReport check_order(const SgSymbol& a, double m, double mu, int l, const SampleGrid& g, double C,
                        SymbolTime time = {});

struct EllipticReport {
    bool ok = false;
    double constant = 0.0;  // best C with C <x>^m <xi>^mu <= |a| beyond R
    double worst_x = 0.0;
    double worst_xi = 0.0;
    std::size_t points_tested = 0;
};

EllipticReport check_elliptic(const SgSymbol& a, double m, double mu, double R, const SampleGrid& g,
                              SymbolTime time = {});

}  // namespace sgfio
