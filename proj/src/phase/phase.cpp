// SPDX-License-Identifier: Apache-2.0
#include "sgfio/phase.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sgfio {

void PhaseFunction::check_order(int bx, int bxi) const
{
    if (bx < 0 || bxi < 0) throw std::invalid_argument("phase derivative: negative index");
    if (bx + bxi > max_order())
        throw SymbolError("phase derivative order " + std::to_string(bx + bxi) + " exceeds cap " +
                          std::to_string(max_order()) + " for '" + name() + "'");
}

GridField PhaseFunction::sample(int bx, int bxi, const TensorGrid& g) const
{
    check_order(bx, bxi);
    GridField out(g.x.n, g.xi.n);
    for (std::size_t i = 0; i < g.x.n; ++i)
        for (std::size_t j = 0; j < g.xi.n; ++j) out(i, j) = derivative(bx, bxi, g.x.at(i), g.xi.at(j));
    return out;
}

// ---------------------------------------------------------------------------

ExprPhase::ExprPhase(SgSymbol a, double t, double s) : a_(std::move(a)), t_(t), s_(s) {}

PhasePtr ExprPhase::parse(const std::string& text, int max_order)
{
    return std::make_shared<ExprPhase>(SgSymbol::parse(text, {1, 1}, max_order));
}

double ExprPhase::derivative(int bx, int bxi, double x, double xi) const
{
    check_order(bx, bxi);
    return a_.derivative({bx, bxi, 0, 0}, {t_, s_, x, xi});
}

GridField ExprPhase::sample(int bx, int bxi, const TensorGrid& g) const
{
    check_order(bx, bxi);
    auto f = a_.evaluator({bx, bxi, 0, 0});
    GridField out(g.x.n, g.xi.n);
    for (std::size_t i = 0; i < g.x.n; ++i)
        for (std::size_t j = 0; j < g.xi.n; ++j) out(i, j) = f({t_, s_, g.x.at(i), g.xi.at(j)});
    return out;
}

PhasePtr identity_phase()
{
    static const PhasePtr id = ExprPhase::parse("x*xi", 8);
    return id;
}

// ---------------------------------------------------------------------------

bool same_grid(const TensorGrid& a, const TensorGrid& b)
{
    auto same = [](const Axis& p, const Axis& q) {
        return p.n == q.n && std::abs(p.start - q.start) <= 1e-12 * std::max(1.0, std::abs(p.start)) &&
               std::abs(p.step - q.step) <= 1e-14 * p.step;
    };
    return same(a.x, b.x) && same(a.xi, b.xi);
}

GriddedPhase::GriddedPhase(TensorGrid g, std::map<Key, GridField> known, std::string name, GriddedOptions opt)
    : grid_(g), name_(std::move(name)), opt_(opt)
{
    if (!known.count({0, 0})) throw std::invalid_argument("GriddedPhase: phase values are required");
    for (auto& [k, f] : known) {
        if (f.nx() != g.x.n || f.nxi() != g.xi.n) throw std::invalid_argument("GriddedPhase: field shape mismatch");
        if (k.first + k.second > opt_.max_order) continue;
        supplied_[k] = true;
        fields_.emplace(k, std::move(f));
    }
    // fill by total order; prefer differencing a supplied field
    for (int total = 1; total <= opt_.max_order; ++total) {
        for (int bx = 0; bx <= total; ++bx) {
            const Key k{bx, total - bx};
            if (fields_.count(k)) continue;
            const Key from_x{bx - 1, total - bx};
            const Key from_xi{bx, total - bx - 1};
            const bool have_x = bx > 0 && fields_.count(from_x);
            const bool have_xi = total - bx > 0 && fields_.count(from_xi);
            bool use_x = have_x;
            if (have_x && have_xi) use_x = supplied(from_x.first, from_x.second) || !supplied(from_xi.first, from_xi.second);
            if (use_x)
                fields_.emplace(k, differentiate_axis(fields_.at(from_x), grid_, true, opt_.fd_width));
            else
                fields_.emplace(k, differentiate_axis(fields_.at(from_xi), grid_, false, opt_.fd_width));
        }
    }
}

const GridField& GriddedPhase::field(int bx, int bxi) const
{
    check_order(bx, bxi);
    return fields_.at({bx, bxi});
}

double GriddedPhase::derivative(int bx, int bxi, double x, double xi) const
{
    return interpolate(field(bx, bxi), grid_, x, xi, opt_.interp_width);
}

GridField GriddedPhase::sample(int bx, int bxi, const TensorGrid& g) const
{
    if (same_grid(g, grid_)) return field(bx, bxi);
    return PhaseFunction::sample(bx, bxi, g);
}

std::shared_ptr<GriddedPhase> tabulate(const PhaseFunction& phi, const TensorGrid& g, int supplied_order,
                                       GriddedOptions opt)
{
    std::map<GriddedPhase::Key, GridField> known;
    for (int total = 0; total <= std::min(supplied_order, phi.max_order()); ++total)
        for (int bx = 0; bx <= total; ++bx) known.emplace(GriddedPhase::Key{bx, total - bx}, phi.sample(bx, total - bx, g));
    return std::make_shared<GriddedPhase>(g, std::move(known), phi.name(), opt);
}

// ---------------------------------------------------------------------------

namespace {

// sup over g of |D J| / (<x>^{1-bx} <xi>^{1-bxi})
double weighted_sup(const PhaseFunction& phi, int bx, int bxi, const TensorGrid& g)
{
    const GridField f = phi.sample(bx, bxi, g);
    double sup = 0.0;
    for (std::size_t i = 0; i < g.x.n; ++i) {
        const double x = g.x.at(i);
        const double wx = std::pow(ang(x), 1 - bx);
        for (std::size_t j = 0; j < g.xi.n; ++j) {
            const double xi = g.xi.at(j);
            const double jv = f(i, j) - xxi_derivative(bx, bxi, x, xi);
            sup = std::max(sup, std::abs(jv) / (wx * std::pow(ang(xi), 1 - bxi)));
        }
    }
    return sup;
}

}  // namespace

JSeminorms j_seminorm(const PhaseFunction& phi, int ell, const TensorGrid& g)
{
    if (ell < 0) throw std::invalid_argument("j_seminorm: negative ell");
    if (2 + ell > phi.max_order())
        throw SymbolError("j_seminorm: needs derivatives of order " + std::to_string(2 + ell) + ", cap is " +
                          std::to_string(phi.max_order()));
    JSeminorms out;
    for (int total = 0; total <= 2 + ell; ++total) {
        for (int bx = 0; bx <= total; ++bx) {
            const double v = weighted_sup(phi, bx, total - bx, g);
            if (total <= 1) {
                out.first = std::max(out.first, v);
            } else {
                out.j2l += v;
            }
            if (total <= 2) out.sup_form = std::max(out.sup_form, v);
        }
    }
    out.jl = out.first + out.j2l;
    return out;
}

Certificate certify_regular(const PhaseFunction& phi, const TensorGrid& g, int ell, BandOptions band)
{
    Certificate c;
    c.ell = ell;
    const JSeminorms j0 = j_seminorm(phi, 0, g);
    c.tau = j0.jl;
    c.tau_sup = j0.sup_form;
    c.tau_ell = ell == 0 ? j0.jl : j_seminorm(phi, ell, g).jl;

    const GridField fxxi = phi.sample(1, 1, g);
    const GridField fx = phi.sample(1, 0, g);
    const GridField fxi = phi.sample(0, 1, g);
    c.r = std::numeric_limits<double>::infinity();
    c.band_lo = std::numeric_limits<double>::infinity();
    c.band_hi = 0.0;
    const double xr = std::max(std::abs(g.x.start), std::abs(g.x.last()));
    const double xir = std::max(std::abs(g.xi.start), std::abs(g.xi.last()));
    for (std::size_t i = 0; i < g.x.n; ++i) {
        const double x = g.x.at(i);
        for (std::size_t j = 0; j < g.xi.n; ++j) {
            const double xi = g.xi.at(j);
            c.r = std::min(c.r, std::abs(fxxi(i, j)));
            if (std::max(std::abs(x) / xr, std::abs(xi) / xir) < band.annulus) continue;
            const double r1 = ang(fx(i, j)) / ang(xi);
            const double r2 = ang(fxi(i, j)) / ang(x);
            c.band_lo = std::min({c.band_lo, r1, r2});
            c.band_hi = std::max({c.band_hi, r1, r2});
        }
    }
    c.in_P = c.band_lo >= band.lo && c.band_hi <= band.hi;
    if (!c.in_P)
        c.cls = "fail";
    else if (!(c.r > 0.0) || !(c.tau < 1.0))
        c.cls = "P";
    else if (c.tau_ell < 1.0)
        c.cls = "P_r(tau,ell)";
    else
        c.cls = "P_r(tau)";
    return c;
}

}  // namespace sgfio
