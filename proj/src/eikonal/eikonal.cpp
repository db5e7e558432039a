// SPDX-License-Identifier: Apache-2.0
#include "sgfio/eikonal.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sgfio {

CharacteristicFlow::CharacteristicFlow(const SgSymbol& a, double h) : h_(h)
{
    if (!(h > 0.0)) throw std::invalid_argument("CharacteristicFlow: step must be positive");
    if (a.max_order() < 2) throw SymbolError("eikonal symbol needs derivatives up to order 2");
    a_ = a.evaluator({0, 0, 0, 0});
    ax_ = a.evaluator({1, 0, 0, 0});
    axi_ = a.evaluator({0, 1, 0, 0});
    axx_ = a.evaluator({2, 0, 0, 0});
    axxi_ = a.evaluator({1, 1, 0, 0});
    axixi_ = a.evaluator({0, 2, 0, 0});
}

int CharacteristicFlow::steps(double s, double t) const
{
    const double span = std::abs(t - s);
    if (span == 0.0) return 0;
    return std::max(1, static_cast<int>(std::ceil(span / h_ - 1e-9)));
}

// u = (q, p, S, M00, M01, M10, M11)
void CharacteristicFlow::rhs(double theta, double s, const double* u, double* du) const
{
    const Point pt{theta, s, u[0], u[1]};
    const double a = a_(pt);
    const double ax = ax_(pt);
    const double axi = axi_(pt);
    const double axx = axx_(pt);
    const double axxi = axxi_(pt);
    const double axixi = axixi_(pt);
    du[0] = -axi;
    du[1] = ax;
    du[2] = a - u[1] * axi;
    // dM = [[-a_xi_x, -a_xi_xi], [a_xx, a_x_xi]] M
    du[3] = -axxi * u[3] - axixi * u[5];
    du[4] = -axxi * u[4] - axixi * u[6];
    du[5] = axx * u[3] + axxi * u[5];
    du[6] = axx * u[4] + axxi * u[6];
}

CharacteristicFlow::State CharacteristicFlow::integrate(double y, double xi, double s, double t) const
{
    constexpr int D = 7;
    double u[D] = {y, xi, 0.0, 1.0, 0.0, 0.0, 1.0};
    const int n = steps(s, t);
    const double dt = n ? (t - s) / n : 0.0;
    double k1[D], k2[D], k3[D], k4[D], w[D];
    for (int k = 0; k < n; ++k) {
        const double th = s + k * dt;
        rhs(th, s, u, k1);
        for (int i = 0; i < D; ++i) w[i] = u[i] + 0.5 * dt * k1[i];
        rhs(th + 0.5 * dt, s, w, k2);
        for (int i = 0; i < D; ++i) w[i] = u[i] + 0.5 * dt * k2[i];
        rhs(th + 0.5 * dt, s, w, k3);
        for (int i = 0; i < D; ++i) w[i] = u[i] + dt * k3[i];
        rhs(th + dt, s, w, k4);
        for (int i = 0; i < D; ++i) u[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    State st;
    st.q = u[0];
    st.p = u[1];
    st.action = u[2];
    st.M = {u[3], u[4], u[5], u[6]};
    return st;
}

namespace {

struct NodeSolution {
    double y;
    CharacteristicFlow::State st;
    int iters;
    double residual;
};

NodeSolution shoot(const CharacteristicFlow& flow, double x, double xi, double s, double t, double y0,
                   const EikonalOptions& opt)
{
    const double tol = opt.shoot_tol * std::max(1.0, std::abs(x));
    double y = y0;
    auto st = flow.integrate(y, xi, s, t);
    double F = st.q - x;
    int it = 0;
    while (std::abs(F) > tol) {
        if (it >= opt.max_newton) {
            std::ostringstream msg;
            msg << "eikonal shooting did not converge at (x, xi) = (" << x << ", " << xi << "), t - s = " << t - s
                << ", residual " << std::abs(F) << "; reduce t - s";
            throw ShootingError(msg.str(), x, xi);
        }
        ++it;
        const double qy = st.M[0];
        if (!(std::abs(qy) > 1e-300) || !std::isfinite(qy))
            throw ShootingError("eikonal shooting: singular dq/dy (caustic)", x, xi);
        const double step = -F / qy;
        double lambda = 1.0;
        for (int damp = 0;; ++damp) {
            const double yn = y + lambda * step;
            auto sn = flow.integrate(yn, xi, s, t);
            const double Fn = sn.q - x;
            if (std::isfinite(Fn) && (std::abs(Fn) < std::abs(F) || damp >= 20)) {
                y = yn;
                st = sn;
                F = Fn;
                break;
            }
            lambda *= 0.5;
        }
    }
    return {y, st, it, std::abs(F)};
}

EikonalPtr assemble(const SgSymbol& a, double t, double s, const TensorGrid& g, const EikonalOptions& opt,
                    const CharacteristicFlow& flow, GridField& y_guess, bool have_guess)
{
    const std::size_t nx = g.x.n, nxi = g.xi.n;
    GridField phi(nx, nxi), px(nx, nxi), pxi(nx, nxi), pxx(nx, nxi), pxxi(nx, nxi), pxixi(nx, nxi);
    EikonalPhase::Diagnostics diag;
    diag.rk_steps = flow.steps(s, t);
    if (t == s) {
        for (std::size_t i = 0; i < nx; ++i)
            for (std::size_t j = 0; j < nxi; ++j) {
                const double x = g.x.at(i), xi = g.xi.at(j);
                phi(i, j) = x * xi;
                px(i, j) = xi;
                pxi(i, j) = x;
                pxx(i, j) = 0.0;
                pxxi(i, j) = 1.0;
                pxixi(i, j) = 0.0;
                y_guess(i, j) = x;
            }
    } else {
        auto axi = a.evaluator({0, 1, 0, 0});
        for (std::size_t i = 0; i < nx; ++i) {
            const double x = g.x.at(i);
            for (std::size_t j = 0; j < nxi; ++j) {
                const double xi = g.xi.at(j);
                // first-order transport prediction unless a previous level is available
                const double y0 = have_guess ? y_guess(i, j) : x + (t - s) * axi({s, s, x, xi});
                const NodeSolution sol = shoot(flow, x, xi, s, t, y0, opt);
                const auto& M = sol.st.M;
                const double qy = M[0], qxi = M[1], py = M[2];
                phi(i, j) = sol.y * xi + sol.st.action;
                px(i, j) = sol.st.p;
                pxi(i, j) = sol.y;
                pxx(i, j) = py / qy;
                pxxi(i, j) = 1.0 / qy;
                pxixi(i, j) = -qxi / qy;
                y_guess(i, j) = sol.y;
                diag.max_residual = std::max(diag.max_residual, sol.residual);
                diag.max_newton = std::max(diag.max_newton, sol.iters);
                diag.total_newton += sol.iters;
            }
        }
    }
    std::map<GriddedPhase::Key, GridField> fields;
    fields.emplace(GriddedPhase::Key{0, 0}, std::move(phi));
    fields.emplace(GriddedPhase::Key{1, 0}, std::move(px));
    fields.emplace(GriddedPhase::Key{0, 1}, std::move(pxi));
    fields.emplace(GriddedPhase::Key{2, 0}, std::move(pxx));
    fields.emplace(GriddedPhase::Key{1, 1}, std::move(pxxi));
    fields.emplace(GriddedPhase::Key{0, 2}, std::move(pxixi));
    std::ostringstream name;
    name << "eikonal[" << a.provenance() << "](t=" << t << ", s=" << s << ")";
    return std::make_shared<EikonalPhase>(g, std::move(fields), name.str(), opt.grid, t, s, diag);
}

}  // namespace

EikonalPtr solve_eikonal(const SgSymbol& a, double t, double s, const TensorGrid& g, const EikonalOptions& opt)
{
    if (t < s) throw std::invalid_argument("solve_eikonal: requires t >= s");
    CharacteristicFlow flow(a, opt.h);
    GridField guess(g.x.n, g.xi.n);
    return assemble(a, t, s, g, opt, flow, guess, false);
}

std::vector<EikonalPtr> solve_eikonal_levels(const SgSymbol& a, double s, const std::vector<double>& times,
                                             const TensorGrid& g, const EikonalOptions& opt)
{
    CharacteristicFlow flow(a, opt.h);
    GridField guess(g.x.n, g.xi.n);
    std::vector<EikonalPtr> out;
    bool have = false;
    double prev = s;
    for (double t : times) {
        if (t < prev) throw std::invalid_argument("solve_eikonal_levels: times must be nondecreasing and >= s");
        out.push_back(assemble(a, t, s, g, opt, flow, guess, have));
        have = true;
        prev = t;
    }
    return out;
}

namespace {

bool interior(const TensorGrid& g, std::size_t i, std::size_t j)
{
    return i > 0 && j > 0 && i + 1 < g.x.n && j + 1 < g.xi.n;
}

}  // namespace

double verify_backward(const EikonalPhase& phi, const SgSymbol& a, const EikonalOptions& opt, double delta)
{
    if (phi.t() - phi.s() < delta)
        throw std::invalid_argument("verify_backward: need t - s >= delta for the s-samples");
    const auto& g = phi.grid();
    auto lo = solve_eikonal(a, phi.t(), phi.s() - delta, g, opt);
    auto hi = solve_eikonal(a, phi.t(), phi.s() + delta, g, opt);
    const GridField& f0 = lo->field(0, 0);
    const GridField& f1 = hi->field(0, 0);
    const GridField& y = phi.field(0, 1);
    auto av = a.evaluator({});
    double worst = 0.0;
    for (std::size_t i = 0; i < g.x.n; ++i)
        for (std::size_t j = 0; j < g.xi.n; ++j) {
            if (!interior(g, i, j)) continue;
            const double ds = (f1(i, j) - f0(i, j)) / (2.0 * delta);
            const double xi = g.xi.at(j);
            worst = std::max(worst, std::abs(ds + av({phi.s(), phi.s(), y(i, j), xi})));
        }
    return worst;
}

double verify_forward(const EikonalPhase& phi, const SgSymbol& a, const EikonalOptions& opt, double delta)
{
    const auto& g = phi.grid();
    const double t0 = phi.t() - delta;
    if (t0 < phi.s()) throw std::invalid_argument("verify_forward: need t - s >= delta");
    auto lo = solve_eikonal(a, t0, phi.s(), g, opt);
    auto hi = solve_eikonal(a, phi.t() + delta, phi.s(), g, opt);
    const GridField& f0 = lo->field(0, 0);
    const GridField& f1 = hi->field(0, 0);
    const GridField& px = phi.field(1, 0);
    auto av = a.evaluator({});
    double worst = 0.0;
    for (std::size_t i = 0; i < g.x.n; ++i)
        for (std::size_t j = 0; j < g.xi.n; ++j) {
            if (!interior(g, i, j)) continue;
            const double dt = (f1(i, j) - f0(i, j)) / (2.0 * delta);
            worst = std::max(worst, std::abs(dt - av({phi.t(), phi.s(), g.x.at(i), px(i, j)})));
        }
    return worst;
}

}  // namespace sgfio
