// SPDX-License-Identifier: Apache-2.0
#include "sgfio/multiproduct.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sgfio {

PhaseChain::PhaseChain(std::vector<PhasePtr> phases, std::vector<double> taus)
    : phases_(std::move(phases)), taus_(std::move(taus))
{
    if (phases_.size() < 2) throw ChainError("PhaseChain: need at least two phases");
    if (phases_.size() != taus_.size()) throw ChainError("PhaseChain: one tau per phase");
    for (const auto& p : phases_)
        if (!p) throw ChainError("PhaseChain: null phase");
    for (double t : taus_) {
        if (!(t >= 0.0) || !std::isfinite(t)) throw ChainError("PhaseChain: tau must be finite and >= 0");
        tau0_ += t;
    }
    if (!(tau0_ < 0.25)) {
        std::ostringstream msg;
        msg << "PhaseChain: sum of tau_j = " << tau0_ << " is not below 1/4";
        throw ChainError(msg.str());
    }
}

PhaseChain PhaseChain::certified(std::vector<PhasePtr> phases, const TensorGrid& g)
{
    std::vector<double> taus;
    for (const auto& p : phases) taus.push_back(certify_regular(*p, g, 0).tau);
    return PhaseChain(std::move(phases), std::move(taus));
}

double PhaseChain::tau_bar(std::size_t k) const
{
    double s = 0.0;
    for (std::size_t j = 1; j <= std::min(k, taus_.size()); ++j) s += taus_[j - 1];
    return s;
}

double sigma_norm(const std::vector<double>& y, const std::vector<double>& eta, double x, double xi)
{
    const double wx = 1.0 / ang(x), wxi = 1.0 / ang(xi);
    double s = 0.0;
    for (std::size_t k = 1; k < y.size(); ++k) s += wx * std::abs(y[k]) + wxi * std::abs(eta[k]);
    return s;
}

namespace {

struct Iterate {
    std::vector<double> y, eta, z, zeta;
};

void partial_sums(std::size_t M, Iterate& v)
{
    v.z.assign(M + 1, 0.0);
    for (std::size_t j = 1; j <= M; ++j) v.z[j] = v.z[j - 1] + v.y[j];
    v.zeta.assign(M + 2, 0.0);
    for (std::size_t j = M; j >= 1; --j) v.zeta[j] = v.zeta[j + 1] + v.eta[j];
}

// one application of T
Iterate apply_T(const PhaseChain& chain, double x, double xi, const Iterate& v)
{
    const std::size_t M = chain.M();
    Iterate w;
    w.y.assign(M + 1, 0.0);
    w.eta.assign(M + 1, 0.0);
    for (std::size_t k = 1; k <= M; ++k) {
        const double xa = x + v.z[k - 1], xia = xi + v.zeta[k];
        w.y[k] = chain.phase(k).phi_xi(xa, xia) - xa;
        const double xb = x + v.z[k], xib = xi + v.zeta[k + 1];
        w.eta[k] = chain.phase(k + 1).phi_x(xb, xib) - xib;
    }
    partial_sums(M, w);
    return w;
}

double update_norm(const Iterate& a, const Iterate& b, double x, double xi)
{
    std::vector<double> dy(a.y.size()), de(a.eta.size());
    for (std::size_t k = 0; k < a.y.size(); ++k) {
        dy[k] = a.y[k] - b.y[k];
        de[k] = a.eta[k] - b.eta[k];
    }
    return sigma_norm(dy, de, x, xi);
}

}  // namespace

CriticalPoint solve_critical(const PhaseChain& chain, double x, double xi, const CriticalOptions& opt,
                             const std::vector<double>* start)
{
    const std::size_t M = chain.M();
    Iterate v;
    v.y.assign(M + 1, 0.0);
    v.eta.assign(M + 1, 0.0);
    if (start) {
        if (start->size() != 2 * M) throw std::invalid_argument("solve_critical: start needs 2M entries");
        for (std::size_t k = 1; k <= M; ++k) {
            v.y[k] = (*start)[k - 1];
            v.eta[k] = (*start)[M + k - 1];
        }
    }
    partial_sums(M, v);

    CriticalPoint cp;
    cp.x = x;
    cp.xi = xi;
    int applications = 0;
    for (;;) {
        Iterate w = apply_T(chain, x, xi, v);
        const double d = update_norm(w, v, x, xi);
        ++applications;
        if (!cp.updates.empty() && cp.updates.back() > opt.ratio_floor)
            cp.max_ratio = std::max(cp.max_ratio, d / cp.updates.back());
        cp.updates.push_back(d);
        v = std::move(w);
        if (d <= opt.tol) break;
        if (applications >= opt.max_iter || !std::isfinite(d)) {
            std::ostringstream msg;
            msg << "solve_critical: no convergence at (" << x << ", " << xi << ") after " << applications
                << " iterations, last update " << d << "; check the certified tau_j";
            throw ChainError(msg.str());
        }
    }
    // the final, confirming application is not counted
    cp.iterations = applications - 1;
    cp.residual = update_norm(apply_T(chain, x, xi, v), v, x, xi);
    cp.y = v.y;
    cp.eta = v.eta;
    cp.z = v.z;
    cp.zeta = v.zeta;
    cp.Y.assign(M + 1, 0.0);
    cp.N.assign(M + 2, 0.0);
    for (std::size_t j = 0; j <= M; ++j) cp.Y[j] = x + v.z[j];
    for (std::size_t j = 1; j <= M + 1; ++j) cp.N[j] = xi + v.zeta[j];
    return cp;
}

double multiproduct_value(const PhaseChain& chain, const CriticalPoint& cp)
{
    const std::size_t M = chain.M();
    double v = 0.0;
    for (std::size_t j = 1; j <= M; ++j) v += chain.phase(j)(cp.Y[j - 1], cp.N[j]) - cp.Y[j] * cp.N[j];
    return v + chain.phase(M + 1)(cp.Y[M], cp.xi);
}

Multiproduct multiproduct(const PhaseChain& chain, const TensorGrid& g, const CriticalOptions& opt,
                          GriddedOptions gopt)
{
    const std::size_t M = chain.M();
    const std::size_t nx = g.x.n, nxi = g.xi.n;
    GridField phi(nx, nxi), px(nx, nxi), pxi(nx, nxi);
    Multiproduct out;
    out.Y.assign(M, GridField(nx, nxi));
    out.N.assign(M, GridField(nx, nxi));
    auto& st = out.stats;
    constexpr double slack = 1e-12;
    for (std::size_t i = 0; i < nx; ++i) {
        const double x = g.x.at(i);
        const double wx = ang(x);
        for (std::size_t j = 0; j < nxi; ++j) {
            const double xi = g.xi.at(j);
            const double wxi = ang(xi);
            const CriticalPoint cp = solve_critical(chain, x, xi, opt);
            phi(i, j) = multiproduct_value(chain, cp);
            px(i, j) = chain.phase(1).phi_x(x, cp.N[1]);
            pxi(i, j) = chain.phase(M + 1).phi_xi(cp.Y[M], xi);
            for (std::size_t k = 1; k <= M; ++k) {
                out.Y[k - 1](i, j) = cp.Y[k];
                out.N[k - 1](i, j) = cp.N[k];
            }
            ++st.nodes;
            st.max_iterations = std::max(st.max_iterations, cp.iterations);
            st.max_residual = std::max(st.max_residual, cp.residual);
            st.max_ratio = std::max(st.max_ratio, cp.max_ratio);

            bool bad = false;
            auto ratio = [&](double value, double bound) {
                if (value <= slack * (1.0 + bound)) return 0.0;
                return bound > 0.0 ? value / bound : std::numeric_limits<double>::infinity();
            };
            for (std::size_t k = 1; k <= M; ++k) {
                const double ry = ratio(std::abs(cp.y[k]), 4.0 / 3.0 * chain.tau(k) * wx);
                const double re = ratio(std::abs(cp.eta[k]), 4.0 / 3.0 * chain.tau(k + 1) * wxi);
                const double rz = ratio(std::abs(cp.z[k]), wx / 3.0);
                const double rzeta = ratio(std::abs(cp.zeta[k]), wxi / 3.0);
                st.worst_y_ratio = std::max(st.worst_y_ratio, ry);
                st.worst_eta_ratio = std::max(st.worst_eta_ratio, re);
                st.worst_z_ratio = std::max(st.worst_z_ratio, rz);
                st.worst_zeta_ratio = std::max(st.worst_zeta_ratio, rzeta);
                bad = bad || ry > 1.0 || re > 1.0 || rz > 1.0 || rzeta > 1.0;
            }
            if (bad) ++st.bound_violations;
        }
    }
    std::map<GriddedPhase::Key, GridField> fields;
    fields.emplace(GriddedPhase::Key{0, 0}, std::move(phi));
    fields.emplace(GriddedPhase::Key{1, 0}, std::move(px));
    fields.emplace(GriddedPhase::Key{0, 1}, std::move(pxi));
    std::string name;
    for (std::size_t j = 1; j <= M + 1; ++j) name += (j > 1 ? " # " : "") + chain.phase(j).name();
    out.phase = std::make_shared<GriddedPhase>(g, std::move(fields), name, gopt);
    return out;
}

TensorGrid padded_for_chain(const TensorGrid& target, double tau0, int interp_width)
{
    const double frac = tau0 / (1.0 - tau0);
    const double xr = std::max(std::abs(target.x.start), std::abs(target.x.last()));
    const double xir = std::max(std::abs(target.xi.start), std::abs(target.xi.last()));
    const auto ex = static_cast<std::size_t>(std::ceil(frac * ang(xr) / target.x.step)) + interp_width / 2 + 1;
    const auto exi = static_cast<std::size_t>(std::ceil(frac * ang(xir) / target.xi.step)) + interp_width / 2 + 1;
    return target.padded(ex, exi);
}

StructureReport verify_structure(const PhaseChain& chain, const Multiproduct& product, const TensorGrid& g,
                                 const StructureOptions& opt)
{
    StructureReport rep;
    const std::size_t M = chain.M();
    const std::size_t nx = g.x.n, nxi = g.xi.n;
    const std::size_t e = static_cast<std::size_t>(opt.edge);
    auto inside = [&](std::size_t i, std::size_t j) { return i >= e && j >= e && i + e < nx && j + e < nxi; };

    // (a) derivative relations against differences of the value grid
    const GridField& phi = product.phase->field(0, 0);
    const GridField dx = differentiate_axis(phi, g, true, opt.fd_width);
    const GridField dxi = differentiate_axis(phi, g, false, opt.fd_width);
    for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t j = 0; j < nxi; ++j) {
            if (!inside(i, j)) continue;
            const double x = g.x.at(i), xi = g.xi.at(j);
            const double n1 = product.N[0](i, j);
            const double ym = product.Y[M - 1](i, j);
            rep.dphi_x = std::max(rep.dphi_x, std::abs(dx(i, j) - chain.phase(1).phi_x(x, n1)));
            rep.dphi_xi = std::max(rep.dphi_xi, std::abs(dxi(i, j) - chain.phase(M + 1).phi_xi(ym, xi)));
        }

    // (b) both bracketings of a three-factor chain
    if (M == 2) {
        rep.has_associativity = true;
        const TensorGrid inner = opt.inner_grid ? *opt.inner_grid : padded_for_chain(g, chain.tau0());
        const GriddedOptions gopt = product.phase->options();
        auto p12 = multiproduct(PhaseChain({chain.phase_ptr(1), chain.phase_ptr(2)}, {chain.tau(1), chain.tau(2)}),
                                inner, {}, gopt);
        auto left = multiproduct(
            PhaseChain({p12.phase, chain.phase_ptr(3)}, {chain.tau(1) + chain.tau(2), chain.tau(3)}), g, {}, gopt);
        auto p23 = multiproduct(PhaseChain({chain.phase_ptr(2), chain.phase_ptr(3)}, {chain.tau(2), chain.tau(3)}),
                                inner, {}, gopt);
        auto right = multiproduct(
            PhaseChain({chain.phase_ptr(1), p23.phase}, {chain.tau(1), chain.tau(2) + chain.tau(3)}), g, {}, gopt);
        const GridField& l = left.phase->field(0, 0);
        const GridField& r = right.phase->field(0, 0);
        for (std::size_t i = 0; i < nx; ++i)
            for (std::size_t j = 0; j < nxi; ++j) {
                rep.assoc_left = std::max(rep.assoc_left, std::abs(l(i, j) - phi(i, j)));
                rep.assoc_right = std::max(rep.assoc_right, std::abs(r(i, j) - phi(i, j)));
                rep.assoc = std::max(rep.assoc, std::abs(l(i, j) - r(i, j)));
            }
    }

    // (c) increments of Y and N and their first derivatives
    auto fit = [&](const GridField& d, double tau, bool is_y) {
        const GridField ddx = differentiate_axis(d, g, true, opt.fd_width);
        const GridField ddxi = differentiate_axis(d, g, false, opt.fd_width);
        double c = 0.0;
        for (std::size_t i = 0; i < nx; ++i)
            for (std::size_t j = 0; j < nxi; ++j) {
                if (!inside(i, j)) continue;
                const double wx = ang(g.x.at(i)), wxi = ang(g.xi.at(j));
                // Y increments weigh like <x>, N increments like <xi>
                const double w0 = is_y ? wx : wxi;
                const double wdx = is_y ? 1.0 : wxi / wx;
                const double wdxi = is_y ? wx / wxi : 1.0;
                const double m = std::max({std::abs(d(i, j)) / w0, std::abs(ddx(i, j)) / wdx, std::abs(ddxi(i, j)) / wdxi});
                if (tau > 0.0)
                    c = std::max(c, m / tau);
                else if (m > 1e-10)
                    c = std::numeric_limits<double>::infinity();
            }
        return c;
    };
    for (std::size_t j = 1; j <= M; ++j) {
        GridField dY(nx, nxi), dN(nx, nxi);
        for (std::size_t i = 0; i < nx; ++i)
            for (std::size_t k = 0; k < nxi; ++k) {
                const double prevY = j == 1 ? g.x.at(i) : product.Y[j - 2](i, k);
                dY(i, k) = product.Y[j - 1](i, k) - prevY;
                const double nextN = j == M ? g.xi.at(k) : product.N[j](i, k);
                dN(i, k) = product.N[j - 1](i, k) - nextN;
            }
        rep.c_Y = std::max(rep.c_Y, fit(dY, chain.tau(j), true));
        rep.c_N = std::max(rep.c_N, fit(dN, chain.tau(j + 1), false));
    }

    // (d) regularity of the product
    rep.certificate = certify_regular(*product.phase, g, 0);
    const double tb = chain.tau_bar(M + 1);
    rep.k = tb > 0.0 ? rep.certificate.tau / tb : 1.0;
    return rep;
}

DetCheck det_bound_check(const Eigen::MatrixXd& A, double c0)
{
    if (A.rows() != A.cols() || A.rows() == 0) throw std::invalid_argument("det_bound_check: need a square matrix");
    if (!(c0 >= 0.0 && c0 < 1.0)) throw std::invalid_argument("det_bound_check: c0 must lie in [0, 1)");
    DetCheck out;
    out.norm = A.cwiseAbs().colwise().sum().maxCoeff();
    if (out.norm > c0) {
        std::ostringstream msg;
        msg << "det_bound_check: column-sum norm " << out.norm << " exceeds c0 = " << c0;
        throw std::invalid_argument(msg.str());
    }
    const auto l = static_cast<double>(A.rows());
    const Eigen::MatrixXd B = Eigen::MatrixXd::Identity(A.rows(), A.cols()) - A;
    out.det = B.partialPivLu().determinant();
    out.lower = std::pow(1.0 - c0, l);
    out.upper = std::pow(1.0 + c0, l);
    out.ok = out.det >= out.lower && out.det <= out.upper;
    return out;
}

}  // namespace sgfio
