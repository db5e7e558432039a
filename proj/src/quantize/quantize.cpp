// SPDX-License-Identifier: Apache-2.0
#include "sgfio/quantize.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/FFT>

#include "sgfio/multiproduct.hpp"

namespace sgfio {

namespace {

constexpr cplx I1{0.0, 1.0};

void require_same(const QuantGrid& a, const QuantGrid& b)
{
    if (a.N != b.N || a.L != b.L) throw QuantError("grid mismatch between operator and function");
}

}  // namespace

QuantGrid::QuantGrid(std::size_t n, double l) : N(n), L(l)
{
    if (N < 4 || N % 2 != 0) throw std::invalid_argument("QuantGrid: N must be even and >= 4");
    if (!(L > 0.0)) throw std::invalid_argument("QuantGrid: L must be positive");
}

std::vector<double> QuantGrid::xs() const
{
    std::vector<double> v(N);
    for (std::size_t i = 0; i < N; ++i) v[i] = x(i);
    return v;
}

GridFunction::GridFunction(QuantGrid g, CVector values) : grid(g), v(std::move(values))
{
    if (static_cast<std::size_t>(v.size()) != grid.N) throw QuantError("GridFunction: length differs from grid");
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (!std::isfinite(v[i].real()) || !std::isfinite(v[i].imag()))
            throw QuantError("GridFunction: non-finite value");
}

double GridFunction::l2() const { return std::sqrt(grid.dx()) * v.norm(); }

std::string to_string(OpKind k)
{
    switch (k) {
    case OpKind::type1: return "type1";
    case OpKind::type2: return "type2";
    case OpKind::pseudo: return "pseudo";
    case OpKind::product: return "product";
    }
    return "?";
}

GridFunction OperatorMatrix::apply(const GridFunction& u) const
{
    if (m.cols() != u.v.size()) throw QuantError("OperatorMatrix: size mismatch");
    return {u.grid, m * u.v};
}

OperatorMatrix OperatorMatrix::adjoint() const
{
    OpKind k = kind == OpKind::type1 ? OpKind::type2 : kind == OpKind::type2 ? OpKind::type1 : kind;
    return {m.adjoint(), k};
}

CVector fourier(const GridFunction& u)
{
    const QuantGrid& g = u.grid;
    const std::size_t N = g.N;
    const double xi0 = g.xi(0), x0 = g.x(0);
    std::vector<cplx> in(N), out;
    for (std::size_t i = 0; i < N; ++i) in[i] = u.v[i] * std::exp(-I1 * (static_cast<double>(i) * g.dx() * xi0));
    Eigen::FFT<double> fft;
    fft.fwd(out, in);
    CVector uh(N);
    for (std::size_t j = 0; j < N; ++j) uh[j] = g.dx() * std::exp(-I1 * (x0 * g.xi(j))) * out[j];
    return uh;
}

GridFunction inverse_fourier(const CVector& uh, const QuantGrid& g)
{
    const std::size_t N = g.N;
    if (static_cast<std::size_t>(uh.size()) != N) throw QuantError("inverse_fourier: length differs from grid");
    const double xi0 = g.xi(0), x0 = g.x(0);
    std::vector<cplx> in(N), out;
    for (std::size_t j = 0; j < N; ++j) in[j] = uh[j] * std::exp(I1 * (x0 * g.xi(j)));
    Eigen::FFT<double> fft;
    fft.SetFlag(Eigen::FFT<double>::Unscaled);
    fft.inv(out, in);
    CVector u(N);
    const double c = g.dxi() / (2.0 * M_PI);
    for (std::size_t i = 0; i < N; ++i) u[i] = c * std::exp(I1 * (static_cast<double>(i) * g.dx() * xi0)) * out[i];
    return {g, std::move(u)};
}

CVector fourier_direct(const GridFunction& u, const std::vector<double>& xis)
{
    const QuantGrid& g = u.grid;
    CVector uh(xis.size());
    for (std::size_t j = 0; j < xis.size(); ++j) {
        cplx s = 0.0;
        for (std::size_t i = 0; i < g.N; ++i) s += std::exp(-I1 * (g.x(i) * xis[j])) * u.v[i];
        uh[j] = s * g.dx();
    }
    return uh;
}

Truncation truncation(const GridFunction& u)
{
    auto edge = [](const CVector& v) {
        const double peak = v.cwiseAbs().maxCoeff();
        if (peak == 0.0) return 0.0;
        const Eigen::Index n = v.size();
        const double e = std::max({std::abs(v[0]), std::abs(v[1]), std::abs(v[n - 1]), std::abs(v[n - 2])});
        return e / peak;
    };
    return {edge(u.v), edge(fourier(u))};
}

CMatrix sample_symbol(const SgSymbol& a, const QuantGrid& g, SymbolTime time)
{
    auto f = a.evaluator({});
    CMatrix out(g.N, g.N);
    for (std::size_t i = 0; i < g.N; ++i)
        for (std::size_t j = 0; j < g.N; ++j) out(i, j) = f({time.t, time.s, g.x(i), g.xi(j)});
    return out;
}

namespace {

// E_ij = dxi/(2 pi) a_ij exp(i phi_ij)
CMatrix kernel(const CMatrix& amp, const GridField& phase, const QuantGrid& g)
{
    if (phase.nx() != g.N || phase.nxi() != g.N || amp.rows() != static_cast<Eigen::Index>(g.N) ||
        amp.cols() != static_cast<Eigen::Index>(g.N))
        throw QuantError("amplitude/phase samples do not match the grid");
    const double c = g.dxi() / (2.0 * M_PI);
    CMatrix E(g.N, g.N);
    for (std::size_t i = 0; i < g.N; ++i)
        for (std::size_t j = 0; j < g.N; ++j) E(i, j) = c * amp(i, j) * std::exp(I1 * phase(i, j));
    return E;
}

// F_jk = dx exp(-i x_k xi_j)
CMatrix dft_matrix(const QuantGrid& g)
{
    CMatrix F(g.N, g.N);
    for (std::size_t j = 0; j < g.N; ++j)
        for (std::size_t k = 0; k < g.N; ++k) F(j, k) = g.dx() * std::exp(-I1 * (g.x(k) * g.xi(j)));
    return F;
}

}  // namespace

OperatorMatrix type1_matrix(const CMatrix& amplitude, const GridField& phase, const QuantGrid& g)
{
    return {kernel(amplitude, phase, g) * dft_matrix(g), OpKind::type1};
}

OperatorMatrix op_matrix(OpKind kind, const SgSymbol& a, const PhaseFunction& phi, const QuantGrid& g,
                         SymbolTime time)
{
    switch (kind) {
    case OpKind::type1: return type1_matrix(sample_symbol(a, g, time), phi.sample(0, 0, g.tensor()), g);
    case OpKind::type2: return op_matrix(OpKind::type1, a, phi, g, time).adjoint();
    case OpKind::pseudo: return pseudo_matrix(a, g, time);
    case OpKind::product: break;
    }
    throw QuantError("op_matrix: a product has no symbol of its own");
}

OperatorMatrix pseudo_matrix(const SgSymbol& a, const QuantGrid& g, SymbolTime time)
{
    auto m = op_matrix(OpKind::type1, a, *identity_phase(), g, time);
    m.kind = OpKind::pseudo;
    return m;
}

OperatorMatrix iphi_matrix(const PhaseFunction& phi, const QuantGrid& g)
{
    return type1_matrix(CMatrix::Ones(g.N, g.N), phi.sample(0, 0, g.tensor()), g);
}

Applied apply_type1(const SgSymbol& a, const PhaseFunction& phi, const GridFunction& u, SymbolTime time)
{
    const QuantGrid& g = u.grid;
    const CMatrix E = kernel(sample_symbol(a, g, time), phi.sample(0, 0, g.tensor()), g);
    Applied r;
    r.input = truncation(u);
    r.warning = !r.input.ok();
    r.u = GridFunction(g, E * fourier(u));
    return r;
}

Applied apply_type2(const SgSymbol& b, const PhaseFunction& phi, const GridFunction& u, SymbolTime time)
{
    // (E F)^* u = F^* (E^* u), and F^* w = (2 pi dx / dxi) inverse_fourier(w)
    const QuantGrid& g = u.grid;
    const CMatrix E = kernel(sample_symbol(b, g, time), phi.sample(0, 0, g.tensor()), g);
    const CVector w = E.adjoint() * u.v;
    Applied r;
    r.input = truncation(u);
    r.warning = !r.input.ok();
    r.u = GridFunction(g, (2.0 * M_PI * g.dx() / g.dxi()) * inverse_fourier(w, g).v);
    return r;
}

double sobolev_norm(const GridFunction& u, double r, double rho)
{
    const QuantGrid& g = u.grid;
    CVector w = u.v;
    if (rho != 0.0) {
        CVector uh = fourier(u);
        for (std::size_t j = 0; j < g.N; ++j) uh[j] *= std::pow(ang(g.xi(j)), rho);
        w = inverse_fourier(uh, g).v;
    }
    if (r != 0.0)
        for (std::size_t i = 0; i < g.N; ++i) w[i] *= std::pow(ang(g.x(i)), r);
    return std::sqrt(g.dx()) * w.norm();
}

namespace {

CMatrix gabor_atoms(const QuantGrid& g, const SubspaceOptions& opt, double inset)
{
    const double cmax = g.L - opt.center_margin * opt.sigma;
    if (cmax < 0.0) throw QuantError("band_basis: grid too short for the window width");
    const int nc = static_cast<int>(std::floor(cmax / opt.center_step + 1e-9) - inset);
    const int nk = static_cast<int>(std::floor(opt.freq_max / opt.freq_step + 1e-9) - inset);
    if (nc < 0 || nk < 0) throw QuantError("band_basis: inset leaves an empty subspace");
    if ((nk + 7) * opt.freq_step > static_cast<double>(g.N / 2) * g.dxi())
        throw QuantError("band_basis: frequencies too close to the grid Nyquist limit");
    CMatrix B(g.N, (2 * nc + 1) * (2 * nk + 1));
    Eigen::Index col = 0;
    for (int c = -nc; c <= nc; ++c)
        for (int k = -nk; k <= nk; ++k, ++col) {
            const double xc = c * opt.center_step, kk = k * opt.freq_step;
            for (std::size_t i = 0; i < g.N; ++i) {
                const double d = (g.x(i) - xc) / opt.sigma;
                B(i, col) = std::exp(-0.5 * d * d) * std::exp(I1 * (kk * g.x(i)));
            }
        }
    return B;
}

CMatrix orthonormal_span(const CMatrix& B, double rank_tol)
{
    Eigen::BDCSVD<CMatrix> svd(B, Eigen::ComputeThinU);
    const auto& s = svd.singularValues();
    Eigen::Index rank = 0;
    while (rank < s.size() && s[rank] > rank_tol * s[0]) ++rank;
    return svd.matrixU().leftCols(rank);
}

}  // namespace

CMatrix band_basis(const QuantGrid& g, const SubspaceOptions& opt)
{
    return orthonormal_span(gabor_atoms(g, opt, 0.0), opt.rank_tol);
}

CMatrix hermite_basis(const QuantGrid& g, int count)
{
    if (count < 1) throw QuantError("hermite_basis: need at least one function");
    if (2.0 * count + 1.0 > std::pow(0.75 * std::min(g.L, static_cast<double>(g.N / 2) * g.dxi()), 2))
        throw QuantError("hermite_basis: functions reach the edge of the grid");
    CMatrix H(g.N, count);
    for (std::size_t i = 0; i < g.N; ++i) {
        const double x = g.x(i);
        double prev = 0.0, cur = std::pow(M_PI, -0.25) * std::exp(-x * x / 2.0);
        for (int n = 0; n < count; ++n) {
            H(i, n) = cur;
            const double next = std::sqrt(2.0 / (n + 1)) * x * cur - std::sqrt(static_cast<double>(n) / (n + 1)) * prev;
            prev = cur;
            cur = next;
        }
    }
    // the grid sum is exact for these to rounding
    return H * std::sqrt(g.dx());
}

BandSpace band_space(const QuantGrid& g, const SubspaceOptions& opt)
{
    BandSpace b;
    const double cut = opt.solve_frac * static_cast<double>(g.N / 2) * g.dxi();
    std::vector<std::size_t> js;
    for (std::size_t j = 0; j < g.N; ++j)
        if (std::abs(g.xi(j)) <= cut + 1e-12) js.push_back(j);
    b.solve.resize(g.N, static_cast<Eigen::Index>(js.size()));
    const double nrm = 1.0 / std::sqrt(static_cast<double>(g.N));
    for (std::size_t c = 0; c < js.size(); ++c)
        for (std::size_t i = 0; i < g.N; ++i) b.solve(i, c) = nrm * std::exp(I1 * (g.x(i) * g.xi(js[c])));
    // orthonormalise the atoms in the coefficient space of the solve basis, so the test space is a subspace of it
    // up to rounding
    const CMatrix inner = gabor_atoms(g, opt, opt.inset);
    b.test = b.solve * orthonormal_span(b.solve.adjoint() * inner, opt.rank_tol);
    return b;
}

double subspace_norm(const CMatrix& X, const CMatrix& P)
{
    const CMatrix Y = X * P;
    Eigen::BDCSVD<CMatrix> svd(Y);
    return svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
}

Inverse invert_Iphi(const OperatorMatrix& I, const BandSpace& B)
{
    const CMatrix& P = B.solve;
    const CMatrix& M1 = I.m;
    const CMatrix M2 = M1.adjoint();
    const Eigen::Index k = P.cols();
    const CMatrix A0 = P.adjoint() * (M1 * (M2 * P)) - CMatrix::Identity(k, k);
    const CMatrix S = CMatrix::Identity(k, k) + A0;
    Eigen::PartialPivLU<CMatrix> lu(S);
    if (!(lu.rcond() > 1e-12))
        throw QuantError("invert_Iphi: I + A_0 is numerically singular (tau too large or grid too coarse)");
    Inverse r;
    r.Qstar = {M2 * P * lu.solve(P.adjoint()), OpKind::product};
    const CMatrix Id = CMatrix::Identity(M1.rows(), M1.cols());
    r.residual = subspace_norm(M1 * r.Qstar.m - Id, B.test);
    r.left_residual = subspace_norm(r.Qstar.m * M1 - Id, B.test);
    Eigen::BDCSVD<CMatrix> svd(A0);
    r.a0_norm = svd.singularValues()[0];
    return r;
}

Inverse invert_Iphi(const PhaseFunction& phi, const QuantGrid& g, const BandSpace& B)
{
    return invert_Iphi(iphi_matrix(phi, g), B);
}

double taper(double x, double L, double frac)
{
    const double a = std::abs(x), flat = (1.0 - frac) * L;
    if (a <= flat) return 1.0;
    if (a >= L) return 0.0;
    return 0.5 * (1.0 + std::cos(M_PI * (a - flat) / (frac * L)));
}

TensorGrid probe_grid(const QuantGrid& g, const ProbeOptions& opt, std::size_t* i0, std::size_t* j0)
{
    const double xr = opt.x_frac * g.L, xir = opt.xi_frac * static_cast<double>(g.N / 2) * g.dxi();
    std::size_t ia = g.N, ib = 0, ja = g.N, jb = 0;
    for (std::size_t i = 0; i < g.N; ++i)
        if (std::abs(g.x(i)) <= xr + 1e-12) ia = std::min(ia, i), ib = std::max(ib, i);
    for (std::size_t j = 0; j < g.N; ++j)
        if (std::abs(g.xi(j)) <= xir + 1e-12) ja = std::min(ja, j), jb = std::max(jb, j);
    if (ia >= ib || ja >= jb) throw QuantError("probe_grid: empty probe region");
    if (i0) *i0 = ia;
    if (j0) *j0 = ja;
    return {Axis{g.x(ia), g.dx(), ib - ia + 1}, Axis{g.xi(ja), g.dxi(), jb - ja + 1}};
}

ProbedSymbol probe_symbol(const OperatorMatrix& A, const PhaseFunction& phi, const QuantGrid& g,
                          const ProbeOptions& opt)
{
    ProbedSymbol r;
    r.grid = probe_grid(g, opt, &r.i0, &r.j0);
    const std::size_t nx = r.grid.x.n, nxi = r.grid.xi.n;
    CMatrix W(g.N, nxi);
    for (std::size_t j = 0; j < nxi; ++j) {
        const double xi = r.grid.xi.at(j);
        for (std::size_t i = 0; i < g.N; ++i) W(i, j) = taper(g.x(i), g.L, opt.taper_frac) * std::exp(I1 * (g.x(i) * xi));
    }
    const CMatrix AW = A.m * W;
    const GridField ph = phi.sample(0, 0, r.grid);
    r.p.resize(nx, nxi);
    for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t j = 0; j < nxi; ++j) r.p(i, j) = std::exp(-I1 * ph(i, j)) * AW(r.i0 + i, j);
    for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t j = 0; j < nxi; ++j) {
            r.sup_abs = std::max(r.sup_abs, std::abs(r.p(i, j)));
            r.sup_dev_one = std::max(r.sup_dev_one, std::abs(r.p(i, j) - 1.0));
            if (i + 1 < nx) {
                const double xm = r.grid.x.at(i) + 0.5 * r.grid.x.step;
                r.dq_x = std::max(r.dq_x, ang(xm) * std::abs(r.p(i + 1, j) - r.p(i, j)) / r.grid.x.step);
            }
            if (j + 1 < nxi) {
                const double xim = r.grid.xi.at(j) + 0.5 * r.grid.xi.step;
                r.dq_xi = std::max(r.dq_xi, ang(xim) * std::abs(r.p(i, j + 1) - r.p(i, j)) / r.grid.xi.step);
            }
        }
    return r;
}

namespace {

double certified_tau(const PhaseFunction& phi, const QuantGrid& g)
{
    return certify_regular(phi, g.tensor(), 0).tau;
}

}  // namespace

Composition compose_extract_symbol(const PhasePtr& phi1, const PhasePtr& phi2, const QuantGrid& g,
                                   const ProbeOptions& opt)
{
    Composition c;
    c.tau1 = certified_tau(*phi1, g);
    c.tau2 = certified_tau(*phi2, g);
    if (c.tau1 + c.tau2 > opt.tau_max)
        throw QuantError("compose_extract_symbol: tau_1 + tau_2 = " + std::to_string(c.tau1 + c.tau2) +
                         " exceeds the small-tau threshold");
    const TensorGrid pg = probe_grid(g, opt);
    PhaseChain chain({phi1, phi2}, {c.tau1, c.tau2});
    c.phi = multiproduct(chain, pg).phase;
    c.P = iphi_matrix(*phi1, g) * iphi_matrix(*phi2, g);
    c.p = probe_symbol(c.P, *c.phi, g, opt);
    return c;
}

ChainComposition compose_chain(const std::vector<ChainFactor>& ops, const QuantGrid& g, const BandSpace& B,
                               const ProbeOptions& opt)
{
    const std::size_t M = ops.size();
    if (M < 2) throw QuantError("compose_chain: need at least two factors");
    ChainComposition r;
    std::vector<PhasePtr> phases;
    std::vector<double> taus;
    double m = 0.0, mu = 0.0;
    for (const auto& f : ops) {
        phases.push_back(f.phi);
        taus.push_back(certified_tau(*f.phi, g));
        m += f.m;
        mu += f.mu;
    }
    for (double t : taus) r.tau0 += t;
    if (r.tau0 > opt.tau_max)
        throw QuantError("compose_chain: sum of tau_j = " + std::to_string(r.tau0) + " exceeds the small-tau threshold");

    std::vector<OperatorMatrix> A;
    for (const auto& f : ops) A.push_back(op_matrix(OpKind::type1, f.a, *f.phi, g));
    r.A = A[0];
    for (std::size_t j = 1; j < M; ++j) r.A = r.A * A[j];

    // Phi_j = phi_1 # ... # phi_j
    std::vector<PhasePtr> Phi{phases[0]};
    for (std::size_t j = 2; j <= M; ++j) {
        PhaseChain chain(std::vector<PhasePtr>(phases.begin(), phases.begin() + j),
                         std::vector<double>(taus.begin(), taus.begin() + j));
        auto prod = multiproduct(chain, g.tensor()).phase;
        r.Phi.push_back(prod);
        Phi.push_back(prod);
    }

    // R_j = I_{Phi_{j-1}} A_j Q_j*
    const Eigen::Index N = static_cast<Eigen::Index>(g.N);
    CMatrix R = CMatrix::Identity(N, N);
    OperatorMatrix Iprev{CMatrix::Identity(N, N), OpKind::pseudo};
    for (std::size_t j = 0; j < M; ++j) {
        const OperatorMatrix Ij = iphi_matrix(*Phi[j], g);
        const Inverse inv = invert_Iphi(Ij, B);
        r.max_inverse_residual = std::max({r.max_inverse_residual, inv.residual, inv.left_residual});
        R = R * (Iprev.m * A[j].m * inv.Qstar.m);
        Iprev = Ij;
    }
    R = R * Iprev.m;
    r.factorization_residual = subspace_norm(r.A.m - R, B.test) / subspace_norm(r.A.m, B.test);

    r.a = probe_symbol(r.A, *Phi.back(), g, opt);
    for (std::size_t i = 0; i < r.a.grid.x.n; ++i)
        for (std::size_t j = 0; j < r.a.grid.xi.n; ++j) {
            const double w = std::pow(ang(r.a.grid.x.at(i)), -m) * std::pow(ang(r.a.grid.xi.at(j)), -mu);
            r.symbol_seminorm = std::max(r.symbol_seminorm, std::abs(r.a.p(i, j)) * w);
        }
    const SampleGrid sg(opt.x_frac * g.L, opt.xi_frac * static_cast<double>(g.N / 2) * g.dxi(), 33, 33);
    r.factor_seminorm_product = 1.0;
    for (const auto& f : ops) r.factor_seminorm_product *= seminorm(f.a, 0, f.m, f.mu, sg);
    r.C = r.symbol_seminorm / r.factor_seminorm_product;
    return r;
}

ExpansionCheck first_order_expansion_check(const SgSymbol& p, const SgSymbol& a, const PhaseFunction& phi,
                                           const QuantGrid& g, const GridFunction& u,
                                           const std::vector<double>& lambdas)
{
    require_same(g, u.grid);
    const TensorGrid tg = g.tensor();
    const GridField ph = phi.sample(0, 0, tg), phx = phi.sample(1, 0, tg);
    const CMatrix A = sample_symbol(a, g);
    auto pf = p.evaluator({});
    CMatrix C(g.N, g.N);
    for (std::size_t i = 0; i < g.N; ++i)
        for (std::size_t j = 0; j < g.N; ++j) C(i, j) = pf({0.0, 0.0, g.x(i), phx(i, j)}) * A(i, j);
    const CMatrix D = pseudo_matrix(p, g).m * type1_matrix(A, ph, g).m - type1_matrix(C, ph, g).m;

    ExpansionCheck r;
    r.lambdas = lambdas;
    for (double lam : lambdas) {
        CVector v(g.N);
        for (std::size_t i = 0; i < g.N; ++i) v[i] = u.v[i] * std::exp(I1 * (lam * g.x(i)));
        r.ratios.push_back((D * v).norm() / v.norm());
    }
    if (lambdas.size() >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double n = static_cast<double>(lambdas.size());
        for (std::size_t k = 0; k < lambdas.size(); ++k) {
            const double lx = std::log(lambdas[k]), ly = std::log(std::max(r.ratios[k], 1e-300));
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
        }
        r.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    }
    return r;
}

}  // namespace sgfio
