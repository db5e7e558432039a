// SPDX-License-Identifier: Apache-2.0
#include "sgfio/hyperbolic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "sgfio/interp.hpp"

namespace sgfio {

namespace {

constexpr cplx kI{0.0, 1.0};

double spectral_norm(const CMatrix& A)
{
    if (A.size() == 0) return 0.0;
    Eigen::BDCSVD<CMatrix> svd(A);
    return svd.singularValues()(0);
}

bool is_zero(const std::optional<SgSymbol>& s) { return !s.has_value(); }

// Op(lambda_j) delta_ij + Op(R_ij) at time t, stacked.
CMatrix generator(const HyperbolicSystem& sys, const QuantGrid& g, double t)
{
    const std::size_t m = sys.m(), N = g.N;
    CMatrix H = CMatrix::Zero(m * N, m * N);
    for (std::size_t i = 0; i < m; ++i) {
        H.block(i * N, i * N, N, N) = pseudo_matrix(sys.lambda[i], g, {t, 0.0}).m;
        for (std::size_t j = 0; j < m; ++j)
            if (!is_zero(sys.R[i][j])) H.block(i * N, j * N, N, N) += pseudo_matrix(*sys.R[i][j], g, {t, 0.0}).m;
    }
    return H;
}

// 5 consecutive levels inside [lo, hi] centred on a as far as possible.
std::vector<int> stencil(int a, int lo, int hi)
{
    const int n = std::min(5, hi - lo + 1);
    if (n < 2) throw HyperbolicError("time difference: fewer than two levels available");
    const int start = std::clamp(a - n / 2, lo, hi - n + 1);
    std::vector<int> s(n);
    for (int k = 0; k < n; ++k) s[k] = start + k;
    return s;
}

}  // namespace

bool HyperbolicSystem::time_invariant() const
{
    for (const auto& l : lambda)
        if (l.depends_on_time()) return false;
    for (const auto& row : R)
        for (const auto& r : row)
            if (r && r->depends_on_time()) return false;
    return true;
}

void HyperbolicSystem::validate() const
{
    if (lambda.empty()) throw HyperbolicError("system: m must be at least 1");
    if (R.size() != m()) throw HyperbolicError("system: R must be m x m");
    for (const auto& row : R)
        if (row.size() != m()) throw HyperbolicError("system: R must be m x m");
    if (!(eps >= 0.0 && eps <= 1.0)) throw HyperbolicError("system: eps must lie in [0, 1]");
    for (std::size_t j = 0; j < m(); ++j) {
        const Order o = lambda[j].order();
        if (o.m > eps + 1e-12 || o.mu > 1.0 + 1e-12)
            throw HyperbolicError("system: lambda_" + std::to_string(j + 1) + " must have order (eps, 1)");
    }
    for (std::size_t i = 0; i < m(); ++i)
        for (std::size_t j = 0; j < m(); ++j)
            if (R[i][j]) {
                const Order o = R[i][j]->order();
                if (o.m > eps - 1.0 + 1e-12 || o.mu > 1e-12)
                    throw HyperbolicError("system: R entries must have order (eps - 1, 0)");
            }
}

std::vector<double> simpson_weights(int n, double h)
{
    if (n < 0) throw HyperbolicError("simpson_weights: negative interval count");
    std::vector<double> w(static_cast<std::size_t>(n) + 1, 0.0);
    if (n == 0) return w;
    if (n == 1) {
        w[0] = w[1] = 0.5 * h;
        return w;
    }
    const int ns = (n % 2 == 0) ? n : n - 3;  // Simpson part
    for (int k = 0; k + 2 <= ns; k += 2) {
        w[k] += h / 3.0;
        w[k + 1] += 4.0 * h / 3.0;
        w[k + 2] += h / 3.0;
    }
    if (ns != n) {
        const double c = 3.0 * h / 8.0;
        w[ns] += c;
        w[ns + 1] += 3.0 * c;
        w[ns + 2] += 3.0 * c;
        w[ns + 3] += c;
    }
    return w;
}

std::size_t PairIndex::size() const
{
    const auto T = static_cast<std::size_t>(top());
    return invariant_ ? T + 1 : (T + 1) * (T + 2) / 2;
}

std::size_t PairIndex::operator()(int a, int b) const
{
    if (b < 0 || a < b || a > top()) throw HyperbolicError("time pair out of range");
    if (invariant_) return static_cast<std::size_t>(a - b);
    return static_cast<std::size_t>(a) * (a + 1) / 2 + static_cast<std::size_t>(b);
}

SystemPhases build_phases(const HyperbolicSystem& sys, const HyperbolicOptions& opt)
{
    sys.validate();
    SystemPhases ph;
    ph.time = opt.time;
    ph.grid = opt.grid;
    ph.m = sys.m();
    ph.index = PairIndex(sys.time_invariant(), opt.time.K);
    const int K = opt.time.K, top = ph.index.top();
    const std::size_t N = opt.grid.N;
    const TensorGrid tg = opt.grid.tensor();
    ph.phi.assign(ph.index.size(), std::vector<EikonalPtr>(ph.m));
    ph.I.assign(ph.index.size(), std::vector<CMatrix>(ph.m));

    const int last_b = ph.index.invariant() ? 0 : K;
    for (int b = 0; b <= last_b; ++b) {
        std::vector<double> times;
        for (int a = b + 1; a <= top; ++a) times.push_back(opt.time.at(a));
        for (std::size_t j = 0; j < ph.m; ++j) {
            ph.I[ph.index(b, b)][j] = CMatrix::Identity(N, N);
            const auto levels = solve_eikonal_levels(sys.lambda[j].negated(), opt.time.at(b), times, tg, opt.eikonal);
            for (int a = b + 1; a <= top; ++a) {
                const EikonalPtr& p = levels[static_cast<std::size_t>(a - b - 1)];
                ph.max_shoot_residual = std::max(ph.max_shoot_residual, p->diagnostics().max_residual);
                ph.max_newton = std::max(ph.max_newton, p->diagnostics().max_newton);
                ph.phi[ph.index(a, b)][j] = p;
                ph.I[ph.index(a, b)][j] = iphi_matrix(*p, opt.grid).m;
            }
        }
    }
    return ph;
}

CMatrix apply_Iphi(const SystemPhases& ph, int a, int b, const CMatrix& X)
{
    const std::size_t N = ph.grid.N;
    CMatrix Y(X.rows(), X.cols());
    if (a == b) return X;
    for (std::size_t j = 0; j < ph.m; ++j)
        Y.middleRows(j * N, N).noalias() = ph.block(a, b, j) * X.middleRows(j * N, N);
    return Y;
}

CMatrix residual_W1(const HyperbolicSystem& sys, const SystemPhases& ph, int a, int b)
{
    const std::size_t m = ph.m, N = ph.grid.N;
    const QuantGrid& g = ph.grid;
    const double t = ph.time.at(a);
    CMatrix W = CMatrix::Zero(m * N, m * N);
    for (std::size_t j = 0; j < m; ++j) {
        // at t = s, D_t I_phi = -Lambda exactly and the diagonal cancels
        if (a != b) {
            const EikonalPtr& p = ph.phi[ph.index(a, b)][j];
            const GridField& px = p->field(1, 0);
            CMatrix amp(N, N);
            for (std::size_t i = 0; i < N; ++i)
                for (std::size_t k = 0; k < N; ++k) amp(i, k) = -sys.lambda[j]({t, 0.0, g.x(i), px(i, k)});
            const CMatrix Dt = type1_matrix(amp, p->field(0, 0), g).m;
            const CMatrix LI = pseudo_matrix(sys.lambda[j], g, {t, 0.0}).m * ph.block(a, b, j);
            W.block(j * N, j * N, N, N) = Dt + LI;
        }
        for (std::size_t i = 0; i < m; ++i)
            if (sys.R[i][j]) {
                const CMatrix Rop = pseudo_matrix(*sys.R[i][j], g, {t, 0.0}).m;
                W.block(i * N, j * N, N, N) += (a == b) ? Rop : CMatrix(Rop * ph.block(a, b, j));
            }
    }
    return -kI * W;
}

CMatrix L_Iphi_differenced(const HyperbolicSystem& sys, const SystemPhases& ph, int a, int b)
{
    const std::size_t m = ph.m, N = ph.grid.N;
    const auto lv = stencil(a, b, ph.index.top());
    std::vector<double> ts;
    for (int k : lv) ts.push_back(ph.time.at(k));
    const auto w = fd_weights(1, ph.time.at(a), ts);
    const CMatrix H = generator(sys, ph.grid, ph.time.at(a));
    CMatrix Ib = CMatrix::Zero(m * N, m * N);
    for (std::size_t j = 0; j < m; ++j) Ib.block(j * N, j * N, N, N) = ph.block(a, b, j);
    CMatrix L = H * Ib;
    for (std::size_t j = 0; j < m; ++j) {
        CMatrix d = CMatrix::Zero(N, N);
        for (std::size_t k = 0; k < lv.size(); ++k) d += w[k] * ph.block(lv[k], b, j);
        L.block(j * N, j * N, N, N) += -kI * d;
    }
    return L;
}

CMatrix block_basis(const CMatrix& P, std::size_t m)
{
    CMatrix B = CMatrix::Zero(P.rows() * static_cast<Eigen::Index>(m), P.cols() * static_cast<Eigen::Index>(m));
    for (std::size_t j = 0; j < m; ++j) B.block(j * P.rows(), j * P.cols(), P.rows(), P.cols()) = P;
    return B;
}

FundamentalSolution picard_series(const HyperbolicSystem& sys, const SystemPhases& ph, const HyperbolicOptions& opt)
{
    if (opt.picard_cap < 1) throw HyperbolicError("picard_series: cap must be at least 1");
    if (opt.hermite_count > opt.galerkin_count)
        throw HyperbolicError("picard_series: test space must sit inside the Galerkin space");
    FundamentalSolution F;
    F.time = ph.time;
    F.grid = ph.grid;
    F.index = ph.index;
    F.m = ph.m;
    const int K = ph.time.K;
    const double h = ph.time.h();
    const bool inv = ph.index.invariant();
    const std::size_t M = ph.m * ph.grid.N;

    F.basis = block_basis(hermite_basis(ph.grid, opt.galerkin_count), ph.m);
    const CMatrix& B = F.basis;
    const Eigen::Index nb = B.cols();
    // test directions as coefficient columns
    const CMatrix Sel = block_basis(CMatrix::Identity(opt.galerkin_count, opt.hermite_count), ph.m);

    F.W1.assign(ph.index.size(), CMatrix());
    F.E.assign(ph.index.size(), CMatrix());
    for (int a = 0; a <= K; ++a)
        for (int b = 0; b <= (inv ? 0 : a); ++b) F.W1[ph.index(a, b)] = B.adjoint() * residual_W1(sys, ph, a, b) * B;
    auto W1 = [&](int a, int b) -> const CMatrix& { return F.W1[ph.index(a, b)]; };
    auto test_norm = [&](const CMatrix& Wc) { return spectral_norm(Wc * Sel); };

    std::vector<std::vector<double>> wts(static_cast<std::size_t>(K) + 1);
    for (int n = 0; n <= K; ++n) wts[n] = simpson_weights(n, h);

    // probe section for the L E_N check, in coefficients and on the grid
    CMatrix Xc;
    {
        std::mt19937_64 rng(opt.seed);
        std::normal_distribution<double> nd;
        const Eigen::Index nt = Sel.cols();
        const Eigen::Index q = std::min<Eigen::Index>(opt.probe_columns, nt);
        CMatrix G(nt, q);
        for (Eigen::Index c = 0; c < q; ++c)
            for (Eigen::Index r = 0; r < nt; ++r) G(r, c) = cplx(nd(rng), nd(rng));
        Eigen::HouseholderQR<CMatrix> qr(G);
        Xc = Sel * (qr.householderQ() * CMatrix::Identity(nt, q));
    }
    const CMatrix X = B * Xc;
    const int lo = std::max(0, K - 4);
    std::vector<double> fd_t;
    for (int k = lo; k <= K; ++k) fd_t.push_back(ph.time.at(k));
    const auto fdw = fd_weights(1, ph.time.at(K), fd_t);
    const CMatrix HK = generator(sys, ph.grid, ph.time.at(K));

    // next Picard order along one column, all rows or only a_only
    auto step = [&](int b, const std::vector<CMatrix>& Wn, int a_only) {
        std::vector<CMatrix> next(static_cast<std::size_t>(K) + 1);
        for (int a = b; a <= K; ++a) {
            if (a_only >= 0 && a != a_only) continue;
            CMatrix acc = CMatrix::Zero(nb, Wn[b].cols());
            const auto& w = wts[a - b];
            for (int th = b; th <= a; ++th)
                if (w[th - b] != 0.0) acc.noalias() += w[th - b] * (W1(a, th) * Wn[th]);
            next[a] = std::move(acc);
        }
        return next;
    };

    // int I_phi(a, th) B S(th, b) Y dth, Y given in coefficients
    auto correction = [&](int b, int a, const std::vector<CMatrix>& SY) {
        CMatrix acc = CMatrix::Zero(M, SY[b].cols());
        const auto& w = wts[a - b];
        for (int th = b; th <= a; ++th)
            if (w[th - b] != 0.0) acc.noalias() += w[th - b] * apply_Iphi(ph, a, th, B * SY[th]);
        return acc;
    };

    const int last_b = inv ? 0 : K;
    for (int b = last_b; b >= 0; --b) {
        const bool main = (b == 0);
        const auto n1 = static_cast<std::size_t>(K) + 1;
        std::vector<CMatrix> Wn(n1), S(n1), Sprev(n1);
        for (int a = b; a <= K; ++a) {
            Wn[a] = W1(a, b);
            S[a] = Wn[a];
            Sprev[a] = CMatrix::Zero(nb, nb);
        }
        int n = 1;
        std::vector<double> norms{test_norm(Wn[K])};
        while (true) {
            if (main) {
                // L E_n on the probe section, projected on the Galerkin space, against i W_{n+1}
                std::vector<CMatrix> SX(n1), WX(n1);
                for (int a = 0; a <= K; ++a) SX[a] = S[a] * Xc, WX[a] = Wn[a] * Xc;
                std::vector<CMatrix> EX;
                for (int a = lo; a <= K; ++a) EX.push_back(apply_Iphi(ph, a, 0, X) + correction(0, a, SX));
                CMatrix LE = HK * EX.back();
                for (std::size_t k = 0; k < EX.size(); ++k) LE += -kI * fdw[k] * EX[k];
                const CMatrix LEc = B.adjoint() * LE;
                const CMatrix Wnext = step(0, WX, K)[K];
                F.le_norms.push_back(spectral_norm(LEc));
                F.le_predicted.push_back(spectral_norm(Wnext));
                F.le_mismatch.push_back(spectral_norm(LEc - kI * Wnext));
            }
            if (n >= opt.picard_cap || norms.back() <= opt.picard_tol) break;
            Wn = step(b, Wn, -1);
            ++n;
            for (int a = b; a <= K; ++a) {
                Sprev[a] = S[a];
                S[a] += Wn[a];
            }
            norms.push_back(test_norm(Wn[K]));
            if (main && n == 3 && !(norms[2] < norms[0]))
                throw HyperbolicError("picard_series: no decay by order 3 (T0 too large or W1 mis-assembled)");
        }
        if (main) {
            F.N = n;
            F.order_norms = norms;
            // one order beyond the truncation, for the envelope fit
            if (norms.back() > opt.picard_tol) F.order_norms.push_back(test_norm(step(0, Wn, K)[K]));
            // telescoping at (T0, 0): S_N against -i L I - i int L I S_{N-1}, both sides independent
            CMatrix rhs = B.adjoint() * L_Iphi_differenced(sys, ph, K, 0) * B;
            const auto& w = wts[K];
            if (n > 1)
                for (int th = 0; th <= K; ++th)
                    if (w[th] != 0.0)
                        rhs.noalias() += w[th] * (B.adjoint() * (L_Iphi_differenced(sys, ph, K, th) * (B * Sprev[th])));
            rhs *= -kI;
            F.telescoping_abs = test_norm(S[K] - rhs);
            F.telescoping_residual = F.telescoping_abs / std::max(test_norm(S[K]), 1.0);
        }
        const CMatrix Bh = B.adjoint();
        for (int a = b + 1; a <= K; ++a) {
            CMatrix E = CMatrix::Zero(M, M);
            for (std::size_t j = 0; j < ph.m; ++j)
                E.block(j * ph.grid.N, j * ph.grid.N, ph.grid.N, ph.grid.N) = ph.block(a, b, j);
            E.noalias() += correction(b, a, S) * Bh;
            F.E[ph.index(a, b)] = std::move(E);
        }
        // diagonal: exactly the identity
        F.E[ph.index(b, b)] = CMatrix::Identity(M, M);
    }
    return F;
}

Trajectory solve_cauchy(const FundamentalSolution& E, const CVector& G, const Forcing& F)
{
    const int K = E.time.K;
    const std::size_t M = E.m * E.grid.N;
    if (static_cast<std::size_t>(G.size()) != M) throw HyperbolicError("solve_cauchy: initial data has wrong size");
    std::vector<CVector> Fs;
    if (F)
        for (int b = 0; b <= K; ++b) {
            Fs.push_back(F(E.time.at(b)));
            if (static_cast<std::size_t>(Fs.back().size()) != M) throw HyperbolicError("solve_cauchy: forcing size");
        }
    Trajectory tr;
    for (int k = 0; k <= K; ++k) {
        CVector W = E.at(k, 0) * G;
        if (F) {
            const auto w = simpson_weights(k, E.time.h());
            for (int b = 0; b <= k; ++b)
                if (w[b] != 0.0) W += kI * w[b] * (E.at(k, b) * Fs[b]);
        }
        tr.t.push_back(E.time.at(k));
        tr.W.push_back(std::move(W));
    }
    return tr;
}

Trajectory reference_solve(const HyperbolicSystem& sys, const QuantGrid& g, const TimeGrid& tg, const CVector& G,
                           const Forcing& F, ReferenceOptions ro)
{
    sys.validate();
    if (ro.substeps < 1) throw HyperbolicError("reference_solve: substeps must be positive");
    const bool inv = sys.time_invariant();
    const double dt = tg.h() / ro.substeps;
    CMatrix Hc;
    if (inv) Hc = -kI * generator(sys, g, 0.0);
    auto rhs = [&](double t, const CVector& W) -> CVector {
        CVector r = inv ? CVector(Hc * W) : CVector(-kI * (generator(sys, g, t) * W));
        if (F) r += kI * F(t);
        return r;
    };
    Trajectory tr;
    CVector W = G;
    tr.t.push_back(0.0);
    tr.W.push_back(W);
    for (int k = 0; k < tg.K; ++k) {
        for (int sstep = 0; sstep < ro.substeps; ++sstep) {
            const double t = tg.at(k) + sstep * dt;
            const CVector k1 = rhs(t, W);
            const CVector k2 = rhs(t + 0.5 * dt, W + 0.5 * dt * k1);
            const CVector k3 = rhs(t + 0.5 * dt, W + 0.5 * dt * k2);
            const CVector k4 = rhs(t + dt, W + dt * k3);
            CVector Wn = W + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if (Wn.norm() > 10.0 * std::max(W.norm(), 1e-300) || !Wn.allFinite())
                throw HyperbolicError("reference_solve: norm blow-up, time step above the stability bound");
            W = std::move(Wn);
        }
        tr.t.push_back(tg.at(k + 1));
        tr.W.push_back(W);
    }
    return tr;
}

double system_sobolev_norm(const CVector& W, const QuantGrid& g, std::size_t m, double r, double rho)
{
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const double n = sobolev_norm(GridFunction(g, W.segment(j * g.N, g.N)), r, rho);
        s += n * n;
    }
    return std::sqrt(s);
}

double relative_l2(const CVector& a, const CVector& b)
{
    const double d = b.norm();
    return d == 0.0 ? (a - b).norm() : (a - b).norm() / d;
}

FactorialFit fit_factorial(const std::vector<double>& norms, double T0, double floor)
{
    FactorialFit f;
    if (norms.empty() || !(norms[0] > 0.0)) return f;
    std::size_t n = 0;
    while (n < norms.size() && norms[n] > floor * norms[0]) ++n;
    f.used = n;
    if (n < 2) return f;
    std::vector<double> Cs;
    for (std::size_t k = 0; k + 1 < n; ++k) Cs.push_back(norms[k + 1] / norms[k] * static_cast<double>(k + 1) / T0);
    double lg = 0.0;
    for (double c : Cs) lg += std::log(c);
    f.C = std::exp(lg / static_cast<double>(Cs.size()));
    f.C_max = *std::max_element(Cs.begin(), Cs.end());
    for (double c : Cs) f.spread = std::max(f.spread, std::max(c / f.C, f.C / c));
    // log n_nu + log (nu - 1)! against nu
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const double x = static_cast<double>(k + 1), y = std::log(norms[k]) + std::lgamma(x);
        sx += x, sy += y, sxx += x * x, sxy += x * y;
    }
    const double nn = static_cast<double>(n);
    f.slope = (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
    return f;
}

double largest_certified_T0(const SystemPhases& ph)
{
    double best = 0.0;
    for (int k = 1; k <= ph.time.K; ++k) {
        for (std::size_t j = 0; j < ph.m; ++j) {
            const auto c = certify_regular(*ph.phi[ph.index(k, 0)][j], ph.grid.tensor(), 0);
            if (!c.in_P || !(c.tau < 0.25)) return best;
        }
        best = ph.time.at(k);
    }
    return best;
}

}  // namespace sgfio
