// SPDX-License-Identifier: Apache-2.0
// One PASS/FAIL line per acceptance criterion; exit status 1 if any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "sgfio/eikonal.hpp"
#include "sgfio/hyperbolic.hpp"
#include "sgfio/multiproduct.hpp"
#include "sgfio/quantize.hpp"

using namespace sgfio;
namespace fs = std::filesystem;

namespace {

int failures = 0;

struct Verdict {
    bool ok = true;
    std::ostringstream detail;

    void need(bool cond, const std::string& what)
    {
        if (!cond) {
            ok = false;
            detail << " [violated: " << what << "]";
        }
    }
};

void criterion(int id, const char* title, const std::function<void(Verdict&)>& body)
{
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(v);
    } catch (const std::exception& e) {
        v.ok = false;
        v.detail << " [exception: " << e.what() << "]";
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!v.ok) ++failures;
    std::printf("%s %2d %s:%s (%.1f s)\n", v.ok ? "PASS" : "FAIL", id, title, v.detail.str().c_str(), sec);
    std::fflush(stdout);
}

std::string sci(double v)
{
    char b[32];
    std::snprintf(b, sizeof b, "%.2e", v);
    return b;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

SgSymbol sym(const char* s, double m, double mu) { return SgSymbol::parse(s, {m, mu}); }

double grid_diff(const GridField& a, const GridField& b)
{
    double e = 0.0;
    for (std::size_t i = 0; i < a.nx(); ++i)
        for (std::size_t j = 0; j < a.nxi(); ++j) e = std::max(e, std::abs(a(i, j) - b(i, j)));
    return e;
}

double field_error(const GridField& f, const TensorGrid& g, const std::function<double(double, double)>& ref)
{
    double e = 0.0;
    for (std::size_t i = 0; i < g.x.n; ++i)
        for (std::size_t j = 0; j < g.xi.n; ++j) e = std::max(e, std::abs(f(i, j) - ref(g.x.at(i), g.xi.at(j))));
    return e;
}

const QuantGrid g256(256, 12.0);
const QuantGrid g128(128, 12.0);
const TensorGrid kSample{SampleGrid(4, 4, 65, 65)};
const TensorGrid kTarget{SampleGrid(4, 4, 33, 33)};
const TensorGrid kWide = kTarget.padded(16, 16);
const char* kAng = "ang(xi)";
const char* kPerturbed = "ang(xi) + 0.1*sin(x)*ang(xi)";

EikonalPtr eik(const char* a, double t, double s, const TensorGrid& g = kWide) { return solve_eikonal(sym(a, 0, 1), t, s, g); }

EikonalPtr eik_on(const QuantGrid& g, const char* a, double t, double s)
{
    return solve_eikonal(sym(a, 0, 1), t, s, padded_for_chain(g.tensor(), 0.05));
}

GridFunction gauss(const QuantGrid& g, double shift = 0.0)
{
    return GridFunction::sample(g, [&](double x) { return cplx(std::exp(-0.5 * (x - shift) * (x - shift)), 0.0); });
}

double rel(const CVector& a, const CVector& b) { return (a - b).norm() / b.norm(); }

GridFunction corpus(const QuantGrid& g, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> c(-4.0, 4.0), k(-6.0, 6.0), w(-1.0, 1.0);
    CVector v = CVector::Zero(static_cast<Eigen::Index>(g.N));
    for (int t = 0; t < 4; ++t) {
        const double xc = c(rng), kk = k(rng);
        const cplx amp(w(rng), w(rng));
        for (std::size_t i = 0; i < g.N; ++i) {
            const double d = g.x(i) - xc;
            v[static_cast<Eigen::Index>(i)] += amp * std::exp(-0.5 * d * d) * std::exp(cplx(0, kk * g.x(i)));
        }
    }
    return {g, v};
}

CVector sample(const QuantGrid& g, const std::function<double(double)>& f)
{
    CVector v(static_cast<Eigen::Index>(g.N));
    for (std::size_t i = 0; i < g.N; ++i) v[static_cast<Eigen::Index>(i)] = f(g.x(i));
    return v;
}

double gaussian(double x) { return std::exp(-x * x / 2.0); }

std::string slurp(const fs::path& p)
{
    std::ifstream f(p, std::ios::binary);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

}  // namespace

int main()
{
    criterion(1, "eikonal closed forms", [](Verdict& v) {
        struct Case {
            const char* a;
            Order o;
            std::function<double(int, int, double, double)> exact;  // (bx, bxi, x, xi) at t - s = 0.1
        };
        const double d = 0.1, e = std::exp(d);
        const Case cases[] = {
            {"xi", {0, 1},
             [d](int bx, int bxi, double x, double xi) { return bx ? xi : bxi ? x + d : x * xi + d * xi; }},
            {"x*xi", {1, 1},
             [e](int bx, int bxi, double x, double xi) { return bx ? xi * e : bxi ? x * e : x * xi * e; }},
            {"ang(xi)", {0, 1},
             [d](int bx, int bxi, double x, double xi) {
                 return bx ? xi : bxi ? x + d * xi / ang(xi) : x * xi + d * ang(xi);
             }},
        };
        EikonalOptions eo;
        eo.h = 1e-3;
        for (const Case& c : cases) {
            const auto t0 = std::chrono::steady_clock::now();
            const auto phi = solve_eikonal(SgSymbol::parse(c.a, c.o), d, 0.0, kSample, eo);
            const double sec = seconds_since(t0);
            double err = 0.0;
            for (auto [bx, bxi] : {std::pair{0, 0}, std::pair{1, 0}, std::pair{0, 1}})
                err = std::max(err, field_error(phi->field(bx, bxi), kSample, [&, bx = bx, bxi = bxi](double x, double xi) {
                                   return c.exact(bx, bxi, x, xi);
                               }));
            v.detail << " a=" << c.a << " err " << sci(err) << " in " << sci(sec) << " s;";
            v.need(err <= 1e-6, std::string(c.a) + " error <= 1e-6");
            v.need(sec < 30.0, std::string(c.a) + " runtime < 30 s");
        }
    });

    criterion(2, "seminorm linear in t - s, backward residual", [](Verdict& v) {
        const std::vector<double> levels{0.0125, 0.025, 0.05, 0.1};
        for (const char* a : {kAng, kPerturbed}) {
            const SgSymbol sa = sym(a, 0, 1);
            const auto phis = solve_eikonal_levels(sa, 0.0, levels, kSample);
            std::vector<double> tau;
            double sxy = 0.0, sxx = 0.0;
            for (std::size_t k = 0; k < levels.size(); ++k) {
                tau.push_back(j_seminorm(*phis[k], 0, kSample).jl);
                sxy += levels[k] * tau[k];
                sxx += levels[k] * levels[k];
            }
            const double c = sxy / sxx;
            double spread = 0.0;
            for (std::size_t k = 0; k < levels.size(); ++k) spread = std::max(spread, std::abs(tau[k] / (c * levels[k]) - 1.0));
            const double back = verify_backward(*phis.back(), sa);
            v.detail << " a=" << a << " c " << sci(c) << " spread " << sci(spread) << " backward " << sci(back) << ";";
            v.need(spread <= 0.2, std::string(a) + " spread <= 0.2");
            v.need(back <= 1e-4, std::string(a) + " backward residual <= 1e-4");
        }
    });

    criterion(3, "identity element of the multi-product", [](Verdict& v) {
        auto expr = ExprPhase::parse("x*xi + 0.02*sin(x)*ang(xi) + 0.01*x*cos(xi)");
        auto e = eik(kPerturbed, 0.04, 0.0);
        double worst = 0.0;
        for (PhasePtr phi : {PhasePtr(expr), PhasePtr(e)}) {
            const double tau = certify_regular(*phi, kTarget, 0).tau;
            const GridField ref = phi->sample(0, 0, kTarget);
            auto right = multiproduct(PhaseChain({phi, identity_phase()}, {tau, 0.0}), kTarget);
            auto left = multiproduct(PhaseChain({identity_phase(), phi}, {0.0, tau}), kTarget);
            worst = std::max({worst, grid_diff(right.phase->field(0, 0), ref), grid_diff(left.phase->field(0, 0), ref)});
        }
        v.detail << " sup difference " << sci(worst);
        v.need(worst <= 1e-8, "<= 1e-8");
    });

    criterion(4, "group law for the ang(xi) eikonal family", [](Verdict& v) {
        double worst = 0.0;
        for (auto [t, s, r] : {std::tuple{0.1, 0.05, 0.0}, std::tuple{0.1, 0.03, 0.0}, std::tuple{0.06, 0.04, 0.01}}) {
            PhaseChain c = PhaseChain::certified({eik(kAng, t, s), eik(kAng, s, r)}, kTarget);
            auto prod = multiproduct(c, kTarget);
            worst = std::max(worst, grid_diff(prod.phase->field(0, 0), eik(kAng, t, r)->sample(0, 0, kTarget)));
        }
        v.detail << " sup difference " << sci(worst);
        v.need(worst <= 1e-5, "<= 1e-5");
    });

    criterion(5, "critical point bounds, contraction, uniqueness", [](Verdict& v) {
        std::size_t nodes = 0, violations = 0;
        double worst_ratio_margin = -INFINITY, worst_restart = 0.0;
        CriticalOptions opt;
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (const char* a : {kAng, kPerturbed}) {
            const std::vector<PhaseChain> chains{
                PhaseChain::certified({eik(a, 0.1, 0.05), eik(a, 0.05, 0.0)}, kTarget),
                PhaseChain::certified({eik(a, 0.075, 0.05), eik(a, 0.05, 0.025), eik(a, 0.025, 0.0)}, kWide)};
            for (const PhaseChain& c : chains) {
                auto prod = multiproduct(c, kTarget, opt);
                nodes += prod.stats.nodes;
                violations += prod.stats.bound_violations;
                worst_ratio_margin = std::max(worst_ratio_margin, prod.stats.max_ratio - (3 * c.tau0() + 0.05));
                const std::size_t M = c.M();
                for (double x : {-3.5, 0.0, 2.25})
                    for (double xi : {-4.0, 0.5, 3.0}) {
                        const auto base = solve_critical(c, x, xi, opt);
                        std::vector<double> start(2 * M);
                        for (auto& s : start) s = u(rng);
                        double sy = 0.0, se = 0.0;
                        for (std::size_t q = 0; q < M; ++q) sy += std::abs(start[q]), se += std::abs(start[M + q]);
                        for (std::size_t q = 0; q < M; ++q) start[q] *= ang(x) / 3 / sy, start[M + q] *= ang(xi) / 3 / se;
                        const auto other = solve_critical(c, x, xi, opt, &start);
                        std::vector<double> dy(M + 1, 0.0), de(M + 1, 0.0);
                        for (std::size_t q = 1; q <= M; ++q) dy[q] = other.y[q] - base.y[q], de[q] = other.eta[q] - base.eta[q];
                        worst_restart = std::max(worst_restart, sigma_norm(dy, de, x, xi));
                    }
            }
        }
        v.detail << " " << nodes - violations << "/" << nodes << " nodes within bounds, ratio - (3 tau0 + 0.05) max "
                 << sci(worst_ratio_margin) << ", restart spread " << sci(worst_restart);
        v.need(violations == 0, "all nodes within bounds");
        v.need(worst_ratio_margin <= 0.0, "contraction ratio <= 3 tau0 + 0.05");
        v.need(worst_restart <= 10 * opt.tol, "restart within 10 tol");
    });

    criterion(6, "derivative relations and associativity", [](Verdict& v) {
        double dphi = 0.0, assoc = 0.0;
        for (const char* a : {kAng, kPerturbed}) {
            PhaseChain c = PhaseChain::certified({eik(a, 0.075, 0.05), eik(a, 0.05, 0.025), eik(a, 0.025, 0.0)}, kWide);
            auto prod = multiproduct(c, kTarget);
            auto rep = verify_structure(c, prod, kTarget);
            dphi = std::max({dphi, rep.dphi_x, rep.dphi_xi});
            v.need(rep.has_associativity, "associativity measured");
            assoc = std::max(assoc, rep.assoc);
        }
        v.detail << " derivative relation " << sci(dphi) << ", associativity " << sci(assoc);
        v.need(dphi <= 1e-5, "derivative relation <= 1e-5");
        v.need(assoc <= 1e-5, "associativity <= 1e-5");
    });

    criterion(7, "determinant bounds on 1000 random matrices", [](Verdict& v) {
        std::mt19937_64 rng(99);
        std::uniform_real_distribution<double> u(-1.0, 1.0), s(0.0, 1.0);
        int ok = 0;
        for (int k = 0; k < 1000; ++k) {
            Eigen::MatrixXd A(4, 4);
            for (int i = 0; i < 16; ++i) A.data()[i] = u(rng);
            A *= 0.7 * s(rng) / A.cwiseAbs().colwise().sum().maxCoeff();
            ok += det_bound_check(A, 0.7).ok ? 1 : 0;
        }
        v.detail << " " << ok << "/1000";
        v.need(ok == 1000, "all 1000");
    });

    criterion(8, "quantization identities", [](Verdict& v) {
        const auto one = sym("1", 0, 0);
        std::mt19937_64 rng(3);
        double id = 0.0, adj = 0.0, planch = 0.0;
        auto phi = ExprPhase::parse("x*xi + 0.05*sin(x)*ang(xi)");
        auto a = sym("ang(x)/ang(xi)", 1, -1);
        for (int k = 0; k < 5; ++k) {
            auto f = corpus(g256, rng), h = corpus(g256, rng);
            id = std::max(id, rel(apply_type1(one, *identity_phase(), f).u.v, f.v));
            const cplx lhs = h.v.dot(apply_type1(a, *phi, f).u.v), rhs = apply_type2(a, *phi, h).u.v.dot(f.v);
            adj = std::max(adj, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
            const double l2 = f.l2(), l2h = std::sqrt(g256.dxi() / (2 * M_PI)) * fourier(f).norm();
            planch = std::max(planch, std::abs(l2 - l2h) / l2);
        }
        const double tr = rel(apply_type1(one, *ExprPhase::parse("x*xi + 0.1*xi"), gauss(g256)).u.v, gauss(g256, -0.1).v);
        const double sob = std::abs(sobolev_norm(gauss(g256), 0, 0) - std::pow(M_PI, 0.25));
        v.detail << " identity " << sci(id) << ", translation " << sci(tr) << ", adjoint " << sci(adj) << ", Plancherel "
                 << sci(planch) << ", Gaussian norm " << sci(sob);
        v.need(id <= 1e-8, "identity <= 1e-8");
        v.need(tr <= 1e-6, "translation <= 1e-6");
        v.need(adj <= 1e-10, "adjoint <= 1e-10");
        v.need(planch <= 1e-10, "Plancherel <= 1e-10");
        v.need(sob <= 1e-6, "Gaussian Sobolev norm <= 1e-6");
    });

    criterion(9, "compressed inverse of I_phi", [](Verdict& v) {
        const BandSpace B128 = band_space(g128), B256 = band_space(g256);
        double triv = 0.0;
        for (PhasePtr p : {identity_phase(), PhasePtr(ExprPhase::parse("x*xi + 0.02*xi"))}) {
            const auto r = invert_Iphi(*p, g128, B128);
            triv = std::max({triv, r.residual, r.left_residual});
        }
        double eikr = 0.0, tau = 0.0;
        const std::pair<const QuantGrid*, PhasePtr> cases[] = {
            {&g128, eik_on(g128, kAng, 0.02, 0.0)},
            {&g256, solve_eikonal(sym(kPerturbed, 0, 1), 0.015, 0.0, g256.tensor())}};
        for (const auto& [g, p] : cases) {
            tau = std::max(tau, certify_regular(*p, g->tensor(), 0).tau);
            const auto r = invert_Iphi(*p, *g, g == &g128 ? B128 : B256);
            eikr = std::max({eikr, r.residual, r.left_residual});
        }
        v.detail << " identity/translation " << sci(triv) << ", eikonal " << sci(eikr) << " at tau <= " << sci(tau);
        v.need(tau <= 0.05, "eikonal cases have tau <= 0.05");
        v.need(triv <= 1e-4, "identity/translation <= 1e-4");
        v.need(eikr <= 1e-3, "eikonal <= 1e-3");
    });

    criterion(10, "extracted composition symbol", [](Verdict& v) {
        const auto id = compose_extract_symbol(identity_phase(), identity_phase(), g128);
        const auto tr =
            compose_extract_symbol(ExprPhase::parse("x*xi + 0.01*xi"), ExprPhase::parse("x*xi + 0.015*xi"), g128);
        double sup = 0.0, dq = 0.0;
        for (const char* a : {kAng, kPerturbed}) {
            const auto c = compose_extract_symbol(eik_on(g128, a, 0.01, 0.005), eik_on(g128, a, 0.005, 0.0), g128);
            sup = std::max(sup, c.p.sup_abs);
            dq = std::max({dq, c.p.dq_x, c.p.dq_xi});
        }
        const double dev = std::max(id.p.sup_dev_one, tr.p.sup_dev_one);
        v.detail << " |p - 1| trivial cases " << sci(dev) << ", eikonal sup|p| " << sci(sup) << ", difference quotients "
                 << sci(dq);
        v.need(dev <= 1e-3, "trivial cases within 1e-3 of 1");
        v.need(sup <= 10.0, "sup |p| <= 10");
        v.need(dq <= 10.0, "weighted difference quotients <= 10");
    });

    criterion(11, "chain factorization and seminorm product", [](Verdict& v) {
        SubspaceOptions so;
        so.solve_frac = 0.9;
        so.freq_max = 5.0;
        const BandSpace B = band_space(g128, so);
        auto factor = [](const char* a, double m, double mu, PhasePtr p) { return ChainFactor{sym(a, m, mu), p, m, mu}; };
        std::vector<std::vector<ChainFactor>> chains;
        {
            std::vector<ChainFactor> c;
            for (int k = 0; k < 3; ++k) {
                const double s = 0.006 * (2 - k);
                c.push_back(factor("1/ang(xi)", 0, -1, eik_on(g128, kAng, s + 0.006, s)));
            }
            chains.push_back(c);
        }
        chains.push_back({factor("1 + 0.1/ang(x)", 0, 0, eik_on(g128, kPerturbed, 0.004, 0.0)),
                          factor("ang(xi)", 0, 1, eik_on(g128, kAng, 0.005, 0.0)),
                          factor("1 + 0.2*exp(-x^2)", 0, 0, ExprPhase::parse("x*xi + 0.01*xi"))});
        chains.push_back({factor("ang(x)", 1, 0, eik_on(g128, kPerturbed, 0.006, 0.003)),
                          factor("1", 0, 0, eik_on(g128, kPerturbed, 0.003, 0.0)),
                          factor("1/ang(x)", -1, 0, ExprPhase::parse("x*xi + 0.01*xi"))});
        double worst = 0.0, C = 0.0;
        for (const auto& c : chains) {
            const auto r = compose_chain(c, g128, B);
            worst = std::max(worst, r.factorization_residual);
            v.need(std::isfinite(r.C), "finite seminorm ratio");
            C = std::max(C, r.C);
        }
        v.detail << " " << chains.size() << " chains of 3, factorization " << sci(worst) << ", fitted C " << sci(C);
        v.need(worst <= 1e-2, "factorization <= 1e-2");
        v.need(C > 0.0 && C <= 10.0, "one C <= 10 bounds the corpus");
    });

    criterion(12, "hyperbolic systems", [](Verdict& v) {
        const auto t0 = std::chrono::steady_clock::now();
        HyperbolicOptions o;
        auto scalar = [](const char* lambda, Order lo, const char* r) {
            HyperbolicSystem s;
            s.lambda.push_back(SgSymbol::parse(lambda, lo));
            s.R.assign(1, std::vector<std::optional<SgSymbol>>(1));
            if (*r) s.R[0][0] = SgSymbol::parse(r, {-1, 0});
            return s;
        };
        const QuantGrid& g = o.grid;
        const double T0 = o.time.T0;
        const int K = o.time.K;
        bool identity = true;
        auto run = [&](const HyperbolicSystem& s) {
            const auto ph = build_phases(s, o);
            auto E = picard_series(s, ph, o);
            const auto M = static_cast<Eigen::Index>(s.m() * g.N);
            for (int k = 0; k <= (ph.index.invariant() ? 0 : K); ++k) identity = identity && E.at(k, k) == CMatrix::Identity(M, M);
            return E;
        };

        const auto Et = run(scalar("1.5*xi", {0, 1}, ""));
        const double transport =
            relative_l2(solve_cauchy(Et, sample(g, gaussian)).W.back(), sample(g, [T0](double x) { return gaussian(x - 1.5 * T0); }));
        const auto Ed = run(scalar("x*xi", {1, 1}, ""));
        const double dilation = relative_l2(solve_cauchy(Ed, sample(g, gaussian)).W.back(),
                                            sample(g, [T0](double x) { return gaussian(x * std::exp(-T0)); }));

        const auto sl = scalar("1.5*xi", {0, 1}, "0.5/ang(x)");
        const auto El = run(sl);
        const auto fit = fit_factorial(El.order_norms, T0);
        const double slope_limit = std::log(fit.C_max * T0);

        HyperbolicSystem c2;
        c2.lambda = {sym("ang(xi)", 0, 1), sym("-ang(xi)", 0, 1)};
        c2.R.assign(2, std::vector<std::optional<SgSymbol>>(2));
        c2.R[0][1] = c2.R[1][0] = sym("0.5/ang(x)", -1, 0);
        const auto Ec = run(c2);
        CVector G(static_cast<Eigen::Index>(2 * g.N));
        G << sample(g, gaussian), sample(g, [](double x) { return x * gaussian(x); });
        const double coupled = relative_l2(solve_cauchy(Ec, G).W.back(), reference_solve(c2, g, o.time, G).W.back());
        const double tele = std::max({Et.telescoping_residual, El.telescoping_residual, Ec.telescoping_residual});
        const double sec = seconds_since(t0);

        v.detail << " identity " << (identity ? "exact" : "broken") << ", factorial fit over " << fit.used
                 << " orders: spread " << sci(fit.spread) << ", slope " << sci(fit.slope) << " vs log(C T0) "
                 << sci(slope_limit) << ", telescoping " << sci(tele) << ", transport " << sci(transport) << ", dilation "
                 << sci(dilation) << ", coupled vs reference " << sci(coupled) << ", suite " << sci(sec) << " s";
        v.need(identity, "E(s, s) = I bit-exact");
        v.need(fit.used >= 4 && fit.spread <= 3.0, "factorial envelope fits");
        v.need(fit.slope <= slope_limit, "slope <= log(C T0)");
        v.need(tele <= 1e-3, "telescoping <= 1e-3");
        v.need(transport <= 1e-3, "transport <= 1e-3");
        v.need(dilation <= 1e-2, "dilation <= 1e-2");
        v.need(coupled <= 1e-2, "coupled system <= 1e-2");
        v.need(sec < 300.0, "suite < 5 min");
    });

    criterion(13, "first-order expansion decays under frequency rescaling", [](Verdict& v) {
        auto phi = solve_eikonal(sym(kPerturbed, 0, 1), 0.05, 0.0, g256.tensor());
        auto r = first_order_expansion_check(sym("ang(xi)", 0, 1), sym("1", 0, 0), *phi, g256, gauss(g256));
        v.detail << " slope " << sci(r.slope);
        v.need(r.slope <= -0.8, "slope <= -0.8");
    });

    criterion(14, "serial reruns are byte-identical", [](Verdict& v) {
        const fs::path root = fs::temp_directory_path() / "sgfio_acceptance_determinism";
        fs::remove_all(root);
        for (const char* cfg : {"multiprod_group_law", "hyperbolic_scalar_lower_order", "compose_chain"}) {
            std::string reports[2];
            for (int k = 0; k < 2; ++k) {
                const fs::path out = root / (std::string(cfg) + "_" + std::to_string(k));
                const std::string cmd = std::string("\"") + SGFIO_BINARY + "\" " + (std::string(cfg).substr(0, 3) == "mul"
                                                                                      ? "multiprod"
                                                                                  : cfg[0] == 'h' ? "hyperbolic"
                                                                                                  : "compose") +
                                        " --serial --config \"" + SGFIO_CONFIGS + "/" + cfg + ".json\" --out \"" +
                                        out.string() + "\" 2>/dev/null";
                const int rc = std::system(cmd.c_str());
                v.need(rc == 0, std::string(cfg) + " exits 0");
                reports[k] = slurp(out / "report.json");
            }
            const bool same = !reports[0].empty() && reports[0] == reports[1];
            v.detail << " " << cfg << (same ? " identical" : " DIFFERENT") << " (" << reports[0].size() << " bytes);";
            v.need(same, std::string(cfg) + " identical");
        }
    });

    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
