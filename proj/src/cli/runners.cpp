// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <random>

#include "internal.hpp"
#include "sgfio/hyperbolic.hpp"
#include "sgfio/multiproduct.hpp"

namespace sgfio::cli {

namespace fs = std::filesystem;

namespace {

#define SGFIO_COMMON "subcommand", "seed", "output", "serial", "grid", "tolerances", "eikonal"

json certificate_json(const Certificate& c)
{
    json j = json::object();
    j["class"] = c.cls;
    j["in_P"] = c.in_P;
    j["r"] = c.r;
    j["tau"] = c.tau;
    j["tau_sup"] = c.tau_sup;
    j["tau_ell"] = c.tau_ell;
    j["ell"] = c.ell;
    j["band_lo"] = c.band_lo;
    j["band_hi"] = c.band_hi;
    return j;
}

double field_error(const GridField& f, const TensorGrid& g, const std::function<double(double, double)>& ref)
{
    double e = 0.0;
    for (std::size_t i = 0; i < g.x.n; ++i)
        for (std::size_t j = 0; j < g.xi.n; ++j) e = std::max(e, std::abs(f(i, j) - ref(g.x.at(i), g.xi.at(j))));
    return e;
}

SubspaceOptions subspace_options(const Node& root)
{
    const Node n = root.child("subspace");
    n.allow({"sigma", "center_step", "center_margin", "freq_step", "freq_max", "rank_tol", "inset", "solve_frac"});
    SubspaceOptions o;
    o.sigma = n.positive("sigma", o.sigma);
    o.center_step = n.positive("center_step", o.center_step);
    o.center_margin = n.positive("center_margin", o.center_margin);
    o.freq_step = n.positive("freq_step", o.freq_step);
    o.freq_max = n.positive("freq_max", o.freq_max);
    o.rank_tol = n.positive("rank_tol", o.rank_tol);
    o.inset = n.number("inset", o.inset);
    o.solve_frac = n.positive("solve_frac", o.solve_frac);
    if (o.solve_frac > 1.0) throw ConfigError(n.at("solve_frac"), "must not exceed 1");
    return o;
}

ProbeOptions probe_options(const Node& root)
{
    const Node n = root.child("probe");
    n.allow({"x_frac", "xi_frac", "taper_frac", "tau_max"});
    ProbeOptions o;
    o.x_frac = n.positive("x_frac", o.x_frac);
    o.xi_frac = n.positive("xi_frac", o.xi_frac);
    o.taper_frac = n.positive("taper_frac", o.taper_frac);
    o.tau_max = n.positive("tau_max", o.tau_max);
    return o;
}

TensorGrid quant_phase_grid(const Node& root, const QuantGrid& g)
{
    // eikonal phases on a quantization grid need room for critical points outside it
    const double pad = root.number("pad_tau", 0.05);
    if (pad < 0.0 || pad >= 0.25) throw ConfigError(root.at("pad_tau"), "must lie in [0, 1/4)");
    return pad > 0.0 ? padded_for_chain(g.tensor(), pad) : g.tensor();
}

}  // namespace

void run_eikonal(const Node& root, const fs::path& out, Report& r)
{
    root.allow({SGFIO_COMMON, "symbol", "time", "closed_form", "levels"});
    const SgSymbol a = symbol_spec(root, "symbol");
    const TensorGrid g(sample_grid(root));
    const Node time = root.child("time");
    time.allow({"t", "s"});
    const double s = time.number("s", 0.0), t = time.number("t", 0.1);
    if (t < s) throw ConfigError(time.at("t"), "must not be below s");
    const EikonalOptions eo = eikonal_options(root);
    const Node tol = root.child("tolerances");
    tol.allow({"closed_form", "backward", "forward", "fd_delta", "seminorm_linearity"});
    const double delta = tol.positive("fd_delta", 1e-3);
    const auto levels = root.numbers("levels", std::vector<double>{0.0125, 0.025, 0.05, 0.1});
    for (double d : levels)
        if (!(d > 0.0)) throw ConfigError(root.at("levels"), "level offsets t - s must be positive");
    std::optional<SgSymbol> closed;
    if (root.has("closed_form")) closed = expression_at(root, "closed_form", {"x", "xi", "t", "s"});

    const auto phi = solve_eikonal(a, t, s, g, eo);
    const auto& d = phi->diagnostics();
    r.measured["t"] = t;
    r.measured["s"] = s;
    r.measured["shooting"] = {{"max_residual", d.max_residual},
                              {"max_newton", d.max_newton},
                              {"total_newton", d.total_newton},
                              {"rk_steps", d.rk_steps}};
    r.measured["certificate"] = certificate_json(certify_regular(*phi, g, 0));

    if (t - s > delta) {
        const double bw = verify_backward(*phi, a, eo, delta), fw = verify_forward(*phi, a, eo, delta);
        r.measured["backward_residual"] = bw;
        r.measured["forward_residual"] = fw;
        r.check("backward_residual", bw, "<=", tol.positive("backward", 1e-4));
        r.check("forward_residual", fw, "<=", tol.positive("forward", 1e-4));
    }

    std::vector<std::string> header{"x", "xi", "phi", "phi_x", "phi_xi"};
    if (closed) {
        const double ct = tol.positive("closed_form", 1e-6);
        auto at = [&](int bx, int bxi) {
            return [&, bx, bxi](double x, double xi) { return closed->derivative({bx, bxi, 0, 0}, {t, s, x, xi}); };
        };
        const double e0 = field_error(phi->field(0, 0), g, at(0, 0)), e1 = field_error(phi->field(1, 0), g, at(1, 0)),
                     e2 = field_error(phi->field(0, 1), g, at(0, 1));
        r.measured["closed_form_error"] = {{"phi", e0}, {"phi_x", e1}, {"phi_xi", e2}};
        r.check("closed_form_phi", e0, "<=", ct);
        r.check("closed_form_phi_x", e1, "<=", ct);
        r.check("closed_form_phi_xi", e2, "<=", ct);
        header.push_back("closed_form");
    }
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < g.x.n; ++i)
        for (std::size_t j = 0; j < g.xi.n; ++j) {
            const double x = g.x.at(i), xi = g.xi.at(j);
            std::vector<double> row{x, xi, phi->field(0, 0)(i, j), phi->field(1, 0)(i, j), phi->field(0, 1)(i, j)};
            if (closed) row.push_back((*closed)({t, s, x, xi}));
            rows.push_back(std::move(row));
        }
    write_csv(out / "phase.csv", header, rows);
    r.artifacts.push_back("phase.csv");
    write_svg_heatmap(out / "j.svg", "J = phi - x xi", g,
                      [&](std::size_t i, std::size_t j) { return phi->field(0, 0)(i, j) - g.x.at(i) * g.xi.at(j); });
    r.artifacts.push_back("j.svg");

    // ||J||_0 against t - s: linear through the origin
    if (!levels.empty()) {
        std::vector<double> times;
        for (double dl : levels) times.push_back(s + dl);
        const auto phis = solve_eikonal_levels(a, s, times, g, eo);
        std::vector<double> taus;
        double sxy = 0.0, sxx = 0.0;
        for (std::size_t k = 0; k < levels.size(); ++k) {
            taus.push_back(j_seminorm(*phis[k], 0, g).jl);
            sxy += levels[k] * taus[k];
            sxx += levels[k] * levels[k];
        }
        const double c = sxy / sxx;
        double spread = 0.0;
        std::vector<std::vector<double>> lr;
        for (std::size_t k = 0; k < levels.size(); ++k) {
            spread = std::max(spread, std::abs(taus[k] / (c * levels[k]) - 1.0));
            lr.push_back({levels[k], taus[k], c * levels[k]});
        }
        r.measured["seminorm_levels"] = {{"t_minus_s", levels}, {"tau", taus}, {"fitted_c", c}, {"spread", spread}};
        r.check("seminorm_linear_in_time", spread, "<=", tol.positive("seminorm_linearity", 0.2));
        write_csv(out / "j_levels.csv", {"t_minus_s", "tau", "fit"}, lr);
        r.artifacts.push_back("j_levels.csv");
        write_svg_lines(out / "j_levels.svg", "||J||_0 against t - s", "t - s",
                        {{"measured", levels, taus}, {"c (t - s)", levels, [&] {
                              std::vector<double> v;
                              for (double dl : levels) v.push_back(c * dl);
                              return v;
                          }()}});
        r.artifacts.push_back("j_levels.svg");
    }
}

void run_verify(const Node& root, const fs::path& out, Report& r)
{
    root.allow({SGFIO_COMMON, "phase", "ell", "band", "symbol", "symbol_check"});
    const SampleGrid sg = sample_grid(root);
    const TensorGrid g(sg);
    const EikonalOptions eo = eikonal_options(root);
    const Node tol = root.child("tolerances");
    tol.allow({"oracle"});
    const int ell = root.integer("ell", 0, 0);
    const Node bn = root.child("band");
    bn.allow({"annulus", "lo", "hi"});
    BandOptions band;
    band.annulus = bn.positive("annulus", band.annulus);
    band.lo = bn.positive("lo", band.lo);
    band.hi = bn.positive("hi", band.hi);

    if (!root.has("phase") && !root.has("symbol")) throw ConfigError("phase", "give a phase, a symbol, or both");
    if (root.has("phase")) {
        const PhasePtr phi = phase_spec(root.value("phase"), root.at("phase"), g, eo);
        const Certificate c = certify_regular(*phi, g, ell, band);
        const JSeminorms js = j_seminorm(*phi, ell, g);
        r.measured["certificate"] = certificate_json(c);
        r.measured["j_seminorms"] = {{"j2l", js.j2l}, {"jl", js.jl}, {"first", js.first}, {"sup_form", js.sup_form}};
        r.check_true("phase_in_P", c.in_P);
        const GridField v = phi->sample(0, 0, g);
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < g.x.n; ++i)
            for (std::size_t j = 0; j < g.xi.n; ++j)
                rows.push_back({g.x.at(i), g.xi.at(j), v(i, j), v(i, j) - g.x.at(i) * g.xi.at(j)});
        write_csv(out / "phase.csv", {"x", "xi", "phi", "J"}, rows);
        r.artifacts.push_back("phase.csv");
        write_svg_heatmap(out / "j.svg", "J = phi - x xi", g,
                          [&](std::size_t i, std::size_t j) { return v(i, j) - g.x.at(i) * g.xi.at(j); });
        r.artifacts.push_back("j.svg");
    }
    if (root.has("symbol")) {
        const SgSymbol a = symbol_spec(root, "symbol");
        const Node sc = root.child("symbol_check");
        sc.allow({"l", "bound", "elliptic_R"});
        const int l = sc.integer("l", 2, 0);
        const Order o = a.order();
        const double sn = seminorm(a, l, o.m, o.mu, sg);
        const double dev = a.self_test(sg);
        r.measured["symbol"] = {{"seminorm", sn}, {"l", l}, {"m", o.m}, {"mu", o.mu}, {"oracle_deviation", dev}};
        r.check("symbol_oracle_vs_differences", dev, "<=", tol.positive("oracle", 1e-6));
        if (sc.has("bound")) {
            const OrderReport rep = check_order(a, o.m, o.mu, l, sg, sc.positive("bound"));
            r.measured["symbol"]["worst"] = {{"alpha", rep.worst_alpha}, {"beta", rep.worst_beta},
                                             {"x", rep.worst_x},          {"xi", rep.worst_xi}};
            r.check("symbol_seminorm_bound", rep.value, "<=", rep.bound);
        }
        if (sc.has("elliptic_R")) {
            const EllipticReport er = check_elliptic(a, o.m, o.mu, sc.positive("elliptic_R"), sg);
            r.measured["symbol"]["elliptic"] = {
                {"constant", er.constant}, {"points", er.points_tested}, {"worst_x", er.worst_x}, {"worst_xi", er.worst_xi}};
            r.check_true("symbol_elliptic", er.ok);
        }
    }
}

void run_multiprod(const Node& root, const fs::path& out, Report& r)
{
    root.allow({SGFIO_COMMON, "phases", "pad", "expect", "restarts", "det_sweep", "critical"});
    const TensorGrid target(sample_grid(root, SampleGrid(4, 4, 33, 33)));
    const int pad = root.integer("pad", 16, 0);
    const TensorGrid wide = target.padded(static_cast<std::size_t>(pad), static_cast<std::size_t>(pad));
    const EikonalOptions eo = eikonal_options(root);
    const Node tol = root.child("tolerances");
    tol.allow({"structure", "associativity", "expect", "ratio_slack", "restart_factor"});
    const Node cn = root.child("critical");
    cn.allow({"tol", "max_iter"});
    CriticalOptions co;
    co.tol = cn.positive("tol", co.tol);
    co.max_iter = cn.integer("max_iter", co.max_iter, 1);

    std::vector<PhasePtr> phases;
    for (const Node& p : root.list("phases", 2)) phases.push_back(phase_spec(p.raw(), p.path(), wide, eo));
    const PhaseChain chain = PhaseChain::certified(phases, wide);
    const TensorGrid need = padded_for_chain(target, chain.tau0());
    if (need.x.n > wide.x.n || need.xi.n > wide.xi.n)
        throw ConfigError(root.at("pad"), "critical points leave the padded grid; need at least " +
                                              std::to_string((need.x.n - target.x.n) / 2) + " nodes");
    const Multiproduct prod = multiproduct(chain, target, co);
    const StructureReport rep = verify_structure(chain, prod, target);
    const auto& st = prod.stats;

    r.measured["M"] = chain.M();
    r.measured["taus"] = chain.taus();
    r.measured["tau0"] = chain.tau0();
    r.measured["solver"] = {{"max_iterations", st.max_iterations}, {"max_residual", st.max_residual},
                            {"max_ratio", st.max_ratio},           {"nodes", st.nodes},
                            {"bound_violations", st.bound_violations}};
    r.measured["bound_ratios"] = {{"y", st.worst_y_ratio},
                                  {"eta", st.worst_eta_ratio},
                                  {"z", st.worst_z_ratio},
                                  {"zeta", st.worst_zeta_ratio}};
    r.measured["structure"] = {{"dphi_x", rep.dphi_x}, {"dphi_xi", rep.dphi_xi}, {"c_Y", rep.c_Y},
                               {"c_N", rep.c_N},       {"k", rep.k}};
    r.measured["certificate"] = certificate_json(rep.certificate);

    r.check("bound_violations", static_cast<double>(st.bound_violations), "<=", 0.0);
    r.check("contraction_ratio", st.max_ratio, "<=", 3.0 * chain.tau0() + tol.positive("ratio_slack", 0.05));
    const double stol = tol.positive("structure", 1e-5);
    r.check("derivative_relation_x", rep.dphi_x, "<=", stol);
    r.check("derivative_relation_xi", rep.dphi_xi, "<=", stol);
    if (rep.has_associativity) {
        r.measured["associativity"] = {{"left", rep.assoc_left}, {"right", rep.assoc_right}, {"difference", rep.assoc}};
        r.check("associativity", rep.assoc, "<=", tol.positive("associativity", 1e-5));
    }

    // uniqueness: random starting points in Sigma land on the same fixed point
    const int restarts = root.integer("restarts", 9, 0);
    if (restarts > 0) {
        std::mt19937_64 rng(static_cast<unsigned long long>(root.integer("seed", 1, 0)));
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        std::uniform_int_distribution<std::size_t> ix(0, target.x.n - 1), ixi(0, target.xi.n - 1);
        const std::size_t M = chain.M();
        double worst = 0.0;
        for (int k = 0; k < restarts; ++k) {
            const double x = target.x.at(ix(rng)), xi = target.xi.at(ixi(rng));
            const CriticalPoint base = solve_critical(chain, x, xi, co);
            std::vector<double> start(2 * M);
            for (auto& v : start) v = u(rng);
            double sy = 0.0, se = 0.0;
            for (std::size_t q = 0; q < M; ++q) sy += std::abs(start[q]), se += std::abs(start[M + q]);
            for (std::size_t q = 0; q < M; ++q) {
                start[q] *= ang(x) / 3.0 / sy;
                start[M + q] *= ang(xi) / 3.0 / se;
            }
            const CriticalPoint other = solve_critical(chain, x, xi, co, &start);
            std::vector<double> dy(M + 1, 0.0), de(M + 1, 0.0);
            for (std::size_t q = 1; q <= M; ++q) dy[q] = other.y[q] - base.y[q], de[q] = other.eta[q] - base.eta[q];
            worst = std::max(worst, sigma_norm(dy, de, x, xi));
        }
        r.measured["restart_max_difference"] = worst;
        r.check("unique_under_restart", worst, "<=", tol.positive("restart_factor", 10.0) * co.tol);
    }

    std::optional<GridField> expect;
    if (root.has("expect")) {
        const PhasePtr e = phase_spec(root.value("expect"), root.at("expect"), wide, eo);
        expect = e->sample(0, 0, target);
        const double err = field_error(prod.phase->field(0, 0), target,
                                       [&](double x, double xi) { return e->derivative(0, 0, x, xi); });
        r.measured["expect_error"] = err;
        r.check("matches_expected_phase", err, "<=", tol.positive("expect", 1e-5));
    }

    if (root.has("det_sweep")) {
        const Node ds = root.child("det_sweep");
        ds.allow({"count", "norm", "size"});
        const int count = ds.integer("count", 1000, 1), size = ds.integer("size", 4, 1);
        const double norm = ds.positive("norm", 0.7);
        if (norm >= 1.0) throw ConfigError(ds.at("norm"), "must be below 1");
        std::mt19937_64 rng(static_cast<unsigned long long>(root.integer("seed", 1, 0)) + 7);
        std::uniform_real_distribution<double> u(-1.0, 1.0), scale(0.0, 1.0);
        int ok = 0;
        double worst_lower = INFINITY, worst_upper = INFINITY;
        for (int k = 0; k < count; ++k) {
            Eigen::MatrixXd A(size, size);
            for (int i = 0; i < size; ++i)
                for (int j = 0; j < size; ++j) A(i, j) = u(rng);
            const double cs = A.cwiseAbs().colwise().sum().maxCoeff();
            A *= norm * scale(rng) / cs;
            const DetCheck dc = det_bound_check(A, norm);
            ok += dc.ok ? 1 : 0;
            worst_lower = std::min(worst_lower, dc.det - dc.lower);
            worst_upper = std::min(worst_upper, dc.upper - dc.det);
        }
        r.measured["det_sweep"] = {{"count", count}, {"passed", ok}, {"min_margin_lower", worst_lower},
                                   {"min_margin_upper", worst_upper}};
        r.check("determinant_bounds", static_cast<double>(ok), ">=", static_cast<double>(count));
    }

    std::vector<std::vector<double>> rows;
    const GridField& v = prod.phase->field(0, 0);
    for (std::size_t i = 0; i < target.x.n; ++i)
        for (std::size_t j = 0; j < target.xi.n; ++j) {
            std::vector<double> row{target.x.at(i), target.xi.at(j), v(i, j)};
            for (std::size_t q = 0; q < prod.Y.size(); ++q) row.push_back(prod.Y[q](i, j));
            for (std::size_t q = 0; q < prod.N.size(); ++q) row.push_back(prod.N[q](i, j));
            if (expect) row.push_back((*expect)(i, j));
            rows.push_back(std::move(row));
        }
    std::vector<std::string> header{"x", "xi", "phi"};
    for (std::size_t q = 1; q <= prod.Y.size(); ++q) header.push_back("Y" + std::to_string(q));
    for (std::size_t q = 1; q <= prod.N.size(); ++q) header.push_back("N" + std::to_string(q));
    if (expect) header.push_back("expected");
    write_csv(out / "product.csv", header, rows);
    r.artifacts.push_back("product.csv");
    write_svg_heatmap(out / "j.svg", "J of the multi-product", target,
                      [&](std::size_t i, std::size_t j) { return v(i, j) - target.x.at(i) * target.xi.at(j); });
    r.artifacts.push_back("j.svg");
}

void run_compose(const Node& root, const fs::path& out, Report& r)
{
    root.allow({SGFIO_COMMON, "phases", "factors", "probe", "pad_tau", "subspace"});
    const QuantGrid g = quant_grid(root, 128);
    const TensorGrid pg = quant_phase_grid(root, g);
    const EikonalOptions eo = eikonal_options(root);
    const ProbeOptions po = probe_options(root);
    const Node tol = root.child("tolerances");
    tol.allow({"sup_dev_one", "sup_abs", "difference_quotient", "factorization"});
    if (!root.has("phases") && !root.has("factors")) throw ConfigError("phases", "give two phases, or factors");

    if (root.has("phases")) {
        const auto ps = root.list("phases", 2);
        if (ps.size() != 2) throw ConfigError(root.at("phases"), "exactly two phases");
        const PhasePtr p1 = phase_spec(ps[0].raw(), ps[0].path(), pg, eo), p2 = phase_spec(ps[1].raw(), ps[1].path(), pg, eo);
        const Composition c = compose_extract_symbol(p1, p2, g, po);
        const ProbedSymbol& p = c.p;
        r.measured["pair"] = {{"tau1", c.tau1}, {"tau2", c.tau2}, {"sup_abs", p.sup_abs},
                              {"sup_dev_one", p.sup_dev_one}, {"dq_x", p.dq_x}, {"dq_xi", p.dq_xi}};
        if (tol.has("sup_dev_one")) r.check("symbol_equals_one", p.sup_dev_one, "<=", tol.positive("sup_dev_one"));
        r.check("symbol_bounded", p.sup_abs, "<=", tol.positive("sup_abs", 10.0));
        const double dq = tol.positive("difference_quotient", 10.0);
        r.check("difference_quotient_x", p.dq_x, "<=", dq);
        r.check("difference_quotient_xi", p.dq_xi, "<=", dq);
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < p.grid.x.n; ++i)
            for (std::size_t j = 0; j < p.grid.xi.n; ++j) {
                const cplx z = p.p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                rows.push_back({p.grid.x.at(i), p.grid.xi.at(j), z.real(), z.imag(), std::abs(z),
                                c.phi->derivative(0, 0, p.grid.x.at(i), p.grid.xi.at(j))});
            }
        write_csv(out / "symbol.csv", {"x", "xi", "re_p", "im_p", "abs_p", "phi"}, rows);
        r.artifacts.push_back("symbol.csv");
        write_svg_heatmap(out / "symbol.svg", "|p| - 1 on the probe grid", p.grid, [&](std::size_t i, std::size_t j) {
            return std::abs(p.p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) - 1.0;
        });
        r.artifacts.push_back("symbol.svg");
    }

    if (root.has("factors")) {
        std::vector<ChainFactor> ops;
        for (const Node& f : root.list("factors", 2)) {
            f.allow({"amplitude", "phase"});
            const SgSymbol a = symbol_spec(f, "amplitude");
            ops.push_back({a, phase_spec(f.value("phase"), f.at("phase"), pg, eo), a.order().m, a.order().mu});
        }
        const ChainComposition c = compose_chain(ops, g, band_space(g, subspace_options(root)), po);
        r.measured["chain"] = {{"M", ops.size()},
                               {"tau0", c.tau0},
                               {"factorization_residual", c.factorization_residual},
                               {"max_inverse_residual", c.max_inverse_residual},
                               {"symbol_seminorm", c.symbol_seminorm},
                               {"factor_seminorm_product", c.factor_seminorm_product},
                               {"C", c.C}};
        r.check("factorization_residual", c.factorization_residual, "<=", tol.positive("factorization", 1e-2));
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < c.a.grid.x.n; ++i)
            for (std::size_t j = 0; j < c.a.grid.xi.n; ++j) {
                const cplx z = c.a.p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                rows.push_back({c.a.grid.x.at(i), c.a.grid.xi.at(j), z.real(), z.imag(), std::abs(z)});
            }
        write_csv(out / "chain_symbol.csv", {"x", "xi", "re_a", "im_a", "abs_a"}, rows);
        r.artifacts.push_back("chain_symbol.csv");
    }
}

void run_invert(const Node& root, const fs::path& out, Report& r)
{
    root.allow({SGFIO_COMMON, "phase", "pad_tau", "subspace"});
    const QuantGrid g = quant_grid(root, 256);
    const TensorGrid pg = quant_phase_grid(root, g);
    const EikonalOptions eo = eikonal_options(root);
    const Node tol = root.child("tolerances");
    tol.allow({"residual"});
    const PhasePtr phi = phase_spec(root.value("phase"), root.at("phase"), pg, eo);
    const BandSpace B = band_space(g, subspace_options(root));
    const OperatorMatrix I = iphi_matrix(*phi, g);
    const Inverse inv = invert_Iphi(I, B);
    const Certificate c = certify_regular(*phi, g.tensor(), 0);
    r.measured["certificate"] = certificate_json(c);
    r.measured["residual"] = inv.residual;
    r.measured["left_residual"] = inv.left_residual;
    r.measured["a0_norm"] = inv.a0_norm;
    r.measured["test_dimension"] = B.test.cols();
    r.measured["solve_dimension"] = B.solve.cols();
    const double rt = tol.positive("residual", 1e-3);
    r.check("right_inverse_residual", inv.residual, "<=", rt);
    r.check("left_inverse_residual", inv.left_residual, "<=", rt);

    const CMatrix R = I.m * inv.Qstar.m * B.test - B.test, Lf = inv.Qstar.m * I.m * B.test - B.test;
    std::vector<std::vector<double>> rows;
    for (Eigen::Index k = 0; k < B.test.cols(); ++k)
        rows.push_back({static_cast<double>(k), R.col(k).norm(), Lf.col(k).norm()});
    write_csv(out / "residual_columns.csv", {"column", "right", "left"}, rows);
    r.artifacts.push_back("residual_columns.csv");
}

void run_hyperbolic(const Node& root, const fs::path& out, Report& r)
{
    root.allow({SGFIO_COMMON, "time", "system", "initial", "forcing", "closed_form", "reference", "picard",
                "sobolev", "semigroup"});
    HyperbolicOptions ho;
    ho.grid = quant_grid(root, 128);
    if (root.has("eikonal")) ho.eikonal = eikonal_options(root);
    const Node time = root.child("time");
    time.allow({"T0", "K"});
    ho.time.T0 = time.positive("T0", 0.1);
    ho.time.K = time.integer("K", 16, 4);
    const Node pc = root.child("picard");
    pc.allow({"cap", "tol", "hermite_count", "galerkin_count", "probe_columns"});
    ho.picard_cap = pc.integer("cap", ho.picard_cap, 1);
    ho.picard_tol = pc.positive("tol", ho.picard_tol);
    ho.hermite_count = pc.integer("hermite_count", ho.hermite_count, 1);
    ho.galerkin_count = pc.integer("galerkin_count", ho.galerkin_count, 1);
    ho.probe_columns = pc.integer("probe_columns", ho.probe_columns, 1);
    if (ho.hermite_count > ho.galerkin_count) throw ConfigError(pc.at("hermite_count"), "must not exceed galerkin_count");
    ho.seed = static_cast<unsigned>(root.integer("seed", 1, 0));
    const Node tol = root.child("tolerances");
    tol.allow({"closed_form", "reference", "telescoping", "le_residual", "factorial_spread", "semigroup",
               "sobolev_ratio"});

    HyperbolicSystem sys;
    const Node sn = root.child("system");
    sn.allow({"eps", "lambda", "R"});
    sys.eps = sn.number("eps", 1.0);
    for (const Node& l : sn.list("lambda", 1)) sys.lambda.push_back(symbol_at(l));
    const std::size_t m = sys.m();
    sys.R.assign(m, std::vector<std::optional<SgSymbol>>(m));
    if (sn.has("R")) {
        const auto rows = sn.list("R");
        if (rows.size() != m) throw ConfigError(sn.at("R"), "expected " + std::to_string(m) + " rows");
        for (std::size_t i = 0; i < m; ++i) {
            const json& row = rows[i].raw();
            if (!row.is_array() || row.size() != m)
                throw ConfigError(rows[i].path(), "expected " + std::to_string(m) + " entries (null for zero)");
            for (std::size_t j = 0; j < m; ++j)
                if (!row[j].is_null()) sys.R[i][j] = symbol_at(Node(&row[j], rows[i].path() + "[" + std::to_string(j) + "]"));
        }
    }
    try {
        sys.validate();
    } catch (const HyperbolicError& e) {
        throw ConfigError(root.at("system"), e.what());
    }

    const QuantGrid& g = ho.grid;
    const std::size_t N = g.N;
    auto component_list = [&](const std::string& key, std::initializer_list<const char*> vars) {
        std::vector<SgSymbol> v;
        const auto items = root.list(key, m);
        if (items.size() != m) throw ConfigError(root.at(key), "expected one expression per component");
        for (const Node& it : items) v.push_back(expression_value(it.raw(), it.path(), vars));
        return v;
    };
    const auto G0 = component_list("initial", {"x"});
    CVector G(static_cast<Eigen::Index>(m * N));
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t i = 0; i < N; ++i) G[j * N + i] = G0[j]({0.0, 0.0, g.x(i), 0.0});
    Forcing F;
    if (root.has("forcing")) {
        const auto fs = component_list("forcing", {"t", "x"});
        F = [fs, g, m, N](double t) {
            CVector v(static_cast<Eigen::Index>(m * N));
            for (std::size_t j = 0; j < m; ++j)
                for (std::size_t i = 0; i < N; ++i) v[j * N + i] = fs[j]({t, 0.0, g.x(i), 0.0});
            return v;
        };
    }
    std::optional<std::vector<SgSymbol>> closed;
    if (root.has("closed_form")) closed = component_list("closed_form", {"t", "x"});

    const SystemPhases ph = build_phases(sys, ho);
    const FundamentalSolution E = picard_series(sys, ph, ho);
    const Trajectory tr = solve_cauchy(E, G, F);
    const int K = ho.time.K;

    r.measured["m"] = m;
    r.measured["time_invariant"] = ph.index.invariant();
    r.measured["phases"] = {{"max_shoot_residual", ph.max_shoot_residual}, {"max_newton", ph.max_newton}};
    r.measured["largest_certified_T0"] = largest_certified_T0(ph);

    bool identity = true;
    const auto M = static_cast<Eigen::Index>(m * N);
    for (int k = 0; k <= (ph.index.invariant() ? 0 : K); ++k) identity = identity && (E.at(k, k) == CMatrix::Identity(M, M));
    r.check_true("identity_at_equal_times", identity);

    r.measured["picard"] = {{"N", E.N},
                            {"order_norms", E.order_norms},
                            {"le_norms", E.le_norms},
                            {"le_predicted", E.le_predicted},
                            {"le_mismatch", E.le_mismatch},
                            {"telescoping_residual", E.telescoping_residual},
                            {"telescoping_abs", E.telescoping_abs}};
    r.check("telescoping_identity", E.telescoping_residual, "<=", tol.positive("telescoping", 1e-3));
    if (!E.le_mismatch.empty())
        r.check("residual_of_LE_N", E.le_mismatch.back(), "<=", tol.positive("le_residual", 1e-3));
    const FactorialFit fit = fit_factorial(E.order_norms, ho.time.T0);
    r.measured["factorial_fit"] = {{"C", fit.C}, {"C_max", fit.C_max}, {"spread", fit.spread}, {"slope", fit.slope},
                                   {"log_C_T0", fit.C > 0 ? std::log(fit.C * ho.time.T0) : -INFINITY},
                                   {"orders_used", fit.used}};
    if (fit.used >= 3) {
        r.check("factorial_envelope_spread", fit.spread, "<=", tol.positive("factorial_spread", 3.0));
        r.check("factorial_slope", fit.slope, "<=", std::log(fit.C_max * ho.time.T0) + 1e-12);
    }

    const CMatrix P = block_basis(hermite_basis(g, ho.hermite_count), m);
    {
        const Node sg = root.child("semigroup");
        sg.allow({"mid"});
        const int mid = sg.integer("mid", K / 2, 1);
        if (mid >= K) throw ConfigError(sg.at("mid"), "must lie strictly inside the time grid");
        const CMatrix lhs = E.at(K, mid) * E.at(mid, 0);
        const double d = subspace_norm(lhs - E.at(K, 0), P) / subspace_norm(E.at(K, 0), P);
        r.measured["semigroup_defect"] = d;
        r.check("semigroup", d, "<=", tol.positive("semigroup", 1e-2));
    }

    std::vector<double> ts = tr.t;
    if (closed) {
        std::vector<double> errs;
        for (int k = 0; k <= K; ++k) {
            CVector c(M);
            for (std::size_t j = 0; j < m; ++j)
                for (std::size_t i = 0; i < N; ++i) c[j * N + i] = (*closed)[j]({tr.t[k], 0.0, g.x(i), 0.0});
            errs.push_back(relative_l2(tr.W[k], c));
        }
        r.measured["closed_form_error"] = errs;
        r.check("closed_form_at_T0", errs.back(), "<=", tol.positive("closed_form", 1e-3));
    }

    const Node rn = root.child("reference");
    rn.allow({"enabled", "substeps"});
    std::optional<Trajectory> ref;
    if (rn.flag("enabled", true)) {
        ReferenceOptions ro;
        ro.substeps = rn.integer("substeps", 8, 1);
        ref = reference_solve(sys, g, ho.time, G, F, ro);
        std::vector<double> errs;
        for (int k = 0; k <= K; ++k) errs.push_back(relative_l2(tr.W[k], ref->W[k]));
        r.measured["reference_error"] = errs;
        r.measured["reference_norm_ratio"] = ref->W.back().norm() / G.norm();
        r.check("reference_at_T0", errs.back(), "<=", tol.positive("reference", 1e-2));
    }

    // ||W(t)||_{r - (eps - 1), rho} / ||G||_{r, rho}
    {
        json ratios = json::array();
        double worst = 0.0;
        std::vector<std::array<double, 2>> idx;
        if (root.has("sobolev")) {
            for (const Node& p : root.list("sobolev")) {
                const auto v = p.raw();
                if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
                    throw ConfigError(p.path(), "expected [r, rho]");
                idx.push_back({v[0].get<double>(), v[1].get<double>()});
            }
        } else {
            idx = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
        }
        for (const auto& [rr, rho] : idx) {
            const double base = system_sobolev_norm(G, g, m, rr, rho);
            double q = 0.0;
            for (int k = 0; k <= K; ++k) q = std::max(q, system_sobolev_norm(tr.W[k], g, m, rr - (sys.eps - 1.0), rho) / base);
            ratios.push_back({{"r", rr}, {"rho", rho}, {"max_ratio", q}});
            worst = std::max(worst, q);
        }
        r.measured["sobolev_ratios"] = ratios;
        r.check("sobolev_ratio_bounded", worst, "<=", tol.positive("sobolev_ratio", 10.0));
    }

    // data
    std::vector<std::vector<double>> rows;
    for (int k = 0; k <= K; ++k)
        for (std::size_t j = 0; j < m; ++j)
            for (std::size_t i = 0; i < N; ++i) {
                const cplx w = tr.W[k][static_cast<Eigen::Index>(j * N + i)];
                std::vector<double> row{tr.t[k], static_cast<double>(j + 1), g.x(i), w.real(), w.imag()};
                if (ref) {
                    const cplx v = ref->W[k][static_cast<Eigen::Index>(j * N + i)];
                    row.push_back(v.real());
                    row.push_back(v.imag());
                }
                rows.push_back(std::move(row));
            }
    std::vector<std::string> header{"t", "component", "x", "re", "im"};
    if (ref) header.insert(header.end(), {"ref_re", "ref_im"});
    write_csv(out / "trajectory.csv", header, rows);
    r.artifacts.push_back("trajectory.csv");

    std::vector<std::vector<double>> on;
    std::vector<double> nu, env;
    for (std::size_t k = 0; k < E.order_norms.size(); ++k) {
        const double v = static_cast<double>(k + 1);
        const double e = E.order_norms[0] * std::pow(fit.C * ho.time.T0, v - 1.0) / std::tgamma(v);
        on.push_back({v, E.order_norms[k], e});
        nu.push_back(v);
        env.push_back(e);
    }
    write_csv(out / "order_norms.csv", {"nu", "norm", "envelope"}, on);
    r.artifacts.push_back("order_norms.csv");
    write_svg_lines(out / "order_norms.svg", "Picard order norms", "nu",
                    {{"||W_nu||", nu, E.order_norms}, {"factorial envelope", nu, env}}, true);
    r.artifacts.push_back("order_norms.svg");

    std::vector<Series> sol;
    std::vector<double> xs = g.xs();
    for (std::size_t j = 0; j < m; ++j) {
        std::vector<double> a0, a1;
        for (std::size_t i = 0; i < N; ++i) {
            a0.push_back(std::abs(G[static_cast<Eigen::Index>(j * N + i)]));
            a1.push_back(std::abs(tr.W.back()[static_cast<Eigen::Index>(j * N + i)]));
        }
        const std::string c = m > 1 ? " (" + std::to_string(j + 1) + ")" : "";
        sol.push_back({"|W| at 0" + c, xs, a0});
        sol.push_back({"|W| at T0" + c, xs, a1});
    }
    write_svg_lines(out / "solution.svg", "Cauchy solution", "x", sol);
    r.artifacts.push_back("solution.svg");
}

}  // namespace sgfio::cli
