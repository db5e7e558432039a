// SPDX-License-Identifier: Apache-2.0
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "internal.hpp"
#include "sgfio/hyperbolic.hpp"
#include "sgfio/multiproduct.hpp"

namespace sgfio::cli {

namespace fs = std::filesystem;

const std::vector<std::string>& subcommands()
{
    static const std::vector<std::string> v{"eikonal", "multiprod", "compose", "invert", "hyperbolic", "verify"};
    return v;
}

std::string serialize(const json& report) { return report.dump(2) + "\n"; }

fs::path resolve_output(const Invocation& inv, const json& cfg)
{
    if (const char* e = std::getenv("SGFIO_OUT"); e && *e) return e;
    if (inv.out) return *inv.out;
    if (cfg.is_object() && cfg.contains("output")) {
        if (!cfg["output"].is_string()) throw ConfigError("output", "expected a directory name");
        return cfg["output"].get<std::string>();
    }
    return "sgfio_out";
}

Outcome run_config(const json& cfg, const std::string& subcommand, const fs::path& out_dir)
{
    if (!cfg.is_object()) throw ConfigError("", "config must be a JSON object");
    const Node root(&cfg, "");
    const auto& subs = subcommands();
    if (std::find(subs.begin(), subs.end(), subcommand) == subs.end())
        throw ConfigError("subcommand", "unknown subcommand '" + subcommand + "'");
    if (root.has("subcommand") && root.text("subcommand") != subcommand)
        throw ConfigError("subcommand", "config is for '" + root.text("subcommand") + "', not '" + subcommand + "'");
    root.integer("seed", 1, 0);
    root.flag("serial", false);
    if (root.has("output")) root.text("output");
    // every tolerance must be positive even when the check that reads it does not run
    const Node tol = root.child("tolerances");
    for (auto it = tol.raw().begin(); it != tol.raw().end(); ++it) tol.positive(it.key());

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw ConfigError("output", "cannot create " + out_dir.string() + ": " + ec.message());

    Report r;
    json error;
    auto fail = [&](const char* module, const std::string& what) {
        error = json::object();
        error["module"] = module;
        error["message"] = what;
    };
    try {
        if (subcommand == "eikonal") run_eikonal(root, out_dir, r);
        else if (subcommand == "verify") run_verify(root, out_dir, r);
        else if (subcommand == "multiprod") run_multiprod(root, out_dir, r);
        else if (subcommand == "compose") run_compose(root, out_dir, r);
        else if (subcommand == "invert") run_invert(root, out_dir, r);
        else run_hyperbolic(root, out_dir, r);
    } catch (const ConfigError&) {
        throw;
    } catch (const ShootingError& e) {
        fail("eikonal", std::string(e.what()) + " at (x, xi) = (" + fmt(e.x()) + ", " + fmt(e.xi()) +
                            "); shorten the time interval");
    } catch (const ChainError& e) {
        fail("multiproduct", e.what());
    } catch (const QuantError& e) {
        fail("quantize", e.what());
    } catch (const HyperbolicError& e) {
        fail("hyperbolic", e.what());
    } catch (const SymbolError& e) {
        fail("symbols", e.what());
    } catch (const expr::EvalError& e) {
        fail("expr", e.what());
    } catch (const DomainError& e) {
        fail("interp", e.what());
    } catch (const std::runtime_error& e) {
        fail("sgfio", e.what());
    }

    Outcome o;
    o.out_dir = out_dir;
    o.exit_code = error.is_object() ? kNumericalFailure : (r.all_pass() ? kPass : kCheckFailure);
    json& rep = o.report;
    rep["subcommand"] = subcommand;
    rep["status"] = o.exit_code == kPass ? "pass" : (o.exit_code == kCheckFailure ? "check_failure" : "numerical_failure");
    rep["exit_code"] = o.exit_code;
    if (error.is_object()) rep["error"] = error;
    rep["checks"] = r.checks;
    rep["measured"] = r.measured;
    rep["artifacts"] = r.artifacts;

    std::ofstream f(out_dir / "report.json", std::ios::binary);
    if (!f) throw ConfigError("output", "cannot write " + (out_dir / "report.json").string());
    f << serialize(rep);
    return o;
}

Outcome run(const Invocation& inv, std::ostream& log)
{
    Outcome o;
    try {
        std::ifstream f(inv.config_path);
        if (!f) throw ConfigError("", "cannot read config file " + inv.config_path);
        std::stringstream buf;
        buf << f.rdbuf();
        json cfg;
        try {
            cfg = json::parse(buf.str());
        } catch (const json::parse_error& e) {
            throw ConfigError("", std::string("invalid JSON: ") + e.what());
        }
        o = run_config(cfg, inv.subcommand, resolve_output(inv, cfg));
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << "\n";
        o.exit_code = kConfigError;
        return o;
    }
    for (const auto& c : o.report["checks"])
        if (!c["pass"].get<bool>()) log << "check failed: " << c["name"].get<std::string>() << "\n";
    if (o.report.contains("error"))
        log << "numerical failure in " << o.report["error"]["module"].get<std::string>() << ": "
            << o.report["error"]["message"].get<std::string>() << "\n";
    log << inv.subcommand << ": " << o.report["status"].get<std::string>() << ", report at "
        << (o.out_dir / "report.json").string() << "\n";
    return o;
}

}  // namespace sgfio::cli
