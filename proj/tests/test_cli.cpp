// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "sgfio/cli.hpp"

using namespace sgfio::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("sgfio_cli_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream f(p, std::ios::binary);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

json parse(const char* text) { return json::parse(text); }

std::string config_error(const json& cfg, const std::string& sub)
{
    try {
        run_config(cfg, sub, scratch("err"));
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

const json* find_check(const json& rep, const std::string& name)
{
    for (const auto& c : rep["checks"])
        if (c["name"] == name) return &c;
    return nullptr;
}

}  // namespace

TEST(Verify, MinimalIdentityPhase)
{
    const fs::path out = scratch("verify");
    const Outcome o = run_config(parse(R"j({"subcommand": "verify", "phase": "x*xi"})j"), "verify", out);
    EXPECT_EQ(o.exit_code, kPass);
    const json& c = o.report["measured"]["certificate"];
    EXPECT_EQ(c["tau"].get<double>(), 0.0);
    EXPECT_EQ(c["r"].get<double>(), 1.0);
    EXPECT_TRUE(c["in_P"].get<bool>());
    EXPECT_EQ(slurp(out / "report.json"), serialize(o.report));
    EXPECT_TRUE(fs::exists(out / "phase.csv"));
    EXPECT_TRUE(fs::exists(out / "j.svg"));
}

TEST(Eikonal, ClosedFormAngXi)
{
    const Outcome o = run_config(parse(R"j({"subcommand": "eikonal",
        "symbol": {"expr": "ang(xi)", "order": [0, 1]}, "time": {"t": 0.1, "s": 0},
        "closed_form": "x*xi + (t - s)*ang(xi)", "levels": []})j"),
                                 "eikonal", scratch("eik"));
    EXPECT_EQ(o.exit_code, kPass);
    const json* c = find_check(o.report, "closed_form_phi");
    ASSERT_NE(c, nullptr);
    EXPECT_LE((*c)["value"].get<double>(), 1e-6);
}

TEST(Eikonal, WrongClosedFormIsCheckFailure)
{
    const Outcome o = run_config(parse(R"j({"subcommand": "eikonal",
        "symbol": {"expr": "xi", "order": [0, 1]}, "time": {"t": 0.1}, "closed_form": "x*xi - (t - s)*xi",
        "levels": []})j"),
                                 "eikonal", scratch("eik_bad"));
    EXPECT_EQ(o.exit_code, kCheckFailure);
    EXPECT_EQ(o.report["status"], "check_failure");
    EXPECT_FALSE((*find_check(o.report, "closed_form_phi"))["pass"].get<bool>());
}

TEST(Schema, ErrorsCarryPaths)
{
    EXPECT_EQ(config_error(parse(R"j({"phse": "x*xi"})j"), "verify"), "phse: unknown key");
    EXPECT_EQ(config_error(parse(R"j({"subcommand": "eikonal"})j"), "verify"),
              "subcommand: config is for 'eikonal', not 'verify'");
    EXPECT_EQ(config_error(parse(R"j({"symbol": {"expr": "xi", "order": [0]}})j"), "eikonal"),
              "symbol.order: expected [m, mu]");
    EXPECT_EQ(config_error(parse(R"j({"symbol": {"expr": "xi +", "order": [0, 1]}})j"), "eikonal").rfind("symbol.expr: ", 0),
              0u);
    EXPECT_EQ(config_error(parse(R"j({"phase": "x*xi*t"})j"), "verify"), "phase: variable 't' is not allowed here");
    EXPECT_EQ(config_error(parse(R"j({"phase": "x*xi", "grid": {"N_x": "many"}})j"), "verify"),
              "grid.N_x: expected an integer, got string");
    EXPECT_EQ(config_error(parse(R"j({"phase": "x*xi", "tolerances": {"oracle": -1}})j"), "verify"),
              "tolerances.oracle: must be positive");
    EXPECT_EQ(config_error(parse(R"j({"system": {"lambda": [{"expr": "xi", "order": [0, 1]}]}, "initial": ["exp(-x^2)"],
        "grid": {"N_x": 127}})j"),
                           "hyperbolic"),
              "grid.N_x: must be even");
    EXPECT_EQ(config_error(parse(R"j({"system": {"lambda": [{"expr": "xi", "order": [0, 1]}]},
        "initial": ["exp(-x^2)", "0"]})j"),
                           "hyperbolic"),
              "initial: expected one expression per component");
    EXPECT_EQ(config_error(parse(R"j([1, 2])j"), "verify"), "config must be a JSON object");
    EXPECT_EQ(config_error(parse(R"j({})j"), "bogus"), "subcommand: unknown subcommand 'bogus'");
}

TEST(Schema, HyperbolicOrderViolationIsConfigError)
{
    const std::string e = config_error(parse(R"j({"system": {"eps": 1,
        "lambda": [{"expr": "xi", "order": [0, 1]}], "R": [[{"expr": "xi", "order": [0, 1]}]]},
        "initial": ["exp(-x^2)"]})j"),
                                       "hyperbolic");
    EXPECT_EQ(e.rfind("system: ", 0), 0u) << e;
}

TEST(Failure, NumericalErrorsKeepModuleProvenance)
{
    const Outcome o = run_config(parse(R"j({"subcommand": "multiprod",
        "phases": ["x*xi + 0.2*ang(x)*ang(xi)", "x*xi + 0.2*ang(x)*ang(xi)"]})j"),
                                 "multiprod", scratch("fail"));
    EXPECT_EQ(o.exit_code, kNumericalFailure);
    EXPECT_EQ(o.report["status"], "numerical_failure");
    EXPECT_EQ(o.report["error"]["module"], "multiproduct");
}

TEST(Output, EnvironmentOverridesFlagAndConfig)
{
    Invocation inv;
    const json cfg = parse(R"j({"output": "from_config"})j");
    ::unsetenv("SGFIO_OUT");
    EXPECT_EQ(resolve_output(inv, json::object()), fs::path("sgfio_out"));
    EXPECT_EQ(resolve_output(inv, cfg), fs::path("from_config"));
    inv.out = "from_flag";
    EXPECT_EQ(resolve_output(inv, cfg), fs::path("from_flag"));
    ::setenv("SGFIO_OUT", "from_env", 1);
    EXPECT_EQ(resolve_output(inv, cfg), fs::path("from_env"));
    ::unsetenv("SGFIO_OUT");
}

TEST(Run, ExitCodesFromFiles)
{
    const fs::path dir = scratch("run");
    fs::create_directories(dir);
    std::ofstream(dir / "bad.json") << "{ not json";
    std::ofstream(dir / "ok.json") << R"j({"subcommand": "verify", "phase": "x*xi"})j";
    std::ostringstream log;
    Invocation inv{"verify", (dir / "bad.json").string(), true, (dir / "out").string()};
    EXPECT_EQ(run(inv, log).exit_code, kConfigError);
    EXPECT_NE(log.str().find("invalid JSON"), std::string::npos);
    inv.config_path = (dir / "missing.json").string();
    EXPECT_EQ(run(inv, log).exit_code, kConfigError);
    inv.config_path = (dir / "ok.json").string();
    EXPECT_EQ(run(inv, log).exit_code, kPass);
    EXPECT_TRUE(fs::exists(dir / "out" / "report.json"));
}

TEST(Determinism, RerunIsByteIdentical)
{
    const json cfg = parse(R"j({"subcommand": "multiprod", "seed": 3, "restarts": 4,
        "phases": ["x*xi + 0.01*sin(x)*ang(xi)", "x*xi + 0.02*xi"], "det_sweep": {"count": 50}})j");
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    const Outcome oa = run_config(cfg, "multiprod", a), ob = run_config(cfg, "multiprod", b);
    EXPECT_EQ(oa.exit_code, kPass);
    const std::string ra = slurp(a / "report.json");
    EXPECT_FALSE(ra.empty());
    EXPECT_EQ(ra, slurp(b / "report.json"));
    EXPECT_EQ(slurp(a / "product.csv"), slurp(b / "product.csv"));
}

TEST(Hyperbolic, TransportClosedForm)
{
    const Outcome o = run_config(parse(R"j({"subcommand": "hyperbolic",
        "system": {"lambda": [{"expr": "2*xi", "order": [0, 1]}]}, "time": {"T0": 0.05, "K": 8},
        "initial": ["exp(-x^2)"], "closed_form": ["exp(-(x - 2*t)^2)"], "reference": {"enabled": false}})j"),
                                 "hyperbolic", scratch("hyp"));
    EXPECT_EQ(o.exit_code, kPass);
    EXPECT_LE((*find_check(o.report, "closed_form_at_T0"))["value"].get<double>(), 1e-3);
    EXPECT_TRUE((*find_check(o.report, "identity_at_equal_times"))["pass"].get<bool>());
}
