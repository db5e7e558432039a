// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <set>

#include "internal.hpp"

namespace sgfio::cli {

namespace {

const json kEmpty = json::object();

std::string type_name(const json& j) { return j.type_name(); }

}  // namespace

Node element(const json& j, const std::string& path) { return Node(&j, path); }

bool Node::has(const std::string& key) const { return j_->is_object() && j_->contains(key) && !(*j_)[key].is_null(); }

void Node::allow(std::initializer_list<const char*> allowed) const
{
    if (!j_->is_object()) throw ConfigError(path_, "expected an object, got " + type_name(*j_));
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = j_->begin(); it != j_->end(); ++it)
        if (!ok.count(it.key())) throw ConfigError(at(it.key()), "unknown key");
}

const json& Node::value(const std::string& key) const
{
    if (!has(key)) throw ConfigError(at(key), "required key missing");
    return (*j_)[key];
}

double Node::number(const std::string& key, std::optional<double> def) const
{
    if (!has(key)) {
        if (def) return *def;
        throw ConfigError(at(key), "required number missing");
    }
    const json& v = (*j_)[key];
    if (!v.is_number()) throw ConfigError(at(key), "expected a number, got " + type_name(v));
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(at(key), "must be finite");
    return d;
}

double Node::positive(const std::string& key, std::optional<double> def) const
{
    const double d = number(key, def);
    if (!(d > 0.0)) throw ConfigError(at(key), "must be positive");
    return d;
}

int Node::integer(const std::string& key, std::optional<int> def, int min) const
{
    if (!has(key)) {
        if (def) return *def;
        throw ConfigError(at(key), "required integer missing");
    }
    const json& v = (*j_)[key];
    if (!v.is_number_integer()) throw ConfigError(at(key), "expected an integer, got " + type_name(v));
    const auto i = v.get<long long>();
    if (i < min || i > 1000000000LL) throw ConfigError(at(key), "must be at least " + std::to_string(min));
    return static_cast<int>(i);
}

bool Node::flag(const std::string& key, bool def) const
{
    if (!has(key)) return def;
    const json& v = (*j_)[key];
    if (!v.is_boolean()) throw ConfigError(at(key), "expected true or false, got " + type_name(v));
    return v.get<bool>();
}

std::string Node::text(const std::string& key, std::optional<std::string> def) const
{
    if (!has(key)) {
        if (def) return *def;
        throw ConfigError(at(key), "required string missing");
    }
    const json& v = (*j_)[key];
    if (!v.is_string()) throw ConfigError(at(key), "expected a string, got " + type_name(v));
    return v.get<std::string>();
}

std::vector<double> Node::numbers(const std::string& key, std::optional<std::vector<double>> def) const
{
    if (!has(key)) {
        if (def) return *def;
        throw ConfigError(at(key), "required array missing");
    }
    const json& v = (*j_)[key];
    if (!v.is_array()) throw ConfigError(at(key), "expected an array of numbers, got " + type_name(v));
    std::vector<double> out;
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (!v[k].is_number()) throw ConfigError(at(key) + "[" + std::to_string(k) + "]", "expected a number");
        out.push_back(v[k].get<double>());
        if (!std::isfinite(out.back())) throw ConfigError(at(key) + "[" + std::to_string(k) + "]", "must be finite");
    }
    return out;
}

Node Node::child(const std::string& key) const
{
    if (!has(key)) return Node(&kEmpty, at(key));
    const json& v = (*j_)[key];
    if (!v.is_object()) throw ConfigError(at(key), "expected an object, got " + type_name(v));
    return Node(&v, at(key));
}

std::vector<Node> Node::list(const std::string& key, std::size_t min_size) const
{
    std::vector<Node> out;
    if (!has(key)) {
        if (min_size == 0) return out;
        throw ConfigError(at(key), "required array missing");
    }
    const json& v = (*j_)[key];
    if (!v.is_array()) throw ConfigError(at(key), "expected an array, got " + type_name(v));
    if (v.size() < min_size) throw ConfigError(at(key), "needs at least " + std::to_string(min_size) + " entries");
    for (std::size_t k = 0; k < v.size(); ++k) out.emplace_back(&v[k], at(key) + "[" + std::to_string(k) + "]");
    return out;
}

SgSymbol symbol_at(const Node& n)
{
    n.allow({"expr", "order"});
    const std::string text = n.text("expr");
    const auto ord = n.numbers("order");
    if (ord.size() != 2) throw ConfigError(n.at("order"), "expected [m, mu]");
    try {
        return SgSymbol::parse(text, {ord[0], ord[1]});
    } catch (const std::exception& e) {
        throw ConfigError(n.at("expr"), e.what());
    }
}

SgSymbol symbol_spec(const Node& parent, const std::string& key)
{
    if (!parent.has(key)) throw ConfigError(parent.at(key), "required symbol missing");
    const json& v = parent.value(key);
    if (!v.is_object()) throw ConfigError(parent.at(key), "expected {\"expr\": ..., \"order\": [m, mu]}");
    return symbol_at(Node(&v, parent.at(key)));
}

SgSymbol expression_value(const json& j, const std::string& path, std::initializer_list<const char*> vars)
{
    if (!j.is_string()) throw ConfigError(path, "expected an expression string");
    SgSymbol s;
    try {
        s = SgSymbol::parse(j.get<std::string>(), {0.0, 0.0});
    } catch (const std::exception& e) {
        throw ConfigError(path, e.what());
    }
    const auto fv = s.expression()->free_variables();
    for (int v = 0; v < static_cast<int>(fv.size()); ++v) {
        if (!fv[static_cast<std::size_t>(v)]) continue;
        const std::string name = expr::var_name(static_cast<expr::Var>(v));
        if (std::none_of(vars.begin(), vars.end(), [&](const char* a) { return name == a; }))
            throw ConfigError(path, "variable '" + name + "' is not allowed here");
    }
    return s;
}

SgSymbol expression_at(const Node& parent, const std::string& key, std::initializer_list<const char*> vars)
{
    return expression_value(parent.value(key), parent.at(key), vars);
}

EikonalOptions eikonal_options(const Node& root)
{
    const Node e = root.child("eikonal");
    e.allow({"h", "shoot_tol", "max_newton"});
    EikonalOptions o;
    o.h = e.positive("h", o.h);
    o.shoot_tol = e.positive("shoot_tol", o.shoot_tol);
    o.max_newton = e.integer("max_newton", o.max_newton, 1);
    return o;
}

SampleGrid sample_grid(const Node& root, SampleGrid def)
{
    const Node g = root.child("grid");
    g.allow({"L_x", "L_xi", "N_x", "N_xi"});
    const double lx = g.positive("L_x", def.x_half), lxi = g.positive("L_xi", def.xi_half);
    const int nx = g.integer("N_x", static_cast<int>(def.nx), 5), nxi = g.integer("N_xi", static_cast<int>(def.nxi), 5);
    return SampleGrid(lx, lxi, static_cast<std::size_t>(nx), static_cast<std::size_t>(nxi));
}

QuantGrid quant_grid(const Node& root, std::size_t default_N)
{
    const Node g = root.child("grid");
    g.allow({"L_x", "L_xi", "N_x", "N_xi"});
    const double L = g.positive("L_x", 12.0);
    const int N = g.integer("N_x", static_cast<int>(default_N), 16);
    if (N % 2 != 0) throw ConfigError(g.at("N_x"), "must be even");
    // the frequency grid is tied to the x grid by the FFT
    if (g.has("N_xi") && g.integer("N_xi") != N) throw ConfigError(g.at("N_xi"), "must equal N_x on an FFT grid");
    const double Lxi = (N / 2) * M_PI / L;
    if (g.has("L_xi") && std::abs(g.number("L_xi") - Lxi) > 1e-9 * Lxi)
        throw ConfigError(g.at("L_xi"), "fixed by the FFT: expected (N_x / 2) pi / L_x = " + fmt(Lxi));
    return QuantGrid(static_cast<std::size_t>(N), L);
}

PhasePtr phase_spec(const json& j, const std::string& path, const TensorGrid& g, const EikonalOptions& eo)
{
    if (j.is_string()) {
        const SgSymbol s = expression_value(j, path, {"x", "xi"});
        return std::make_shared<ExprPhase>(s);
    }
    if (!j.is_object()) throw ConfigError(path, "expected an expression string or an eikonal object");
    const Node n(&j, path);
    n.allow({"eikonal", "t", "s"});
    const SgSymbol a = symbol_spec(n, "eikonal");
    const double t = n.number("t"), s = n.number("s", 0.0);
    if (t < s) throw ConfigError(n.at("t"), "must not be below s");
    return solve_eikonal(a, t, s, g, eo);
}

void Report::check(const std::string& name, double value, const std::string& relation, double limit)
{
    bool ok = false;
    if (relation == "<=") ok = value <= limit;
    else if (relation == ">=") ok = value >= limit;
    else if (relation == "<") ok = value < limit;
    else throw std::logic_error("unknown relation " + relation);
    json c = json::object();
    c["name"] = name;
    c["value"] = value;
    c["relation"] = relation;
    c["limit"] = limit;
    c["pass"] = ok && std::isfinite(value);
    checks.push_back(c);
}

void Report::check_true(const std::string& name, bool ok)
{
    json c = json::object();
    c["name"] = name;
    c["value"] = ok;
    c["pass"] = ok;
    checks.push_back(c);
}

bool Report::all_pass() const
{
    return std::all_of(checks.begin(), checks.end(), [](const json& c) { return c["pass"].get<bool>(); });
}

}  // namespace sgfio::cli
