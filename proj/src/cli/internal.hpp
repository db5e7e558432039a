// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <functional>
#include <initializer_list>
#include <string>
#include <vector>

#include "sgfio/cli.hpp"
#include "sgfio/eikonal.hpp"
#include "sgfio/quantize.hpp"

namespace sgfio::cli {

/// Read-only view of one config object with its path, for error messages.
class Node {
public:
    Node(const json* j, std::string path) : j_(j), path_(std::move(path)) {}

    const std::string& path() const { return path_; }
    std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    bool has(const std::string& key) const;
    const json& raw() const { return *j_; }

    /// Rejects keys outside `allowed`; typos must not silently fall back to defaults.
    void allow(std::initializer_list<const char*> allowed) const;

    double number(const std::string& key, std::optional<double> def = {}) const;
    double positive(const std::string& key, std::optional<double> def = {}) const;
    int integer(const std::string& key, std::optional<int> def = {}, int min = 0) const;
    bool flag(const std::string& key, bool def) const;
    std::string text(const std::string& key, std::optional<std::string> def = {}) const;
    std::vector<double> numbers(const std::string& key, std::optional<std::vector<double>> def = {}) const;

    /// Sub-object; an absent key gives an empty object.
    Node child(const std::string& key) const;
    /// Array elements (each wrapped with its index in the path).
    std::vector<Node> list(const std::string& key, std::size_t min_size = 0) const;
    const json& value(const std::string& key) const;

private:
    const json* j_;
    std::string path_;
};

Node element(const json& j, const std::string& path);

/// {"expr": "...", "order": [m, mu]}
SgSymbol symbol_spec(const Node& parent, const std::string& key);
SgSymbol symbol_at(const Node& n);
/// Scalar expression in the listed variables only (x, xi, t, s).
SgSymbol expression_at(const Node& parent, const std::string& key, std::initializer_list<const char*> vars);
SgSymbol expression_value(const json& j, const std::string& path, std::initializer_list<const char*> vars);

EikonalOptions eikonal_options(const Node& root);
SampleGrid sample_grid(const Node& root, SampleGrid def = SampleGrid(4, 4, 65, 65));
QuantGrid quant_grid(const Node& root, std::size_t default_N);

/// A phase: an expression string in x and xi, or {"eikonal": {"expr", "order"}, "t", "s"} solved on `g`.
PhasePtr phase_spec(const json& j, const std::string& path, const TensorGrid& g, const EikonalOptions& eo);

struct Report {
    json measured = json::object();
    json checks = json::array();
    std::vector<std::string> artifacts;

    void check(const std::string& name, double value, const std::string& relation, double limit);
    void check_true(const std::string& name, bool ok);
    bool all_pass() const;
};

// field data
void write_csv(const std::filesystem::path& file, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);
std::string fmt(double v);

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};
/// Line plot; log_y plots log10 of positive values.
void write_svg_lines(const std::filesystem::path& file, const std::string& title, const std::string& xlabel,
                     const std::vector<Series>& series, bool log_y = false);
/// Heat map of v(i, j) over x (rows) and xi (columns).
void write_svg_heatmap(const std::filesystem::path& file, const std::string& title, const TensorGrid& g,
                       const std::function<double(std::size_t, std::size_t)>& v);

// one runner per subcommand: fill the report, write data files into out
void run_eikonal(const Node& root, const std::filesystem::path& out, Report& r);
void run_verify(const Node& root, const std::filesystem::path& out, Report& r);
void run_multiprod(const Node& root, const std::filesystem::path& out, Report& r);
void run_compose(const Node& root, const std::filesystem::path& out, Report& r);
void run_invert(const Node& root, const std::filesystem::path& out, Report& r);
void run_hyperbolic(const Node& root, const std::filesystem::path& out, Report& r);

}  // namespace sgfio::cli
