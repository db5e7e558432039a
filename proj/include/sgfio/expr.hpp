// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sgfio::expr {

/// Free variables of the expression language.
enum class Var : std::uint8_t { t = 0, s = 1, x = 2, xi = 3 };
inline constexpr std::size_t kNumVars = 4;

const char* var_name(Var v);
std::optional<Var> var_from_name(const std::string& name);

enum class Op : std::uint8_t {
    Num,
    Variable,
    Neg,
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
    Ang,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
};

int arity(Op op);

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
    Op op = Op::Num;
    double value = 0.0;  // Num
    Var var = Var::x;    // Variable
    int exponent = 0;    // Pow
    NodePtr lhs;         // unary operand or left operand
    NodePtr rhs;         // right operand
};

class ParseError : public std::runtime_error {
public:
    enum class Kind { Lexical, Syntax, UnknownIdentifier };
    ParseError(Kind kind, std::size_t position, const std::string& message);
    Kind kind() const noexcept { return kind_; }
    std::size_t position() const noexcept { return position_; }

private:
    Kind kind_;
    std::size_t position_;
};

class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Immutable expression tree. Copies share structure.
class Expr {
public:
    Expr();  // literal 0
    explicit Expr(NodePtr node);

    static Expr number(double v);
    static Expr variable(Var v);

    const Node& node() const { return *node_; }
    const NodePtr& ptr() const { return node_; }
    Op op() const { return node_->op; }

    int depth() const;
    std::size_t size() const;
    bool depends_on(Var v) const;
    std::array<bool, kNumVars> free_variables() const;

    friend Expr operator+(const Expr& a, const Expr& b);
    friend Expr operator-(const Expr& a, const Expr& b);
    friend Expr operator*(const Expr& a, const Expr& b);
    friend Expr operator/(const Expr& a, const Expr& b);
    friend Expr operator-(const Expr& a);

private:
    NodePtr node_;
};

Expr unary(Op op, const Expr& arg);
Expr pow(const Expr& base, int exponent);
Expr exp(const Expr& e);
Expr log(const Expr& e);
Expr sin(const Expr& e);
Expr cos(const Expr& e);
Expr sqrt(const Expr& e);
Expr ang(const Expr& e);

bool structurally_equal(const Expr& a, const Expr& b);

Expr parse(const std::string& text);
std::string print(const Expr& e);

/// Variable bindings; unbound entries are empty.
struct Env {
    std::array<std::optional<double>, kNumVars> values{};

    Env() = default;
    Env(std::initializer_list<std::pair<Var, double>> bindings);
    static Env from_map(const std::map<std::string, double>& m);
    Env& bind(Var v, double value);
};

/// Fully bound point (t, s, x, xi).
struct Point {
    double t = 0.0;
    double s = 0.0;
    double x = 0.0;
    double xi = 0.0;
};

double eval(const Expr& e, const Env& env);
double eval(const Expr& e, const Point& p);

/// Largest tree depth a derivative may reach before differentiate() refuses.
inline constexpr int kDefaultDepthCap = 64;

Expr differentiate(const Expr& e, Var v, int depth_cap = kDefaultDepthCap);

/// Flat postfix program for repeated evaluation of one expression.
class Program {
public:
    Program() = default;
    explicit Program(const Expr& e);

    double operator()(const Point& p) const;
    bool empty() const { return code_.empty(); }

private:
    struct Instr {
        Op op;
        Var var;
        int exponent;
        double value;
    };
    std::vector<Instr> code_;
    std::size_t max_stack_ = 0;
};

}  // namespace sgfio::expr
