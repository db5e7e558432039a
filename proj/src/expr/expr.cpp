// SPDX-License-Identifier: Apache-2.0
#include "sgfio/expr.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sgfio::expr {

namespace {

NodePtr make_num(double v)
{
    auto n = std::make_shared<Node>();
    n->op = Op::Num;
    n->value = v;
    return n;
}

NodePtr make_var(Var v)
{
    auto n = std::make_shared<Node>();
    n->op = Op::Variable;
    n->var = v;
    return n;
}

NodePtr make_unary(Op op, NodePtr arg)
{
    auto n = std::make_shared<Node>();
    n->op = op;
    n->lhs = std::move(arg);
    return n;
}

NodePtr make_binary(Op op, NodePtr a, NodePtr b)
{
    auto n = std::make_shared<Node>();
    n->op = op;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return n;
}

NodePtr make_pow(NodePtr base, int exponent)
{
    auto n = std::make_shared<Node>();
    n->op = Op::Pow;
    n->lhs = std::move(base);
    n->exponent = exponent;
    return n;
}

int node_depth(const Node& n)
{
    int d = 0;
    if (n.lhs) d = std::max(d, node_depth(*n.lhs));
    if (n.rhs) d = std::max(d, node_depth(*n.rhs));
    return d + 1;
}

std::size_t node_size(const Node& n)
{
    std::size_t s = 1;
    if (n.lhs) s += node_size(*n.lhs);
    if (n.rhs) s += node_size(*n.rhs);
    return s;
}

void collect_vars(const Node& n, std::array<bool, kNumVars>& out)
{
    if (n.op == Op::Variable) out[static_cast<std::size_t>(n.var)] = true;
    if (n.lhs) collect_vars(*n.lhs, out);
    if (n.rhs) collect_vars(*n.rhs, out);
}

bool is_zero(const NodePtr& n) { return n->op == Op::Num && n->value == 0.0; }
bool is_one(const NodePtr& n) { return n->op == Op::Num && n->value == 1.0; }

// Folding constructors used by differentiate(); they only drop 0 and 1 so that
// no negative literal is ever created.
NodePtr f_add(NodePtr a, NodePtr b)
{
    if (is_zero(a)) return b;
    if (is_zero(b)) return a;
    return make_binary(Op::Add, std::move(a), std::move(b));
}

NodePtr f_neg(NodePtr a)
{
    if (is_zero(a)) return a;
    if (a->op == Op::Neg) return a->lhs;
    return make_unary(Op::Neg, std::move(a));
}

NodePtr f_sub(NodePtr a, NodePtr b)
{
    if (is_zero(b)) return a;
    if (is_zero(a)) return f_neg(std::move(b));
    return make_binary(Op::Sub, std::move(a), std::move(b));
}

NodePtr f_mul(NodePtr a, NodePtr b)
{
    if (is_zero(a) || is_zero(b)) return make_num(0.0);
    if (is_one(a)) return b;
    if (is_one(b)) return a;
    return make_binary(Op::Mul, std::move(a), std::move(b));
}

NodePtr f_div(NodePtr a, NodePtr b)
{
    if (is_zero(a)) return make_num(0.0);
    if (is_one(b)) return a;
    return make_binary(Op::Div, std::move(a), std::move(b));
}

NodePtr f_int(int k)
{
    if (k < 0) return make_unary(Op::Neg, make_num(static_cast<double>(-k)));
    return make_num(static_cast<double>(k));
}

NodePtr f_pow(NodePtr base, int exponent)
{
    if (exponent == 0) return make_num(1.0);
    if (exponent == 1) return base;
    return make_pow(std::move(base), exponent);
}

NodePtr derive(const NodePtr& n, Var v)
{
    switch (n->op) {
    case Op::Num:
        return make_num(0.0);
    case Op::Variable:
        return make_num(n->var == v ? 1.0 : 0.0);
    case Op::Neg:
        return f_neg(derive(n->lhs, v));
    case Op::Exp:
        return f_mul(n, derive(n->lhs, v));
    case Op::Log:
        return f_div(derive(n->lhs, v), n->lhs);
    case Op::Sin:
        return f_mul(make_unary(Op::Cos, n->lhs), derive(n->lhs, v));
    case Op::Cos:
        return f_neg(f_mul(make_unary(Op::Sin, n->lhs), derive(n->lhs, v)));
    case Op::Sqrt:
        return f_div(derive(n->lhs, v), f_mul(make_num(2.0), n));
    case Op::Ang:
        // d/dv <u> = u u' / <u>
        return f_div(f_mul(n->lhs, derive(n->lhs, v)), n);
    case Op::Add:
        return f_add(derive(n->lhs, v), derive(n->rhs, v));
    case Op::Sub:
        return f_sub(derive(n->lhs, v), derive(n->rhs, v));
    case Op::Mul:
        return f_add(f_mul(derive(n->lhs, v), n->rhs), f_mul(n->lhs, derive(n->rhs, v)));
    case Op::Div: {
        auto num = f_sub(f_mul(derive(n->lhs, v), n->rhs), f_mul(n->lhs, derive(n->rhs, v)));
        return f_div(std::move(num), f_pow(n->rhs, 2));
    }
    case Op::Pow: {
        auto du = derive(n->lhs, v);
        if (is_zero(du)) return make_num(0.0);
        return f_mul(f_mul(f_int(n->exponent), f_pow(n->lhs, n->exponent - 1)), du);
    }
    }
    throw std::logic_error("derive: unknown op");
}

double checked(double v, const char* what)
{
    if (!std::isfinite(v)) throw EvalError(std::string("non-finite result in ") + what);
    return v;
}

double apply_unary(Op op, double a)
{
    switch (op) {
    case Op::Neg: return -a;
    case Op::Exp: return checked(std::exp(a), "exp");
    case Op::Log:
        if (!(a > 0.0)) throw EvalError("log of non-positive argument");
        return std::log(a);
    case Op::Sin: return std::sin(a);
    case Op::Cos: return std::cos(a);
    case Op::Sqrt:
        if (a < 0.0) throw EvalError("sqrt of negative argument");
        return std::sqrt(a);
    case Op::Ang: return std::sqrt(1.0 + a * a);
    default: break;
    }
    throw std::logic_error("apply_unary: not a unary op");
}

double int_pow(double base, int e)
{
    if (e < 0) {
        if (base == 0.0) throw EvalError("division by zero in negative power");
        return 1.0 / int_pow(base, -e);
    }
    double result = 1.0;
    double b = base;
    unsigned k = static_cast<unsigned>(e);
    while (k) {
        if (k & 1u) result *= b;
        b *= b;
        k >>= 1u;
    }
    return result;
}

double apply_binary(Op op, double a, double b)
{
    switch (op) {
    case Op::Add: return a + b;
    case Op::Sub: return a - b;
    case Op::Mul: return a * b;
    case Op::Div:
        if (b == 0.0) throw EvalError("division by zero");
        return a / b;
    default: break;
    }
    throw std::logic_error("apply_binary: not a binary op");
}

double eval_node(const Node& n, const std::array<std::optional<double>, kNumVars>& env)
{
    switch (n.op) {
    case Op::Num: return n.value;
    case Op::Variable: {
        const auto& v = env[static_cast<std::size_t>(n.var)];
        if (!v) throw EvalError(std::string("unbound variable '") + var_name(n.var) + "'");
        return *v;
    }
    case Op::Pow: return checked(int_pow(eval_node(*n.lhs, env), n.exponent), "pow");
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div:
        return checked(apply_binary(n.op, eval_node(*n.lhs, env), eval_node(*n.rhs, env)), "arithmetic");
    default:
        return apply_unary(n.op, eval_node(*n.lhs, env));
    }
}

}  // namespace

const char* var_name(Var v)
{
    switch (v) {
    case Var::t: return "t";
    case Var::s: return "s";
    case Var::x: return "x";
    case Var::xi: return "xi";
    }
    return "?";
}

std::optional<Var> var_from_name(const std::string& name)
{
    if (name == "t") return Var::t;
    if (name == "s") return Var::s;
    if (name == "x") return Var::x;
    if (name == "xi") return Var::xi;
    return std::nullopt;
}

int arity(Op op)
{
    switch (op) {
    case Op::Num:
    case Op::Variable: return 0;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div: return 2;
    default: return 1;
    }
}

ParseError::ParseError(Kind kind, std::size_t position, const std::string& message)
    : std::runtime_error(message + " (at position " + std::to_string(position) + ")")
    , kind_(kind)
    , position_(position)
{
}

Expr::Expr() : node_(make_num(0.0)) {}

Expr::Expr(NodePtr node) : node_(std::move(node))
{
    if (!node_) throw std::invalid_argument("Expr: null node");
}

Expr Expr::number(double v)
{
    if (v < 0.0) return Expr(make_unary(Op::Neg, make_num(-v)));
    return Expr(make_num(v));
}

Expr Expr::variable(Var v) { return Expr(make_var(v)); }

int Expr::depth() const { return node_depth(*node_); }
std::size_t Expr::size() const { return node_size(*node_); }

std::array<bool, kNumVars> Expr::free_variables() const
{
    std::array<bool, kNumVars> out{};
    collect_vars(*node_, out);
    return out;
}

bool Expr::depends_on(Var v) const { return free_variables()[static_cast<std::size_t>(v)]; }

Expr operator+(const Expr& a, const Expr& b) { return Expr(make_binary(Op::Add, a.ptr(), b.ptr())); }
Expr operator-(const Expr& a, const Expr& b) { return Expr(make_binary(Op::Sub, a.ptr(), b.ptr())); }
Expr operator*(const Expr& a, const Expr& b) { return Expr(make_binary(Op::Mul, a.ptr(), b.ptr())); }
Expr operator/(const Expr& a, const Expr& b) { return Expr(make_binary(Op::Div, a.ptr(), b.ptr())); }
Expr operator-(const Expr& a) { return Expr(make_unary(Op::Neg, a.ptr())); }

Expr unary(Op op, const Expr& arg)
{
    if (arity(op) != 1 || op == Op::Pow) throw std::invalid_argument("unary: op is not unary");
    return Expr(make_unary(op, arg.ptr()));
}

Expr pow(const Expr& base, int exponent) { return Expr(make_pow(base.ptr(), exponent)); }
Expr exp(const Expr& e) { return unary(Op::Exp, e); }
Expr log(const Expr& e) { return unary(Op::Log, e); }
Expr sin(const Expr& e) { return unary(Op::Sin, e); }
Expr cos(const Expr& e) { return unary(Op::Cos, e); }
Expr sqrt(const Expr& e) { return unary(Op::Sqrt, e); }
Expr ang(const Expr& e) { return unary(Op::Ang, e); }

bool structurally_equal(const Expr& a, const Expr& b)
{
    struct Cmp {
        static bool eq(const Node* x, const Node* y)
        {
            if (x == y) return true;
            if (!x || !y) return false;
            if (x->op != y->op) return false;
            switch (x->op) {
            case Op::Num: return x->value == y->value;
            case Op::Variable: return x->var == y->var;
            case Op::Pow:
                if (x->exponent != y->exponent) return false;
                break;
            default: break;
            }
            return eq(x->lhs.get(), y->lhs.get()) && eq(x->rhs.get(), y->rhs.get());
        }
    };
    return Cmp::eq(a.ptr().get(), b.ptr().get());
}

Env::Env(std::initializer_list<std::pair<Var, double>> bindings)
{
    for (const auto& [v, value] : bindings) bind(v, value);
}

Env Env::from_map(const std::map<std::string, double>& m)
{
    Env env;
    for (const auto& [name, value] : m) {
        auto v = var_from_name(name);
        if (!v) throw EvalError("unknown variable '" + name + "'");
        env.bind(*v, value);
    }
    return env;
}

Env& Env::bind(Var v, double value)
{
    values[static_cast<std::size_t>(v)] = value;
    return *this;
}

double eval(const Expr& e, const Env& env) { return eval_node(e.node(), env.values); }

double eval(const Expr& e, const Point& p)
{
    Env env{{Var::t, p.t}, {Var::s, p.s}, {Var::x, p.x}, {Var::xi, p.xi}};
    return eval(e, env);
}

Expr differentiate(const Expr& e, Var v, int depth_cap)
{
    Expr d(derive(e.ptr(), v));
    if (d.depth() > depth_cap) {
        std::ostringstream msg;
        msg << "derivative depth " << d.depth() << " exceeds cap " << depth_cap;
        throw std::length_error(msg.str());
    }
    return d;
}

// ---- compiled programs ------------------------------------------------------

Program::Program(const Expr& e)
{
    struct Emitter {
        std::vector<Instr>& code;
        std::size_t depth = 0;
        std::size_t max_depth = 0;

        void push() { max_depth = std::max(max_depth, ++depth); }

        void run(const Node& n)
        {
            switch (n.op) {
            case Op::Num:
                code.push_back({Op::Num, Var::x, 0, n.value});
                push();
                return;
            case Op::Variable:
                code.push_back({Op::Variable, n.var, 0, 0.0});
                push();
                return;
            case Op::Add:
            case Op::Sub:
            case Op::Mul:
            case Op::Div:
                run(*n.lhs);
                run(*n.rhs);
                code.push_back({n.op, Var::x, 0, 0.0});
                --depth;
                return;
            default:
                run(*n.lhs);
                code.push_back({n.op, Var::x, n.exponent, 0.0});
                return;
            }
        }
    } emitter{code_};
    emitter.run(e.node());
    max_stack_ = emitter.max_depth;
}

double Program::operator()(const Point& p) const
{
    constexpr std::size_t kInline = 64;
    double inline_stack[kInline];
    std::vector<double> heap_stack;
    double* stack = inline_stack;
    if (max_stack_ > kInline) {
        heap_stack.resize(max_stack_);
        stack = heap_stack.data();
    }
    const double vars[kNumVars] = {p.t, p.s, p.x, p.xi};
    std::size_t top = 0;
    for (const Instr& in : code_) {
        switch (in.op) {
        case Op::Num: stack[top++] = in.value; break;
        case Op::Variable: stack[top++] = vars[static_cast<std::size_t>(in.var)]; break;
        case Op::Add: --top; stack[top - 1] += stack[top]; break;
        case Op::Sub: --top; stack[top - 1] -= stack[top]; break;
        case Op::Mul: --top; stack[top - 1] *= stack[top]; break;
        case Op::Div:
            --top;
            if (stack[top] == 0.0) throw EvalError("division by zero");
            stack[top - 1] /= stack[top];
            break;
        case Op::Pow: stack[top - 1] = int_pow(stack[top - 1], in.exponent); break;
        case Op::Neg: stack[top - 1] = -stack[top - 1]; break;
        case Op::Sin: stack[top - 1] = std::sin(stack[top - 1]); break;
        case Op::Cos: stack[top - 1] = std::cos(stack[top - 1]); break;
        case Op::Ang: stack[top - 1] = std::sqrt(1.0 + stack[top - 1] * stack[top - 1]); break;
        default: stack[top - 1] = apply_unary(in.op, stack[top - 1]); break;
        }
    }
    const double result = stack[0];
    if (!std::isfinite(result)) throw EvalError("non-finite result");
    return result;
}

}  // namespace sgfio::expr
