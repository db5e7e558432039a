// SPDX-License-Identifier: Apache-2.0
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "sgfio/expr.hpp"

namespace sgfio::expr {

namespace {

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };

struct Token {
    Tok kind;
    std::size_t pos;
    std::string text;
    double number = 0.0;
};

std::vector<Token> lex(const std::string& s)
{
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < s.size()) {
        const char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = s.c_str() + i;
            char* end = nullptr;
            const double v = std::strtod(begin, &end);
            if (end == begin) throw ParseError(ParseError::Kind::Lexical, i, "malformed number");
            const std::size_t len = static_cast<std::size_t>(end - begin);
            out.push_back({Tok::Number, i, s.substr(i, len), v});
            i += len;
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
            out.push_back({Tok::Ident, i, s.substr(i, j - i)});
            i = j;
            continue;
        }
        Tok k;
        switch (c) {
        case '+': k = Tok::Plus; break;
        case '-': k = Tok::Minus; break;
        case '*': k = Tok::Star; break;
        case '/': k = Tok::Slash; break;
        case '^': k = Tok::Caret; break;
        case '(': k = Tok::LParen; break;
        case ')': k = Tok::RParen; break;
        default:
            throw ParseError(ParseError::Kind::Lexical, i, std::string("unknown token '") + c + "'");
        }
        out.push_back({k, i, std::string(1, c)});
        ++i;
    }
    out.push_back({Tok::End, s.size(), ""});
    return out;
}

std::optional<Op> function_op(const std::string& name)
{
    if (name == "exp") return Op::Exp;
    if (name == "log") return Op::Log;
    if (name == "sin") return Op::Sin;
    if (name == "cos") return Op::Cos;
    if (name == "sqrt") return Op::Sqrt;
    if (name == "ang") return Op::Ang;
    return std::nullopt;
}

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    Expr parse_all()
    {
        Expr e = parse_sum();
        if (peek().kind != Tok::End) syntax("unexpected '" + peek().text + "'");
        return e;
    }

private:
    const Token& peek() const { return toks_[pos_]; }
    const Token& next() { return toks_[pos_++]; }
    bool accept(Tok k)
    {
        if (peek().kind != k) return false;
        ++pos_;
        return true;
    }
    [[noreturn]] void syntax(const std::string& msg) const
    {
        throw ParseError(ParseError::Kind::Syntax, peek().pos, msg);
    }
    void expect(Tok k, const char* what)
    {
        if (!accept(k)) syntax(std::string("expected ") + what);
    }

    Expr parse_sum()
    {
        Expr lhs = parse_product();
        for (;;) {
            if (accept(Tok::Plus))
                lhs = lhs + parse_product();
            else if (accept(Tok::Minus))
                lhs = lhs - parse_product();
            else
                return lhs;
        }
    }

    Expr parse_product()
    {
        Expr lhs = parse_unary();
        for (;;) {
            if (accept(Tok::Star))
                lhs = lhs * parse_unary();
            else if (accept(Tok::Slash))
                lhs = lhs / parse_unary();
            else
                return lhs;
        }
    }

    Expr parse_unary()
    {
        if (accept(Tok::Minus)) return -parse_unary();
        return parse_power();
    }

    Expr parse_power()
    {
        Expr base = parse_primary();
        if (accept(Tok::Caret)) return pow(base, parse_int_exponent());
        return base;
    }

    int parse_int_exponent()
    {
        if (accept(Tok::LParen)) {
            const int e = parse_int_exponent();
            expect(Tok::RParen, "')'");
            return e;
        }
        int sign = 1;
        if (accept(Tok::Minus))
            sign = -1;
        else
            accept(Tok::Plus);
        if (peek().kind != Tok::Number) syntax("exponent must be an integer literal");
        const Token& t = next();
        if (t.number != std::floor(t.number) || std::abs(t.number) > 1e6)
            throw ParseError(ParseError::Kind::Syntax, t.pos, "exponent must be an integer literal");
        return sign * static_cast<int>(t.number);
    }

    Expr parse_primary()
    {
        const Token& t = peek();
        switch (t.kind) {
        case Tok::Number:
            ++pos_;
            return Expr::number(t.number);
        case Tok::LParen: {
            ++pos_;
            Expr e = parse_sum();
            expect(Tok::RParen, "')'");
            return e;
        }
        case Tok::Ident: {
            ++pos_;
            if (auto v = var_from_name(t.text)) return Expr::variable(*v);
            if (auto f = function_op(t.text)) {
                expect(Tok::LParen, "'(' after function name");
                Expr arg = parse_sum();
                expect(Tok::RParen, "')'");
                return unary(*f, arg);
            }
            throw ParseError(ParseError::Kind::UnknownIdentifier, t.pos, "unknown identifier '" + t.text + "'");
        }
        case Tok::End: syntax("unexpected end of input");
        default: syntax("unexpected '" + t.text + "'");
        }
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

int precedence(const Node& n)
{
    switch (n.op) {
    case Op::Add:
    case Op::Sub: return 1;
    case Op::Mul:
    case Op::Div: return 2;
    case Op::Neg: return 3;
    case Op::Pow: return 4;
    default: return 5;
    }
}

void print_node(const Node& n, std::string& out);

void print_child(const Node& child, bool parens, std::string& out)
{
    if (parens) out += '(';
    print_node(child, out);
    if (parens) out += ')';
}

const char* function_name(Op op)
{
    switch (op) {
    case Op::Exp: return "exp";
    case Op::Log: return "log";
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::Sqrt: return "sqrt";
    case Op::Ang: return "ang";
    default: return nullptr;
    }
}

void print_node(const Node& n, std::string& out)
{
    switch (n.op) {
    case Op::Num: {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", n.value);
        if (n.value < 0.0) {
            out += '(';
            out += buf;
            out += ')';
        } else {
            out += buf;
        }
        return;
    }
    case Op::Variable: out += var_name(n.var); return;
    case Op::Neg:
        out += '-';
        print_child(*n.lhs, precedence(*n.lhs) < 3, out);
        return;
    case Op::Pow:
        print_child(*n.lhs, precedence(*n.lhs) < 5, out);
        out += '^';
        out += std::to_string(n.exponent);
        return;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div: {
        const int p = precedence(n);
        print_child(*n.lhs, precedence(*n.lhs) < p, out);
        switch (n.op) {
        case Op::Add: out += " + "; break;
        case Op::Sub: out += " - "; break;
        case Op::Mul: out += '*'; break;
        default: out += '/'; break;
        }
        // Left-associative parser: an equal-precedence right operand needs parens.
        print_child(*n.rhs, precedence(*n.rhs) <= p && precedence(*n.rhs) < 3, out);
        return;
    }
    default:
        out += function_name(n.op);
        out += '(';
        print_node(*n.lhs, out);
        out += ')';
        return;
    }
}

}  // namespace

Expr parse(const std::string& text) { return Parser(lex(text)).parse_all(); }

std::string print(const Expr& e)
{
    std::string out;
    print_node(e.node(), out);
    return out;
}

}  // namespace sgfio::expr
