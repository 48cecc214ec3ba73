#pragma once

#include <cctype>
#include <cmath>
#include <cstdio>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pc2 {

/// Parse failure with the byte offset of the offending token.
struct ExpressionParseError : std::runtime_error {
    std::size_t offset;
    ExpressionParseError(std::string msg, std::size_t off)
        : std::runtime_error(std::move(msg)), offset(off) {}
};

/// Evaluation failure (unknown identifier, unbound u_prev).
struct ExpressionEvalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Variable environment for evaluation. Values are physical coordinates;
/// u_prev carries the previous-iterate surrogate value when bound.
struct EvalEnv {
    std::span<const std::string> names;
    std::span<const double> values;
    std::optional<double> u_prev;

    double lookup(const std::string& name) const {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return values[i];
        throw ExpressionEvalError("unknown identifier '" + name + "'");
    }
};

/// Parsed arithmetic expression over named variables, the usual elementary
/// functions, and the reserved symbol u_prev. Immutable after parse.
class Expression {
public:
    Expression() = default;

    static Expression parse(const std::string& text);

    double eval(const EvalEnv& env) const {
        if (nodes_.empty()) throw ExpressionEvalError("evaluating an empty expression");
        return eval_node(root_, env);
    }

    /// Canonical text form; parsing it back evaluates identically.
    std::string print() const { return nodes_.empty() ? "" : print_node(root_, 0); }

    /// Names of all referenced variables (excluding u_prev), in first-use order.
    std::vector<std::string> variables() const {
        std::vector<std::string> out;
        for (const auto& n : nodes_)
            if (n.kind == Kind::variable &&
                std::find(out.begin(), out.end(), n.name) == out.end())
                out.push_back(n.name);
        return out;
    }

    bool references_u_prev() const {
        for (const auto& n : nodes_)
            if (n.kind == Kind::u_prev) return true;
        return false;
    }

    bool empty() const { return nodes_.empty(); }
    const std::string& source() const { return source_; }

private:
    enum class Kind { number, variable, u_prev, neg, add, sub, mul, div, pow, call };
    enum class Fn { sin, cos, exp, log, sqrt, tanh, abs };

    struct Node {
        Kind kind;
        double value = 0.0;     // number
        std::string name;       // variable
        Fn fn = Fn::sin;        // call
        int a = -1, b = -1;     // children
    };

    std::vector<Node> nodes_;
    int root_ = -1;
    std::string source_;

    double eval_node(int idx, const EvalEnv& env) const {
        const Node& n = nodes_[idx];
        switch (n.kind) {
            case Kind::number: return n.value;
            case Kind::variable: return env.lookup(n.name);
            case Kind::u_prev:
                if (!env.u_prev)
                    throw ExpressionEvalError("u_prev referenced but no previous iterate is bound");
                return *env.u_prev;
            case Kind::neg: return -eval_node(n.a, env);
            case Kind::add: return eval_node(n.a, env) + eval_node(n.b, env);
            case Kind::sub: return eval_node(n.a, env) - eval_node(n.b, env);
            case Kind::mul: return eval_node(n.a, env) * eval_node(n.b, env);
            case Kind::div: return eval_node(n.a, env) / eval_node(n.b, env);
            case Kind::pow: return std::pow(eval_node(n.a, env), eval_node(n.b, env));
            case Kind::call: {
                const double x = eval_node(n.a, env);
                switch (n.fn) {
                    case Fn::sin: return std::sin(x);
                    case Fn::cos: return std::cos(x);
                    case Fn::exp: return std::exp(x);
                    case Fn::log: return std::log(x);
                    case Fn::sqrt: return std::sqrt(x);
                    case Fn::tanh: return std::tanh(x);
                    case Fn::abs: return std::abs(x);
                }
            }
        }
        throw ExpressionEvalError("corrupt expression node");
    }

    // Precedence levels for printing: 0 add/sub, 1 mul/div, 2 unary minus, 3 pow, 4 atom.
    static int precedence(Kind k) {
        switch (k) {
            case Kind::add:
            case Kind::sub: return 0;
            case Kind::mul:
            case Kind::div: return 1;
            case Kind::neg: return 2;
            case Kind::pow: return 3;
            default: return 4;
        }
    }

    static std::string fn_name(Fn f) {
        switch (f) {
            case Fn::sin: return "sin";
            case Fn::cos: return "cos";
            case Fn::exp: return "exp";
            case Fn::log: return "log";
            case Fn::sqrt: return "sqrt";
            case Fn::tanh: return "tanh";
            case Fn::abs: return "abs";
        }
        return "?";
    }

    static std::string format_number(double v) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return buf;
    }

    std::string print_node(int idx, int parent_prec) const {
        const Node& n = nodes_[idx];
        std::string s;
        int prec = precedence(n.kind);
        switch (n.kind) {
            case Kind::number:
                if (n.value < 0) {
                    s = format_number(n.value);
                    prec = precedence(Kind::neg);
                } else {
                    s = format_number(n.value);
                }
                break;
            case Kind::variable: s = n.name; break;
            case Kind::u_prev: s = "u_prev"; break;
            case Kind::neg: s = "-" + print_node(n.a, prec + 1); break;
            case Kind::add: s = print_node(n.a, prec) + " + " + print_node(n.b, prec + 1); break;
            case Kind::sub: s = print_node(n.a, prec) + " - " + print_node(n.b, prec + 1); break;
            case Kind::mul: s = print_node(n.a, prec) + "*" + print_node(n.b, prec + 1); break;
            case Kind::div: s = print_node(n.a, prec) + "/" + print_node(n.b, prec + 1); break;
            case Kind::pow: s = print_node(n.a, prec + 1) + "^" + print_node(n.b, prec); break;
            case Kind::call: return fn_name(n.fn) + "(" + print_node(n.a, 0) + ")";
        }
        if (prec < parent_prec) return "(" + s + ")";
        return s;
    }

    // --- recursive-descent parser -------------------------------------------

    struct Parser {
        const std::string& text;
        std::size_t pos = 0;
        Expression& out;

        explicit Parser(const std::string& t, Expression& e) : text(t), out(e) {}

        [[noreturn]] void fail(const std::string& msg, std::size_t at) const {
            throw ExpressionParseError(msg + " at offset " + std::to_string(at), at);
        }

        void skip_ws() {
            while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
        }

        bool eat(char c) {
            skip_ws();
            if (pos < text.size() && text[pos] == c) {
                ++pos;
                return true;
            }
            return false;
        }

        int make(Node n) {
            out.nodes_.push_back(std::move(n));
            return static_cast<int>(out.nodes_.size()) - 1;
        }

        int parse_expr() {
            int lhs = parse_term();
            for (;;) {
                skip_ws();
                if (eat('+')) {
                    int rhs = parse_term();
                    lhs = make({Kind::add, 0, "", Fn::sin, lhs, rhs});
                } else if (eat('-')) {
                    int rhs = parse_term();
                    lhs = make({Kind::sub, 0, "", Fn::sin, lhs, rhs});
                } else {
                    return lhs;
                }
            }
        }

        int parse_term() {
            int lhs = parse_unary();
            for (;;) {
                skip_ws();
                if (eat('*')) {
                    int rhs = parse_unary();
                    lhs = make({Kind::mul, 0, "", Fn::sin, lhs, rhs});
                } else if (eat('/')) {
                    int rhs = parse_unary();
                    lhs = make({Kind::div, 0, "", Fn::sin, lhs, rhs});
                } else {
                    return lhs;
                }
            }
        }

        int parse_unary() {
            skip_ws();
            if (eat('-')) {
                int a = parse_unary();
                return make({Kind::neg, 0, "", Fn::sin, a, -1});
            }
            return parse_power();
        }

        int parse_power() {
            int base = parse_atom();
            skip_ws();
            if (eat('^')) {
                int expo = parse_unary();  // right-associative, unary allowed in exponent
                return make({Kind::pow, 0, "", Fn::sin, base, expo});
            }
            return base;
        }

        int parse_atom() {
            skip_ws();
            if (pos >= text.size()) fail("unexpected end of expression", pos);
            const char c = text[pos];
            if (c == '(') {
                ++pos;
                int e = parse_expr();
                if (!eat(')')) fail("expected ')'", pos);
                return e;
            }
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
            fail(std::string("unexpected character '") + c + "'", pos);
        }

        int parse_number() {
            const char* start = text.c_str() + pos;
            char* end = nullptr;
            const double v = std::strtod(start, &end);
            if (end == start) fail("invalid number", pos);
            pos += static_cast<std::size_t>(end - start);
            return make({Kind::number, v, "", Fn::sin, -1, -1});
        }

        int parse_identifier() {
            const std::size_t start = pos;
            while (pos < text.size() &&
                   (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
                ++pos;
            const std::string name = text.substr(start, pos - start);
            skip_ws();
            if (pos < text.size() && text[pos] == '(') {
                ++pos;
                Fn fn;
                if (name == "sin") fn = Fn::sin;
                else if (name == "cos") fn = Fn::cos;
                else if (name == "exp") fn = Fn::exp;
                else if (name == "log") fn = Fn::log;
                else if (name == "sqrt") fn = Fn::sqrt;
                else if (name == "tanh") fn = Fn::tanh;
                else if (name == "abs") fn = Fn::abs;
                else fail("unknown function '" + name + "'", start);
                int arg = parse_expr();
                if (!eat(')')) fail("expected ')' closing call to '" + name + "'", pos);
                return make({Kind::call, 0, "", fn, arg, -1});
            }
            if (name == "pi") return make({Kind::number, M_PI, "", Fn::sin, -1, -1});
            if (name == "e") return make({Kind::number, M_E, "", Fn::sin, -1, -1});
            if (name == "u_prev") return make({Kind::u_prev, 0, "", Fn::sin, -1, -1});
            return make({Kind::variable, 0, name, Fn::sin, -1, -1});
        }
    };

    friend struct Parser;
};

inline Expression Expression::parse(const std::string& text) {
    Expression e;
    e.source_ = text;
    Parser p(text, e);
    p.skip_ws();
    if (p.pos >= text.size()) throw ExpressionParseError("empty expression", 0);
    e.root_ = p.parse_expr();
    p.skip_ws();
    if (p.pos != text.size())
        throw ExpressionParseError("trailing input at offset " + std::to_string(p.pos), p.pos);
    return e;
}

}  // namespace pc2
