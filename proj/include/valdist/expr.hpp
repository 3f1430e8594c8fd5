#pragma once

#include <cctype>
#include <cmath>
#include <cstdio>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "valdist/complexutil.hpp"
#include "valdist/errors.hpp"

namespace valdist {

enum class NodeKind {
    Variable,   // the single free variable, printed "z"
    Literal,    // finite complex constant
    Parameter,  // named symbol, bound later
    Add, Sub, Mul, Div,
    Pow,        // integer exponent (may be negative)
    Exp, Sin, Cos,
    Derivative  // D(child, order), order >= 1
};

/// Immutable expression tree with value semantics on the handle. Copies are
/// cheap (shared nodes); nodes are never mutated after construction, so an
/// Expr can be evaluated from any number of threads.
class Expr {
    struct Node {
        NodeKind kind = NodeKind::Variable;
        Complex value{};           // Literal
        std::string name{};        // Parameter
        long long exponent = 0;    // Pow
        int order = 0;             // Derivative
        std::vector<Expr> child{};
    };

public:
    Expr() : Expr(variable()) {}

    static Expr variable() { return freeze({NodeKind::Variable}); }

    static Expr literal(Complex c) {
        if (!is_finite(c)) throw PreconditionError("literal must be finite");
        Node n{NodeKind::Literal};
        n.value = c;
        return freeze(std::move(n));
    }
    static Expr literal(double x) { return literal(Complex{x, 0.0}); }

    static Expr parameter(std::string name) {
        if (name.empty()) throw PreconditionError("empty parameter name");
        Node n{NodeKind::Parameter};
        n.name = std::move(name);
        return freeze(std::move(n));
    }

    static Expr binary(NodeKind k, Expr a, Expr b) {
        Node n{k};
        n.child = {std::move(a), std::move(b)};
        return freeze(std::move(n));
    }

    static Expr pow(Expr base, long long e) {
        Node n{NodeKind::Pow};
        n.exponent = e;
        n.child = {std::move(base)};
        return freeze(std::move(n));
    }

    static Expr exp(Expr a) { return unary(NodeKind::Exp, std::move(a)); }
    static Expr sin(Expr a) { return unary(NodeKind::Sin, std::move(a)); }
    static Expr cos(Expr a) { return unary(NodeKind::Cos, std::move(a)); }

    static Expr derivative(Expr a, int order) {
        if (order < 1) throw PreconditionError("derivative order must be >= 1");
        Node n{NodeKind::Derivative};
        n.order = order;
        n.child = {std::move(a)};
        return freeze(std::move(n));
    }

    friend Expr operator+(Expr a, Expr b) { return binary(NodeKind::Add, std::move(a), std::move(b)); }
    friend Expr operator-(Expr a, Expr b) { return binary(NodeKind::Sub, std::move(a), std::move(b)); }
    friend Expr operator*(Expr a, Expr b) { return binary(NodeKind::Mul, std::move(a), std::move(b)); }
    friend Expr operator/(Expr a, Expr b) { return binary(NodeKind::Div, std::move(a), std::move(b)); }

    NodeKind kind() const { return node_->kind; }
    Complex value() const { return node_->value; }
    const std::string& name() const { return node_->name; }
    long long exponent() const { return node_->exponent; }
    int order() const { return node_->order; }
    std::size_t arity() const { return node_->child.size(); }
    const Expr& child(std::size_t i) const { return node_->child[i]; }

    /// Structural equality (same shape, identical payloads).
    bool equals(const Expr& other) const {
        if (node_ == other.node_) return true;
        if (kind() != other.kind() || arity() != other.arity()) return false;
        switch (kind()) {
            case NodeKind::Literal:
                if (value() != other.value()) return false;
                break;
            case NodeKind::Parameter:
                if (name() != other.name()) return false;
                break;
            case NodeKind::Pow:
                if (exponent() != other.exponent()) return false;
                break;
            case NodeKind::Derivative:
                if (order() != other.order()) return false;
                break;
            default:
                break;
        }
        for (std::size_t i = 0; i < arity(); ++i)
            if (!child(i).equals(other.child(i))) return false;
        return true;
    }

    void collect_parameters(std::set<std::string>& out) const {
        if (kind() == NodeKind::Parameter) out.insert(name());
        for (const auto& c : node_->child) c.collect_parameters(out);
    }

    bool has_parameters() const {
        std::set<std::string> s;
        collect_parameters(s);
        return !s.empty();
    }

    bool contains_parameter(const std::string& p) const {
        std::set<std::string> s;
        collect_parameters(s);
        return s.count(p) > 0;
    }

    /// Replace every occurrence of the named parameter by a literal.
    Expr substitute(const std::string& param, Complex v) const {
        return substitute(param, literal(v));
    }

    Expr substitute(const std::string& param, const Expr& replacement) const {
        if (kind() == NodeKind::Parameter)
            return name() == param ? replacement : *this;
        if (node_->child.empty()) return *this;
        std::vector<Expr> rebuilt;
        rebuilt.reserve(arity());
        bool changed = false;
        for (const auto& c : node_->child) {
            rebuilt.push_back(c.substitute(param, replacement));
            changed = changed || rebuilt.back().node_ != c.node_;
        }
        if (!changed) return *this;
        Node n{kind()};
        n.value = node_->value;
        n.name = node_->name;
        n.exponent = node_->exponent;
        n.order = node_->order;
        n.child = std::move(rebuilt);
        return freeze(std::move(n));
    }

    std::string str() const {
        std::string out;
        print(out, 0);
        return out;
    }

private:
    static Expr freeze(Node n) {
        Expr e(nullptr);
        e.node_ = std::make_shared<const Node>(std::move(n));
        return e;
    }
    static Expr unary(NodeKind k, Expr a) {
        Node n{k};
        n.child = {std::move(a)};
        return freeze(std::move(n));
    }
    explicit Expr(std::nullptr_t) {}

    // Printer precedence levels: add/sub 1, mul/div 2, unary minus 3,
    // power/atom 4. Complex literals print as the expression they re-parse
    // to ("a + b*i" is a sum, "b*i" a product), so they take that level.
    int precedence() const {
        switch (kind()) {
            case NodeKind::Add:
            case NodeKind::Sub: return 1;
            case NodeKind::Mul:
            case NodeKind::Div: return 2;
            case NodeKind::Pow: return 4;
            case NodeKind::Literal: {
                const Complex c = value();
                if (c.imag() == 0.0) return c.real() < 0.0 ? 3 : 4;
                if (c.real() == 0.0) return 2;
                return 1;
            }
            default: return 4;
        }
    }

    static void print_double(std::string& out, double x) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", x);
        out += buf;
    }

    void print(std::string& out, int need) const {
        const bool parens = precedence() < need;
        if (parens) out += '(';
        switch (kind()) {
            case NodeKind::Variable: out += 'z'; break;
            case NodeKind::Literal: {
                const Complex c = value();
                if (c.imag() == 0.0) {
                    print_double(out, c.real());
                } else if (c.real() == 0.0) {
                    print_double(out, c.imag());
                    out += "*i";
                } else {
                    print_double(out, c.real());
                    out += c.imag() < 0.0 ? " - " : " + ";
                    print_double(out, std::fabs(c.imag()));
                    out += "*i";
                }
                break;
            }
            case NodeKind::Parameter: out += name(); break;
            case NodeKind::Add:
                child(0).print(out, 1); out += " + "; child(1).print(out, 2);
                break;
            case NodeKind::Sub:
                child(0).print(out, 1); out += " - "; child(1).print(out, 2);
                break;
            case NodeKind::Mul:
                child(0).print(out, 2); out += "*"; child(1).print(out, 3);
                break;
            case NodeKind::Div:
                child(0).print(out, 2); out += "/"; child(1).print(out, 3);
                break;
            case NodeKind::Pow:
                child(0).print(out, 5);  // force parens unless plain atom
                out += '^';
                out += std::to_string(exponent());
                break;
            case NodeKind::Exp: out += "exp("; child(0).print(out, 0); out += ')'; break;
            case NodeKind::Sin: out += "sin("; child(0).print(out, 0); out += ')'; break;
            case NodeKind::Cos: out += "cos("; child(0).print(out, 0); out += ')'; break;
            case NodeKind::Derivative:
                out += "D(";
                child(0).print(out, 0);
                out += ", ";
                out += std::to_string(order());
                out += ')';
                break;
        }
        if (parens) out += ')';
    }

    std::shared_ptr<const Node> node_;
    friend class Parser;
};

namespace detail {

/// Recursive-descent parser for the expression grammar (docs/grammar.ebnf).
/// Precedence, tightest first: power, unary minus, mul/div, add/sub.
/// Arithmetic over literal-only operands is folded to a literal so that
/// complex constants survive a print/parse round trip as single nodes.
class ExprParser {
public:
    ExprParser(std::string_view src, std::span<const std::string> params)
        : src_(src), params_(params.begin(), params.end()) {}

    Expr parse() {
        Expr e = parse_sum();
        skip_ws();
        if (pos_ != src_.size())
            throw SyntaxError("unexpected trailing input", pos_);
        return e;
    }

private:
    Expr parse_sum() {
        Expr lhs = parse_term();
        for (;;) {
            skip_ws();
            if (accept('+')) lhs = fold(Expr::binary(NodeKind::Add, lhs, parse_term()));
            else if (accept('-')) lhs = fold(Expr::binary(NodeKind::Sub, lhs, parse_term()));
            else return lhs;
        }
    }

    Expr parse_term() {
        Expr lhs = parse_unary();
        for (;;) {
            skip_ws();
            if (accept('*')) lhs = fold(Expr::binary(NodeKind::Mul, lhs, parse_unary()));
            else if (accept('/')) lhs = fold(Expr::binary(NodeKind::Div, lhs, parse_unary()));
            else return lhs;
        }
    }

    Expr parse_unary() {
        skip_ws();
        if (accept('-')) {
            Expr inner = parse_unary();
            if (inner.kind() == NodeKind::Literal)
                return Expr::literal(-inner.value());
            return fold(Expr::binary(NodeKind::Sub, Expr::literal(0.0), inner));
        }
        return parse_power();
    }

    Expr parse_power() {
        Expr base = parse_atom();
        for (;;) {
            skip_ws();
            if (!accept('^')) return base;
            skip_ws();
            long long e = parse_integer();
            if (base.kind() == NodeKind::Literal)
                base = Expr::literal(pow_literal(base.value(), e));
            else
                base = Expr::pow(base, e);
        }
    }

    Expr parse_atom() {
        skip_ws();
        if (pos_ >= src_.size()) throw SyntaxError("unexpected end of input", pos_);
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            Expr e = parse_sum();
            skip_ws();
            if (!accept(')')) throw SyntaxError("expected ')'", pos_);
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
        throw SyntaxError(std::string("unexpected character '") + c + "'", pos_);
    }

    Expr parse_number() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t mark = pos_++;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            } else {
                pos_ = mark;  // 'e' belongs to something else
            }
        }
        if (pos_ == start) throw SyntaxError("malformed number", start);
        double x = 0.0;
        try {
            x = std::stod(std::string(src_.substr(start, pos_ - start)));
        } catch (const std::exception&) {
            throw SyntaxError("malformed number", start);
        }
        return Expr::literal(x);
    }

    Expr parse_identifier() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        const std::string id(src_.substr(start, pos_ - start));
        if (id == "z") return Expr::variable();
        if (id == "i") return Expr::literal(Complex{0.0, 1.0});
        if (id == "pi") return Expr::literal(Complex{3.14159265358979323846, 0.0});
        if (id == "exp" || id == "sin" || id == "cos") {
            expect('(', "expected '(' after function name");
            Expr arg = parse_sum();
            expect(')', "expected ')'");
            Expr e = id == "exp" ? Expr::exp(arg) : id == "sin" ? Expr::sin(arg) : Expr::cos(arg);
            if (arg.kind() == NodeKind::Literal) return Expr::literal(call_literal(id, arg.value()));
            return e;
        }
        if (id == "D") {
            expect('(', "expected '(' after D");
            Expr arg = parse_sum();
            skip_ws();
            expect(',', "expected ',' in D(expr, order)");
            skip_ws();
            long long k = parse_integer();
            if (k < 1) throw SyntaxError("derivative order must be >= 1", start);
            expect(')', "expected ')'");
            return Expr::derivative(arg, static_cast<int>(k));
        }
        for (const auto& p : params_)
            if (p == id) return Expr::parameter(id);
        throw UnknownIdentifier("'" + id + "' is neither z nor a declared parameter");
    }

    long long parse_integer() {
        skip_ws();
        std::size_t start = pos_;
        bool neg = false;
        if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) {
            neg = src_[pos_] == '-';
            ++pos_;
        }
        if (pos_ >= src_.size() || !std::isdigit(static_cast<unsigned char>(src_[pos_])))
            throw SyntaxError("expected integer", start);
        long long v = 0;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
            v = v * 10 + (src_[pos_] - '0');
            if (v > (1ll << 40)) throw SyntaxError("integer too large", start);
            ++pos_;
        }
        return neg ? -v : v;
    }

    // Fold arithmetic whose operands are all literals.
    static Expr fold(Expr e) {
        for (std::size_t i = 0; i < e.arity(); ++i)
            if (e.child(i).kind() != NodeKind::Literal) return e;
        switch (e.kind()) {
            case NodeKind::Add: return Expr::literal(e.child(0).value() + e.child(1).value());
            case NodeKind::Sub: return Expr::literal(e.child(0).value() - e.child(1).value());
            case NodeKind::Mul: return Expr::literal(e.child(0).value() * e.child(1).value());
            case NodeKind::Div: {
                if (e.child(1).value() == Complex{0.0, 0.0}) return e;  // error surfaces at evaluation
                Complex q = e.child(0).value() / e.child(1).value();
                if (!is_finite(q)) return e;
                return Expr::literal(q);
            }
            default: return e;
        }
    }

    static Complex pow_literal(Complex b, long long e) {
        if (e == 0) return Complex{1.0, 0.0};
        bool inv = e < 0;
        unsigned long long n = inv ? static_cast<unsigned long long>(-e) : static_cast<unsigned long long>(e);
        Complex acc{1.0, 0.0}, p = b;
        while (n) {
            if (n & 1) acc *= p;
            p *= p;
            n >>= 1;
        }
        return inv ? 1.0 / acc : acc;
    }

    static Complex call_literal(const std::string& f, Complex a) {
        if (f == "exp") return std::exp(a);
        if (f == "sin") return std::sin(a);
        return std::cos(a);
    }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }
    bool accept(char c) {
        if (pos_ < src_.size() && src_[pos_] == c) { ++pos_; return true; }
        return false;
    }
    void expect(char c, const char* msg) {
        skip_ws();
        if (!accept(c)) throw SyntaxError(msg, pos_);
    }

    std::string_view src_;
    std::vector<std::string> params_;
    std::size_t pos_ = 0;
};

} // namespace detail

inline Expr parse(std::string_view source, std::span<const std::string> parameters = {}) {
    return detail::ExprParser(source, parameters).parse();
}

inline Expr parse(std::string_view source, std::initializer_list<std::string> parameters) {
    std::vector<std::string> p(parameters);
    return detail::ExprParser(source, p).parse();
}

/// expr(c0 + c1*z), as a new expression in the same variable. Composition is
/// by function value: a D(g, k) node still denotes the k-th derivative of g,
/// evaluated at c0 + c1*z, so the chain-rule factor c1^k is divided back out.
inline Expr affine_precompose(const Expr& expr, Complex c0, Complex c1) {
    if (c1 == Complex{0.0, 0.0}) throw DegenerateScale("affine precompose with c1 = 0");
    Expr inner = Expr::literal(c0) + Expr::literal(c1) * Expr::variable();
    struct Rebuild {
        const Expr& inner;
        Complex c1;
        Expr operator()(const Expr& e) const {
            if (e.kind() == NodeKind::Variable) return inner;
            if (e.arity() == 0) return e;
            std::vector<Expr> ch;
            ch.reserve(e.arity());
            for (std::size_t i = 0; i < e.arity(); ++i) ch.push_back((*this)(e.child(i)));
            switch (e.kind()) {
                case NodeKind::Add: return Expr::binary(NodeKind::Add, ch[0], ch[1]);
                case NodeKind::Sub: return Expr::binary(NodeKind::Sub, ch[0], ch[1]);
                case NodeKind::Mul: return Expr::binary(NodeKind::Mul, ch[0], ch[1]);
                case NodeKind::Div: return Expr::binary(NodeKind::Div, ch[0], ch[1]);
                case NodeKind::Pow: return Expr::pow(ch[0], e.exponent());
                case NodeKind::Exp: return Expr::exp(ch[0]);
                case NodeKind::Sin: return Expr::sin(ch[0]);
                case NodeKind::Cos: return Expr::cos(ch[0]);
                case NodeKind::Derivative: {
                    Complex scale{1.0, 0.0};
                    for (int k = 0; k < e.order(); ++k) scale /= c1;
                    return Expr::literal(scale) * Expr::derivative(ch[0], e.order());
                }
                default: return e;
            }
        }
    };
    return Rebuild{inner, c1}(expr);
}

/// One-parameter family f_p with a finite list of parameter values.
class Family {
public:
    Family(Expr base, std::string parameter, std::vector<Complex> values)
        : base_(std::move(base)), parameter_(std::move(parameter)), values_(std::move(values)) {
        if (values_.empty()) throw PreconditionError("family needs at least one parameter value");
        if (!base_.contains_parameter(parameter_))
            throw PreconditionError("parameter '" + parameter_ + "' does not occur in the base expression");
    }

    const Expr& base() const { return base_; }
    const std::string& parameter() const { return parameter_; }
    const std::vector<Complex>& values() const { return values_; }
    std::size_t size() const { return values_.size(); }

    Expr instantiate(std::size_t index) const {
        if (index >= values_.size())
            throw IndexOutOfRange("family index " + std::to_string(index) + " out of range (size " +
                                  std::to_string(values_.size()) + ")");
        return base_.substitute(parameter_, values_[index]);
    }

private:
    Expr base_;
    std::string parameter_;
    std::vector<Complex> values_;
};

} // namespace valdist
