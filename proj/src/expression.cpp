#include "wobs/expression.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <numbers>
#include <vector>

#include <fmt/format.h>

namespace wobs {

struct Expression::Node {
    enum class Kind { Number, VarT, VarX, VarY, Neg, Add, Sub, Mul, Div, Pow, Call } kind = Kind::Number;
    double number = 0.0;
    std::string fn;
    std::shared_ptr<const Node> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Kind = Expression::Node::Kind;

NodePtr make(Kind k, NodePtr a = nullptr, NodePtr b = nullptr) {
    auto n = std::make_shared<Expression::Node>();
    n->kind = k;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

class Parser {
public:
    explicit Parser(const std::string& s) : s_(s) {}

    NodePtr parse() {
        NodePtr e = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected character");
        return e;
    }

private:
    const std::string& s_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw Error(fmt::format("expression '{}': {} at position {}", s_, what, pos_));
    }
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool eat(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr expr() {
        NodePtr l = term();
        for (;;) {
            if (eat('+')) l = make(Kind::Add, l, term());
            else if (eat('-')) l = make(Kind::Sub, l, term());
            else return l;
        }
    }
    NodePtr term() {
        NodePtr l = unary();
        for (;;) {
            if (eat('*')) l = make(Kind::Mul, l, unary());
            else if (eat('/')) l = make(Kind::Div, l, unary());
            else return l;
        }
    }
    NodePtr unary() {
        if (eat('-')) return make(Kind::Neg, unary());
        if (eat('+')) return unary();
        return power();
    }
    NodePtr power() {
        NodePtr base = primary();
        if (eat('^')) return make(Kind::Pow, base, unary());
        return base;
    }
    NodePtr primary() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end");
        if (eat('(')) {
            NodePtr e = expr();
            if (!eat(')')) fail("missing ')'");
            return e;
        }
        const char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = s_.c_str() + pos_;
            char* end = nullptr;
            const double v = std::strtod(begin, &end);
            if (end == begin) fail("bad number");
            pos_ += static_cast<std::size_t>(end - begin);
            auto n = std::make_shared<Expression::Node>();
            n->number = v;
            return n;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
            const std::string id = s_.substr(start, pos_ - start);
            skip();
            if (pos_ < s_.size() && s_[pos_] == '(') {
                static const std::vector<std::string> fns{"sin", "cos", "tan", "exp", "log", "sqrt", "tanh"};
                if (std::find(fns.begin(), fns.end(), id) == fns.end()) fail("unknown function '" + id + "'");
                eat('(');
                NodePtr arg = expr();
                if (!eat(')')) fail("missing ')'");
                auto n = std::make_shared<Expression::Node>();
                n->kind = Kind::Call;
                n->fn = id;
                n->a = arg;
                return n;
            }
            if (id == "t") return make(Kind::VarT);
            if (id == "x" || id == "x1") return make(Kind::VarX);
            if (id == "y" || id == "x2") return make(Kind::VarY);
            auto n = std::make_shared<Expression::Node>();
            if (id == "pi") n->number = std::numbers::pi;
            else if (id == "e") n->number = std::numbers::e;
            else fail("unknown identifier '" + id + "'");
            return n;
        }
        fail("unexpected character");
    }
};

Jet eval_node(const Expression::Node& n, double t, const Point& x) {
    switch (n.kind) {
        case Kind::Number: return Jet(n.number);
        case Kind::VarT: return Jet(t, {1.0, 0.0, 0.0, 0.0});
        case Kind::VarX: return Jet(x[0], {0.0, 0.0, 1.0, 0.0});
        case Kind::VarY: return Jet(x[1], {0.0, 0.0, 0.0, 1.0});
        case Kind::Neg: return -eval_node(*n.a, t, x);
        case Kind::Add: return eval_node(*n.a, t, x) + eval_node(*n.b, t, x);
        case Kind::Sub: return eval_node(*n.a, t, x) - eval_node(*n.b, t, x);
        case Kind::Mul: return eval_node(*n.a, t, x) * eval_node(*n.b, t, x);
        case Kind::Div: return eval_node(*n.a, t, x) / eval_node(*n.b, t, x);
        case Kind::Pow: {
            const Jet base = eval_node(*n.a, t, x);
            const Jet ex = eval_node(*n.b, t, x);
            bool const_ex = true;
            for (double g : ex.d) const_ex = const_ex && g == 0.0;
            if (const_ex) return pow(base, ex.v);
            return exp(ex * log(base));
        }
        case Kind::Call: {
            const Jet a = eval_node(*n.a, t, x);
            if (n.fn == "sin") return sin(a);
            if (n.fn == "cos") return cos(a);
            if (n.fn == "tan") return sin(a) / cos(a);
            if (n.fn == "exp") return exp(a);
            if (n.fn == "log") return log(a);
            if (n.fn == "sqrt") return sqrt(a);
            const Jet e2 = exp(2.0 * a);
            return (e2 - 1.0) / (e2 + 1.0);
        }
    }
    return Jet(0.0);
}

bool has_variable(const Expression::Node& n) {
    if (n.kind == Kind::VarT || n.kind == Kind::VarX || n.kind == Kind::VarY) return true;
    return (n.a && has_variable(*n.a)) || (n.b && has_variable(*n.b));
}

}  // namespace

Expression Expression::parse(const std::string& text) {
    Expression e;
    e.root_ = Parser(text).parse();
    e.text_ = text;
    return e;
}

Expression Expression::constant(double c) {
    Expression e;
    auto n = std::make_shared<Node>();
    n->number = c;
    e.root_ = n;
    e.text_ = fmt::format("{}", c);
    return e;
}

Jet Expression::eval(double t, const Point& x) const { return eval_node(*root_, t, x); }

bool Expression::is_constant() const { return !has_variable(*root_); }

}  // namespace wobs
