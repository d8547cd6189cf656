#pragma once

// Arithmetic expressions over x and t for coefficient and boundary data:
//     numbers, x, t, pi, e
//     + - * / ^ (right associative), unary minus, parentheses
//     sin cos tan exp log sqrt abs sinh cosh tanh atan step pos   (one argument)
//     min max                                                     (two arguments)
// step(s) is 1 for s >= 0 and 0 otherwise, pos(s) = max(s, 0).
// Parsing happens once; evaluation walks a small tree.

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "fracinv/core.hpp"
#include "fracinv/errors.hpp"

namespace fracinv {

class Expression {
public:
    Expression() = default;

    static Expression parse(const std::string& text) {
        Parser p{text, 0};
        Expression e;
        e.text_ = text;
        e.root_ = p.expression();
        p.skip_space();
        if (p.pos != text.size()) p.fail("unexpected '" + std::string(1, text[p.pos]) + "'");
        return e;
    }

    double operator()(double x, double t = 0.0) const {
        if (!root_) throw InvalidArgument("empty expression");
        return root_->eval(x, t);
    }

    const std::string& text() const noexcept { return text_; }

    /// As a function of x (t = 0).
    ScalarFunction in_x() const {
        auto self = *this;
        return [self](double x) { return self(x, 0.0); };
    }
    /// As a function of t (x = 0).
    ScalarFunction in_t() const {
        auto self = *this;
        return [self](double t) { return self(0.0, t); };
    }

private:
    struct Node {
        virtual ~Node() = default;
        virtual double eval(double x, double t) const = 0;
    };
    using NodePtr = std::shared_ptr<const Node>;

    struct Number : Node {
        double v;
        explicit Number(double v) : v(v) {}
        double eval(double, double) const override { return v; }
    };
    struct Variable : Node {
        bool is_t;
        explicit Variable(bool is_t) : is_t(is_t) {}
        double eval(double x, double t) const override { return is_t ? t : x; }
    };
    struct Unary : Node {
        double (*fn)(double);
        NodePtr arg;
        Unary(double (*fn)(double), NodePtr a) : fn(fn), arg(std::move(a)) {}
        double eval(double x, double t) const override { return fn(arg->eval(x, t)); }
    };
    struct Binary : Node {
        char op;
        NodePtr lhs, rhs;
        Binary(char op, NodePtr l, NodePtr r) : op(op), lhs(std::move(l)), rhs(std::move(r)) {}
        double eval(double x, double t) const override {
            const double a = lhs->eval(x, t);
            const double b = rhs->eval(x, t);
            switch (op) {
            case '+': return a + b;
            case '-': return a - b;
            case '*': return a * b;
            case '/': return a / b;
            case '^': return std::pow(a, b);
            case 'm': return std::min(a, b);
            case 'M': return std::max(a, b);
            }
            return 0.0;
        }
    };

    static double neg(double v) { return -v; }
    static double step_fn(double v) { return v >= 0.0 ? 1.0 : 0.0; }
    static double pos_fn(double v) { return v > 0.0 ? v : 0.0; }

    struct Parser {
        const std::string& s;
        std::size_t pos;

        [[noreturn]] void fail(const std::string& what) const {
            throw InvalidArgument("expression '" + s + "': " + what + " at column " + std::to_string(pos + 1));
        }
        void skip_space() {
            while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        }
        bool accept(char c) {
            skip_space();
            if (pos < s.size() && s[pos] == c) {
                ++pos;
                return true;
            }
            return false;
        }
        void expect(char c) {
            if (!accept(c)) fail(std::string("expected '") + c + "'");
        }

        NodePtr expression() {
            NodePtr lhs = term();
            while (true) {
                if (accept('+')) lhs = std::make_shared<Binary>('+', lhs, term());
                else if (accept('-')) lhs = std::make_shared<Binary>('-', lhs, term());
                else return lhs;
            }
        }
        NodePtr term() {
            NodePtr lhs = unary();
            while (true) {
                if (accept('*')) lhs = std::make_shared<Binary>('*', lhs, unary());
                else if (accept('/')) lhs = std::make_shared<Binary>('/', lhs, unary());
                else return lhs;
            }
        }
        NodePtr unary() {
            if (accept('-')) return std::make_shared<Unary>(&neg, unary());
            if (accept('+')) return unary();
            return power();
        }
        NodePtr power() {
            NodePtr base = primary();
            if (accept('^')) return std::make_shared<Binary>('^', base, unary());
            return base;
        }
        NodePtr primary() {
            skip_space();
            if (pos >= s.size()) fail("unexpected end of input");
            const char c = s[pos];
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                const char* begin = s.c_str() + pos;
                char* end = nullptr;
                const double v = std::strtod(begin, &end);
                if (end == begin) fail("malformed number");
                pos += static_cast<std::size_t>(end - begin);
                return std::make_shared<Number>(v);
            }
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                const std::size_t start = pos;
                while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_')) ++pos;
                const std::string name = s.substr(start, pos - start);
                if (accept('(')) return call(name);
                if (name == "x") return std::make_shared<Variable>(false);
                if (name == "t") return std::make_shared<Variable>(true);
                if (name == "pi") return std::make_shared<Number>(std::numbers::pi);
                if (name == "e") return std::make_shared<Number>(std::numbers::e);
                pos = start;
                fail("unknown name '" + name + "'");
            }
            if (accept('(')) {
                NodePtr inner = expression();
                expect(')');
                return inner;
            }
            fail("unexpected '" + std::string(1, c) + "'");
        }
        NodePtr call(const std::string& name) {
            if (name == "min" || name == "max") {
                NodePtr a = expression();
                expect(',');
                NodePtr b = expression();
                expect(')');
                return std::make_shared<Binary>(name == "min" ? 'm' : 'M', a, b);
            }
            double (*fn)(double) = nullptr;
            if (name == "sin") fn = [](double v) { return std::sin(v); };
            else if (name == "cos") fn = [](double v) { return std::cos(v); };
            else if (name == "tan") fn = [](double v) { return std::tan(v); };
            else if (name == "exp") fn = [](double v) { return std::exp(v); };
            else if (name == "log") fn = [](double v) { return std::log(v); };
            else if (name == "sqrt") fn = [](double v) { return std::sqrt(v); };
            else if (name == "abs") fn = [](double v) { return std::abs(v); };
            else if (name == "sinh") fn = [](double v) { return std::sinh(v); };
            else if (name == "cosh") fn = [](double v) { return std::cosh(v); };
            else if (name == "tanh") fn = [](double v) { return std::tanh(v); };
            else if (name == "atan") fn = [](double v) { return std::atan(v); };
            else if (name == "step") fn = &step_fn;
            else if (name == "pos") fn = &pos_fn;
            else fail("unknown function '" + name + "'");
            NodePtr arg = expression();
            expect(')');
            return std::make_shared<Unary>(fn, arg);
        }
    };

    std::string text_;
    NodePtr root_;
};

} // namespace fracinv
