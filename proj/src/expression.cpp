#include "thermistor/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

#include "thermistor/errors.hpp"

namespace thermistor {

class ExprParser {
public:
    explicit ExprParser(const std::string& src) : src_(src) {}

    Expression run() {
        Expression e;
        e.src_ = src_;
        skip_ws();
        e.root_ = parse_sum(e);
        skip_ws();
        if (pos_ != src_.size()) fail("unexpected trailing input");
        if (e.root_ < 0) fail("empty expression");
        return e;
    }

private:
    const std::string& src_;
    size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw ArgumentError("expression \"" + src_ + "\": " + what + " at position " +
                            std::to_string(pos_));
    }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < src_.size() ? src_[pos_] : '\0';
    }

    int add(Expression& e, Expression::Node n) {
        e.nodes_.push_back(n);
        return static_cast<int>(e.nodes_.size()) - 1;
    }

    int parse_sum(Expression& e) {
        int lhs = parse_product(e);
        for (;;) {
            if (eat('+'))
                lhs = add(e, {Expression::Op::Add, 0.0, lhs, parse_product(e)});
            else if (eat('-'))
                lhs = add(e, {Expression::Op::Sub, 0.0, lhs, parse_product(e)});
            else
                return lhs;
        }
    }

    int parse_product(Expression& e) {
        int lhs = parse_unary(e);
        for (;;) {
            if (eat('*'))
                lhs = add(e, {Expression::Op::Mul, 0.0, lhs, parse_unary(e)});
            else if (eat('/'))
                lhs = add(e, {Expression::Op::Div, 0.0, lhs, parse_unary(e)});
            else
                return lhs;
        }
    }

    int parse_unary(Expression& e) {
        if (eat('-')) return add(e, {Expression::Op::Neg, 0.0, parse_unary(e), -1});
        return parse_power(e);
    }

    int parse_power(Expression& e) {
        int base = parse_primary(e);
        if (eat('^')) {
            // Right-associative; the exponent may itself carry a unary minus.
            int exp = parse_unary(e);
            return add(e, {Expression::Op::Pow, 0.0, base, exp});
        }
        return base;
    }

    int parse_primary(Expression& e) {
        const char c = peek();
        if (c == '(') {
            eat('(');
            int inner = parse_sum(e);
            if (!eat(')')) fail("expected ')'");
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = src_.c_str() + pos_;
            char* end = nullptr;
            const double v = std::strtod(begin, &end);
            if (end == begin) fail("malformed number");
            pos_ += static_cast<size_t>(end - begin);
            return add(e, {Expression::Op::Const, v, -1, -1});
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            size_t start = pos_;
            while (pos_ < src_.size() && std::isalpha(static_cast<unsigned char>(src_[pos_])))
                ++pos_;
            const std::string word = src_.substr(start, pos_ - start);
            if (word == "x") return add(e, {Expression::Op::VarX, 0.0, -1, -1});
            if (word == "y") return add(e, {Expression::Op::VarY, 0.0, -1, -1});
            if (word == "t") return add(e, {Expression::Op::VarT, 0.0, -1, -1});
            Expression::Op op;
            if (word == "sin")
                op = Expression::Op::Sin;
            else if (word == "cos")
                op = Expression::Op::Cos;
            else if (word == "exp")
                op = Expression::Op::Exp;
            else if (word == "log")
                op = Expression::Op::Log;
            else {
                pos_ = start;
                fail("unknown identifier \"" + word + "\"");
            }
            if (!eat('(')) fail("expected '(' after " + word);
            int arg = parse_sum(e);
            if (!eat(')')) fail("expected ')'");
            return add(e, {op, 0.0, arg, -1});
        }
        fail("expected a number, variable, function, or '('");
    }
};

Expression Expression::parse(const std::string& src) {
    return ExprParser(src).run();
}

double Expression::eval(double x, double y, double t) const {
    // Nodes are appended post-order, so children always precede parents.
    std::vector<double> v(nodes_.size());
    for (size_t i = 0; i < nodes_.size(); ++i) {
        const Node& n = nodes_[i];
        switch (n.op) {
            case Op::Const: v[i] = n.value; break;
            case Op::VarX: v[i] = x; break;
            case Op::VarY: v[i] = y; break;
            case Op::VarT: v[i] = t; break;
            case Op::Add: v[i] = v[n.a] + v[n.b]; break;
            case Op::Sub: v[i] = v[n.a] - v[n.b]; break;
            case Op::Mul: v[i] = v[n.a] * v[n.b]; break;
            case Op::Div: v[i] = v[n.a] / v[n.b]; break;
            case Op::Pow: v[i] = std::pow(v[n.a], v[n.b]); break;
            case Op::Neg: v[i] = -v[n.a]; break;
            case Op::Sin: v[i] = std::sin(v[n.a]); break;
            case Op::Cos: v[i] = std::cos(v[n.a]); break;
            case Op::Exp: v[i] = std::exp(v[n.a]); break;
            case Op::Log: v[i] = std::log(v[n.a]); break;
        }
    }
    return v[static_cast<size_t>(root_)];
}

}  // namespace thermistor
