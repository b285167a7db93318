// Tiny arithmetic expression grammar for boundary data in config files:
// numbers, variables x, y, t, operators + - * / ^ (right-associative
// power), unary minus, functions sin cos exp log, and parentheses.
// Deliberately nothing else.

#ifndef THERMISTOR_EXPRESSION_HPP
#define THERMISTOR_EXPRESSION_HPP

#include <string>
#include <vector>

namespace thermistor {

class Expression {
public:
    // Throws ArgumentError with the offending position on malformed input.
    static Expression parse(const std::string& src);

    double eval(double x, double y, double t) const;
    const std::string& source() const { return src_; }

private:
    enum class Op { Const, VarX, VarY, VarT, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp, Log };
    struct Node {
        Op op;
        double value = 0.0;
        int a = -1, b = -1;
    };
    std::string src_;
    std::vector<Node> nodes_;
    int root_ = -1;

    friend class ExprParser;
};

}  // namespace thermistor

#endif
