#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace minkshoot {

/// Scalar function of one variable compiled from a small arithmetic language:
/// `+ - * / ^`, unary minus, parentheses, numeric literals, the constant `pi`
/// and the functions `abs sign sin cos exp`. Exactly one variable name is
/// accepted per expression (e.g. `r` for weights, `u` for nonlinearities).
class Expression {
public:
    Expression() = default;

    /// Throws Error(ParseError) on malformed input or unknown identifiers.
    /// `variables` lists the accepted spellings of the free variable.
    static Expression parse(std::string_view text, std::vector<std::string> variables);

    double operator()(double x) const;

    const std::string& source() const noexcept { return source_; }
    bool empty() const noexcept { return code_.empty(); }

    enum class Op : unsigned char {
        Const, Var, Add, Sub, Mul, Div, Pow, PowInt, Neg, Abs, Sign, Sin, Cos, Exp
    };
    struct Instr {
        Op op;
        double value = 0.0;
        int ivalue = 0;
    };

private:
    std::string source_;
    std::vector<Instr> code_;
    std::size_t max_depth_ = 0;
};

}  // namespace minkshoot
