#include "minkshoot/expr.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>

#include "minkshoot/error.hpp"

namespace minkshoot {

namespace {

using Op = Expression::Op;
using Instr = Expression::Instr;

// Recursive-descent parser emitting postfix code.
class Parser {
public:
    Parser(std::string_view text, const std::vector<std::string>& vars) : text_(text), vars_(vars) {}

    std::vector<Instr> run() {
        expression();
        skip_space();
        if (pos_ != text_.size()) fail("unexpected trailing input");
        return std::move(code_);
    }

private:
    std::string_view text_;
    const std::vector<std::string>& vars_;
    std::size_t pos_ = 0;
    std::vector<Instr> code_;

    [[noreturn]] void fail(const std::string& msg) const {
        throw Error(ErrorKind::ParseError,
                    msg + " at position " + std::to_string(pos_) + " in '" + std::string(text_) + "'");
    }

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expression() {
        term();
        for (;;) {
            if (accept('+')) {
                term();
                code_.push_back({Op::Add});
            } else if (accept('-')) {
                term();
                code_.push_back({Op::Sub});
            } else {
                return;
            }
        }
    }

    void term() {
        unary();
        for (;;) {
            if (accept('*')) {
                unary();
                code_.push_back({Op::Mul});
            } else if (accept('/')) {
                unary();
                code_.push_back({Op::Div});
            } else {
                return;
            }
        }
    }

    void unary() {
        if (accept('-')) {
            unary();
            code_.push_back({Op::Neg});
        } else if (accept('+')) {
            unary();
        } else {
            power();
        }
    }

    // '^' is right associative and binds tighter than unary minus on its left.
    void power() {
        primary();
        if (accept('^')) {
            const std::size_t mark = code_.size();
            unary();
            if (code_.size() == mark + 1 && code_.back().op == Op::Const) {
                const double e = code_.back().value;
                if (e == std::floor(e) && std::abs(e) <= 64.0) {
                    code_.back() = {Op::PowInt, 0.0, static_cast<int>(e)};
                    return;
                }
            }
            code_.push_back({Op::Pow});
        }
    }

    void primary() {
        skip_space();
        if (pos_ >= text_.size()) fail("unexpected end of input");
        const char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            number();
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            identifier();
            return;
        }
        if (accept('(')) {
            expression();
            if (!accept(')')) fail("expected ')'");
            return;
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    void number() {
        const std::string rest(text_.substr(pos_));
        char* end = nullptr;
        const double value = std::strtod(rest.c_str(), &end);
        if (end == rest.c_str()) fail("malformed number");
        pos_ += static_cast<std::size_t>(end - rest.c_str());
        code_.push_back({Op::Const, value});
    }

    void identifier() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        const std::string name(text_.substr(start, pos_ - start));

        if (std::find(vars_.begin(), vars_.end(), name) != vars_.end()) {
            code_.push_back({Op::Var});
            return;
        }
        if (name == "pi") {
            code_.push_back({Op::Const, std::numbers::pi});
            return;
        }
        static constexpr std::array<std::pair<std::string_view, Op>, 5> functions{{
            {"abs", Op::Abs}, {"sign", Op::Sign}, {"sin", Op::Sin}, {"cos", Op::Cos}, {"exp", Op::Exp},
        }};
        for (const auto& [fname, op] : functions) {
            if (name == fname) {
                if (!accept('(')) fail("expected '(' after " + name);
                expression();
                if (!accept(')')) fail("expected ')'");
                code_.push_back({op});
                return;
            }
        }
        fail("unknown identifier '" + name + "'");
    }
};

double int_power(double x, int n) {
    const bool invert = n < 0;
    unsigned m = static_cast<unsigned>(invert ? -n : n);
    double result = 1.0;
    while (m) {
        if (m & 1u) result *= x;
        x *= x;
        m >>= 1u;
    }
    return invert ? 1.0 / result : result;
}

}  // namespace

Expression Expression::parse(std::string_view text, std::vector<std::string> variables) {
    Expression e;
    e.source_ = std::string(text);
    e.code_ = Parser(text, variables).run();

    std::size_t depth = 0;
    for (const auto& in : e.code_) {
        switch (in.op) {
            case Op::Const:
            case Op::Var:
                ++depth;
                break;
            case Op::Add:
            case Op::Sub:
            case Op::Mul:
            case Op::Div:
            case Op::Pow:
                --depth;
                break;
            default:
                break;
        }
        e.max_depth_ = std::max(e.max_depth_, depth);
    }
    return e;
}

double Expression::operator()(double x) const {
    constexpr std::size_t kInline = 32;
    std::array<double, kInline> inline_stack{};
    std::vector<double> heap_stack;
    double* stack = inline_stack.data();
    if (max_depth_ > kInline) {
        heap_stack.resize(max_depth_);
        stack = heap_stack.data();
    }

    std::size_t sp = 0;
    for (const auto& in : code_) {
        switch (in.op) {
            case Op::Const: stack[sp++] = in.value; break;
            case Op::Var: stack[sp++] = x; break;
            case Op::Add: --sp; stack[sp - 1] += stack[sp]; break;
            case Op::Sub: --sp; stack[sp - 1] -= stack[sp]; break;
            case Op::Mul: --sp; stack[sp - 1] *= stack[sp]; break;
            case Op::Div: --sp; stack[sp - 1] /= stack[sp]; break;
            case Op::Pow: --sp; stack[sp - 1] = std::pow(stack[sp - 1], stack[sp]); break;
            case Op::PowInt: stack[sp - 1] = int_power(stack[sp - 1], in.ivalue); break;
            case Op::Neg: stack[sp - 1] = -stack[sp - 1]; break;
            case Op::Abs: stack[sp - 1] = std::abs(stack[sp - 1]); break;
            case Op::Sign: {
                const double v = stack[sp - 1];
                stack[sp - 1] = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
                break;
            }
            case Op::Sin: stack[sp - 1] = std::sin(stack[sp - 1]); break;
            case Op::Cos: stack[sp - 1] = std::cos(stack[sp - 1]); break;
            case Op::Exp: stack[sp - 1] = std::exp(stack[sp - 1]); break;
        }
    }
    return stack[0];
}

}  // namespace minkshoot
