#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <memory>
#include <string>
#include <utility>

#include "garkit/errors.hpp"
#include "garkit/model.hpp"

namespace garkit {

// Parse failure at a byte offset, with a description of what was expected.
class parse_error : public config_error {
public:
    parse_error(std::size_t offset, const std::string& expected)
        : config_error("parse error at offset " + std::to_string(offset) + ": expected " +
                       expected),
          offset_(offset), expected_(expected) {}

    std::size_t offset() const noexcept { return offset_; }
    const std::string& expected() const noexcept { return expected_; }

private:
    std::size_t offset_;
    std::string expected_;
};

// Unknown identifier (the only variable is x; calls are a fixed set).
class name_error : public config_error {
public:
    name_error(std::size_t offset, const std::string& name)
        : config_error("unknown name '" + name + "' at offset " + std::to_string(offset)),
          offset_(offset), name_(name) {}

    std::size_t offset() const noexcept { return offset_; }
    const std::string& name() const noexcept { return name_; }

private:
    std::size_t offset_;
    std::string name_;
};

enum class expr_kind { number, variable, negate, add, sub, mul, div, pow, call };

enum class expr_fn { exp_fn, log_fn, abs_fn, sqrt_fn, cdf_fn };

struct expr_node;
using expr = std::shared_ptr<const expr_node>;

// Expressions over one free variable x.  pow(a,b) and a^b build the same
// node.  cdf(...) couples the expression to a distribution model at
// evaluation time.
struct expr_node {
    expr_kind kind;
    double value = 0.0; // number
    expr_fn fn = expr_fn::exp_fn;
    expr a;
    expr b;
};

namespace exprdetail {

inline expr make_number(double v) {
    auto n = std::make_shared<expr_node>();
    n->kind = expr_kind::number;
    n->value = v;
    return n;
}

inline expr make_variable() {
    auto n = std::make_shared<expr_node>();
    n->kind = expr_kind::variable;
    return n;
}

inline expr make_unary(expr_kind k, expr a) {
    auto n = std::make_shared<expr_node>();
    n->kind = k;
    n->a = std::move(a);
    return n;
}

inline expr make_binary(expr_kind k, expr a, expr b) {
    auto n = std::make_shared<expr_node>();
    n->kind = k;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

inline expr make_call(expr_fn f, expr a) {
    auto n = std::make_shared<expr_node>();
    n->kind = expr_kind::call;
    n->fn = f;
    n->a = std::move(a);
    return n;
}

enum class token_kind { number, ident, plus, minus, star, slash, caret, lparen, rparen, comma, end };

struct token {
    token_kind kind;
    std::size_t offset;
    double value = 0.0;
    std::string text;
};

class lexer {
public:
    explicit lexer(const std::string& text) : text_(text) { advance(); }

    const token& peek() const noexcept { return current_; }

    token take() {
        token t = current_;
        advance();
        return t;
    }

private:
    void advance() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) {
            ++pos_;
        }
        current_.offset = pos_;
        current_.text.clear();
        if (pos_ >= text_.size()) {
            current_.kind = token_kind::end;
            return;
        }
        char c = text_[pos_];
        switch (c) {
            case '+': current_.kind = token_kind::plus; ++pos_; return;
            case '-': current_.kind = token_kind::minus; ++pos_; return;
            case '*': current_.kind = token_kind::star; ++pos_; return;
            case '/': current_.kind = token_kind::slash; ++pos_; return;
            case '^': current_.kind = token_kind::caret; ++pos_; return;
            case '(': current_.kind = token_kind::lparen; ++pos_; return;
            case ')': current_.kind = token_kind::rparen; ++pos_; return;
            case ',': current_.kind = token_kind::comma; ++pos_; return;
            default: break;
        }
        if ((c >= '0' && c <= '9') || c == '.') {
            std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   ((text_[pos_] >= '0' && text_[pos_] <= '9') || text_[pos_] == '.')) {
                ++pos_;
            }
            if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
                std::size_t mark = pos_;
                ++pos_;
                if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) {
                    ++pos_;
                }
                if (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') {
                    while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') {
                        ++pos_;
                    }
                } else {
                    pos_ = mark; // bare 'e' belongs to the next token
                }
            }
            std::string tok = text_.substr(start, pos_ - start);
            double v = 0.0;
            auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) {
                throw parse_error(start, "a numeric literal");
            }
            current_.kind = token_kind::number;
            current_.value = v;
            return;
        }
        if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_') {
            std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   ((text_[pos_] >= 'a' && text_[pos_] <= 'z') ||
                    (text_[pos_] >= 'A' && text_[pos_] <= 'Z') ||
                    (text_[pos_] >= '0' && text_[pos_] <= '9') || text_[pos_] == '_')) {
                ++pos_;
            }
            current_.kind = token_kind::ident;
            current_.text = text_.substr(start, pos_ - start);
            return;
        }
        throw parse_error(pos_, "a number, name, operator, or parenthesis");
    }

    const std::string& text_;
    std::size_t pos_ = 0;
    token current_{token_kind::end, 0, 0.0, {}};
};

// Recursive descent with the precedence ladder
//   + -  <  * /  <  unary -  <  ^ (right associative).
class parser {
public:
    explicit parser(const std::string& text) : lex_(text) {}

    expr parse_all() {
        expr e = expression();
        if (lex_.peek().kind != token_kind::end) {
            throw parse_error(lex_.peek().offset, "an operator or end of input");
        }
        return e;
    }

private:
    expr expression() {
        expr lhs = term();
        for (;;) {
            token_kind k = lex_.peek().kind;
            if (k == token_kind::plus || k == token_kind::minus) {
                lex_.take();
                expr rhs = term();
                lhs = make_binary(k == token_kind::plus ? expr_kind::add : expr_kind::sub,
                                  std::move(lhs), std::move(rhs));
            } else {
                return lhs;
            }
        }
    }

    expr term() {
        expr lhs = factor();
        for (;;) {
            token_kind k = lex_.peek().kind;
            if (k == token_kind::star || k == token_kind::slash) {
                lex_.take();
                expr rhs = factor();
                lhs = make_binary(k == token_kind::star ? expr_kind::mul : expr_kind::div,
                                  std::move(lhs), std::move(rhs));
            } else {
                return lhs;
            }
        }
    }

    expr factor() {
        if (lex_.peek().kind == token_kind::minus) {
            lex_.take();
            return make_unary(expr_kind::negate, factor());
        }
        return power();
    }

    expr power() {
        expr base = primary();
        if (lex_.peek().kind == token_kind::caret) {
            lex_.take();
            // The exponent re-enters at factor so unary minus binds there
            // and chains of ^ associate to the right.
            return make_binary(expr_kind::pow, std::move(base), factor());
        }
        return base;
    }

    expr primary() {
        token t = lex_.take();
        switch (t.kind) {
            case token_kind::number:
                return make_number(t.value);
            case token_kind::lparen: {
                expr e = expression();
                expect(token_kind::rparen, "')'");
                return e;
            }
            case token_kind::ident: {
                if (t.text == "x") {
                    return make_variable();
                }
                if (t.text == "pow") {
                    expect(token_kind::lparen, "'('");
                    expr a = expression();
                    expect(token_kind::comma, "','");
                    expr b = expression();
                    expect(token_kind::rparen, "')'");
                    return make_binary(expr_kind::pow, std::move(a), std::move(b));
                }
                expr_fn fn;
                if (t.text == "exp") {
                    fn = expr_fn::exp_fn;
                } else if (t.text == "log") {
                    fn = expr_fn::log_fn;
                } else if (t.text == "abs") {
                    fn = expr_fn::abs_fn;
                } else if (t.text == "sqrt") {
                    fn = expr_fn::sqrt_fn;
                } else if (t.text == "cdf") {
                    fn = expr_fn::cdf_fn;
                } else {
                    throw name_error(t.offset, t.text);
                }
                expect(token_kind::lparen, "'('");
                expr a = expression();
                expect(token_kind::rparen, "')'");
                return make_call(fn, std::move(a));
            }
            default:
                throw parse_error(t.offset, "a number, 'x', a function call, or '('");
        }
    }

    void expect(token_kind k, const char* what) {
        if (lex_.peek().kind != k) {
            throw parse_error(lex_.peek().offset, what);
        }
        lex_.take();
    }

    lexer lex_;
};

} // namespace exprdetail

inline expr parse(const std::string& text) { return exprdetail::parser(text).parse_all(); }

// Evaluation never returns a non-finite value silently: domain violations
// (log of a nonpositive number, square root of a negative, division by zero,
// fractional powers of negatives) raise eval_error; cdf(...) without a model
// raises missing_model_error.
inline double evaluate(const expr& e, double x, const distribution_model* model = nullptr) {
    if (!e) {
        throw config_error("evaluating an empty expression");
    }
    auto finite = [](double v, const char* what) {
        if (!std::isfinite(v)) {
            throw eval_error(std::string("non-finite result in ") + what);
        }
        return v;
    };
    switch (e->kind) {
        case expr_kind::number:
            return e->value;
        case expr_kind::variable:
            return x;
        case expr_kind::negate:
            return -evaluate(e->a, x, model);
        case expr_kind::add:
            return finite(evaluate(e->a, x, model) + evaluate(e->b, x, model), "addition");
        case expr_kind::sub:
            return finite(evaluate(e->a, x, model) - evaluate(e->b, x, model), "subtraction");
        case expr_kind::mul:
            return finite(evaluate(e->a, x, model) * evaluate(e->b, x, model),
                          "multiplication");
        case expr_kind::div: {
            double num = evaluate(e->a, x, model);
            double den = evaluate(e->b, x, model);
            if (den == 0.0) {
                throw eval_error("division by zero");
            }
            return finite(num / den, "division");
        }
        case expr_kind::pow: {
            double base = evaluate(e->a, x, model);
            double expo = evaluate(e->b, x, model);
            double v = std::pow(base, expo);
            if (!std::isfinite(v)) {
                throw eval_error("power with arguments outside its domain");
            }
            return v;
        }
        case expr_kind::call: {
            double arg = evaluate(e->a, x, model);
            switch (e->fn) {
                case expr_fn::exp_fn:
                    return finite(std::exp(arg), "exp");
                case expr_fn::log_fn:
                    if (arg <= 0.0) {
                        throw eval_error("log of a nonpositive value");
                    }
                    return std::log(arg);
                case expr_fn::abs_fn:
                    return std::abs(arg);
                case expr_fn::sqrt_fn:
                    if (arg < 0.0) {
                        throw eval_error("square root of a negative value");
                    }
                    return std::sqrt(arg);
                case expr_fn::cdf_fn:
                    if (model == nullptr) {
                        throw missing_model_error(
                            "cdf(...) needs a distribution model in scope");
                    }
                    return model->cdf(arg);
            }
            throw eval_error("unknown call");
        }
    }
    throw eval_error("unknown expression node");
}

namespace exprdetail {

inline int precedence_of(const expr& e) {
    switch (e->kind) {
        case expr_kind::add:
        case expr_kind::sub: return 1;
        case expr_kind::mul:
        case expr_kind::div: return 2;
        case expr_kind::negate: return 3;
        case expr_kind::pow: return 4;
        default: return 5;
    }
}

inline std::string format_number(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline void print_into(const expr& e, std::string& out);

inline void print_child(const expr& child, int parent_prec, bool needs_paren_at_equal,
                        std::string& out) {
    int child_prec = precedence_of(child);
    bool paren = child_prec < parent_prec || (child_prec == parent_prec && needs_paren_at_equal);
    if (paren) {
        out += '(';
    }
    print_into(child, out);
    if (paren) {
        out += ')';
    }
}

inline void print_into(const expr& e, std::string& out) {
    switch (e->kind) {
        case expr_kind::number:
            out += format_number(e->value);
            return;
        case expr_kind::variable:
            out += 'x';
            return;
        case expr_kind::negate:
            out += '-';
            print_child(e->a, 3, false, out);
            return;
        case expr_kind::add:
        case expr_kind::sub:
        case expr_kind::mul:
        case expr_kind::div: {
            int prec = precedence_of(e);
            const char* op = e->kind == expr_kind::add   ? "+"
                             : e->kind == expr_kind::sub ? "-"
                             : e->kind == expr_kind::mul ? "*"
                                                         : "/";
            print_child(e->a, prec, false, out);
            out += op;
            // Left-associative grammar: an equal-precedence right child must
            // keep its parentheses or it would re-nest to the left.
            print_child(e->b, prec, true, out);
            return;
        }
        case expr_kind::pow:
            // Right-associative: the left child needs parentheses even at
            // equal precedence; the right child re-enters at the unary
            // level, so bare negates and powers survive unparenthesized.
            print_child(e->a, 5, false, out);
            out += '^';
            print_child(e->b, 3, false, out);
            return;
        case expr_kind::call: {
            const char* name = e->fn == expr_fn::exp_fn    ? "exp"
                               : e->fn == expr_fn::log_fn  ? "log"
                               : e->fn == expr_fn::abs_fn  ? "abs"
                               : e->fn == expr_fn::sqrt_fn ? "sqrt"
                                                           : "cdf";
            out += name;
            out += '(';
            print_into(e->a, out);
            out += ')';
            return;
        }
    }
}

} // namespace exprdetail

// Canonical text form: reparsing it yields a structurally identical tree.
inline std::string pretty_print(const expr& e) {
    if (!e) {
        throw config_error("printing an empty expression");
    }
    std::string out;
    exprdetail::print_into(e, out);
    return out;
}

inline bool expr_equal(const expr& a, const expr& b) {
    if (!a || !b) {
        return !a && !b;
    }
    if (a->kind != b->kind) {
        return false;
    }
    switch (a->kind) {
        case expr_kind::number:
            return a->value == b->value;
        case expr_kind::variable:
            return true;
        case expr_kind::call:
            return a->fn == b->fn && expr_equal(a->a, b->a);
        case expr_kind::negate:
            return expr_equal(a->a, b->a);
        default:
            return expr_equal(a->a, b->a) && expr_equal(a->b, b->b);
    }
}

} // namespace garkit
