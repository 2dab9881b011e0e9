#include "pdechain/expr.hpp"

#include <cctype>
#include <cmath>
#include <numbers>

#include "pdechain/jsonio.hpp"

namespace pdechain::expr {

namespace {

enum class TokenKind { number, identifier, plus, minus, star, slash, caret, lparen, rparen, end };

struct Token {
    TokenKind kind;
    double number = 0.0;
    std::string text;
    std::size_t position = 0;
};

class Lexer {
public:
    explicit Lexer(std::string_view source) : source_(source) {}

    Token next() {
        while (pos_ < source_.size() && std::isspace(static_cast<unsigned char>(source_[pos_]))) {
            ++pos_;
        }
        const std::size_t start = pos_;
        if (pos_ >= source_.size()) {
            return {TokenKind::end, 0.0, "", start};
        }
        const char c = source_[pos_];
        switch (c) {
            case '+': ++pos_; return {TokenKind::plus, 0.0, "+", start};
            case '-': ++pos_; return {TokenKind::minus, 0.0, "-", start};
            case '*': ++pos_; return {TokenKind::star, 0.0, "*", start};
            case '/': ++pos_; return {TokenKind::slash, 0.0, "/", start};
            case '^': ++pos_; return {TokenKind::caret, 0.0, "^", start};
            case '(': ++pos_; return {TokenKind::lparen, 0.0, "(", start};
            case ')': ++pos_; return {TokenKind::rparen, 0.0, ")", start};
            default: break;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            return lex_number(start);
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t end = pos_;
            while (end < source_.size() &&
                   (std::isalnum(static_cast<unsigned char>(source_[end])) || source_[end] == '_')) {
                ++end;
            }
            std::string text(source_.substr(pos_, end - pos_));
            pos_ = end;
            return {TokenKind::identifier, 0.0, std::move(text), start};
        }
        throw ParseError("unexpected character '" + std::string(1, c) + "'", start);
    }

private:
    Token lex_number(std::size_t start) {
        std::size_t end = pos_;
        bool seen_dot = false;
        while (end < source_.size()) {
            const char c = source_[end];
            if (std::isdigit(static_cast<unsigned char>(c))) {
                ++end;
            } else if (c == '.' && !seen_dot) {
                seen_dot = true;
                ++end;
            } else {
                break;
            }
        }
        // optional exponent
        if (end < source_.size() && (source_[end] == 'e' || source_[end] == 'E')) {
            std::size_t exp = end + 1;
            if (exp < source_.size() && (source_[exp] == '+' || source_[exp] == '-')) {
                ++exp;
            }
            if (exp < source_.size() && std::isdigit(static_cast<unsigned char>(source_[exp]))) {
                ++exp;
                while (exp < source_.size() && std::isdigit(static_cast<unsigned char>(source_[exp]))) {
                    ++exp;
                }
                end = exp;
            }
        }
        const std::string text(source_.substr(pos_, end - pos_));
        if (text == ".") {
            throw ParseError("malformed number", start);
        }
        pos_ = end;
        return {TokenKind::number, std::stod(text), text, start};
    }

    std::string_view source_;
    std::size_t pos_ = 0;
};

class Parser {
public:
    explicit Parser(std::string_view source) : lexer_(source) { advance(); }

    int parse_expression() { return parse_additive(); }

    void expect_end() {
        if (current_.kind != TokenKind::end) {
            throw ParseError("expected operator or end of input", current_.position);
        }
    }

    std::vector<Node> take_nodes() { return std::move(nodes_); }

private:
    void advance() { current_ = lexer_.next(); }

    int add_node(Node node) {
        nodes_.push_back(node);
        return static_cast<int>(nodes_.size()) - 1;
    }

    int parse_additive() {
        int lhs = parse_multiplicative();
        while (current_.kind == TokenKind::plus || current_.kind == TokenKind::minus) {
            const BinaryOp op = current_.kind == TokenKind::plus ? BinaryOp::add : BinaryOp::sub;
            advance();
            const int rhs = parse_multiplicative();
            Node node{NodeKind::binary};
            node.op = op;
            node.lhs = lhs;
            node.rhs = rhs;
            lhs = add_node(node);
        }
        return lhs;
    }

    int parse_multiplicative() {
        int lhs = parse_unary();
        while (current_.kind == TokenKind::star || current_.kind == TokenKind::slash) {
            const BinaryOp op = current_.kind == TokenKind::star ? BinaryOp::mul : BinaryOp::div;
            advance();
            const int rhs = parse_unary();
            Node node{NodeKind::binary};
            node.op = op;
            node.lhs = lhs;
            node.rhs = rhs;
            lhs = add_node(node);
        }
        return lhs;
    }

    int parse_unary() {
        if (current_.kind == TokenKind::minus) {
            advance();
            const int operand = parse_unary();
            Node node{NodeKind::negate};
            node.lhs = operand;
            return add_node(node);
        }
        return parse_power();
    }

    // Right associative; the exponent may carry a unary minus (2^-3).
    int parse_power() {
        const int base = parse_primary();
        if (current_.kind == TokenKind::caret) {
            advance();
            const int exponent = parse_unary();
            Node node{NodeKind::binary};
            node.op = BinaryOp::pow;
            node.lhs = base;
            node.rhs = exponent;
            return add_node(node);
        }
        return base;
    }

    int parse_primary() {
        switch (current_.kind) {
            case TokenKind::number: {
                Node node{NodeKind::number};
                node.number = current_.number;
                advance();
                return add_node(node);
            }
            case TokenKind::lparen: {
                advance();
                const int inner = parse_expression();
                if (current_.kind != TokenKind::rparen) {
                    throw ParseError("expected ')'", current_.position);
                }
                advance();
                return inner;
            }
            case TokenKind::identifier:
                return parse_identifier();
            default:
                throw ParseError("expected number, variable, function or '('", current_.position);
        }
    }

    int parse_identifier() {
        const std::string name = current_.text;
        const std::size_t position = current_.position;
        advance();
        if (name == "pi") {
            Node node{NodeKind::constant_pi};
            return add_node(node);
        }
        if (name == "x" || name == "y" || name == "t") {
            Node node{NodeKind::variable};
            node.variable = name[0];
            return add_node(node);
        }
        Function fn;
        if (name == "sin") {
            fn = Function::sin;
        } else if (name == "cos") {
            fn = Function::cos;
        } else if (name == "exp") {
            fn = Function::exp;
        } else if (name == "tanh") {
            fn = Function::tanh;
        } else {
            throw Error(ErrorCode::unknown_identifier,
                        "unknown identifier '" + name + "' at position " + std::to_string(position));
        }
        if (current_.kind != TokenKind::lparen) {
            throw ParseError("expected '(' after function name", current_.position);
        }
        advance();
        const int arg = parse_expression();
        if (current_.kind != TokenKind::rparen) {
            throw ParseError("expected ')'", current_.position);
        }
        advance();
        Node node{NodeKind::call};
        node.fn = fn;
        node.lhs = arg;
        return add_node(node);
    }

    Lexer lexer_;
    Token current_{TokenKind::end, 0.0, {}, 0};
    std::vector<Node> nodes_;
};

double eval_node(const std::vector<Node>& nodes, int index, const Bindings& bindings) {
    const Node& node = nodes[static_cast<std::size_t>(index)];
    double value = 0.0;
    switch (node.kind) {
        case NodeKind::number:
            value = node.number;
            break;
        case NodeKind::constant_pi:
            value = std::numbers::pi;
            break;
        case NodeKind::variable: {
            const auto bound = bindings.lookup(node.variable);
            if (!bound) {
                throw Error(ErrorCode::invalid_input,
                            std::string("unbound variable '") + node.variable + "'");
            }
            value = *bound;
            break;
        }
        case NodeKind::negate:
            value = -eval_node(nodes, node.lhs, bindings);
            break;
        case NodeKind::binary: {
            const double lhs = eval_node(nodes, node.lhs, bindings);
            const double rhs = eval_node(nodes, node.rhs, bindings);
            switch (node.op) {
                case BinaryOp::add: value = lhs + rhs; break;
                case BinaryOp::sub: value = lhs - rhs; break;
                case BinaryOp::mul: value = lhs * rhs; break;
                case BinaryOp::div: value = lhs / rhs; break;
                case BinaryOp::pow:
                    value = (lhs == 0.0 && rhs == 0.0) ? 1.0 : std::pow(lhs, rhs);
                    break;
            }
            break;
        }
        case NodeKind::call: {
            const double arg = eval_node(nodes, node.lhs, bindings);
            switch (node.fn) {
                case Function::sin: value = std::sin(arg); break;
                case Function::cos: value = std::cos(arg); break;
                case Function::exp: value = std::exp(arg); break;
                case Function::tanh: value = std::tanh(arg); break;
            }
            break;
        }
    }
    if (!std::isfinite(value)) {
        throw Error(ErrorCode::numeric_domain, "non-finite value in expression evaluation");
    }
    return value;
}

const char* function_name(Function fn) {
    switch (fn) {
        case Function::sin: return "sin";
        case Function::cos: return "cos";
        case Function::exp: return "exp";
        case Function::tanh: return "tanh";
    }
    return "?";
}

}  // namespace

Expr Expr::parse(std::string_view source) {
    Parser parser(source);
    const int root = parser.parse_expression();
    parser.expect_end();
    Expr expr;
    expr.nodes_ = parser.take_nodes();
    expr.root_ = root;
    return expr;
}

double Expr::eval(const Bindings& bindings) const {
    return eval_node(nodes_, root_, bindings);
}

bool Expr::references(char variable) const {
    for (const Node& node : nodes_) {
        if (node.kind == NodeKind::variable && node.variable == variable) {
            return true;
        }
    }
    return false;
}

std::string Expr::print_node(int index) const {
    const Node& node = nodes_[static_cast<std::size_t>(index)];
    switch (node.kind) {
        case NodeKind::number:
            return format_double(node.number);
        case NodeKind::constant_pi:
            return "pi";
        case NodeKind::variable:
            return std::string(1, node.variable);
        case NodeKind::negate:
            return "(-" + print_node(node.lhs) + ")";
        case NodeKind::binary: {
            const char* op = "+";
            switch (node.op) {
                case BinaryOp::add: op = " + "; break;
                case BinaryOp::sub: op = " - "; break;
                case BinaryOp::mul: op = " * "; break;
                case BinaryOp::div: op = " / "; break;
                case BinaryOp::pow: op = " ^ "; break;
            }
            return "(" + print_node(node.lhs) + op + print_node(node.rhs) + ")";
        }
        case NodeKind::call:
            return std::string(function_name(node.fn)) + "(" + print_node(node.lhs) + ")";
    }
    return "?";
}

std::string Expr::print() const {
    return print_node(root_);
}

}  // namespace pdechain::expr
