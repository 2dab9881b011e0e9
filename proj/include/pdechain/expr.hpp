#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pdechain/errors.hpp"

namespace pdechain::expr {

// Variable bindings for evaluation. Only x, y and t exist in the grammar.
struct Bindings {
    std::optional<double> x;
    std::optional<double> y;
    std::optional<double> t;

    std::optional<double> lookup(char name) const {
        switch (name) {
            case 'x': return x;
            case 'y': return y;
            case 't': return t;
        }
        return std::nullopt;
    }
};

enum class NodeKind { number, constant_pi, variable, negate, binary, call };
enum class BinaryOp { add, sub, mul, div, pow };
enum class Function { sin, cos, exp, tanh };

struct Node {
    NodeKind kind;
    double number = 0.0;      // number
    char variable = '\0';     // variable
    BinaryOp op = BinaryOp::add;
    Function fn = Function::sin;
    int lhs = -1;             // negate/call operand, binary lhs
    int rhs = -1;             // binary rhs
};

// Immutable parsed expression over variables {x, y, t}.
//
// Precedence, loosest first: + -, * /, unary -, ^ (right associative).
// 0^0 evaluates to 1. Any non-finite intermediate raises numeric_domain.
class Expr {
public:
    static Expr parse(std::string_view source);

    double eval(const Bindings& bindings) const;
    std::string print() const;

    bool references(char variable) const;
    const std::vector<Node>& nodes() const { return nodes_; }
    int root() const { return root_; }

private:
    std::vector<Node> nodes_;
    int root_ = -1;

    std::string print_node(int index) const;
};

}  // namespace pdechain::expr
