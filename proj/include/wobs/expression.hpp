#pragma once

#include <memory>
#include <string>

#include "wobs/common.hpp"
#include "wobs/jet.hpp"

namespace wobs {

/// Arithmetic expression in t, x, y (x1, x2 are aliases) evaluated on jets,
/// so every field comes with its exact first derivatives.
///
/// Grammar: numbers, the constants pi and e, + - * / ^, parentheses, and the
/// functions sin cos tan exp log sqrt tanh.
class Expression {
public:
    struct Node;

    /// Throws Error with the offending position on a syntax error.
    static Expression parse(const std::string& text);
    static Expression constant(double c);

    /// Value with derivatives in the t slot (0) and the x slots (2, 3).
    Jet eval(double t, const Point& x) const;
    double value(double t, const Point& x) const { return eval(t, x).v; }

    const std::string& text() const { return text_; }
    bool is_constant() const;

private:
    std::shared_ptr<const Node> root_;
    std::string text_;
};

}  // namespace wobs
