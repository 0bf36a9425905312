#pragma once

#include <array>
#include <span>
#include <vector>

#include "wobs/common.hpp"

namespace wobs {

/// Sparse multivariate polynomial in up to four variables with exact
/// derivatives of any order.
class Polynomial {
public:
    using Exponents = std::array<int, kMaxFrameVars>;

    struct Term {
        double coef = 0.0;
        Exponents powers{};
    };

    Polynomial() = default;
    Polynomial(int nvars, std::vector<Term> terms);

    int nvars() const { return nvars_; }
    const std::vector<Term>& terms() const { return terms_; }

    /// Value of the derivative with the given multi-index at z.
    double derivative(std::span<const double> z, const Exponents& order) const;
    double value(std::span<const double> z) const { return derivative(z, Exponents{}); }

    /// |x - center|^2 expanded into monomials over `dim` variables.
    static Polynomial squared_distance(const Point& center, int dim);

private:
    int nvars_ = 0;
    std::vector<Term> terms_;
};

}  // namespace wobs
