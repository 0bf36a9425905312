#include "wobs/polynomial.hpp"

#include <cmath>

namespace wobs {

Polynomial::Polynomial(int nvars, std::vector<Term> terms) : nvars_(nvars), terms_(std::move(terms)) {
    if (nvars < 1 || nvars > kMaxFrameVars) throw PreconditionError("polynomial: nvars must be in [1, 4]");
    for (const auto& t : terms_) {
        for (int i = 0; i < kMaxFrameVars; ++i) {
            if (t.powers[i] < 0) throw PreconditionError("polynomial: negative exponent");
            if (i >= nvars && t.powers[i] != 0) throw PreconditionError("polynomial: exponent on unused variable");
        }
    }
}

double Polynomial::derivative(std::span<const double> z, const Exponents& order) const {
    double total = 0.0;
    for (const auto& term : terms_) {
        double c = term.coef;
        for (int i = 0; i < nvars_ && c != 0.0; ++i) {
            const int p = term.powers[i];
            const int k = order[i];
            if (k > p) {
                c = 0.0;
                break;
            }
            // falling factorial p (p-1) ... (p-k+1)
            for (int j = 0; j < k; ++j) c *= static_cast<double>(p - j);
            const int rem = p - k;
            if (rem > 0) c *= std::pow(z[i], rem);
        }
        total += c;
    }
    return total;
}

Polynomial Polynomial::squared_distance(const Point& center, int dim) {
    std::vector<Term> terms;
    double constant = 0.0;
    for (int i = 0; i < dim; ++i) {
        Term sq{1.0, {}};
        sq.powers[i] = 2;
        terms.push_back(sq);
        Term lin{-2.0 * center[i], {}};
        lin.powers[i] = 1;
        terms.push_back(lin);
        constant += center[i] * center[i];
    }
    terms.push_back(Term{constant, {}});
    return Polynomial(dim, std::move(terms));
}

}  // namespace wobs
