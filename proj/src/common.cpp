#include "wobs/common.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace wobs {

namespace {

// Eigenvalues of the symmetric 2x2 matrix [[a, b], [b, c]], ascending.
std::array<double, 2> sym2_eigen(double a, double b, double c) {
    const double mean = 0.5 * (a + c);
    const double rad = std::hypot(0.5 * (a - c), b);
    return {mean - rad, mean + rad};
}

}  // namespace

double min_sym_eigenvalue(const Mat2& m, int dim) {
    if (dim == 1) return m[0][0];
    return sym2_eigen(m[0][0], 0.5 * (m[0][1] + m[1][0]), m[1][1])[0];
}

double max_sym_eigenvalue(const Mat2& m, int dim) {
    if (dim == 1) return m[0][0];
    return sym2_eigen(m[0][0], 0.5 * (m[0][1] + m[1][0]), m[1][1])[1];
}

double min_generalized_eigenvalue(const Mat2& a, const Mat2& b, int dim) {
    if (dim == 1) return a[0][0] / b[0][0];
    // Whiten with the Cholesky factor of b: b = L L^T, solve eig(L^-1 sym(a) L^-T).
    const double l00 = std::sqrt(b[0][0]);
    const double l10 = 0.5 * (b[1][0] + b[0][1]) / l00;
    const double l11 = std::sqrt(b[1][1] - l10 * l10);
    const double a00 = a[0][0];
    const double a01 = 0.5 * (a[0][1] + a[1][0]);
    const double a11 = a[1][1];
    // Linv = [[1/l00, 0], [-l10/(l00 l11), 1/l11]]
    const double i00 = 1.0 / l00;
    const double i10 = -l10 / (l00 * l11);
    const double i11 = 1.0 / l11;
    const double c00 = i00 * i00 * a00;
    const double c01 = i00 * (i10 * a00 + i11 * a01);
    const double c11 = i10 * i10 * a00 + 2.0 * i10 * i11 * a01 + i11 * i11 * a11;
    return sym2_eigen(c00, c01, c11)[0];
}

std::string format_point(const Point& p, int dim) {
    if (dim == 1) return fmt::format("x={:.6g}", p[0]);
    return fmt::format("x=({:.6g}, {:.6g})", p[0], p[1]);
}

}  // namespace wobs
