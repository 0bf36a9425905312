#include "wobs/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace wobs {

CoefficientField::CoefficientField(int dim, Evaluator eval, std::string label)
    : dim_(dim), eval_(std::move(eval)), label_(std::move(label)) {
    if (dim < 1 || dim > kMaxSpaceDim) throw PreconditionError("coefficient field dimension must be 1 or 2");
}

CoefficientField CoefficientField::identity(int dim) {
    return CoefficientField(
        dim,
        [dim](const Point&) {
            CoefficientSample s;
            for (int i = 0; i < dim; ++i) s.h[i][i] = 1.0;
            return s;
        },
        "identity");
}

CoefficientField CoefficientField::diagonal(const std::vector<double>& values) {
    const int dim = static_cast<int>(values.size());
    if (dim < 1 || dim > kMaxSpaceDim) throw PreconditionError("diagonal coefficients need 1 or 2 values");
    Mat2 h{};
    for (int i = 0; i < dim; ++i) h[i][i] = values[i];
    std::string label = dim == 1 ? fmt::format("diag({})", values[0]) : fmt::format("diag({}, {})", values[0], values[1]);
    return CoefficientField(
        dim,
        [h](const Point&) {
            CoefficientSample s;
            s.h = h;
            return s;
        },
        label);
}

CoefficientField CoefficientField::perturbed(int dim, double a) {
    auto eval = [dim, a](const Point& x) {
        CoefficientSample s;
        if (dim == 1) {
            s.h[0][0] = 1.0 + a * std::sin(x[0]);
            s.dh[0][0][0] = a * std::cos(x[0]);
            s.d2h[0][0][0][0] = -a * std::sin(x[0]);
            return s;
        }
        // h11 = 1 + a sin(x1 + x2/2)
        const double t1 = x[0] + 0.5 * x[1];
        const Vec2 g1{1.0, 0.5};
        // h22 = 1.5 + a cos(x1 - x2)
        const double t2 = x[0] - x[1];
        const Vec2 g2{1.0, -1.0};
        // h12 = h21 = (a/2) sin(x1 + x2)
        const double t3 = x[0] + x[1];
        const Vec2 g3{1.0, 1.0};

        s.h[0][0] = 1.0 + a * std::sin(t1);
        s.h[1][1] = 1.5 + a * std::cos(t2);
        s.h[0][1] = s.h[1][0] = 0.5 * a * std::sin(t3);
        for (int m = 0; m < 2; ++m) {
            s.dh[m][0][0] = a * std::cos(t1) * g1[m];
            s.dh[m][1][1] = -a * std::sin(t2) * g2[m];
            s.dh[m][0][1] = s.dh[m][1][0] = 0.5 * a * std::cos(t3) * g3[m];
            for (int p = 0; p < 2; ++p) {
                s.d2h[m][p][0][0] = -a * std::sin(t1) * g1[m] * g1[p];
                s.d2h[m][p][1][1] = -a * std::cos(t2) * g2[m] * g2[p];
                s.d2h[m][p][0][1] = s.d2h[m][p][1][0] = -0.5 * a * std::sin(t3) * g3[m] * g3[p];
            }
        }
        return s;
    };
    return CoefficientField(dim, eval, fmt::format("perturbed(a={})", a));
}

namespace {

// Bilinear (or linear) interpolant of one table with its derivatives.
struct TableInterp {
    int dim = 1;
    Point lo{}, hi{};
    std::array<int, 2> cells{};
    std::vector<double> v;

    // value, gradient, mixed second derivative
    void eval(const Point& x, double& val, Vec2& grad, double& mixed) const {
        std::array<int, 2> i0{0, 0};
        std::array<double, 2> frac{0.0, 0.0};
        std::array<double, 2> h{1.0, 1.0};
        for (int a = 0; a < dim; ++a) {
            h[a] = (hi[a] - lo[a]) / cells[a];
            double u = (x[a] - lo[a]) / h[a];
            int i = static_cast<int>(std::floor(u));
            i = std::clamp(i, 0, cells[a] - 1);
            i0[a] = i;
            frac[a] = std::clamp(u - i, 0.0, 1.0);
        }
        const int nx = cells[0] + 1;
        auto at = [&](int i, int j) { return v[static_cast<std::size_t>(j) * nx + i]; };
        if (dim == 1) {
            const double a0 = at(i0[0], 0), a1 = at(i0[0] + 1, 0);
            val = a0 + frac[0] * (a1 - a0);
            grad = {(a1 - a0) / h[0], 0.0};
            mixed = 0.0;
            return;
        }
        const double f00 = at(i0[0], i0[1]), f10 = at(i0[0] + 1, i0[1]);
        const double f01 = at(i0[0], i0[1] + 1), f11 = at(i0[0] + 1, i0[1] + 1);
        const double fx = frac[0], fy = frac[1];
        val = f00 * (1 - fx) * (1 - fy) + f10 * fx * (1 - fy) + f01 * (1 - fx) * fy + f11 * fx * fy;
        grad[0] = ((f10 - f00) * (1 - fy) + (f11 - f01) * fy) / h[0];
        grad[1] = ((f01 - f00) * (1 - fx) + (f11 - f10) * fx) / h[1];
        mixed = (f11 - f10 - f01 + f00) / (h[0] * h[1]);
    }
};

}  // namespace

CoefficientField CoefficientField::tabulated(const Domain& domain, std::array<int, 2> cells,
                                             std::vector<std::vector<double>> entries) {
    const int dim = domain.dim();
    const std::size_t want_entries = dim == 1 ? 1 : 3;
    if (entries.size() != want_entries)
        throw PreconditionError(fmt::format("tabulated coefficients need {} entry tables", want_entries));
    std::size_t nodes = static_cast<std::size_t>(cells[0] + 1) * (dim == 2 ? cells[1] + 1 : 1);
    std::vector<TableInterp> tables;
    for (auto& e : entries) {
        if (e.size() != nodes)
            throw PreconditionError(fmt::format("tabulated coefficient table has {} values, expected {}", e.size(), nodes));
        TableInterp t;
        t.dim = dim;
        t.lo = domain.lo;
        t.hi = domain.hi;
        t.cells = cells;
        t.v = std::move(e);
        tables.push_back(std::move(t));
    }
    auto eval = [dim, tables](const Point& x) {
        CoefficientSample s;
        auto fill = [&](const TableInterp& t, int j, int k) {
            double val = 0.0, mixed = 0.0;
            Vec2 grad{};
            t.eval(x, val, grad, mixed);
            s.h[j][k] = s.h[k][j] = val;
            for (int m = 0; m < dim; ++m) s.dh[m][j][k] = s.dh[m][k][j] = grad[m];
            if (dim == 2) {
                s.d2h[0][1][j][k] = s.d2h[0][1][k][j] = mixed;
                s.d2h[1][0][j][k] = s.d2h[1][0][k][j] = mixed;
            }
        };
        fill(tables[0], 0, 0);
        if (dim == 2) {
            fill(tables[1], 0, 1);
            fill(tables[2], 1, 1);
        }
        return s;
    };
    return CoefficientField(dim, eval, "tabulated");
}

double CoefficientField::max_eigenvalue(const Grid& g) const {
    double best = 0.0;
    for (const auto& cp : g.closure_points()) best = std::max(best, max_sym_eigenvalue(value(cp.point), dim_));
    return best;
}

CoefficientCheck verify_coefficients(const CoefficientField& h, const Grid& g) {
    if (h.dim() != g.dim()) throw PreconditionError("coefficient field and grid dimensions differ");
    const int n = g.dim();
    double h0 = std::numeric_limits<double>::infinity();
    for (const auto& cp : g.closure_points()) {
        const Mat2 m = h.value(cp.point);
        for (int j = 0; j < n; ++j) {
            for (int k = j + 1; k < n; ++k) {
                const double scale = std::max({1.0, std::abs(m[j][k]), std::abs(m[k][j])});
                if (std::abs(m[j][k] - m[k][j]) > 1e-12 * scale) {
                    throw VerificationError(
                        fmt::format("coefficient matrix not symmetric at node {} ({}): h{}{}={} h{}{}={}", cp.node,
                                    format_point(cp.point, n), j + 1, k + 1, m[j][k], k + 1, j + 1, m[k][j]),
                        {cp.node});
                }
            }
        }
        const double ev = min_sym_eigenvalue(m, n);
        if (!(ev > 0.0)) {
            throw VerificationError(fmt::format("coefficient matrix not positive definite at node {} ({}): "
                                                "smallest eigenvalue {}",
                                                cp.node, format_point(cp.point, n), ev),
                                    {cp.node});
        }
        h0 = std::min(h0, ev);
    }
    return {h0, true};
}

}  // namespace wobs
