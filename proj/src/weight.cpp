#include "wobs/weight.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

namespace wobs {

WeightField::WeightField(int dim, Evaluator raw, std::string label)
    : dim_(dim), raw_(std::move(raw)), label_(std::move(label)) {
    if (dim < 1 || dim > kMaxSpaceDim) throw PreconditionError("weight dimension must be 1 or 2");
}

WeightField WeightField::paraboloid(const Point& x0, int dim) {
    WeightField w(
        dim,
        [x0, dim](const Point& x) {
            WeightSample s;
            for (int i = 0; i < dim; ++i) {
                const double y = x[i] - x0[i];
                s.value += y * y;
                s.grad[i] = 2.0 * y;
                s.hess[i][i] = 2.0;
            }
            return s;
        },
        dim == 1 ? fmt::format("|x-({})|^2", x0[0]) : fmt::format("|x-({}, {})|^2", x0[0], x0[1]));
    w.center_ = x0;
    return w;
}

WeightField WeightField::polynomial(const Polynomial& p) {
    const int dim = p.nvars();
    if (dim > kMaxSpaceDim) throw PreconditionError("weight polynomial must be in 1 or 2 variables");
    return WeightField(
        dim,
        [p, dim](const Point& x) {
            WeightSample s;
            const std::span<const double> z(x.data(), static_cast<std::size_t>(dim));
            Polynomial::Exponents e{};
            s.value = p.value(z);
            for (int m = 0; m < dim; ++m) {
                e = {};
                e[m] += 1;
                s.grad[m] = p.derivative(z, e);
                for (int j = 0; j < dim; ++j) {
                    auto e2 = e;
                    e2[j] += 1;
                    s.hess[m][j] = p.derivative(z, e2);
                    for (int k = 0; k < dim; ++k) {
                        auto e3 = e2;
                        e3[k] += 1;
                        s.third[m][j][k] = p.derivative(z, e3);
                    }
                }
            }
            return s;
        },
        "polynomial");
}

WeightField WeightField::constant(double c, int dim) {
    return WeightField(
        dim,
        [c](const Point&) {
            WeightSample s;
            s.value = c;
            return s;
        },
        fmt::format("constant {}", c));
}

WeightSample WeightField::sample(const Point& x) const {
    Point y = x;
    for (int i = 0; i < dim_; ++i) y[i] += shift_[i];
    WeightSample s = raw_(y);
    if (scale_ == 1.0 && offset_ == 0.0) return s;
    s.value = scale_ * s.value + offset_;
    for (int m = 0; m < dim_; ++m) {
        s.grad[m] *= scale_;
        for (int j = 0; j < dim_; ++j) {
            s.hess[m][j] *= scale_;
            for (int k = 0; k < dim_; ++k) s.third[m][j][k] *= scale_;
        }
    }
    return s;
}

WeightField WeightField::normalized(double a, double b) const {
    WeightField w = *this;
    w.scale_ = a * scale_;
    w.offset_ = a * offset_ + b;
    w.label_ = fmt::format("{}*({})+{}", a, label_, b);
    if (mu0) w.mu0 = a * *mu0;
    if (min_grad) w.min_grad = a * *min_grad;
    w.s_limit.reset();
    return w;
}

WeightField WeightField::shifted(const Point& zeta) const {
    WeightField w = *this;
    for (int i = 0; i < dim_; ++i) w.shift_[i] += zeta[i];
    if (zeta[0] != 0.0 || (dim_ == 2 && zeta[1] != 0.0))
        w.label_ = dim_ == 1 ? fmt::format("{} shifted by {}", label_, zeta[0])
                             : fmt::format("{} shifted by ({}, {})", label_, zeta[0], zeta[1]);
    if (center_) {
        Point c = *center_;
        for (int i = 0; i < dim_; ++i) c[i] -= zeta[i];
        w.center_ = c;
    }
    w.mu0.reset();
    w.min_grad.reset();
    w.critical_point.reset();
    w.s_limit.reset();
    return w;
}

Mat2 pseudoconvexity_matrix(const CoefficientSample& h, const WeightSample& d, int n) {
    Mat2 S{};
    for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
            double acc = 0.0;
            for (int jp = 0; jp < n; ++jp) {
                for (int kp = 0; kp < n; ++kp) {
                    // (h^{j'k} d_{j'})_{k'}
                    const double flux_deriv = h.dh[kp][jp][k] * d.grad[jp] + h.h[jp][k] * d.hess[jp][kp];
                    acc += 2.0 * h.h[j][kp] * flux_deriv - h.dh[kp][j][k] * h.h[jp][kp] * d.grad[jp];
                }
            }
            S[j][k] = acc;
        }
    }
    return S;
}

Condition1Result check_condition1(const CoefficientField& h, const WeightField& d, const Grid& g) {
    const int n = g.dim();
    Condition1Result r;
    r.mu0 = std::numeric_limits<double>::infinity();
    r.min_grad = std::numeric_limits<double>::infinity();
    for (const auto& cp : g.closure_points()) {
        const auto hs = h.sample(cp.point);
        const auto ds = d.sample(cp.point);
        const double mu = min_generalized_eigenvalue(pseudoconvexity_matrix(hs, ds, n), hs.h, n);
        if (mu < r.mu0) {
            r.mu0 = mu;
            r.mu0_node = cp.node;
        }
        const double gn = norm(ds.grad, n);
        if (gn < r.min_grad) {
            r.min_grad = gn;
            r.min_grad_node = cp.node;
        }
    }
    return r;
}

namespace {

double quarter_h_grad2(const CoefficientSample& h, const WeightSample& d, int n) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) acc += h.h[j][k] * d.grad[j] * d.grad[k];
    return 0.25 * acc;
}

}  // namespace

WeightField normalize_weight(const WeightField& d, double mu0, const CoefficientField& h, const Grid& g,
                             const NormalizationOptions& opt) {
    if (!(mu0 > 0.0))
        throw PreconditionError(fmt::format("normalize_weight needs mu0 > 0 (got {})", mu0));
    const int n = g.dim();
    const auto pts = g.closure_points();

    // The a = 1 fixpoint is kept whenever mu0 already reaches 4.
    double a = mu0 >= 4.0 ? 1.0 : 4.0 / mu0 + opt.margin;
    while (a <= opt.max_scale) {
        // Feasible b: -min(a d) < b <= min(a^2 q - a d), q = 1/4 h(grad d, grad d).
        double b_hi = std::numeric_limits<double>::infinity();
        double b_lo = -std::numeric_limits<double>::infinity();
        for (const auto& cp : pts) {
            const auto ds = d.sample(cp.point);
            const auto hs = h.sample(cp.point);
            b_hi = std::min(b_hi, a * a * quarter_h_grad2(hs, ds, n) - a * ds.value);
            b_lo = std::max(b_lo, -a * ds.value);
        }
        if (b_lo < 0.0 && 0.0 <= b_hi) {
            WeightField out = a == 1.0 ? d : d.normalized(a, 0.0);
            out.mu0 = a * mu0;
            return out;
        }
        if (b_lo < b_hi) {
            const double b = 0.5 * (b_lo + b_hi);
            WeightField out = d.normalized(a, b);
            out.mu0 = a * mu0;
            return out;
        }
        a *= 2.0;
    }
    throw VerificationError(
        fmt::format("normalize_weight: no (a, b) with a <= {} makes 1/4 h(grad d, grad d) >= d > 0", opt.max_scale));
}

namespace {

double frob(const Mat2& m, int n) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) acc += m[i][j] * m[i][j];
    return std::sqrt(acc);
}

}  // namespace

Condition2Result check_condition2(const CoefficientField& h, const WeightField& d, const Point& x0, const Grid& g) {
    const int n = g.dim();
    const Domain& dom = g.domain();
    if (!dom.closure_contains(x0))
        throw PreconditionError(fmt::format("check_condition2: critical point {} is outside the closed domain",
                                            format_point(x0, n)));

    const auto pts = g.closure_points();
    double dscale = 0.0, gscale = 0.0;
    for (const auto& cp : pts) {
        const auto ds = d.sample(cp.point);
        dscale = std::max(dscale, std::abs(ds.value));
        gscale = std::max(gscale, norm(ds.grad, n));
    }
    dscale = std::max(dscale, 1.0);
    gscale = std::max(gscale, 1.0);

    const auto d0 = d.sample(x0);
    if (std::abs(d0.value) > 1e-10 * dscale)
        throw VerificationError(fmt::format("check_condition2: d({}) = {} is not zero", format_point(x0, n), d0.value));
    for (const auto& cp : pts) {
        const double v = d.value(cp.point);
        if (v < d0.value - 1e-10 * dscale)
            throw VerificationError(fmt::format("check_condition2: d({}) = {} is below d(x0) = {}; minimum is not at x0",
                                                format_point(cp.point, n), v, d0.value),
                                    {cp.node});
    }

    // Critical points away from x0: exact zeros of the gradient, or lattice local
    // minima of |grad d| small enough to hide a zero within one cell.
    const double exclusion = g.max_spacing() * std::sqrt(static_cast<double>(n)) * 1.01;
    std::vector<std::size_t> critical;
    std::string where;
    for (const auto& cp : pts) {
        if (distance(cp.point, x0, n) <= exclusion) continue;
        const auto ds = d.sample(cp.point);
        const double gn = norm(ds.grad, n);
        bool flagged = gn <= 1e-10 * gscale;
        if (!flagged && !cp.on_boundary && gn <= frob(ds.hess, n) * g.max_spacing() * std::sqrt(double(n))) {
            bool local_min = true;
            for (std::size_t m : g.neighbours(cp.node)) {
                if (norm(d.sample(g.coord(m)).grad, n) < gn) {
                    local_min = false;
                    break;
                }
            }
            flagged = local_min;
        }
        if (flagged) {
            critical.push_back(cp.node);
            where += fmt::format(" {}", format_point(cp.point, n));
        }
    }
    if (!critical.empty()) {
        throw VerificationError(fmt::format("check_condition2: critical points besides x0 ({}) at{}",
                                            format_point(x0, n), where),
                                critical);
    }

    Condition2Result r;
    r.mu0 = check_condition1(h, d, g).mu0;

    // Shell averages of the quotient h(grad d, grad d)/d at radii h, h/2, h/4.
    const double base = g.min_spacing();
    std::vector<Vec2> dirs;
    if (n == 1) {
        dirs = {{1.0, 0.0}, {-1.0, 0.0}};
    } else {
        for (int k = 0; k < 16; ++k) {
            const double th = 2.0 * std::numbers::pi * k / 16.0;
            dirs.push_back({std::cos(th), std::sin(th)});
        }
    }
    for (int level = 0; level < 3; ++level) {
        const double rad = base / std::pow(2.0, level);
        double acc = 0.0;
        int used = 0;
        for (const auto& dir : dirs) {
            Point p = x0;
            for (int i = 0; i < n; ++i) p[i] += rad * dir[i];
            if (!dom.closure_contains(p)) continue;
            const auto ds = d.sample(p);
            const auto hs = h.sample(p);
            if (!(ds.value > 0.0)) continue;
            acc += 4.0 * quarter_h_grad2(hs, ds, n) / ds.value;
            ++used;
        }
        if (used == 0) throw NumericalError("check_condition2: no sample points near x0 inside the domain");
        r.quotients[level] = acc / used;
    }
    const double diff1 = r.quotients[0] - r.quotients[1];
    const double diff2 = r.quotients[1] - r.quotients[2];
    const double qscale = std::max(1.0, std::abs(r.quotients[2]));
    if (std::abs(diff2) <= 1e-12 * qscale) {
        r.s = r.quotients[2];
        r.order = std::numeric_limits<double>::infinity();
    } else {
        const double ratio = diff1 / diff2;
        if (ratio > 1.0) {
            r.order = std::log2(ratio);
            r.s = r.quotients[2] - diff2 / (ratio - 1.0);
        } else {
            r.order = 0.0;
            r.s = r.quotients[2];
        }
    }
    if (std::abs(r.s) <= 1e-8 * std::max(1.0, std::abs(r.quotients[0]))) r.s = 0.0;
    r.degenerate = !(r.s > 0.0);
    return r;
}

}  // namespace wobs
