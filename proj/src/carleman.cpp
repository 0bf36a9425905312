#include "wobs/carleman.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include <fmt/format.h>

namespace wobs {

namespace {

constexpr int kT = 0;
constexpr int kS = 1;
constexpr int X(int j) { return 2 + j; }

// Value, first and second derivative of one factor of a separable function.
struct Factor {
    double f = 1.0, fp = 0.0, fpp = 0.0;
};

TestSample separable(const std::array<Factor, kMaxFrameVars>& fac, int nv, double amplitude) {
    TestSample s;
    auto prod_except = [&](int a, int b) {
        double r = amplitude;
        for (int i = 0; i < nv; ++i)
            if (i != a && i != b) r *= fac[i].f;
        return r;
    };
    s.value = prod_except(-1, -1);
    for (int a = 0; a < nv; ++a) {
        s.grad[a] = fac[a].fp * prod_except(a, -1);
        for (int b = 0; b < nv; ++b)
            s.hess[a][b] = a == b ? fac[a].fpp * prod_except(a, -1) : fac[a].fp * fac[b].fp * prod_except(a, b);
    }
    return s;
}

}  // namespace

TestFunction::TestFunction(int space_dim, Evaluator eval, std::string label)
    : n_(space_dim), eval_(std::move(eval)), label_(std::move(label)) {
    if (space_dim < 1 || space_dim > kMaxSpaceDim) throw PreconditionError("test function space dimension must be 1 or 2");
}

TestFunction TestFunction::zero(int space_dim) {
    return TestFunction(space_dim, [](const FramePoint&) { return TestSample{}; }, "zero");
}

TestFunction TestFunction::polynomial(const Polynomial& p) {
    const int nv = p.nvars();
    if (nv < 3 || nv > kMaxFrameVars) throw PreconditionError("test polynomial needs 3 or 4 variables (t, s, x)");
    return TestFunction(
        nv - 2,
        [p, nv](const FramePoint& z) {
            TestSample s;
            const std::span<const double> zz(z.data(), static_cast<std::size_t>(nv));
            s.value = p.value(zz);
            for (int a = 0; a < nv; ++a) {
                Polynomial::Exponents e{};
                e[a] = 1;
                s.grad[a] = p.derivative(zz, e);
                for (int b = 0; b < nv; ++b) {
                    auto e2 = e;
                    e2[b] += 1;
                    s.hess[a][b] = p.derivative(zz, e2);
                }
            }
            return s;
        },
        "polynomial");
}

TestFunction TestFunction::random_polynomial(int space_dim, int degree, std::mt19937_64& rng) {
    const int nv = 2 + space_dim;
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    std::vector<Polynomial::Term> terms;
    Polynomial::Exponents e{};
    // Enumerate exponent vectors with total degree <= degree in lexicographic order.
    std::function<void(int, int)> rec = [&](int var, int left) {
        if (var == nv) {
            terms.push_back({coef(rng), e});
            return;
        }
        for (int k = 0; k <= left; ++k) {
            e[var] = k;
            rec(var + 1, left - k);
        }
        e[var] = 0;
    };
    rec(0, degree);
    TestFunction f = polynomial(Polynomial(nv, std::move(terms)));
    f.label_ = fmt::format("random polynomial deg {}", degree);
    return f;
}

TestFunction TestFunction::trigonometric(int space_dim, const FrameVec& k, const FrameVec& phase, double amplitude) {
    const int nv = 2 + space_dim;
    return TestFunction(
        space_dim,
        [=](const FramePoint& z) {
            std::array<Factor, kMaxFrameVars> fac{};
            for (int i = 0; i < nv; ++i) {
                const double arg = k[i] * z[i] + phase[i];
                fac[i] = {std::sin(arg), k[i] * std::cos(arg), -k[i] * k[i] * std::sin(arg)};
            }
            return separable(fac, nv, amplitude);
        },
        "trigonometric");
}

TestFunction TestFunction::gaussian(int space_dim, const FramePoint& center, const FrameVec& width, double amplitude) {
    const int nv = 2 + space_dim;
    return TestFunction(
        space_dim,
        [=](const FramePoint& z) {
            std::array<Factor, kMaxFrameVars> fac{};
            for (int i = 0; i < nv; ++i) {
                if (width[i] <= 0.0) continue;
                const double y = z[i] - center[i];
                const double w2 = width[i] * width[i];
                const double f = std::exp(-y * y / (2 * w2));
                fac[i] = {f, -y / w2 * f, (y * y / (w2 * w2) - 1.0 / w2) * f};
            }
            return separable(fac, nv, amplitude);
        },
        "gaussian");
}

TestFunction TestFunction::inverse_weight(double lambda, const CarlemanParameters& p, const WeightField& d) {
    const int nv = 2 + d.dim();
    return TestFunction(
        d.dim(),
        [=](const FramePoint& z) {
            const WeightBundle w = eval_weight(z, lambda, p, d);
            TestSample s;
            s.value = std::exp(-w.ell);
            for (int a = 0; a < nv; ++a) {
                s.grad[a] = -w.ell_a[a] * s.value;
                for (int b = 0; b < nv; ++b) s.hess[a][b] = (w.ell_a[a] * w.ell_a[b] - w.ell_ab[a][b]) * s.value;
            }
            return s;
        },
        "inverse weight");
}

TestFunction TestFunction::product(const TestFunction& a, const TestFunction& b) {
    if (a.n_ != b.n_) throw PreconditionError("product of test functions with different dimensions");
    const int nv = a.nvars();
    return TestFunction(
        a.n_,
        [a, b, nv](const FramePoint& z) {
            const TestSample x = a.sample(z), y = b.sample(z);
            TestSample s;
            s.value = x.value * y.value;
            for (int i = 0; i < nv; ++i) {
                s.grad[i] = x.grad[i] * y.value + x.value * y.grad[i];
                for (int j = 0; j < nv; ++j)
                    s.hess[i][j] = x.hess[i][j] * y.value + x.grad[i] * y.grad[j] + x.grad[j] * y.grad[i] +
                                   x.value * y.hess[i][j];
            }
            return s;
        },
        a.label_ + " * " + b.label_);
}

TestFunction TestFunction::sine_bump(const Domain& domain, double T, double width) {
    const int n = domain.dim();
    FrameVec k{}, phase{};
    // Constant factors in t and s: sin(pi/2) = 1.
    k[kT] = k[kS] = 0.0;
    phase[kT] = phase[kS] = std::numbers::pi / 2;
    for (int j = 0; j < n; ++j) {
        const double len = domain.hi[j] - domain.lo[j];
        k[X(j)] = std::numbers::pi / len;
        phase[X(j)] = -std::numbers::pi * domain.lo[j] / len;
    }
    const TestFunction sine = trigonometric(n, k, phase);
    const TestFunction bump = gaussian(n, {T / 2, T / 2, 0.0, 0.0}, {width, width, 0.0, 0.0});
    TestFunction f = product(sine, bump);
    f.label_ = "sine bump";
    return f;
}

SelfTestResult self_test(const TestFunction& u, const FramePoint& z, const std::vector<double>& steps) {
    const int nv = u.nvars();
    SelfTestResult r;
    r.steps = steps;
    const TestSample ref = u.sample(z);
    double scale = std::abs(ref.value);
    for (int a = 0; a < nv; ++a) {
        scale = std::max(scale, std::abs(ref.grad[a]));
        for (int b = 0; b < nv; ++b) scale = std::max(scale, std::abs(ref.hess[a][b]));
    }
    scale = std::max(scale, 1.0);
    for (double h : steps) {
        double eg = 0.0, eh = 0.0;
        for (int a = 0; a < nv; ++a) {
            FramePoint zp = z, zm = z;
            zp[a] += h;
            zm[a] -= h;
            const TestSample sp = u.sample(zp), sm = u.sample(zm);
            eg = std::max(eg, std::abs((sp.value - sm.value) / (2 * h) - ref.grad[a]));
            for (int b = 0; b < nv; ++b)
                eh = std::max(eh, std::abs((sp.grad[b] - sm.grad[b]) / (2 * h) - ref.hess[b][a]));
        }
        r.grad_errors.push_back(eg);
        r.hess_errors.push_back(eh);
    }
    auto order = [&](const std::vector<double>& e) {
        if (e.size() < 2 || e[e.size() - 1] <= 0.0 || e[e.size() - 2] <= 0.0) return 2.0;
        return std::log(e[e.size() - 2] / e.back()) / std::log(steps[steps.size() - 2] / steps.back());
    };
    r.grad_order = order(r.grad_errors);
    r.hess_order = order(r.hess_errors);
    const double floor = 1e-9 * scale;
    const bool g_ok = r.grad_errors.back() <= floor || r.grad_order > 1.5;
    const bool h_ok = r.hess_errors.back() <= floor || r.hess_order > 1.5;
    r.passed = g_ok && h_ok;
    return r;
}

WeightBundle eval_weight(const FramePoint& z, double lambda, const CarlemanParameters& p, const WeightField& d) {
    if (!(lambda >= 0.0)) throw PreconditionError("eval_weight: lambda must be nonnegative");
    const int n = d.dim();
    const WeightSample ds = d.sample({z[2], z[3]});
    const double tau = z[kT] - p.T / 2;
    const double sig = z[kS] - p.T / 2;
    WeightBundle w;
    w.phi = ds.value - p.alpha * tau * tau - p.alpha * sig * sig;
    w.ell = lambda * w.phi;
    w.log_domain = std::abs(w.ell) > kLogDomainThreshold;
    w.theta = w.log_domain ? (w.ell > 0 ? std::numeric_limits<double>::infinity() : 0.0) : std::exp(w.ell);
    w.ell_a[kT] = -2 * lambda * p.alpha * tau;
    w.ell_a[kS] = -2 * lambda * p.alpha * sig;
    w.ell_ab[kT][kT] = w.ell_ab[kS][kS] = -2 * lambda * p.alpha;
    for (int j = 0; j < n; ++j) {
        w.ell_a[X(j)] = lambda * ds.grad[j];
        for (int k = 0; k < n; ++k) {
            w.ell_ab[X(j)][X(k)] = lambda * ds.hess[j][k];
            for (int m = 0; m < n; ++m) w.ell_abc[X(m)][X(j)][X(k)] = lambda * ds.third[m][j][k];
        }
    }
    return w;
}

PsiFunction zero_psi() {
    return [](const Point&) { return Jet(0.0); };
}

PsiFunction constant_psi(double c) {
    return [c](const Point&) { return Jet(c); };
}

PsiFunction step3_psi(double lambda, double alpha, const CoefficientField& h, const WeightField& d) {
    const int n = d.dim();
    return [=](const Point& x) {
        const CoefficientSample cs = h.sample(x);
        const WeightSample ds = d.sample(x);
        double div = 0.0;
        Vec2 ddiv{};
        for (int j = 0; j < n; ++j) {
            for (int k = 0; k < n; ++k) {
                div += cs.dh[k][j][k] * ds.grad[j] + cs.h[j][k] * ds.hess[j][k];
                for (int m = 0; m < n; ++m)
                    ddiv[m] += cs.d2h[m][k][j][k] * ds.grad[j] + cs.dh[k][j][k] * ds.hess[j][m] +
                               cs.dh[m][j][k] * ds.hess[j][k] + cs.h[j][k] * ds.third[m][j][k];
            }
        }
        Jet r(-lambda * div + 2 * lambda * (1 - alpha));
        for (int m = 0; m < n; ++m) r.d[X(m)] = -lambda * ddiv[m];
        return r;
    };
}

namespace {

struct Named {
    const char* name;
    double value;
};

// Everything needed by the frame, the identity and the inequality at one point.
struct Expansion {
    CarlemanFrame f;
    double pu2 = 0.0;
    std::vector<Named> flux;  // 2 x derivative contributions of V, M, N
    std::vector<Named> rhs;   // terms of the lower bound
    double flux_sum = 0.0;
    double rhs_sum = 0.0;
};

Expansion expand(const TestFunction& u, const FramePoint& z, double lambda, const CarlemanParameters& p,
                 const WeightField& d, const CoefficientField& h, const PsiFunction& psi) {
    const int n = d.dim();
    if (u.space_dim() != n || h.dim() != n)
        throw PreconditionError("eval_frame: test function, weight and coefficients must share the dimension");
    const int nv = 2 + n;
    Expansion e;
    CarlemanFrame& f = e.f;
    f.n = n;
    f.z = z;
    f.weight = eval_weight(z, lambda, p, d);
    const WeightBundle& w = f.weight;
    f.ell_shift = w.log_domain ? w.ell : 0.0;
    const double th = std::exp(w.ell - f.ell_shift);
    f.theta_scaled = th;

    const TestSample us = u.sample(z);
    FrameVec va{};
    FrameMat vab{};
    f.v = th * us.value;
    for (int a = 0; a < nv; ++a) {
        va[a] = th * (us.grad[a] + w.ell_a[a] * us.value);
        for (int b = 0; b < nv; ++b)
            vab[a][b] = th * (us.hess[a][b] + w.ell_a[a] * us.grad[b] + w.ell_a[b] * us.grad[a] +
                              (w.ell_ab[a][b] + w.ell_a[a] * w.ell_a[b]) * us.value);
    }
    f.dv = va;

    std::array<Jet, kMaxFrameVars> L;
    std::array<std::array<Jet, kMaxFrameVars>, kMaxFrameVars> LL;
    for (int a = 0; a < kMaxFrameVars; ++a) {
        L[a] = Jet(w.ell_a[a], w.ell_ab[a]);
        for (int b = 0; b < kMaxFrameVars; ++b) LL[a][b] = Jet(w.ell_ab[a][b], w.ell_abc[a][b]);
    }
    const Point x{z[2], z[3]};
    const CoefficientSample cs = h.sample(x);
    std::array<std::array<Jet, 2>, 2> H;
    std::array<std::array<std::array<Jet, 2>, 2>, 2> DH;
    for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) {
            H[j][k] = Jet(cs.h[j][k], {0.0, 0.0, cs.dh[0][j][k], cs.dh[1][j][k]});
            for (int m = 0; m < 2; ++m)
                DH[m][j][k] = Jet(cs.dh[m][j][k], {0.0, 0.0, cs.d2h[0][m][j][k], cs.d2h[1][m][j][k]});
        }
    const Jet P = psi(x);
    f.psi = P.v;
    for (int m = 0; m < n; ++m) f.dpsi[m] = P.d[X(m)];
    const Jet Vj(f.v, va);
    std::array<Jet, kMaxFrameVars> Va;
    for (int a = 0; a < kMaxFrameVars; ++a) Va[a] = Jet(va[a], vab[a]);

    // A in both groupings.
    Jet A = -(L[kT] * L[kT]) - L[kS] * L[kS] + LL[kT][kT] + LL[kS][kS] - P;
    double A_alt = -w.ell_a[kT] * w.ell_a[kT] - w.ell_a[kS] * w.ell_a[kS] + w.ell_ab[kT][kT] + w.ell_ab[kS][kS] - P.v;
    double A_scale = std::abs(w.ell_a[kT] * w.ell_a[kT]) + std::abs(w.ell_a[kS] * w.ell_a[kS]) +
                     std::abs(w.ell_ab[kT][kT]) + std::abs(w.ell_ab[kS][kS]) + std::abs(P.v);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            A += H[j][k] * L[X(j)] * L[X(k)] - DH[k][j][k] * L[X(j)] - H[j][k] * LL[X(j)][X(k)];
            const double hll = cs.h[j][k] * w.ell_a[X(j)] * w.ell_a[X(k)];
            const double dhl = cs.dh[j][j][k] * w.ell_a[X(k)];
            const double hl2 = cs.h[j][k] * w.ell_ab[X(j)][X(k)];
            A_alt += hll - dhl - hl2;
            A_scale += std::abs(hll) + std::abs(dhl) + std::abs(hl2);
        }
    f.A = A.v;
    f.A_alt = A_alt;
    if (std::abs(f.A - f.A_alt) > 1e-10 * std::max(A_scale, std::numeric_limits<double>::min()))
        throw NumericalError(fmt::format("eval_frame: the two expressions for A disagree ({} vs {})", f.A, f.A_alt));

    auto flux = [&](const char* name, const Jet& J, int var) {
        const double c = 2.0 * J.d[var];
        e.flux.push_back({name, c});
        e.flux_sum += c;
    };

    Jet hv;
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) hv += H[j][k] * Va[X(j)] * Va[X(k)];
    Jet hlvx_v0, hlvx_v1;  // sum h^{jk} l_j v_k times v_t and v_s
    Jet hlvx;
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) hlvx += H[j][k] * L[X(j)] * Va[X(k)];
    hlvx_v0 = hlvx * Va[kT];
    hlvx_v1 = hlvx * Va[kS];

    for (int k = 0; k < n; ++k) {
        Jet t1, t2, t3, t4, t5, t6;
        for (int j = 0; j < n; ++j) {
            for (int jp = 0; jp < n; ++jp)
                for (int kp = 0; kp < n; ++kp) {
                    const Jet hh = H[j][k] * H[jp][kp];
                    t1 += 2.0 * (hh * L[X(jp)] * Va[X(j)] * Va[X(kp)]);
                    t4 -= hh * L[X(j)] * Va[X(jp)] * Va[X(kp)];
                }
            t2 += H[j][k] * A * L[X(j)] * Vj * Vj;
            t3 -= P * Vj * H[j][k] * Va[X(j)];
            t5 -= 2.0 * ((L[kT] * Va[kT] + L[kS] * Va[kS]) * H[j][k] * Va[X(j)]);
            t6 += H[j][k] * L[X(j)] * (Va[kT] * Va[kT] + Va[kS] * Va[kS]);
        }
        f.V[k] = t1.v + t2.v + t3.v + t4.v + t5.v + t6.v;
        flux("V: 2 h h l_x v_x v_x", t1, X(k));
        flux("V: h A l_x v^2", t2, X(k));
        flux("V: -Psi v h v_x", t3, X(k));
        flux("V: -h h l_x v_x v_x", t4, X(k));
        flux("V: -2 (l_t v_t + l_s v_s) h v_x", t5, X(k));
        flux("V: h l_x (v_t^2 + v_s^2)", t6, X(k));
    }

    {
        const Jet m1 = L[kT] * (Va[kT] * Va[kT] - Va[kS] * Va[kS] + hv);
        const Jet m2 = -2.0 * hlvx_v0;
        const Jet m3 = 2.0 * (L[kS] * Va[kS] * Va[kT]);
        const Jet m4 = P * Vj * Va[kT];
        const Jet m5 = -(A * L[kT] * Vj * Vj);
        f.M = m1.v + m2.v + m3.v + m4.v + m5.v;
        flux("M: l_t (v_t^2 - v_s^2 + h v_x v_x)", m1, kT);
        flux("M: -2 h l_x v_x v_t", m2, kT);
        flux("M: 2 l_s v_s v_t", m3, kT);
        flux("M: Psi v v_t", m4, kT);
        flux("M: -A l_t v^2", m5, kT);
    }
    {
        const Jet n1 = L[kS] * (Va[kS] * Va[kS] - Va[kT] * Va[kT] + hv);
        const Jet n2 = -2.0 * hlvx_v1;
        const Jet n3 = 2.0 * (L[kT] * Va[kS] * Va[kT]);
        const Jet n4 = P * Vj * Va[kS];
        const Jet n5 = -(A * L[kS] * Vj * Vj);
        f.N = n1.v + n2.v + n3.v + n4.v + n5.v;
        flux("N: l_s (v_s^2 - v_t^2 + h v_x v_x)", n1, kS);
        flux("N: -2 h l_x v_x v_s", n2, kS);
        flux("N: 2 l_t v_s v_t", n3, kS);
        flux("N: Psi v v_s", n4, kS);
        flux("N: -A l_s v^2", n5, kS);
    }

    // Lower bound.
    double divhl = 0.0;
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) divhl += (H[j][k] * L[X(j)]).d[X(k)];
    const double ltt = w.ell_ab[kT][kT], lss = w.ell_ab[kS][kS], lst = w.ell_ab[kS][kT];
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            double c = cs.h[j][k] * (ltt + lss - P.v);
            for (int jp = 0; jp < n; ++jp)
                for (int kp = 0; kp < n; ++kp)
                    c += 2 * cs.h[j][kp] * (H[jp][k] * L[X(jp)]).d[X(kp)] -
                         (H[j][k] * H[jp][kp] * L[X(jp)]).d[X(kp)];
            f.c[j][k] = c;
        }
    double B = A.v * P.v - (A * L[kT]).d[kT] - (A * L[kS]).d[kS];
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) B += (A * H[j][k] * L[X(j)]).d[X(k)];
    f.B = 2 * B;

    auto rhs = [&](const char* name, double v) {
        e.rhs.push_back({name, v});
        e.rhs_sum += v;
    };
    double r2 = 0.0, r4 = 0.0, r6 = 0.0, r7 = 0.0;
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            r2 += cs.h[j][k] * w.ell_ab[kT][X(j)] * va[X(k)];
            r4 += cs.h[j][k] * w.ell_ab[kS][X(j)] * va[X(k)];
            r6 += f.c[j][k] * va[X(j)] * va[X(k)];
            r7 += cs.h[j][k] * P.d[X(j)] * va[X(k)];
        }
    rhs("2 (l_tt - l_ss + div(h l_x) + Psi) v_t^2", 2 * (ltt - lss + divhl + P.v) * va[kT] * va[kT]);
    rhs("-8 h l_tx v_x v_t", -8 * r2 * va[kT]);
    rhs("8 l_st v_s v_t", 8 * lst * va[kS] * va[kT]);
    rhs("-8 h l_sx v_x v_s", -8 * r4 * va[kS]);
    rhs("2 (l_ss - l_tt + div(h l_x) + Psi) v_s^2", 2 * (lss - ltt + divhl + P.v) * va[kS] * va[kS]);
    rhs("2 c v_x v_x", 2 * r6);
    rhs("-2 h Psi_x v v_x", -2 * r7 * f.v);
    rhs("B v^2", f.B * f.v * f.v);

    double pu = us.hess[kT][kT] + us.hess[kS][kS];
    double lap_v = 0.0;
    double I2 = -2 * w.ell_a[kT] * va[kT] - 2 * w.ell_a[kS] * va[kS] - P.v * f.v;
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            pu -= cs.dh[k][j][k] * us.grad[X(j)] + cs.h[j][k] * us.hess[X(j)][X(k)];
            lap_v += cs.dh[k][j][k] * va[X(j)] + cs.h[j][k] * vab[X(j)][X(k)];
            I2 += 2 * cs.h[j][k] * w.ell_a[X(j)] * va[X(k)];
        }
    f.Pu = pu;
    f.I1 = vab[kT][kT] + vab[kS][kS] - lap_v - f.A * f.v;
    f.I2 = I2;
    e.pu2 = (th * pu) * (th * pu);
    return e;
}

double largest_of(const Expansion& e) {
    double m = std::max({std::abs(e.pu2), e.f.I1 * e.f.I1, e.f.I2 * e.f.I2});
    for (const auto& s : e.flux) m = std::max(m, std::abs(s.value));
    for (const auto& s : e.rhs) m = std::max(m, std::abs(s.value));
    return m;
}

}  // namespace

CarlemanFrame eval_frame(const TestFunction& u, const FramePoint& z, double lambda, const CarlemanParameters& p,
                         const WeightField& d, const CoefficientField& h, const PsiFunction& psi) {
    return expand(u, z, lambda, p, d, h, psi).f;
}

IdentityResult check_identity(const TestFunction& u, const FramePoint& z, double lambda, const CarlemanParameters& p,
                              const WeightField& d, const CoefficientField& h, const PsiFunction& psi,
                              bool keep_summands) {
    const Expansion e = expand(u, z, lambda, p, d, h, psi);
    IdentityResult r;
    r.lhs = e.pu2 + e.flux_sum;
    r.rhs = e.rhs_sum;
    r.squares = e.f.I1 * e.f.I1 + e.f.I2 * e.f.I2;
    r.residual = (r.lhs - r.rhs) - r.squares;
    r.largest = largest_of(e);
    r.relative = r.largest > 0.0 ? std::abs(r.residual) / r.largest : std::abs(r.residual);
    if (keep_summands) {
        r.summands.emplace_back("theta^2 (Pu)^2", e.pu2);
        for (const auto& s : e.flux) r.summands.emplace_back(s.name, s.value);
        for (const auto& s : e.rhs) r.summands.emplace_back(std::string("rhs: ") + s.name, s.value);
        r.summands.emplace_back("I1^2", e.f.I1 * e.f.I1);
        r.summands.emplace_back("I2^2", e.f.I2 * e.f.I2);
    }
    return r;
}

SweepResult check_pointwise_inequality(const TestFunction& u, const std::vector<double>& lambdas,
                                       const std::vector<FramePoint>& points, const CarlemanParameters& p,
                                       const WeightField& d, const CoefficientField& h, double h0) {
    if (lambdas.empty()) throw PreconditionError("check_pointwise_inequality: empty lambda grid");
    const int n = d.dim();
    for (const auto& z : points) {
        const double tau = z[kT] - p.T / 2, sig = z[kS] - p.T / 2;
        const double dv = d.value({z[2], z[3]});
        const double phi = dv - p.alpha * (tau * tau + sig * sig);
        const double bracket = dv - p.alpha * p.alpha * (tau * tau + sig * sig);
        if (!(phi > p.c * p.c) || !(bracket > 0.0))
            throw PreconditionError(fmt::format(
                "check_pointwise_inequality: sample point (t={}, s={}, x={}) is outside Q(c) (phi={}, bracket={})",
                z[kT], z[kS], format_point({z[2], z[3]}, n), phi, bracket));
    }
    std::vector<double> sorted = lambdas;
    std::sort(sorted.begin(), sorted.end());
    SweepResult res;
    for (double lambda : sorted) {
        const PsiFunction psi = step3_psi(lambda, p.alpha, h, d);
        SweepRow row;
        row.lambda = lambda;
        row.min_relative = std::numeric_limits<double>::infinity();
        row.min_margin = std::numeric_limits<double>::infinity();
        for (const auto& z : points) {
            const Expansion e = expand(u, z, lambda, p, d, h, psi);
            const double lhs = e.pu2 + e.flux_sum;
            const double tau = z[kT] - p.T / 2, sig = z[kS] - p.T / 2;
            const double bracket = d.value({z[2], z[3]}) - p.alpha * p.alpha * (tau * tau + sig * sig);
            double grad2 = 0.0;
            for (int j = 0; j < n; ++j) grad2 += e.f.dv[X(j)] * e.f.dv[X(j)];
            const double first = 2 * lambda * (1 - p.alpha) *
                                 (e.f.dv[kT] * e.f.dv[kT] + e.f.dv[kS] * e.f.dv[kS] + h0 * grad2);
            const double second = 8 * (3 + p.alpha) * lambda * lambda * lambda * bracket * e.f.v * e.f.v;
            const double margin = lhs - first - second;
            const double scale = std::max({largest_of(e), std::abs(first), std::abs(second)});
            const double rel = scale > 0.0 ? margin / scale : 0.0;
            if (rel < row.min_relative) {
                row.min_relative = rel;
                row.min_margin = margin;
                row.argmin = z;
            }
        }
        if (points.empty()) row.min_relative = row.min_margin = 0.0;
        row.nonnegative = row.min_relative >= -kMarginFloor;
        res.rows.push_back(row);
    }
    for (std::size_t i = res.rows.size(); i-- > 0;) {
        if (!res.rows[i].nonnegative) break;
        res.lambda0 = res.rows[i].lambda;
        res.found = true;
    }
    if (!res.found) {
        const SweepRow& worst = res.rows.back();
        throw VerificationError(fmt::format(
            "check_pointwise_inequality: no threshold on the lambda grid; at lambda={} the margin is {} "
            "(relative {}) at t={}, s={}, x={}",
            worst.lambda, worst.min_margin, worst.min_relative, worst.argmin[kT], worst.argmin[kS],
            format_point({worst.argmin[2], worst.argmin[3]}, n)));
    }
    return res;
}

namespace {

bool in_neighborhood(const Neighborhood& nb, const Grid& g, const Point& x) {
    if (nb.radius > 0.0 && !nb.anchors.empty()) {
        for (const auto& a : nb.anchors)
            if (distance(a, x, g.dim()) < nb.radius - kGeomTol) return true;
        return false;
    }
    std::array<int, 2> ij{0, 0};
    for (int ax = 0; ax < g.dim(); ++ax) {
        const int i = static_cast<int>(std::lround((x[ax] - g.domain().lo[ax]) / g.spacing(ax)));
        ij[ax] = std::clamp(i, 0, g.nodes_along(ax) - 1);
    }
    return nb.mask[g.index(ij[0], ij[1])];
}

Point uniform_point(const Grid& g, std::mt19937_64& rng) {
    const Domain& dom = g.domain();
    Point x{0.0, 0.0};
    for (int tries = 0; tries < 1000000; ++tries) {
        for (int ax = 0; ax < g.dim(); ++ax) x[ax] = std::uniform_real_distribution<double>(dom.lo[ax], dom.hi[ax])(rng);
        if (dom.contains(x)) return x;
    }
    throw NumericalError("sampling: could not draw a point inside the domain");
}

}  // namespace

std::vector<FramePoint> sample_level_set(const WeightField& d, const CarlemanParameters& p,
                                         const Neighborhood& omega1, const Grid& g, std::size_t count,
                                         std::mt19937_64& rng) {
    std::uniform_real_distribution<double> time(0.0, p.T);
    std::vector<FramePoint> out;
    const std::size_t max_tries = 10000 * std::max<std::size_t>(count, 1);
    for (std::size_t tries = 0; out.size() < count; ++tries) {
        if (tries > max_tries) throw VerificationError("sample_level_set: Q(c) appears to be empty");
        const Point x = uniform_point(g, rng);
        const double t = time(rng), s = time(rng);
        if (in_neighborhood(omega1, g, x)) continue;
        const double tau = t - p.T / 2, sig = s - p.T / 2;
        const double dv = d.value(x);
        if (!(dv - p.alpha * (tau * tau + sig * sig) > p.c * p.c)) continue;
        if (!(dv - p.alpha * p.alpha * (tau * tau + sig * sig) > 0.0)) continue;
        out.push_back({t, s, x[0], x[1]});
    }
    return out;
}

std::vector<FramePoint> sample_box(const CarlemanParameters& p, const Grid& g, std::size_t count,
                                   std::mt19937_64& rng) {
    std::uniform_real_distribution<double> time(0.0, p.T);
    std::vector<FramePoint> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const Point x = uniform_point(g, rng);
        const double t = time(rng), s = time(rng);
        out.push_back({t, s, x[0], x[1]});
    }
    return out;
}

void write_identity_csv(const std::string& path, const std::vector<IdentityRow>& rows, int space_dim) {
    std::ofstream out(path);
    if (!out) throw Error(fmt::format("cannot open {} for writing", path));
    out << "# schema: wobs-identity-v1\n";
    out << "family,t,s," << (space_dim == 1 ? "x" : "x1,x2") << ",residual,largest_summand\n";
    for (const auto& r : rows) {
        out << r.family << fmt::format(",{:.17g},{:.17g},{:.17g}", r.z[0], r.z[1], r.z[2]);
        if (space_dim == 2) out << fmt::format(",{:.17g}", r.z[3]);
        out << fmt::format(",{:.17g},{:.17g}\n", r.residual, r.largest);
    }
}

void write_sweep_csv(const std::string& path, const SweepResult& r, int space_dim) {
    std::ofstream out(path);
    if (!out) throw Error(fmt::format("cannot open {} for writing", path));
    out << "# schema: wobs-sweep-v1\n";
    out << "lambda,min_margin,min_relative_margin,nonnegative,t,s," << (space_dim == 1 ? "x" : "x1,x2") << "\n";
    for (const auto& row : r.rows) {
        out << fmt::format("{:.17g},{:.17g},{:.17g},{},{:.17g},{:.17g},{:.17g}", row.lambda, row.min_margin,
                           row.min_relative, row.nonnegative ? 1 : 0, row.argmin[0], row.argmin[1], row.argmin[2]);
        if (space_dim == 2) out << fmt::format(",{:.17g}", row.argmin[3]);
        out << "\n";
    }
}

}  // namespace wobs
