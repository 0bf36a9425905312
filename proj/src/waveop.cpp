#include "wobs/waveop.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numbers>

#include <fmt/format.h>

namespace wobs {

namespace {

Jet zero_field(double, const Point&) { return Jet(0.0); }

LowerOrderTerms::Field scaled_field(LowerOrderTerms::Field f, double c) {
    return [f = std::move(f), c](double t, const Point& x) { return f(t, x) * c; };
}

struct RandomWave {
    double sign = 1.0, beta = 0.0, phase = 0.0, omega = 0.0, psi = 0.0, scale = 1.0;
    std::array<double, 2> k{};

    Jet operator()(double t, const Point& x) const {
        Jet arg(phase + k[0] * x[0] + k[1] * x[1], {0.0, 0.0, k[0], k[1]});
        Jet tt(omega * t + psi, {omega, 0.0, 0.0, 0.0});
        return (sin(arg) * cos(tt) * beta + 1.0) * (sign * scale);
    }
    std::string describe() const {
        return fmt::format("{:.6g}*(1+{:.4f}*sin({:.4f}x+{:.4f}y+{:.4f})*cos({:.4f}t+{:.4f}))", sign * scale, beta,
                           k[0], k[1], phase, omega, psi);
    }
};

RandomWave draw_wave(int dim, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> freq(0.25 * std::numbers::pi, std::numbers::pi);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    RandomWave w;
    w.sign = unit(rng) < 0.5 ? -1.0 : 1.0;
    w.beta = 0.5 * unit(rng);
    for (int j = 0; j < dim; ++j) w.k[j] = freq(rng);
    w.phase = angle(rng);
    w.omega = freq(rng);
    w.psi = angle(rng);
    return w;
}

/// sup|f| or the W^{1,inf} norm over the closure points times a time lattice.
double field_norm(const LowerOrderTerms::Field& f, const Grid& g, double T, int time_samples, bool with_derivatives) {
    double r = 0.0;
    const auto pts = g.closure_points();
    for (int it = 0; it < time_samples; ++it) {
        const double t = time_samples > 1 ? T * it / (time_samples - 1) : 0.0;
        for (const auto& cp : pts) {
            const Jet v = f(t, cp.point);
            r = std::max(r, std::abs(v.v));
            if (!with_derivatives) continue;
            r = std::max(r, std::abs(v.d[0]));
            for (int j = 0; j < g.dim(); ++j) r = std::max(r, std::abs(v.d[2 + j]));
        }
    }
    return r;
}

}  // namespace

LowerOrderTerms LowerOrderTerms::zero(int dim) {
    LowerOrderTerms l;
    l.dim_ = dim;
    l.q_ = zero_field;
    l.q2_ = zero_field;
    l.q1_ = {zero_field, zero_field};
    l.zero_ = true;
    l.r_ = 0.0;
    l.description_ = "q=0, q1=0, q2=0";
    return l;
}

LowerOrderTerms LowerOrderTerms::from_expressions(int dim, const Expression& q, const std::vector<Expression>& q1,
                                                  const Expression& q2) {
    if (static_cast<int>(q1.size()) != dim)
        throw PreconditionError(fmt::format("q1 needs {} components, got {}", dim, q1.size()));
    LowerOrderTerms l = zero(dim);
    l.q_ = [q](double t, const Point& x) { return q.eval(t, x); };
    l.q2_ = [q2](double t, const Point& x) { return q2.eval(t, x); };
    std::string desc = fmt::format("q={}, q1=(", q.text());
    for (int k = 0; k < dim; ++k) {
        const Expression e = q1[k];
        l.q1_[k] = [e](double t, const Point& x) { return e.eval(t, x); };
        desc += (k ? ", " : "") + e.text();
    }
    l.description_ = desc + "), q2=" + q2.text();
    auto is_zero = [](const Expression& e) { return e.is_constant() && e.value(0.0, {}) == 0.0; };
    l.zero_ = is_zero(q) && is_zero(q2) && std::all_of(q1.begin(), q1.end(), is_zero);
    return l;
}

LowerOrderTerms LowerOrderTerms::random(const Grid& g, double T, double r_target, std::mt19937_64& rng) {
    if (r_target < 0.0) throw PreconditionError("r must be nonnegative");
    const int dim = g.dim();
    if (r_target == 0.0) return zero(dim);
    auto saturate = [&](bool with_derivatives) {
        RandomWave w = draw_wave(dim, rng);
        w.scale = r_target / field_norm(w, g, T, 101, with_derivatives);
        return w;
    };
    LowerOrderTerms l = zero(dim);
    const RandomWave q = saturate(false);
    std::array<RandomWave, 2> q1{};
    for (int k = 0; k < dim; ++k) q1[k] = saturate(true);
    const RandomWave q2 = saturate(true);
    l.q_ = q;
    l.q2_ = q2;
    std::string desc = "q=" + q.describe() + ", q1=(";
    for (int k = 0; k < dim; ++k) {
        l.q1_[k] = q1[k];
        desc += (k ? ", " : "") + q1[k].describe();
    }
    l.description_ = desc + "), q2=" + q2.describe();
    l.zero_ = false;
    l.compute_r(g, T);
    return l;
}

void LowerOrderTerms::compute_r(const Grid& g, double T, int time_samples) {
    if (zero_) {
        r_ = 0.0;
        return;
    }
    double r = field_norm(q_, g, T, time_samples, false);
    for (int k = 0; k < dim_; ++k) r = std::max(r, field_norm(q1_[k], g, T, time_samples, true));
    r_ = std::max(r, field_norm(q2_, g, T, time_samples, true));
}

LowerOrderTerms LowerOrderTerms::scaled(double c) const {
    LowerOrderTerms l = *this;
    l.q_ = scaled_field(q_, c);
    l.q2_ = scaled_field(q2_, c);
    for (int k = 0; k < 2; ++k) l.q1_[k] = scaled_field(q1_[k], c);
    l.r_ = r_ * std::abs(c);
    l.zero_ = zero_ || c == 0.0;
    l.description_ = fmt::format("{} * ({})", c, description_);
    return l;
}

EllipticOperator::EllipticOperator(const CoefficientField& h, GridPtr grid, double lambda0)
    : grid_(std::move(grid)), lambda0_(lambda0) {
    const Grid& g = *grid_;
    const int n = g.dim();
    volume_ = g.cell_volume();
    hmax_ = h.max_eigenvalue(g);
    dof_nodes_ = g.inside_nodes();
    node_to_dof_.assign(g.node_count(), -1);
    for (std::size_t k = 0; k < dof_nodes_.size(); ++k) node_to_dof_[dof_nodes_[k]] = static_cast<long>(k);

    // Cell energy: sum over corners of |cell|/2^n * grad_c^T h(corner) grad_c,
    // where grad_c uses the cell edges meeting at that corner.
    std::vector<Eigen::Triplet<double>> trip;
    const int nx = g.cells_along(0);
    const int ny = n == 2 ? g.cells_along(1) : 1;
    const double hx = g.spacing(0);
    const double hy = n == 2 ? g.spacing(1) : 1.0;
    const int corners = n == 2 ? 4 : 2;
    const double w = volume_ / corners;
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            std::array<std::size_t, 4> local{};
            local[0] = g.index(i, j);
            local[1] = g.index(i + 1, j);
            if (n == 2) {
                local[2] = g.index(i, j + 1);
                local[3] = g.index(i + 1, j + 1);
            }
            std::array<std::array<double, 4>, 4> K{};
            for (int c = 0; c < corners; ++c) {
                const int a = c & 1;
                const int b = c >> 1;
                std::array<std::array<double, 4>, 2> G{};
                G[0][b * 2] = -1.0 / hx;
                G[0][b * 2 + 1] = 1.0 / hx;
                if (n == 2) {
                    G[1][a] = -1.0 / hy;
                    G[1][2 + a] = 1.0 / hy;
                }
                const Mat2 H = h.value(g.coord(local[c]));
                for (int p = 0; p < corners; ++p)
                    for (int q = 0; q < corners; ++q) {
                        double s = 0.0;
                        for (int r = 0; r < n; ++r)
                            for (int t = 0; t < n; ++t) s += G[r][p] * H[r][t] * G[t][q];
                        K[p][q] += w * s;
                    }
            }
            for (int p = 0; p < corners; ++p) {
                const long dp = node_to_dof_[local[p]];
                if (dp < 0) continue;
                for (int q = 0; q < corners; ++q) {
                    const long dq = node_to_dof_[local[q]];
                    if (dq < 0 || K[p][q] == 0.0) continue;
                    trip.emplace_back(dp, dq, K[p][q] / volume_);
                }
            }
        }
    }
    const auto m = static_cast<Eigen::Index>(dofs());
    stiffness_.resize(m, m);
    stiffness_.setFromTriplets(trip.begin(), trip.end());
    stiffness_.makeCompressed();

    for (int axis = 0; axis < n; ++axis) {
        std::vector<Eigen::Triplet<double>> gt;
        const double sp = g.spacing(axis);
        for (std::size_t k = 0; k < dof_nodes_.size(); ++k) {
            const auto ij = g.ijk(dof_nodes_[k]);
            for (int dir : {-1, 1}) {
                auto nb = ij;
                nb[axis] += dir;
                if (nb[axis] < 0 || nb[axis] >= g.nodes_along(axis)) continue;
                const long d = node_to_dof_[g.index(nb[0], nb[1])];
                if (d >= 0) gt.emplace_back(static_cast<Eigen::Index>(k), d, dir / (2.0 * sp));
            }
        }
        gradient_[axis].resize(m, m);
        gradient_[axis].setFromTriplets(gt.begin(), gt.end());
    }

    double bound = 0.0;
    for (Eigen::Index col = 0; col < stiffness_.outerSize(); ++col) {
        double s = 0.0;
        for (SparseMatrix::InnerIterator it(stiffness_, col); it; ++it) s += std::abs(it.value());
        bound = std::max(bound, s);
    }
    spectral_bound_ = bound;

    llt_ = std::make_shared<Eigen::SimplicialLLT<SparseMatrix>>();
    llt_->compute(shifted());
    if (llt_->info() != Eigen::Success)
        throw NumericalError(fmt::format("elliptic operator is not positive definite (lambda0 = {})", lambda0_));
}

SparseMatrix EllipticOperator::shifted() const {
    SparseMatrix I(stiffness_.rows(), stiffness_.cols());
    I.setIdentity();
    SparseMatrix A = stiffness_ + lambda0_ * I;
    A.makeCompressed();
    return A;
}

Eigen::VectorXd EllipticOperator::solve(const Eigen::VectorXd& f) const {
    if (f.size() != static_cast<Eigen::Index>(dofs())) throw PreconditionError("vector size does not match the dofs");
    return llt_->solve(f);
}

Eigen::MatrixXd EllipticOperator::solve(const Eigen::MatrixXd& f) const {
    if (f.rows() != static_cast<Eigen::Index>(dofs())) throw PreconditionError("matrix rows do not match the dofs");
    return llt_->solve(f);
}

Eigen::VectorXd EllipticOperator::sample(const std::function<double(const Point&)>& f) const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(dofs()));
    for (std::size_t k = 0; k < dof_nodes_.size(); ++k) v[static_cast<Eigen::Index>(k)] = f(grid_->coord(dof_nodes_[k]));
    return v;
}

std::vector<double> EllipticOperator::extend(const Eigen::VectorXd& w) const {
    std::vector<double> out(grid_->node_count(), 0.0);
    for (std::size_t k = 0; k < dof_nodes_.size(); ++k) out[dof_nodes_[k]] = w[static_cast<Eigen::Index>(k)];
    return out;
}

EllipticPtr assemble_elliptic(const CoefficientField& h, GridPtr grid, double lambda0) {
    if (!(lambda0 >= 0.0)) throw PreconditionError(fmt::format("lambda0 must be >= 0, got {}", lambda0));
    verify_coefficients(h, *grid);
    return std::make_shared<const EllipticOperator>(h, std::move(grid), lambda0);
}

double hminus1_norm(const Eigen::VectorXd& f, const EllipticOperator& op) {
    if (f.size() == 0) return 0.0;
    return std::sqrt(std::max(0.0, op.inner(f, op.solve(f))));
}

double h01_seminorm(const Eigen::VectorXd& u, const EllipticOperator& op) {
    return std::sqrt(std::max(0.0, op.inner(u, op.apply(u))));
}

double l2_norm(const Eigen::VectorXd& f, const EllipticOperator& op) { return std::sqrt(op.inner(f, f)); }

double default_time_step(const EllipticOperator& op) {
    return 0.5 * op.grid().min_spacing() / std::sqrt(op.max_h_eigenvalue());
}

double stability_limit(const EllipticOperator& op) { return 2.0 / std::sqrt(op.spectral_bound()); }

LowerOrderSnapshot snapshot(const LowerOrderTerms& lot, const EllipticOperator& op, double t) {
    LowerOrderSnapshot s;
    if (lot.vanishes()) return s;
    s.active = true;
    const auto m = static_cast<Eigen::Index>(op.dofs());
    const int n = op.grid().dim();
    s.q.resize(m);
    s.q2.resize(m);
    for (int k = 0; k < n; ++k) s.q1[k].resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const Point x = op.grid().coord(op.dof_nodes()[static_cast<std::size_t>(i)]);
        s.q[i] = lot.q(t, x).v;
        s.q2[i] = lot.q2(t, x).v;
        for (int k = 0; k < n; ++k) s.q1[k][i] = lot.q1(k, t, x).v;
    }
    return s;
}

WaveStepper::WaveStepper(EllipticPtr op, double dt) : op_(std::move(op)), dt_(dt) {
    if (!(dt_ > 0.0)) throw PreconditionError("time step must be positive");
    const double limit = stability_limit(*op_);
    if (dt_ > limit)
        throw PreconditionError(fmt::format("time step {} violates the stability limit {}", dt_, limit));
}

Eigen::MatrixXd WaveStepper::accel(const Eigen::MatrixXd& w, const Eigen::MatrixXd& v,
                                   const LowerOrderSnapshot& c) const {
    Eigen::MatrixXd a = -(op_->stiffness() * w);
    if (!c.active) return a;
    a += c.q.asDiagonal() * w;
    a += c.q2.asDiagonal() * v;
    for (int k = 0; k < op_->grid().dim(); ++k) a += c.q1[k].asDiagonal() * (op_->gradient(k) * w);
    return a;
}

void WaveStepper::guard() const {
    if (!cur_.allFinite() || (cur_.size() > 0 && cur_.cwiseAbs().maxCoeff() > 1e12))
        throw NumericalError(fmt::format("wave solution blew up at step {} (t = {})", step_, time()));
}

void WaveStepper::start(const Eigen::MatrixXd& w0, const Eigen::MatrixXd& v0, const LowerOrderSnapshot& at0) {
    const auto m = static_cast<Eigen::Index>(op_->dofs());
    if (w0.rows() != m || v0.rows() != m || w0.cols() != v0.cols())
        throw PreconditionError("initial data do not match the dofs");
    if (!w0.allFinite() || !v0.allFinite()) throw PreconditionError("initial data are not finite");
    prev_ = w0;
    cur_ = w0 + dt_ * v0 + 0.5 * dt_ * dt_ * accel(w0, v0, at0);
    step_ = 1;
    guard();
}

void WaveStepper::advance(const LowerOrderSnapshot& c) {
    Eigen::MatrixXd rhs = 2.0 * cur_ - prev_ + dt_ * dt_ * accel(cur_, Eigen::MatrixXd::Zero(cur_.rows(), cur_.cols()), c);
    Eigen::MatrixXd next;
    if (c.active) {
        // q2 (w+ - w-)/(2 dt): solved node-wise for w+.
        const Eigen::ArrayXd half = 0.5 * dt_ * c.q2.array();
        rhs -= (half.matrix().asDiagonal() * prev_);
        next = (1.0 - half).inverse().matrix().asDiagonal() * rhs;
    } else {
        next = std::move(rhs);
    }
    prev_ = std::move(cur_);
    cur_ = std::move(next);
    ++step_;
    guard();
}

int step_count(double T, double dt_max, int align) {
    if (!(T > 0.0) || !(dt_max > 0.0)) throw PreconditionError("T and dt must be positive");
    if (align <= 0) return std::max(1, static_cast<int>(std::ceil(T / dt_max - 1e-9)));
    const int unit = 2 * align;
    const int k = std::max(1, static_cast<int>(std::ceil(T / (unit * dt_max) - 1e-9)));
    return unit * k;
}

WaveTrajectory simulate_wave(const Eigen::VectorXd& w0, const Eigen::VectorXd& w1, const LowerOrderTerms& lot,
                             double T, EllipticPtr op, double dt) {
    if (!(T > 0.0)) throw PreconditionError("T must be positive");
    if (dt <= 0.0) dt = default_time_step(*op);
    const int N = step_count(T, dt);
    const double step = T / N;

    WaveTrajectory tr;
    tr.op = op;
    tr.dt = step;
    tr.T = T;
    tr.r = lot.r();
    WaveStepper stepper(op, step);
    stepper.start(w0, w1, snapshot(lot, *op, 0.0));
    tr.w.push_back(w0);
    tr.wt.push_back(w1);
    tr.times.push_back(0.0);
    for (int n = 1; n <= N; ++n) {
        const Eigen::VectorXd before = stepper.previous().col(0);
        const Eigen::VectorXd now = stepper.current().col(0);
        stepper.advance(snapshot(lot, *op, n * step));
        tr.w.push_back(now);
        tr.wt.push_back((stepper.current().col(0) - before) / (2.0 * step));
        tr.times.push_back(n * step);
    }
    for (std::size_t n = 0; n < tr.w.size(); ++n) {
        const double a = hminus1_norm(tr.wt[n], *op);
        const double b = l2_norm(tr.w[n], *op);
        tr.wt_hm1.push_back(a);
        tr.w_l2.push_back(b);
        tr.energy.push_back(0.5 * (a * a + b * b));
    }
    return tr;
}

double energy(const WaveTrajectory& traj, double t) {
    if (traj.times.empty()) throw PreconditionError("empty trajectory");
    const double pos = t / traj.dt;
    const long n = std::lround(pos);
    if (n < 0 || n >= static_cast<long>(traj.steps()) || std::abs(pos - n) > 1e-6)
        throw PreconditionError(fmt::format("t = {} is not on the trajectory's time grid", t));
    return traj.energy[static_cast<std::size_t>(n)];
}

EnergyBound check_energy_bound(const WaveTrajectory& traj, double r) {
    if (traj.energy.empty()) throw PreconditionError("empty trajectory");
    std::size_t lo = 0, hi = 0;
    for (std::size_t n = 0; n < traj.energy.size(); ++n) {
        if (!(traj.energy[n] > 0.0))
            throw PreconditionError(fmt::format("energy vanishes at t = {}", traj.times[n]));
        if (traj.energy[n] < traj.energy[lo]) lo = n;
        if (traj.energy[n] > traj.energy[hi]) hi = n;
    }
    EnergyBound b;
    b.fitted_C = std::log(traj.energy[hi] / traj.energy[lo]) / (1.0 + r);
    b.t = traj.times[hi];
    b.s = traj.times[lo];
    return b;
}

namespace {

/// Integral over [a, b] of the piecewise-linear interpolant of f on the times.
double integrate(const std::vector<double>& times, const std::vector<double>& f, double a, double b) {
    double total = 0.0;
    for (std::size_t n = 0; n + 1 < times.size(); ++n) {
        const double t0 = times[n], t1 = times[n + 1];
        const double lo = std::max(a, t0), hi = std::min(b, t1);
        if (hi <= lo) continue;
        auto at = [&](double t) { return f[n] + (f[n + 1] - f[n]) * (t - t0) / (t1 - t0); };
        total += 0.5 * (at(lo) + at(hi)) * (hi - lo);
    }
    return total;
}

}  // namespace

double check_integral_bound(const WaveTrajectory& traj, const TimeWindows& win, double r) {
    if (!(0.0 <= win.S1 && win.S1 < win.S2 && win.S2 < win.T2 && win.T2 < win.T1 && win.T1 <= traj.T + 1e-12))
        throw PreconditionError(fmt::format("windows must satisfy 0 <= S1 < S2 < T2 < T1 <= T, got {} {} {} {}",
                                            win.S1, win.S2, win.T2, win.T1));
    std::vector<double> w2(traj.w_l2.size());
    for (std::size_t n = 0; n < w2.size(); ++n) w2[n] = traj.w_l2[n] * traj.w_l2[n];
    const double num = integrate(traj.times, traj.energy, win.S2, win.T2);
    const double den = (1.0 + r * r) * integrate(traj.times, w2, win.S1, win.T1);
    if (!(den > 0.0)) throw PreconditionError("the observed integral of |w|^2 vanishes");
    return num / den;
}

void write_trajectory(const std::string& path, const WaveTrajectory& traj) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path);
    const Grid& g = traj.op->grid();
    auto put_u32 = [&](std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); };
    auto put_u64 = [&](std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); };
    auto put_f64 = [&](double v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); };
    out.write("WOBSTRJ1", 8);
    put_u32(static_cast<std::uint32_t>(g.dim()));
    put_u32(static_cast<std::uint32_t>(g.nodes_along(0)));
    put_u32(static_cast<std::uint32_t>(g.nodes_along(1)));
    put_f64(g.spacing(0));
    put_f64(g.dim() == 2 ? g.spacing(1) : 0.0);
    put_f64(g.domain().lo[0]);
    put_f64(g.domain().lo[1]);
    put_f64(traj.dt);
    put_u64(traj.steps());
    for (const auto& w : traj.w) {
        const auto full = traj.op->extend(w);
        out.write(reinterpret_cast<const char*>(full.data()), static_cast<std::streamsize>(full.size() * sizeof(double)));
    }
    if (!out) throw Error("failed writing " + path);
}

void write_energy_csv(const std::string& path, const WaveTrajectory& traj) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path);
    out << "# schema: wobs-energy-v1\n";
    out << "t,E,w_l2,wt_hm1\n";
    for (std::size_t n = 0; n < traj.steps(); ++n)
        out << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g}\n", traj.times[n], traj.energy[n], traj.w_l2[n],
                           traj.wt_hm1[n]);
}

}  // namespace wobs
