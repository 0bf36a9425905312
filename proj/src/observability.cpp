#include "wobs/observability.hpp"

#include <algorithm>
#include <barrier>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <fmt/format.h>

namespace wobs {

Eigen::MatrixXd InitialDataBasis::displacements() const {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(modes.rows(), 2 * m);
    w.leftCols(m) = modes;
    return w;
}

Eigen::MatrixXd InitialDataBasis::velocities() const {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(modes.rows(), 2 * m);
    w.rightCols(m) = modes;
    return w;
}

InitialDataBasis build_basis(EllipticPtr op, int m) {
    const auto n = static_cast<int>(op->dofs());
    if (m < 1 || m > n) throw PreconditionError(fmt::format("mode count {} must lie in [1, {}]", m, n));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(op->stiffness()));
    if (es.info() != Eigen::Success) throw NumericalError("eigensolver failed on the discrete operator");
    InitialDataBasis b;
    b.op = op;
    b.m = m;
    b.mu = es.eigenvalues().head(m);
    b.modes = es.eigenvectors().leftCols(m) / std::sqrt(op->cell_volume());
    for (int i = 0; i < m; ++i) {
        // Fix the sign so the largest entry is positive; keeps outputs deterministic.
        Eigen::Index at = 0;
        b.modes.col(i).cwiseAbs().maxCoeff(&at);
        if (b.modes(at, i) < 0.0) b.modes.col(i) *= -1.0;
    }
    return b;
}

namespace {

/// Number of time cells of the common region axis (0 without regions).
int region_time_cells(const std::vector<const SpaceTimeRegion*>& regions, const EllipticOperator& op, double T) {
    if (regions.empty()) return 0;
    const SpaceTimeRegion& first = *regions.front();
    for (const SpaceTimeRegion* r : regions) {
        if (r->layout() != SpaceTimeRegion::Layout::TX)
            throw PreconditionError(fmt::format("region {} is not a (t, x) region", r->label));
        if (r->grid_ptr() != op.grid_ptr() && !(r->grid().describe() == op.grid().describe()))
            throw PreconditionError(fmt::format("region {} lives on a different grid", r->label));
        if (!(r->t_axis() == first.t_axis()))
            throw PreconditionError(fmt::format("region {} has a different time axis from {}", r->label, first.label));
    }
    const TimeAxis& t = first.t_axis();
    const bool trapezoid = !t.nodes.empty() && std::abs(t.nodes.front()) < 1e-12 * T;
    return static_cast<int>(trapezoid ? t.size() - 1 : t.size());
}

}  // namespace

Gramian assemble_gramian(const Eigen::MatrixXd& w0, const Eigen::MatrixXd& w1, const LowerOrderTerms& lot,
                         const std::vector<const SpaceTimeRegion*>& regions, double T, EllipticPtr op,
                         const GramianConfig& cfg) {
    if (w0.rows() != static_cast<Eigen::Index>(op->dofs()) || w0.rows() != w1.rows() || w0.cols() != w1.cols())
        throw PreconditionError("initial data do not match the operator's dofs");
    const auto cols = w0.cols();
    const int cells = region_time_cells(regions, *op, T);

    Gramian out;
    out.M = op->cell_volume() * (w0.transpose() * w0 + w1.transpose() * op->solve(w1));
    out.M = 0.5 * (out.M + out.M.transpose());
    out.G.assign(regions.size(), Eigen::MatrixXd::Zero(cols, cols));

    const double dt_max = cfg.dt > 0.0 ? cfg.dt : default_time_step(*op);
    const int N = step_count(T, dt_max, cells);
    out.dt = T / N;
    out.steps = N;

    // Solver step -> region time index.
    std::vector<int> node_at_step(static_cast<std::size_t>(N) + 1, -1);
    if (!regions.empty()) {
        const TimeAxis& t = regions.front()->t_axis();
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double pos = t.nodes[i] / out.dt;
            const long n = std::lround(pos);
            if (std::abs(pos - n) > 1e-6 || n < 0 || n > N)
                throw PreconditionError(
                    fmt::format("region time node {} does not fall on a solver step (dt = {})", t.nodes[i], out.dt));
            node_at_step[static_cast<std::size_t>(n)] = static_cast<int>(i);
        }
    }

    const Grid& g = op->grid();
    const auto& dofs = op->dof_nodes();
    const Eigen::Index flush_rows = std::max<Eigen::Index>(2 * cols, 64);
    std::vector<Eigen::MatrixXd> pending(regions.size());
    std::vector<Eigen::Index> pending_rows(regions.size(), 0);
    out.R.assign(regions.size(), Eigen::MatrixXd(0, cols));
    out.samples.assign(regions.size(), 0);
    for (auto& p : pending) p.resize(flush_rows + static_cast<Eigen::Index>(dofs.size()), cols);

    auto flush = [&](std::size_t r) {
        if (pending_rows[r] == 0) return;
        Eigen::MatrixXd stack(out.R[r].rows() + pending_rows[r], cols);
        stack << out.R[r], pending[r].topRows(pending_rows[r]);
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(stack);
        const Eigen::Index k = std::min(stack.rows(), cols);
        out.R[r] = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
        pending_rows[r] = 0;
    };
    // Appends sqrt(weight) * w(t_it, x) for every dof of the region at t_it.
    auto observe = [&](std::size_t r, std::size_t it, const Eigen::MatrixXd& W) {
        const SpaceTimeRegion& reg = *regions[r];
        const double sw = std::sqrt(reg.t_axis().weights[it] * g.cell_volume());
        for (std::size_t k = 0; k < dofs.size(); ++k) {
            if (!reg.at(it, dofs[k])) continue;
            pending[r].row(pending_rows[r]++) = sw * W.row(static_cast<Eigen::Index>(k));
            ++out.samples[r];
        }
        if (pending_rows[r] >= flush_rows) flush(r);
    };

    const int threads = std::max(1, std::min<int>(cfg.threads, static_cast<int>(std::max<Eigen::Index>(cols, 1))));
    std::vector<Eigen::Index> block_start(static_cast<std::size_t>(threads) + 1, 0);
    for (int k = 0; k <= threads; ++k) block_start[k] = cols * k / threads;

    Eigen::MatrixXd W(w0.rows(), cols);
    std::barrier sync(threads);
    std::mutex err_mu;
    std::exception_ptr failure;

    auto worker = [&](int id) {
        const Eigen::Index c0 = block_start[id], nc = block_start[id + 1] - c0;
        try {
            WaveStepper st(op, out.dt);
            auto process = [&](int n, const Eigen::MatrixXd& cur) {
                const int it = node_at_step[static_cast<std::size_t>(n)];
                if (it < 0) return;
                W.middleCols(c0, nc) = cur;
                sync.arrive_and_wait();
                if (id == 0)
                    for (std::size_t r = 0; r < regions.size(); ++r) observe(r, static_cast<std::size_t>(it), W);
                sync.arrive_and_wait();
            };
            st.start(w0.middleCols(c0, nc), w1.middleCols(c0, nc), snapshot(lot, *op, 0.0));
            process(0, w0.middleCols(c0, nc));
            for (int n = 1; n <= N; ++n) {
                process(n, st.current());
                if (n < N) st.advance(snapshot(lot, *op, n * out.dt));
            }
        } catch (const std::exception& e) {
            {
                std::lock_guard<std::mutex> lock(err_mu);
                if (!failure)
                    failure = std::make_exception_ptr(
                        NumericalError(fmt::format("trajectory for basis datum {}: {}", c0, e.what())));
            }
            sync.arrive_and_drop();
        }
    };

    if (threads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        for (int k = 0; k < threads; ++k) pool.emplace_back(worker, k);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
    for (std::size_t r = 0; r < regions.size(); ++r) {
        flush(r);
        out.G[r] = out.R[r].transpose() * out.R[r];
    }
    return out;
}

Gramian assemble_gramian(const InitialDataBasis& basis, const LowerOrderTerms& lot,
                         const std::vector<const SpaceTimeRegion*>& regions, double T, const GramianConfig& cfg) {
    return assemble_gramian(basis.displacements(), basis.velocities(), lot, regions, T, basis.op, cfg);
}

PencilEstimate estimate_constant(const Eigen::MatrixXd& G, const Eigen::MatrixXd& M) {
    if (G.rows() != M.rows() || G.cols() != M.cols() || G.rows() != G.cols())
        throw PreconditionError("G and M must be square matrices of the same size");
    Eigen::LLT<Eigen::MatrixXd> llt(M);
    if (llt.info() != Eigen::Success) throw NumericalError("M is not positive definite");
    const Eigen::MatrixXd L = llt.matrixL();
    Eigen::MatrixXd A = L.triangularView<Eigen::Lower>().solve(G);
    A = L.triangularView<Eigen::Lower>().solve(A.transpose()).transpose();
    A = 0.5 * (A + A.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError("pencil eigensolve failed");
    PencilEstimate p;
    p.spectrum = es.eigenvalues();
    const double trace = A.trace();
    const double lo = p.spectrum.size() ? p.spectrum[0] : 0.0;
    p.mu_min = std::max(0.0, lo);
    if (p.spectrum.size())
        p.resolution = std::numeric_limits<double>::epsilon() * static_cast<double>(p.spectrum.size()) *
                       std::abs(p.spectrum[p.spectrum.size() - 1]);
    p.observable = trace > 0.0 && lo >= 1e-12 * trace;
    p.C_obs = p.observable ? 1.0 / p.mu_min : std::numeric_limits<double>::infinity();
    return p;
}

PencilEstimate estimate_constant_factored(const Eigen::MatrixXd& R, const Eigen::MatrixXd& M, std::size_t samples) {
    if (R.cols() != M.rows() || M.rows() != M.cols()) throw PreconditionError("R and M sizes do not match");
    Eigen::LLT<Eigen::MatrixXd> llt(M);
    if (llt.info() != Eigen::Success) throw NumericalError("M is not positive definite");
    const Eigen::MatrixXd L = llt.matrixL();
    // X = R L^{-T}, so X^T X = L^{-1} G L^{-T}.
    const Eigen::MatrixXd X = L.triangularView<Eigen::Lower>().solve(R.transpose()).transpose();
    const auto n = M.rows();
    PencilEstimate p;
    p.spectrum = Eigen::VectorXd::Zero(n);
    if (X.rows() > 0) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(X);
        const Eigen::VectorXd sv = svd.singularValues();
        for (Eigen::Index i = 0; i < sv.size(); ++i) p.spectrum[n - 1 - i] = sv[i] * sv[i];
    }
    const double trace = p.spectrum.sum();
    p.mu_min = n ? p.spectrum[0] : 0.0;
    const double sigma_floor = std::numeric_limits<double>::epsilon() * std::sqrt(n ? p.spectrum[n - 1] : 0.0) *
                               std::sqrt(static_cast<double>(std::max<std::size_t>(samples, 1)));
    p.resolution = sigma_floor * sigma_floor;
    p.observable = trace > 0.0 && p.mu_min >= 1e-12 * trace;
    p.C_obs = p.observable ? 1.0 / p.mu_min : std::numeric_limits<double>::infinity();
    return p;
}

TheoreticalConstant theoretical_constant(double r, double fitC) {
    if (!(r >= 0.0)) throw PreconditionError("r must be nonnegative");
    if (!(fitC > 0.0)) throw PreconditionError("the fit constant must be positive");
    TheoreticalConstant c;
    const double inner = fitC * r;
    c.log_value = inner > 709.0 ? std::numeric_limits<double>::infinity() : std::log(fitC) + std::exp(inner);
    c.overflow = !(c.log_value < 709.0);
    c.value = c.overflow ? std::numeric_limits<double>::infinity() : std::exp(c.log_value);
    return c;
}

double fit_theoretical_constant(const std::vector<double>& r, const std::vector<double>& C_obs) {
    if (r.size() != C_obs.size() || r.empty()) throw PreconditionError("need matching, nonempty samples");
    auto dominates = [&](double c) {
        for (std::size_t i = 0; i < r.size(); ++i)
            if (std::isfinite(C_obs[i]) && theoretical_constant(r[i], c).log_value < std::log(C_obs[i])) return false;
        return true;
    };
    double hi = 1.0;
    while (!dominates(hi)) {
        hi *= 2.0;
        if (hi > 1e6) throw NumericalError("no fit constant dominates the samples");
    }
    double lo = 0.0;
    for (int i = 0; i < 200 && hi - lo > 1e-12 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (mid > 0.0 && dominates(mid) ? hi : lo) = mid;
    }
    return hi;
}

RegionComparison compare_regions(const InitialDataBasis& basis, const LowerOrderTerms& lot, double T,
                                 const std::vector<const SpaceTimeRegion*>& regions, const GramianConfig& cfg) {
    if (regions.size() < 2) throw PreconditionError("compare_regions needs at least K and K1");
    for (std::size_t i = 1; i < regions.size(); ++i) {
        if (!regions[0]->compatible(*regions[i]))
            throw PreconditionError(fmt::format("regions {} and {} are on different grids", regions[0]->label,
                                                regions[i]->label));
    }
    const Gramian gr = assemble_gramian(basis, lot, regions, T, cfg);
    RegionComparison cmp;
    for (std::size_t i = 0; i < regions.size(); ++i) {
        const PencilEstimate est = estimate_constant_factored(gr.R[i], gr.M, gr.samples[i]);
        ObservabilityReport rep;
        rep.region = regions[i]->label;
        rep.T = T;
        rep.m = basis.m;
        rep.mu_min = est.mu_min;
        rep.resolution = est.resolution;
        rep.C_obs = est.C_obs;
        rep.observable = est.observable;
        rep.measure = regions[i]->measure();
        rep.r = lot.r();
        cmp.rows.push_back(rep);
    }
    cmp.first_inside_second = regions[0]->subset_of(*regions[1]);
    cmp.first_smaller = cmp.rows[0].measure < cmp.rows[1].measure;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gr.G[1] - gr.G[0], Eigen::EigenvaluesOnly);
    cmp.min_difference_eigenvalue = es.eigenvalues().size() ? es.eigenvalues()[0] : 0.0;
    const double scale = std::max(gr.G[1].cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
    cmp.loewner_ordered = cmp.min_difference_eigenvalue >= -1e-10 * scale;
    cmp.constant_ordered = cmp.rows[0].C_obs >= cmp.rows[1].C_obs * (1.0 - 1e-10);
    return cmp;
}

void write_comparison_csv(const std::string& path, const RegionComparison& cmp) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path);
    out << "# schema: wobs-observability-v1\n";
    out << "region,T,m,measure,mu_min,mu_resolution,C_obs,observable,r,fitC,theoretical,theoretical_log,"
           "refinement_checked,refinement_stable\n";
    for (const auto& r : cmp.rows)
        out << fmt::format("{},{:.17g},{},{:.17g},{:.17g},{:.17g},{:.17g},{},{:.17g},{:.17g},{:.17g},{:.17g},{},{}\n",
                           r.region, r.T, r.m, r.measure, r.mu_min, r.resolution, r.C_obs, r.observable ? 1 : 0, r.r,
                           r.fitC, r.theoretical.value, r.theoretical.log_value, r.refinement_checked ? 1 : 0,
                           r.refinement_stable ? 1 : 0);
}

}  // namespace wobs
