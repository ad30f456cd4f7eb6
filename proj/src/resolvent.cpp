#include "anderson/resolvent.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>

#include "anderson/rng.hpp"
#include "anderson/spectra.hpp"

namespace anderson {

namespace {

using SpMatC = Eigen::SparseMatrix<std::complex<double>>;

constexpr int kDenseEigenBudget = 5000;
// Direct factorization cutoff: random regular graphs are expanders, so LU
// fill-in grows quickly with n and an iterative solve wins for large hosts.
constexpr int kSparseLuMaxN = 2000;

SpMatC shifted_matrix(const Hamiltonian& h, const SpectralParameter& z) {
    SpMatC a = h.matrix.cast<std::complex<double>>();
    SpMatC id(h.n, h.n);
    id.setIdentity();
    a -= z.z() * id;
    a.makeCompressed();
    return a;
}

}  // namespace

struct ResolventSolver::Impl {
    SpMatC a;
    Eigen::SparseLU<SpMatC> lu;
    Eigen::BiCGSTAB<SpMatC, Eigen::DiagonalPreconditioner<std::complex<double>>> iterative;
    bool direct = true;
    double tol = 1e-10;
    int n = 0;
};

ResolventSolver::ResolventSolver(const Hamiltonian& h, const SpectralParameter& z, double tol)
    : impl_(std::make_unique<Impl>()) {
    impl_->a = shifted_matrix(h, z);
    impl_->tol = tol;
    impl_->n = h.n;
    impl_->direct = h.n <= kSparseLuMaxN;
    if (impl_->direct) {
        impl_->lu.compute(impl_->a);
        if (impl_->lu.info() != Eigen::Success)
            throw SolverFailure("ResolventSolver: sparse LU factorization failed");
    } else {
        impl_->iterative.setTolerance(tol * 1e-2);
        impl_->iterative.setMaxIterations(20000);
        impl_->iterative.compute(impl_->a);
    }
}

ResolventSolver::~ResolventSolver() = default;
ResolventSolver::ResolventSolver(ResolventSolver&&) noexcept = default;

int ResolventSolver::n() const { return impl_->n; }

Eigen::VectorXcd ResolventSolver::solve(const Eigen::VectorXcd& rhs) const {
    auto once = [&](const Eigen::VectorXcd& b) {
        return impl_->direct ? Eigen::VectorXcd(impl_->lu.solve(b))
                             : Eigen::VectorXcd(impl_->iterative.solve(b));
    };
    Eigen::VectorXcd x = once(rhs);
    const double scale = std::max(rhs.norm(), 1e-300);
    for (int pass = 0; pass < 4; ++pass) {
        const Eigen::VectorXcd resid = rhs - impl_->a * x;
        if (resid.norm() <= impl_->tol * scale) return x;
        x += once(resid);
    }
    const double final_resid = (rhs - impl_->a * x).norm();
    if (final_resid > impl_->tol * scale)
        throw SolverFailure("ResolventSolver: residual above tolerance after refinement");
    return x;
}

Eigen::VectorXcd ResolventSolver::column(int j) const {
    Eigen::VectorXcd e = Eigen::VectorXcd::Zero(impl_->n);
    e[j] = 1.0;
    return solve(e);
}

ResolventColumn resolvent_column(const Hamiltonian& h, const SpectralParameter& z, int j) {
    if (j < 0 || j >= h.n) throw std::out_of_range("resolvent_column: vertex out of range");
    ResolventColumn col;
    col.j = j;
    col.values = ResolventSolver(h, z).column(j);
    return col;
}

double ward_residual(const Hamiltonian& h, const SpectralParameter& z, int i) {
    const auto col = resolvent_column(h, z, i);  // row i of G by symmetry
    const double sum = col.values.squaredNorm();
    return std::abs(sum - col.values[i].imag() / z.eta);
}

std::complex<double> stieltjes(const Hamiltonian& h, const SpectralParameter& z) {
    if (h.n <= kDenseEigenBudget) {
        const Eigen::VectorXd lambda = eigenvalues_only(h, kDenseEigenBudget);
        std::complex<double> sum = 0.0;
        for (int k = 0; k < h.n; ++k) sum += 1.0 / (lambda[k] - z.z());
        return sum / static_cast<double>(h.n);
    }
    ResolventSolver solver(h, z);
    std::complex<double> sum = 0.0;
    for (int j = 0; j < h.n; ++j) sum += solver.column(j)[j];
    return sum / static_cast<double>(h.n);
}

Eigen::VectorXd imag_diagonal(const Hamiltonian& h, const SpectralParameter& z) {
    Eigen::VectorXd diag(h.n);
    if (h.n <= kDenseEigenBudget) {
        const EigenSystem es = eigensystem(h, kDenseEigenBudget);
        for (int j = 0; j < h.n; ++j) diag[j] = spectral_im_g(es, z, j);
        return diag;
    }
    ResolventSolver solver(h, z);
    for (int j = 0; j < h.n; ++j) diag[j] = solver.column(j)[j].imag();
    return diag;
}

double fs_observable(const Hamiltonian& h, const SpectralParameter& z, double s) {
    if (!(s > 0.0)) throw std::invalid_argument("fs_observable: s must be positive");
    const Eigen::VectorXd diag = imag_diagonal(h, z);
    double sum = 0.0;
    for (int j = 0; j < h.n; ++j) sum += std::pow(diag[j], s);
    return sum / h.n;
}

double fs_truncated(const Hamiltonian& h, const SpectralParameter& z, double s, double delta) {
    if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("fs_truncated: s must be in (0,1)");
    if (!(delta > 0.0 && delta <= 1.0 / z.eta))
        throw std::domain_error("fs_truncated: delta must lie in (0, 1/eta]");
    const Eigen::VectorXd diag = imag_diagonal(h, z);
    double sum = 0.0;
    for (int j = 0; j < h.n; ++j) sum += std::pow(std::max(diag[j], delta), s);
    return sum / h.n;
}

double mu_ct(const SpectralParameter& z, double t, int d) {
    return std::log1p(z.eta / (4.0 * t * d));
}

int set_distance(const Hamiltonian& h, const std::vector<int>& X, const std::vector<int>& Y) {
    if (X.empty() || Y.empty()) throw std::invalid_argument("set_distance: empty vertex set");
    std::vector<char> target(h.n, 0);
    for (int y : Y) target.at(y) = 1;
    const auto adj = h.adjacency();

    std::vector<int> dist(h.n, -1), frontier;
    for (int x : X) {
        if (dist.at(x) == -1) {
            dist[x] = 0;
            if (target[x]) return 0;
            frontier.push_back(x);
        }
    }
    int level = 0;
    while (!frontier.empty()) {
        ++level;
        std::vector<int> next;
        for (int u : frontier)
            for (int w : adj[u])
                if (dist[w] == -1) {
                    dist[w] = level;
                    if (target[w]) return level;
                    next.push_back(w);
                }
        frontier = std::move(next);
    }
    return -1;
}

namespace {

// largest singular value by power iteration on B^H B
double block_spectral_norm(const Eigen::MatrixXcd& b) {
    if (b.size() == 0) return 0.0;
    Eigen::VectorXcd v = Eigen::VectorXcd::Ones(b.cols());
    v /= v.norm();
    double sigma = 0.0;
    for (int it = 0; it < 200; ++it) {
        Eigen::VectorXcd w = b * v;
        const double next = w.norm();
        if (next == 0.0) return 0.0;
        v = b.adjoint() * w;
        v /= v.norm();
        if (it > 0 && std::abs(next - sigma) <= 1e-10 * next) return next;
        sigma = next;
    }
    return sigma;
}

}  // namespace

CtRecord ct_check(const Hamiltonian& h, const SpectralParameter& z, const std::vector<int>& X,
                  const std::vector<int>& Y) {
    CtRecord rec;
    rec.mu = mu_ct(z, h.t, h.d);
    rec.dist = set_distance(h, X, Y);
    if (rec.dist < 0) {
        rec.skipped = true;  // disconnected: the block is exactly zero
        rec.bound = 0.0;
        return rec;
    }
    ResolventSolver solver(h, z);
    Eigen::MatrixXcd block(X.size(), Y.size());
    for (size_t c = 0; c < Y.size(); ++c) {
        const Eigen::VectorXcd col = solver.column(Y[c]);
        for (size_t rix = 0; rix < X.size(); ++rix) block(rix, c) = col[X[rix]];
    }
    rec.observed = block_spectral_norm(block);
    rec.bound = (2.0 / z.eta) * std::exp(-rec.mu * rec.dist);
    if (rec.observed > rec.bound)
        throw TheoremViolation("ct_check: resolvent block exceeds the exponential envelope");
    return rec;
}

DecouplingRecord decoupling_gap(const Hamiltonian& h, int root, int r,
                                const SpectralParameter& z) {
    if (r < 1) throw std::invalid_argument("decoupling_gap: r must be at least 1");
    DecouplingRecord rec;
    const std::complex<double> full = ResolventSolver(h, z).column(root)[root];
    const Hamiltonian cut = decouple(h, root, r);
    const std::complex<double> part = ResolventSolver(cut, z).column(root)[root];
    rec.gap = std::abs(full - part);
    rec.bound = (4.0 * h.t * h.d / (z.eta * z.eta)) * std::exp(-2.0 * mu_ct(z, h.t, h.d) * r);
    if (rec.gap > rec.bound)
        throw TheoremViolation("decoupling_gap: gap exceeds the decoupling bound");
    return rec;
}

SwitchingRecord switching_lipschitz_check(const Pairing& p, const DisorderField& v,
                                          const SpectralParameter& z, double s, double t,
                                          int trials, uint64_t seed,
                                          std::optional<double> delta) {
    const bool truncated = s < 1.0;
    if (truncated && !delta)
        throw std::invalid_argument("switching_lipschitz_check: s in (0,1) needs delta");
    const int n = p.n;
    const double bound = truncated
                             ? 32.0 * s * std::abs(t) * std::pow(*delta, s - 1.0) /
                                   (n * z.eta * z.eta)
                             : 32.0 * s * std::abs(t) / (n * std::pow(z.eta, s + 1.0));

    auto evaluate = [&](const Pairing& q) {
        const Hamiltonian h = assemble(pairing_to_multigraph(q), v, t);
        return truncated ? fs_truncated(h, z, s, *delta) : fs_observable(h, z, s);
    };

    const double before = evaluate(p);
    const int m = static_cast<int>(p.matches.size());
    Rng rng(derive_seed(seed, STREAM_SWITCHING, 0));
    SwitchingRecord rec;
    rec.trials = trials;
    for (int trial = 0; trial < trials; ++trial) {
        const int i = static_cast<int>(rng.below(m));
        int j = static_cast<int>(rng.below(m - 1));
        if (j >= i) ++j;
        const SwitchMode mode = rng.below(2) == 0 ? SwitchMode::cross : SwitchMode::parallel;
        const double after = evaluate(switch_pairs(p, i, j, mode));
        const double ratio = std::abs(before - after) / bound;
        rec.max_ratio = std::max(rec.max_ratio, ratio);
    }
    if (rec.max_ratio > 1.0)
        throw TheoremViolation("switching_lipschitz_check: difference exceeds the envelope");
    return rec;
}

Eigen::MatrixXcd dense_resolvent(const Hamiltonian& h, const SpectralParameter& z) {
    Eigen::MatrixXcd a = Eigen::MatrixXd(h.matrix).cast<std::complex<double>>();
    a.diagonal().array() -= z.z();
    return a.partialPivLu().inverse();
}

}  // namespace anderson
