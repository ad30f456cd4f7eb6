#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "anderson/hamiltonian.hpp"

namespace anderson {

// Raised when a proven inequality fails numerically; always an
// implementation bug, never a statistical event.
class TheoremViolation : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class SolverFailure : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct ResolventColumn {
    int j = 0;
    Eigen::VectorXcd values;  // G_{. j}(z)
};

// One factorization (or preconditioned iterative state) of (H - z), with
// iterative refinement to the residual tolerance. Reusable across many
// right-hand sides at fixed z.
class ResolventSolver {
  public:
    ResolventSolver(const Hamiltonian& h, const SpectralParameter& z, double tol = 1e-10);
    ~ResolventSolver();
    ResolventSolver(ResolventSolver&&) noexcept;

    Eigen::VectorXcd solve(const Eigen::VectorXcd& rhs) const;
    Eigen::VectorXcd column(int j) const;
    int n() const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

ResolventColumn resolvent_column(const Hamiltonian& h, const SpectralParameter& z, int j);

// |sum_j |G_ij|^2 - Im G_ii / eta|, which vanishes identically.
double ward_residual(const Hamiltonian& h, const SpectralParameter& z, int i);

// m(z) = (1/n) Tr G(z); eigenvalue path when n fits the dense budget.
std::complex<double> stieltjes(const Hamiltonian& h, const SpectralParameter& z);

// all diagonal values Im G_jj(z)
Eigen::VectorXd imag_diagonal(const Hamiltonian& h, const SpectralParameter& z);

// F_s(z) = (1/n) sum_j (Im G_jj)^s and its truncation at level delta
double fs_observable(const Hamiltonian& h, const SpectralParameter& z, double s);
double fs_truncated(const Hamiltonian& h, const SpectralParameter& z, double s, double delta);

double mu_ct(const SpectralParameter& z, double t, int d);

// graph distance between vertex sets over the sparsity pattern; -1 when
// unreachable
int set_distance(const Hamiltonian& h, const std::vector<int>& X, const std::vector<int>& Y);

struct CtRecord {
    double observed = 0.0;  // spectral norm of the X x Y resolvent block
    double bound = 0.0;     // (2/eta) exp(-mu_ct * dist)
    double mu = 0.0;
    int dist = 0;
    bool skipped = false;  // disconnected pair: no finite distance
};

// Exponential off-diagonal decay audit; throws TheoremViolation if the block
// norm exceeds the envelope.
CtRecord ct_check(const Hamiltonian& h, const SpectralParameter& z, const std::vector<int>& X,
                  const std::vector<int>& Y);

struct DecouplingRecord {
    double gap = 0.0;    // |G_oo - G^(r)_oo|
    double bound = 0.0;  // (4td/eta^2) exp(-2 mu_ct r)
};

DecouplingRecord decoupling_gap(const Hamiltonian& h, int root, int r,
                                const SpectralParameter& z);

struct SwitchingRecord {
    double max_ratio = 0.0;
    int trials = 0;
};

// Random switchings of a pairing; |F_s before - after| against the
// rank-4 Lipschitz envelope. Plain F_s needs s >= 1; s in (0,1) needs delta.
SwitchingRecord switching_lipschitz_check(const Pairing& p, const DisorderField& v,
                                          const SpectralParameter& z, double s, double t,
                                          int trials, uint64_t seed,
                                          std::optional<double> delta = std::nullopt);

// dense resolvent (H - z)^{-1}; small n only
Eigen::MatrixXcd dense_resolvent(const Hamiltonian& h, const SpectralParameter& z);

}  // namespace anderson
