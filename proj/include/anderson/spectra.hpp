#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <vector>

#include "anderson/hamiltonian.hpp"

namespace anderson {

// Sorted eigenvalues with orthonormal eigenvector columns. Sign convention:
// the largest-magnitude entry of each vector is positive.
struct EigenSystem {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;

    int n() const { return static_cast<int>(values.size()); }
};

// Closed interval [lo, hi].
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    Interval(double lo_, double hi_);
    double length() const { return hi - lo; }
};

// Dense symmetric eigendecomposition (LAPACK dsyevd). Throws when n exceeds
// the dense budget.
EigenSystem eigensystem(const Hamiltonian& h, int dense_budget = 5000);
Eigen::VectorXd eigenvalues_only(const Hamiltonian& h, int dense_budget = 5000);

// |Lambda_I| by LDL^T inertia at the two endpoints (Sylvester's law), with a
// splitting offset of 1e-12*||H|| so endpoint ties count inside. Falls back
// to eigendecomposition counting if a factorization breaks down.
int count_in_interval(const Hamiltonian& h, const Interval& I);
int count_in_interval(const EigenSystem& es, const Interval& I);

// number of eigenvalues of H strictly below sigma, by Bunch-Kaufman LDL^T
int inertia_below(const Hamiltonian& h, double sigma);

// P_I(j) = (n/|Lambda_I|) sum_{lambda_i in I} u_i(j)^2; all-zero when empty.
std::vector<double> p_profile(const EigenSystem& es, const Interval& I);

// Q_I(s) = (1/n) sum_j P_I(j)^s; zero when the interval is empty.
double q_moment(const EigenSystem& es, const Interval& I, double s);

// Q_I(s/2) * Q_I(2)^{1-s/2}, which is >= 1; throws on an empty interval.
double holder_check(const EigenSystem& es, const Interval& I, double s);

// Im G_jj(z) = sum_k eta*u_k(j)^2 / ((lambda_k - E)^2 + eta^2)
double spectral_im_g(const EigenSystem& es, const SpectralParameter& z, int j);

// max_j P_I(j)*|Lambda_I| / (2*n*eta*Im G_jj) over I = [E-eta, E+eta],
// which is <= 1; throws on an empty interval.
double pi_img_ratio(const EigenSystem& es, double E, double eta);

// spectrum dump: "k,lambda" CSV rows
void write_spectrum(std::ostream& out, const EigenSystem& es);

}  // namespace anderson
