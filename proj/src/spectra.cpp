#include "anderson/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include <lapacke.h>

#include "anderson/io.hpp"

namespace anderson {

Interval::Interval(double lo_, double hi_) : lo(lo_), hi(hi_) {
    if (!(lo <= hi)) throw std::invalid_argument("Interval: need lo <= hi");
}

namespace {

double operator_norm_bound(const Hamiltonian& h) {
    // max absolute row sum; cheap and sufficient for tolerance scaling
    Eigen::VectorXd rowsum = Eigen::VectorXd::Zero(h.n);
    for (int k = 0; k < h.matrix.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(h.matrix, k); it; ++it)
            rowsum[it.row()] += std::abs(it.value());
    return rowsum.size() > 0 ? rowsum.maxCoeff() : 0.0;
}

}  // namespace

EigenSystem eigensystem(const Hamiltonian& h, int dense_budget) {
    if (h.n > dense_budget)
        throw std::length_error("eigensystem: n exceeds the dense-solve budget");
    EigenSystem es;
    es.vectors = Eigen::MatrixXd(h.matrix);
    es.values.resize(h.n);
    const lapack_int info =
        LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', h.n, es.vectors.data(), std::max(h.n, 1),
                       es.values.data());
    if (info != 0) throw std::runtime_error("eigensystem: dsyevd failed");

    // sign convention: largest-magnitude entry positive
    for (int k = 0; k < h.n; ++k) {
        int arg = 0;
        es.vectors.col(k).cwiseAbs().maxCoeff(&arg);
        if (es.vectors(arg, k) < 0.0) es.vectors.col(k) = -es.vectors.col(k);
    }
    return es;
}

Eigen::VectorXd eigenvalues_only(const Hamiltonian& h, int dense_budget) {
    if (h.n > dense_budget)
        throw std::length_error("eigenvalues_only: n exceeds the dense-solve budget");
    Eigen::MatrixXd a = Eigen::MatrixXd(h.matrix);
    Eigen::VectorXd w(h.n);
    const lapack_int info =
        LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'L', h.n, a.data(), std::max(h.n, 1), w.data());
    if (info != 0) throw std::runtime_error("eigenvalues_only: dsyevd failed");
    return w;
}

int inertia_below(const Hamiltonian& h, double sigma) {
    Eigen::MatrixXd a = Eigen::MatrixXd(h.matrix);
    a.diagonal().array() -= sigma;
    std::vector<lapack_int> ipiv(h.n);
    const lapack_int info =
        LAPACKE_dsytrf(LAPACK_COL_MAJOR, 'L', h.n, a.data(), std::max(h.n, 1), ipiv.data());
    if (info < 0) throw std::runtime_error("inertia_below: bad argument to dsytrf");
    if (info > 0) throw std::runtime_error("inertia_below: exactly singular pivot");

    // walk the block-diagonal D: 1x1 blocks where ipiv[k] > 0, 2x2 blocks
    // where consecutive ipiv entries are negative and equal
    int negatives = 0;
    int k = 0;
    while (k < h.n) {
        if (ipiv[k] > 0) {
            if (a(k, k) < 0.0) ++negatives;
            k += 1;
        } else {
            const double p = a(k, k);
            const double q = a(k + 1, k + 1);
            const double b = a(k + 1, k);
            const double disc = std::sqrt((p - q) * (p - q) * 0.25 + b * b);
            const double mid = (p + q) * 0.5;
            if (mid - disc < 0.0) ++negatives;
            if (mid + disc < 0.0) ++negatives;
            k += 2;
        }
    }
    return negatives;
}

int count_in_interval(const EigenSystem& es, const Interval& I) {
    const double* begin = es.values.data();
    const double* end = begin + es.values.size();
    return static_cast<int>(std::upper_bound(begin, end, I.hi) -
                            std::lower_bound(begin, end, I.lo));
}

int count_in_interval(const Hamiltonian& h, const Interval& I) {
    const double off = 1e-12 * std::max(operator_norm_bound(h), 1.0);
    try {
        return inertia_below(h, I.hi + off) - inertia_below(h, I.lo - off);
    } catch (const std::runtime_error&) {
        return count_in_interval(eigensystem(h), I);
    }
}

std::vector<double> p_profile(const EigenSystem& es, const Interval& I) {
    const int n = es.n();
    std::vector<double> p(n, 0.0);
    const double* begin = es.values.data();
    const double* end = begin + n;
    const int lo = static_cast<int>(std::lower_bound(begin, end, I.lo) - begin);
    const int hi = static_cast<int>(std::upper_bound(begin, end, I.hi) - begin);
    const int card = hi - lo;
    if (card == 0) return p;

    const double scale = static_cast<double>(n) / card;
    for (int k = lo; k < hi; ++k)
        for (int j = 0; j < n; ++j) p[j] += scale * es.vectors(j, k) * es.vectors(j, k);
    return p;
}

double q_moment(const EigenSystem& es, const Interval& I, double s) {
    if (!(s > 0.0)) throw std::invalid_argument("q_moment: s must be positive");
    if (count_in_interval(es, I) == 0) return 0.0;
    const auto p = p_profile(es, I);
    double sum = 0.0;
    for (double v : p) sum += std::pow(v, s);
    return sum / es.n();
}

double holder_check(const EigenSystem& es, const Interval& I, double s) {
    if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("holder_check: s must be in (0,1)");
    if (count_in_interval(es, I) == 0)
        throw std::invalid_argument("holder_check: empty interval");
    const double qs = q_moment(es, I, s / 2.0);
    const double q2 = q_moment(es, I, 2.0);
    return qs * std::pow(q2, 1.0 - s / 2.0);
}

double spectral_im_g(const EigenSystem& es, const SpectralParameter& z, int j) {
    double sum = 0.0;
    for (int k = 0; k < es.n(); ++k) {
        const double gap = es.values[k] - z.E;
        const double u = es.vectors(j, k);
        sum += z.eta * u * u / (gap * gap + z.eta * z.eta);
    }
    return sum;
}

void write_spectrum(std::ostream& out, const EigenSystem& es) {
    out << "k,lambda\n";
    for (int k = 0; k < es.n(); ++k) out << k << ',' << fmt_double(es.values[k]) << '\n';
}

double pi_img_ratio(const EigenSystem& es, double E, double eta) {
    const Interval I(E - eta, E + eta);
    const int card = count_in_interval(es, I);
    if (card == 0) throw std::invalid_argument("pi_img_ratio: empty interval");
    const SpectralParameter z(E, eta);
    const auto p = p_profile(es, I);
    const int n = es.n();
    double worst = 0.0;
    for (int j = 0; j < n; ++j) {
        const double img = spectral_im_g(es, z, j);
        worst = std::max(worst, p[j] * card / (2.0 * n * eta * img));
    }
    return worst;
}

}  // namespace anderson
