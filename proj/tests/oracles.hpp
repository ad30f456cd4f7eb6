#pragma once

// Test-only oracles, independent of the library paths they check.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <functional>

namespace oracles {

inline double gaussian_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * 3.14159265358979323846);
}

inline double gaussian_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// adaptive Simpson quadrature
inline double simpson(const std::function<double(double)>& f, double a, double b, double fa,
                      double fb, double fm, double eps, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * eps)
        return left + right + (left + right - whole) / 15.0;
    return simpson(f, a, m, fa, fm, flm, eps / 2.0, depth - 1) +
           simpson(f, m, b, fm, fb, frm, eps / 2.0, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double eps = 1e-12) {
    const double m = 0.5 * (a + b);
    return simpson(f, a, b, f(a), f(b), f(m), eps, 40);
}

// (1/pi) * Integral rho(v) * eta / ((v-E)^2 + eta^2) dv, computed on the
// tan-substituted axis where the integrand is smooth for small eta
inline double smoothed_gaussian_density(double E, double eta) {
    const double half_pi = 0.5 * 3.14159265358979323846;
    auto f = [&](double theta) { return gaussian_pdf(E + eta * std::tan(theta)); };
    return integrate(f, -half_pi + 1e-12, half_pi - 1e-12, 1e-13) / (2.0 * half_pi);
}

// resolvent entry from an explicit spectral decomposition
inline std::complex<double> spectral_resolvent_entry(const Eigen::VectorXd& values,
                                                     const Eigen::MatrixXd& vectors,
                                                     std::complex<double> z, int i, int j) {
    std::complex<double> sum = 0.0;
    for (int k = 0; k < values.size(); ++k)
        sum += vectors(i, k) * vectors(j, k) / (values[k] - z);
    return sum;
}

// numerical rank at an absolute singular-value tolerance
inline int numerical_rank(const Eigen::MatrixXcd& m, double tol) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
    int rank = 0;
    for (int k = 0; k < svd.singularValues().size(); ++k)
        if (svd.singularValues()[k] > tol) ++rank;
    return rank;
}

}  // namespace oracles
