#pragma once

#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

#include "anderson/spectra.hpp"

namespace anderson {

struct CavityParams {
    int d = 3;
    double t = 0.0;
    double E = 0.0;
    double eta = 0.1;
    int pool_size = 100'000;
    int sweeps = 200;
    uint64_t seed = 0;
};

// Pool of samples of the cavity resolvent law at fixed (E, eta, d, t). Every
// sample has strictly positive imaginary part. last_us holds the (U, S)
// denominators that produced the current samples (empty before any sweep).
struct Population {
    CavityParams params;
    std::vector<std::complex<double>> samples;
    std::vector<std::pair<double, double>> last_us;
    std::vector<double> mean_im_history;  // one entry per completed sweep
    int sweep_count = 0;
};

// Monte Carlo estimate with its standard error.
struct Estimate {
    double value = 0.0;
    double se = 0.0;
};

// One draw of the root resolvent with its decomposition: r00 = 1/((v0-a) - i*b).
struct RootDraw {
    double v0 = 0.0;
    double a = 0.0;  // E + t^2 * sum Re(children)
    double b = 0.0;  // eta + t^2 * sum Im(children), >= eta
    std::complex<double> r00;
};

struct RootLaw {
    CavityParams params;
    std::vector<RootDraw> draws;
};

// Pool initialized at the hopping-free fixed point 1/(V - E - i*eta).
Population init_population(const CavityParams& params);

// One synchronous update: every new sample uses a fresh potential and d-1
// members of the previous pool, resampled with replacement. Per-sample RNG
// streams are derived from (seed, sweep index, sample index), so the result
// is independent of any parallel schedule.
Population sweep(const Population& pop);

// init_population followed by params.sweeps sweeps
Population run_population(const CavityParams& params);

// burn-in diagnostic: the two most recent windows of per-sweep means agree
// within 3 standard errors
bool sweep_converged(const Population& pop, int window = 20);

// n_samples root draws, each combining d pool members with a fresh potential
RootLaw root_law(const Population& pop, int n_samples);

// (1/pi) * mean Im R00: the eta-smoothed density of states at E
double dos_estimate(const RootLaw& law);

// Monte Carlo mean of (Im R00)^s
Estimate im_moment(const RootLaw& law, double s);

enum class TailKind { X, Y, U, S, Binv };

// Empirical tail P(|X|>u), P(Y>u), P(|U|>u), P(S>u); for Binv the mean of
// 1/B over synthesized root denominators (u ignored).
Estimate tail_probe(const Population& pop, TailKind kind, double u);

// empirical P(Y <= eps)
Estimate lower_tail_probe(const Population& pop, double eps);

// Asymptotic mobility edge sqrt(2*ln(4g/sqrt(2*pi))); requires 4g/sqrt(2*pi) > 1.
double mobility_edge(double g);

// t = g / (d * ln d)
double hopping_of(double g, int d);

struct WegnerRow {
    double lo = 0.0;
    double hi = 0.0;
    double mass = 0.0;   // estimated spectral mass of the interval
    double ratio = 0.0;  // mass / |I|
};

// Smoothed spectral mass per interval via midpoint quadrature of the cavity
// density; ratios should share a positive bracket across the grid.
std::vector<WegnerRow> wegner_audit(const CavityParams& base,
                                    const std::vector<Interval>& intervals,
                                    int nodes_per_interval = 3);

}  // namespace anderson
