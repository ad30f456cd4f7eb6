#include "anderson/cavity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "anderson/rng.hpp"

namespace anderson {

namespace {

constexpr double kPi = 3.14159265358979323846264;
constexpr double kTwoPi = 2.0 * kPi;

void validate(const CavityParams& p) {
    if (p.d < 3) throw std::invalid_argument("cavity: d must be at least 3");
    if (!(p.eta > 0.0)) throw std::invalid_argument("cavity: eta must be positive");
    if (!(p.t >= 0.0)) throw std::invalid_argument("cavity: t must be nonnegative");
    if (p.pool_size < 1) throw std::invalid_argument("cavity: pool_size must be positive");
}

Estimate mean_with_se(const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= std::max(n - 1.0, 1.0);
    return {mean, std::sqrt(var / n)};
}

Estimate proportion_with_se(long hits, long total) {
    const double p = static_cast<double>(hits) / total;
    return {p, std::sqrt(p * (1.0 - p) / total)};
}

}  // namespace

Population init_population(const CavityParams& params) {
    validate(params);
    Population pop;
    pop.params = params;
    pop.samples.resize(params.pool_size);
    Rng rng(derive_seed(params.seed, STREAM_CAVITY_INIT, 0));
    for (auto& sample : pop.samples) {
        const double u = rng.normal() - params.E;
        const double norm = u * u + params.eta * params.eta;
        sample = {u / norm, params.eta / norm};
    }
    return pop;
}

Population sweep(const Population& pop) {
    const CavityParams& p = pop.params;
    const int m = p.pool_size;
    const double t2 = p.t * p.t;

    Population next;
    next.params = p;
    next.sweep_count = pop.sweep_count + 1;
    next.mean_im_history = pop.mean_im_history;
    next.samples.resize(m);
    next.last_us.resize(m);

    double im_sum = 0.0;
    for (int i = 0; i < m; ++i) {
        Rng rng(derive_seed(p.seed, STREAM_CAVITY_SWEEP_BASE + pop.sweep_count, i));
        const double v0 = rng.normal();
        double sum_x = 0.0, sum_y = 0.0;
        for (int c = 0; c < p.d - 1; ++c) {
            const auto& child = pop.samples[rng.below(m)];
            sum_x += child.real();
            sum_y += child.imag();
        }
        const double u = v0 - p.E - t2 * sum_x;
        const double s = p.eta + t2 * sum_y;
        const double norm = u * u + s * s;
        next.samples[i] = {u / norm, s / norm};
        next.last_us[i] = {u, s};
        im_sum += s / norm;
    }
    next.mean_im_history.push_back(im_sum / m);
    return next;
}

Population run_population(const CavityParams& params) {
    Population pop = init_population(params);
    for (int k = 0; k < params.sweeps; ++k) pop = sweep(pop);
    return pop;
}

bool sweep_converged(const Population& pop, int window) {
    const auto& hist = pop.mean_im_history;
    if (static_cast<int>(hist.size()) < 2 * window) return false;
    const auto tail = hist.end();
    const double m1 = std::accumulate(tail - 2 * window, tail - window, 0.0) / window;
    const double m2 = std::accumulate(tail - window, tail, 0.0) / window;
    double var = 0.0;
    for (auto it = tail - 2 * window; it != tail; ++it) {
        const double mu = (m1 + m2) / 2.0;
        var += (*it - mu) * (*it - mu);
    }
    var /= (2.0 * window - 1.0);
    const double se = std::sqrt(var / window);
    return std::abs(m1 - m2) <= 3.0 * se;
}

RootLaw root_law(const Population& pop, int n_samples) {
    const CavityParams& p = pop.params;
    const int m = static_cast<int>(pop.samples.size());
    const double t2 = p.t * p.t;

    RootLaw law;
    law.params = p;
    law.draws.resize(n_samples);
    for (int k = 0; k < n_samples; ++k) {
        Rng rng(derive_seed(p.seed, STREAM_CAVITY_ROOT, k));
        RootDraw& draw = law.draws[k];
        draw.v0 = rng.normal();
        double sum_x = 0.0, sum_y = 0.0;
        for (int c = 0; c < p.d; ++c) {  // the root has d subtrees
            const auto& child = pop.samples[rng.below(m)];
            sum_x += child.real();
            sum_y += child.imag();
        }
        draw.a = p.E + t2 * sum_x;
        draw.b = p.eta + t2 * sum_y;
        const double u = draw.v0 - draw.a;
        const double norm = u * u + draw.b * draw.b;
        draw.r00 = {u / norm, draw.b / norm};
    }
    return law;
}

double dos_estimate(const RootLaw& law) {
    double sum = 0.0;
    for (const auto& d : law.draws) sum += d.r00.imag();
    return sum / law.draws.size() / kPi;
}

Estimate im_moment(const RootLaw& law, double s) {
    if (!(s > 0.0)) throw std::invalid_argument("im_moment: s must be positive");
    std::vector<double> xs;
    xs.reserve(law.draws.size());
    for (const auto& d : law.draws) xs.push_back(std::pow(d.r00.imag(), s));
    return mean_with_se(xs);
}

Estimate tail_probe(const Population& pop, TailKind kind, double u) {
    const long m = static_cast<long>(pop.samples.size());
    if ((kind == TailKind::U || kind == TailKind::S) && pop.last_us.empty())
        throw std::logic_error("tail_probe: U/S require at least one sweep");

    long hits = 0;
    switch (kind) {
        case TailKind::X:
            for (const auto& g : pop.samples) hits += std::abs(g.real()) > u;
            return proportion_with_se(hits, m);
        case TailKind::Y:
            for (const auto& g : pop.samples) hits += g.imag() > u;
            return proportion_with_se(hits, m);
        case TailKind::U:
            for (const auto& [uu, ss] : pop.last_us) hits += std::abs(uu) > u;
            return proportion_with_se(hits, m);
        case TailKind::S:
            for (const auto& [uu, ss] : pop.last_us) hits += ss > u;
            return proportion_with_se(hits, m);
        case TailKind::Binv: {
            const CavityParams& p = pop.params;
            const double t2 = p.t * p.t;
            std::vector<double> xs(pop.samples.size());
            for (size_t k = 0; k < xs.size(); ++k) {
                Rng rng(derive_seed(p.seed, STREAM_CAVITY_TAIL, k));
                double sum_y = 0.0;
                for (int c = 0; c < p.d; ++c) sum_y += pop.samples[rng.below(m)].imag();
                xs[k] = 1.0 / (p.eta + t2 * sum_y);
            }
            return mean_with_se(xs);
        }
    }
    throw std::logic_error("tail_probe: unknown kind");
}

Estimate lower_tail_probe(const Population& pop, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("lower_tail_probe: eps must be positive");
    long hits = 0;
    for (const auto& g : pop.samples) hits += g.imag() <= eps;
    return proportion_with_se(hits, static_cast<long>(pop.samples.size()));
}

double mobility_edge(double g) {
    const double arg = 4.0 * g / std::sqrt(kTwoPi);
    if (!(arg > 1.0))
        throw std::domain_error("mobility_edge: need 4g/sqrt(2*pi) > 1 for a real edge");
    return std::sqrt(2.0 * std::log(arg));
}

double hopping_of(double g, int d) {
    if (!(g > 0.0)) throw std::invalid_argument("hopping_of: g must be positive");
    if (d < 3) throw std::invalid_argument("hopping_of: d must be at least 3");
    return g / (d * std::log(static_cast<double>(d)));
}

std::vector<WegnerRow> wegner_audit(const CavityParams& base,
                                    const std::vector<Interval>& intervals,
                                    int nodes_per_interval) {
    if (nodes_per_interval < 1)
        throw std::invalid_argument("wegner_audit: need at least one node per interval");
    std::vector<WegnerRow> rows;
    rows.reserve(intervals.size());
    for (size_t q = 0; q < intervals.size(); ++q) {
        const Interval& I = intervals[q];
        const double width = I.length();
        double mass = 0.0;
        for (int node = 0; node < nodes_per_interval; ++node) {
            CavityParams p = base;
            p.E = I.lo + width * (node + 0.5) / nodes_per_interval;
            p.seed = derive_seed(base.seed, STREAM_AUDIT, q * 1000 + node);
            const Population pop = run_population(p);
            mass += dos_estimate(root_law(pop, p.pool_size)) * width / nodes_per_interval;
        }
        rows.push_back({I.lo, I.hi, mass, width > 0.0 ? mass / width : 0.0});
    }
    return rows;
}

}  // namespace anderson
