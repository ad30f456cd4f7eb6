// Acceptance suite: one pass/fail line per criterion. Exit code 0 only if
// every criterion passes.

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "anderson/cavity.hpp"
#include "anderson/experiments.hpp"
#include "anderson/graph.hpp"
#include "anderson/hamiltonian.hpp"
#include "anderson/io.hpp"
#include "anderson/resolvent.hpp"
#include "anderson/rng.hpp"
#include "anderson/spectra.hpp"
#include "oracles.hpp"

using namespace anderson;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;

// simple hosts by exact rejection for small d, pairing multigraphs beyond
Hamiltonian host(int n, int d, double t, uint64_t seed) {
    if (d <= 5)
        return assemble(sample_simple_regular(n, d, seed, 20000), sample_disorder(n, seed), t);
    return assemble(pairing_to_multigraph(sample_pairing(n, d, seed)), sample_disorder(n, seed),
                    t);
}

std::string out_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("anderson_acceptance_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir.string();
}

double median(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    const size_t n = xs.size();
    return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

// ---------------------------------------------------------------------------

// 50 instances x 5 spectral points: Ward identity to 1e-8 relative and the
// entrywise bound |G_ij| <= 1/eta, zero violations.
bool criterion1(std::string& info) {
    const int ns[] = {100, 400};
    const int ds[] = {3, 20};
    const double ts[] = {0.05, 0.5};
    const double etas[] = {1.0, 0.5, 0.2, 0.1, 0.05};
    int checked = 0;
    double worst_ward = 0.0, worst_bound = 0.0;
    for (int inst = 0; inst < 50; ++inst) {
        const int n = ns[inst % 2];
        const int d = ds[(inst / 2) % 2];
        const double t = ts[(inst / 4) % 2];
        const Hamiltonian h = host(n, d, t, 9000 + inst);
        Rng rng(inst);
        for (int k = 0; k < 5; ++k) {
            const SpectralParameter z(-2.0 + 4.0 * rng.uniform(), etas[k]);
            const Eigen::MatrixXcd g = dense_resolvent(h, z);
            worst_bound = std::max(worst_bound, g.cwiseAbs().maxCoeff() * z.eta);
            const int row = static_cast<int>(rng.below(n));
            const double lhs = g.row(row).squaredNorm();
            const double rhs = g(row, row).imag() / z.eta;
            worst_ward = std::max(worst_ward, std::abs(lhs - rhs) / rhs);
            ++checked;
        }
        // the sparse-solver path obeys the same contract
        const SpectralParameter z(0.3, 0.2);
        const double rel = ward_residual(h, z, 0) /
                           (resolvent_column(h, z, 0).values[0].imag() / z.eta);
        worst_ward = std::max(worst_ward, rel);
    }
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "%d spectral points; worst relative Ward residual %.2e (<=1e-8), worst "
                  "eta*max|G| %.12f (<=1)",
                  checked, worst_ward, worst_bound);
    info = buf;
    return worst_ward <= 1e-8 && worst_bound <= 1.0 + 1e-12;
}

// inertia-based interval counts equal eigendecomposition counts exactly
bool criterion2(std::string& info) {
    int mismatches = 0, total = 0;
    for (int inst = 0; inst < 50; ++inst) {
        Rng rng(500 + inst);
        const int d = (inst % 2 == 0) ? 3 : 20;
        int n = 100 + static_cast<int>(rng.below(301));
        if ((n * d) % 2) ++n;
        const double t = (inst % 4 < 2) ? 0.05 : 0.5;
        const Hamiltonian h = host(n, d, t, 700 + inst);
        const EigenSystem es = eigensystem(h);
        for (int k = 0; k < 10; ++k) {
            double a = -4.0 + 8.0 * rng.uniform();
            double b = -4.0 + 8.0 * rng.uniform();
            if (a > b) std::swap(a, b);
            const Interval I(a, b);
            mismatches += count_in_interval(h, I) != count_in_interval(es, I);
            ++total;
        }
    }
    info = std::to_string(total) + " intervals, " + std::to_string(mismatches) + " mismatches";
    return mismatches == 0;
}

// deterministic theorem audits: (a) Combes-Thomas, (b) decoupling,
// (c) switching, (d) Holder product, (e) P_I vs Im G
bool criterion3(std::string& info) {
    int violations = 0;

    // (a) 200 random (graph, X, Y, z)
    for (int k = 0; k < 200; ++k) {
        Rng rng(3000 + k);
        const int n = (k % 2) ? 100 : 200;
        const int d = (k % 4 < 2) ? 3 : 20;
        const double t = (k % 8 < 4) ? 0.05 : 0.5;
        const Hamiltonian h = host(n, d, t, 3100 + k);
        const SpectralParameter z(-2.0 + 4.0 * rng.uniform(), 0.1 + rng.uniform());
        auto pick = [&](int maxsz) {
            std::set<int> s;
            const int size = 1 + static_cast<int>(rng.below(maxsz));
            while (static_cast<int>(s.size()) < size) s.insert(static_cast<int>(rng.below(n)));
            return std::vector<int>(s.begin(), s.end());
        };
        try {
            ct_check(h, z, pick(3), pick(3));
        } catch (const TheoremViolation&) {
            ++violations;
        }
    }
    const int ct_viol = violations;

    // (b) decoupling gap over r = 1..6
    for (int k = 0; k < 30; ++k) {
        Rng rng(3500 + k);
        const bool sparse_case = k % 2 == 0;
        const int n = sparse_case ? 500 : 400;
        const int d = sparse_case ? 3 : 20;
        const double t = sparse_case ? 0.5 : 0.05;
        const Hamiltonian h = host(n, d, t, 3600 + k);
        const SpectralParameter z(-1.0 + 2.0 * rng.uniform(), 0.5);
        const int root = static_cast<int>(rng.below(n));
        for (int r = 1; r <= 6; ++r) {
            try {
                decoupling_gap(h, root, r, z);
            } catch (const TheoremViolation&) {
                ++violations;
            }
        }
    }
    const int dec_viol = violations - ct_viol;

    // (c) 200 switchings split over s = 1 and s = 2
    double worst_switch = 0.0;
    for (const double s : {1.0, 2.0}) {
        const Pairing p = sample_pairing(200, 3, 3700 + static_cast<int>(s));
        const DisorderField v = sample_disorder(200, 3800 + static_cast<int>(s));
        try {
            const SwitchingRecord rec =
                switching_lipschitz_check(p, v, SpectralParameter(0.2, 0.5), s, 0.5, 100, 11);
            worst_switch = std::max(worst_switch, rec.max_ratio);
        } catch (const TheoremViolation&) {
            ++violations;
        }
    }
    const int sw_viol = violations - ct_viol - dec_viol;

    // (d) Holder product and (e) P_I bound, 100 instances each
    double worst_holder = 2.0, worst_pi = 0.0;
    int done_h = 0, done_p = 0;
    for (int k = 0; done_h < 100 || done_p < 100; ++k) {
        Rng rng(3900 + k);
        const int n = 60 + 2 * static_cast<int>(rng.below(121));
        const Hamiltonian h = host(2 * (n / 2), 3, 0.5, 4000 + k);
        const EigenSystem es = eigensystem(h);
        const double E = -1.0 + 2.0 * rng.uniform();
        const double eta = 0.1 + 0.4 * rng.uniform();
        if (count_in_interval(es, Interval(E - eta, E + eta)) == 0) continue;
        if (done_h < 100) {
            worst_holder = std::min(worst_holder, holder_check(es, Interval(E - eta, E + eta), 0.5));
            ++done_h;
        }
        if (done_p < 100) {
            worst_pi = std::max(worst_pi, pi_img_ratio(es, E, eta));
            ++done_p;
        }
        if (k > 1000) break;
    }
    violations += (worst_holder < 1.0 - 1e-10) + (worst_pi > 1.0);

    char buf[240];
    std::snprintf(buf, sizeof buf,
                  "violations: ct %d/200, decouple %d/180, switch %d (worst ratio %.3f), "
                  "holder worst %.12f (>=1-1e-10), P_I worst ratio %.6f (<=1)",
                  ct_viol, dec_viol, sw_viol, worst_switch, worst_holder, worst_pi);
    info = buf;
    return violations == 0;
}

// hopping-free closed forms: exact Q_I, stationary population, quadrature dos
bool criterion4(std::string& info) {
    // (i) Q_I = N/|Lambda_I| exactly
    const Hamiltonian h =
        assemble(sample_simple_regular(500, 3, 41), sample_disorder(500, 41), 0.0);
    const EigenSystem es = eigensystem(h);
    const Interval I(-0.5, 0.5);
    const int card = count_in_interval(es, I);
    const double qi = q_moment(es, I, 2.0);
    const double qi_err = std::abs(qi * card / 500.0 - 1.0);

    // (ii) population stationarity at t=0
    CavityParams p;
    p.d = 3;
    p.t = 0.0;
    p.E = 0.3;
    p.eta = 0.5;
    p.pool_size = 100000;
    p.sweeps = 0;
    p.seed = 42;
    const Population pop0 = init_population(p);
    Population pop = pop0;
    for (int k = 0; k < 5; ++k) pop = sweep(pop);
    auto moments = [](const Population& q) {
        double m = 0.0, v = 0.0;
        for (const auto& s : q.samples) m += s.imag();
        m /= q.samples.size();
        for (const auto& s : q.samples) v += (s.imag() - m) * (s.imag() - m);
        return std::pair{m, std::sqrt(v / (q.samples.size() - 1.0))};
    };
    const auto [m0, sd0] = moments(pop0);
    const auto [m1, sd1] = moments(pop);
    const double drift = std::abs(m0 - m1) /
                         (std::sqrt(2.0) * sd0 / std::sqrt(static_cast<double>(p.pool_size)));

    // (iii) smoothed density at E=0, eta=0.01 within 1% of quadrature
    CavityParams q = p;
    q.eta = 0.01;
    q.E = 0.0;
    q.pool_size = 10000;
    q.sweeps = 2;
    const double dos = dos_estimate(root_law(run_population(q), 8000000));
    const double oracle = oracles::smoothed_gaussian_density(0.0, 0.01);
    const double dos_rel = std::abs(dos - oracle) / oracle;

    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "QI*card/N - 1 = %.2e (<=1e-9); stationarity drift %.2f sigma (<=4); "
                  "dos %.6f vs quadrature %.6f, rel err %.4f%% (<=1%%)",
                  qi_err, drift, dos, oracle, 100.0 * dos_rel);
    info = buf;
    return card > 0 && qi_err <= 1e-9 && drift <= 4.0 && dos_rel <= 0.01;
}

// empirical simplicity rate of the pairing model at d=3, n=200
bool criterion5(std::string& info) {
    const int trials = 10000;
    int simple = 0;
    for (int s = 0; s < trials; ++s)
        simple += is_simple(pairing_to_multigraph(sample_pairing(200, 3, 77000 + s)));
    const double rate = static_cast<double>(simple) / trials;
    const double gap = std::abs(rate - std::exp(-2.0));
    char buf[120];
    std::snprintf(buf, sizeof buf, "rate %.4f vs exp(-2) = %.4f, |diff| = %.4f (<=0.02)", rate,
                  std::exp(-2.0), gap);
    info = buf;
    return gap <= 0.02;
}

// graph spectral density vs cavity density at d=20, N=4000, eta=0.1
bool criterion6(std::string& info) {
    RunConfig cfg;
    cfg.experiment = Experiment::dos_compare;
    cfg.d = 20;
    cfg.g = 2.0;
    cfg.has_g = true;
    cfg.N = {4000};
    for (int k = 0; k <= 20; ++k) cfg.E_grid.push_back(-3.0 + 0.3 * k);
    cfg.eta_ladder = {0.1};
    cfg.realizations = 10;
    cfg.M = 100000;
    cfg.sweeps = 300;
    cfg.root_draws = 600000;  // extra draws cut the shared cavity-side noise
    cfg.seed = 60001;
    cfg.workers = 2;
    cfg.out_dir = out_dir("dos");
    const RunResult res = run_experiment(cfg);
    if (res.tasks_failed > 0) {
        info = "experiment reported task failures";
        return false;
    }

    // parse results: per-seed sup over the grid, against 0.05 * peak density
    std::map<uint64_t, double> sup;
    double peak = 0.0;
    std::istringstream in(read_file(cfg.out_dir + "/results.csv"));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        std::istringstream fields(line);
        std::vector<std::string> cells;
        std::string tok;
        while (std::getline(fields, tok, ',')) cells.push_back(tok);
        const uint64_t seed = std::stoull(cells[6]);
        peak = std::max(peak, std::stod(cells[8]));
        sup[seed] = std::max(sup[seed], std::stod(cells[9]));
    }
    int ok_seeds = 0;
    double worst = 0.0;
    for (const auto& [seed, s] : sup) {
        ok_seeds += s <= 0.05 * peak;
        worst = std::max(worst, s);
    }
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "%d/10 seeds with sup|density gap| <= 0.05*peak = %.5f; worst sup %.5f",
                  ok_seeds, 0.05 * peak, worst);
    info = buf;
    return sup.size() == 10 && ok_seeds >= 8;
}

// phase separation trend at d=20, g=2: bounded Q_I medians at E=0, strictly
// increasing at E=3, crossover estimate reported
bool criterion7(std::string& info) {
    RunConfig cfg;
    cfg.experiment = Experiment::qi_sweep;
    cfg.d = 20;
    cfg.g = 2.0;
    cfg.has_g = true;
    cfg.N = {4000};
    cfg.E_grid = {0.0, 0.75, 1.5, 2.25, 3.0};
    cfg.eta_ladder = {0.2, 0.1, 0.05};
    cfg.realizations = 10;
    cfg.seed = 70001;
    cfg.workers = 2;
    cfg.out_dir = out_dir("qi");
    const RunResult res = run_experiment(cfg);
    if (res.tasks_failed > 0) {
        info = "experiment reported task failures";
        return false;
    }

    const auto rows = parse_qi_csv(read_file(cfg.out_dir + "/results.csv"));
    std::map<double, std::map<double, std::vector<double>>> qi;  // E -> eta -> values
    for (const auto& row : rows) qi[row.E][row.eta].push_back(row.qi2);

    // medians along the ladder, eta descending
    std::vector<double> med0, med3;
    for (double eta : cfg.eta_ladder) {
        med0.push_back(median(qi[0.0][eta]));
        med3.push_back(median(qi[3.0][eta]));
    }
    // delocalized side stays below a pinned constant; localized side grows.
    // The constant encodes the contrast at desk scale: the E=3 medians run
    // two orders of magnitude higher.
    const double kBoundedConstant = 25.0;
    const bool bounded = *std::max_element(med0.begin(), med0.end()) <= kBoundedConstant;
    const bool increasing = med3[0] < med3[1] && med3[1] < med3[2];

    // crossover report through the phase-report pipeline
    const PhaseReport report = compute_phase_report(rows, 0.85, 2.0);
    const double edge = mobility_edge(2.0);
    char buf[300];
    std::snprintf(buf, sizeof buf,
                  "median QI(E=0) = {%.2f, %.2f, %.2f} (<=%g); median QI(E=3) = "
                  "{%.0f, %.0f, %.0f} strictly increasing: %s; crossover %.3f, edge %.3f, "
                  "|diff| = %.3f (reported)",
                  med0[0], med0[1], med0[2], kBoundedConstant, med3[0], med3[1], med3[2],
                  increasing ? "yes" : "no",
                  report.crossover_found ? report.m_hat : std::nan(""), edge,
                  report.crossover_found ? std::abs(report.m_hat - edge) : std::nan(""));
    info = buf;
    return bounded && increasing;
}

// tail shapes of the cavity law at d=20, g=2, E=0
bool criterion8(std::string& info) {
    const int d = 20;
    const double t = hopping_of(2.0, d);

    // (i) u * P(|X| > u) within 3 binomial sigma of one constant: feasible
    // iff the 3-sigma intervals have a common point
    CavityParams p;
    p.d = d;
    p.t = t;
    p.E = 0.0;
    p.eta = 0.01;
    p.pool_size = 100000;
    p.sweeps = 400;
    p.seed = 80001;
    const Population pop = run_population(p);
    double lo = 0.0, hi = 1e18;
    std::string cs;
    for (double u : {1.0, 3.0, 10.0, 30.0}) {
        const Estimate e = tail_probe(pop, TailKind::X, u);
        lo = std::max(lo, u * (e.value - 3.0 * e.se));
        hi = std::min(hi, u * (e.value + 3.0 * e.se));
        char b[48];
        std::snprintf(b, sizeof b, "%s%.3f", cs.empty() ? "" : ", ", u * e.value);
        cs += b;
    }
    const bool flat = lo <= hi;

    // (ii) E[1/B] stable within 2 sigma across the eta ladder
    std::vector<Estimate> binv;
    for (double eta : {0.1, 0.03, 0.01}) {
        CavityParams q = p;
        q.eta = eta;
        q.seed = 80002;
        binv.push_back(tail_probe(run_population(q), TailKind::Binv, 0.0));
    }
    bool stable = true;
    for (size_t a = 0; a < binv.size(); ++a)
        for (size_t b = a + 1; b < binv.size(); ++b)
            stable = stable && std::abs(binv[a].value - binv[b].value) <=
                                   2.0 * std::hypot(binv[a].se, binv[b].se);

    char buf[300];
    std::snprintf(buf, sizeof buf,
                  "u*P(|X|>u) = {%s}: common constant %s (3-sigma bands %s overlap); "
                  "E[1/B] = {%.2f, %.2f, %.2f} across eta {0.1, 0.03, 0.01}: 2-sigma stable %s",
                  cs.c_str(), flat ? "exists" : "none", flat ? "do" : "do not", binv[0].value,
                  binv[1].value, binv[2].value, stable ? "yes" : "no");
    info = buf;
    return flat && stable;
}

// manifest replay reproduces results.csv byte for byte
bool criterion9(std::string& info) {
    RunConfig cfg = parse_config_text(
        "experiment qi-sweep\nd 3\nt 0.4\nN 200\nE 0\nE 1\neta 0.4\neta 0.2\n"
        "realizations 3\nseed 90001\n");
    cfg.out_dir = out_dir("rep1");
    cfg.workers = 2;
    run_experiment(cfg);
    const std::string first = read_file(cfg.out_dir + "/results.csv");

    const std::string rep = out_dir("rep2");
    replay_manifest(cfg.out_dir + "/manifest.json", rep, 1);
    const bool same_qi = read_file(rep + "/results.csv") == first;

    RunConfig cav = parse_config_text(
        "experiment cavity\nd 3\nt 0.5\nE 0\neta 0.2\nM 20000\nsweeps 20\nseed 90002\n");
    cav.out_dir = out_dir("rep3");
    run_experiment(cav);
    const std::string cav_body = read_file(cav.out_dir + "/results.csv");
    const std::string rep2 = out_dir("rep4");
    replay_manifest(cav.out_dir + "/manifest.json", rep2, 2);
    const bool same_cav = read_file(rep2 + "/results.csv") == cav_body;

    info = std::string("qi-sweep replay byte-identical: ") + (same_qi ? "yes" : "no") +
           "; cavity replay byte-identical: " + (same_cav ? "yes" : "no");
    return same_qi && same_cav;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::pair<const char*, std::function<bool(std::string&)>>> criteria = {
        {"resolvent identities (Ward, |G| <= 1/eta)", criterion1},
        {"interval counting oracle (inertia vs eigensystem)", criterion2},
        {"deterministic theorem audits (CT, decoupling, switching, Holder, P_I)", criterion3},
        {"hopping-free closed forms (QI, stationarity, quadrature dos)", criterion4},
        {"pairing-model simplicity rate near exp(-2)", criterion5},
        {"graph vs cavity spectral density, d=20 N=4000", criterion6},
        {"phase separation trend and crossover report", criterion7},
        {"cavity tail shapes (Cauchy-type tails, E[1/B] stability)", criterion8},
        {"manifest replay reproducibility", criterion9},
    };

    std::set<int> selected;
    for (int a = 1; a < argc; ++a) selected.insert(std::atoi(argv[a]));

    bool all_ok = true;
    for (size_t k = 0; k < criteria.size(); ++k) {
        if (!selected.empty() && !selected.count(static_cast<int>(k) + 1)) continue;
        const auto start = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = false;
        try {
            ok = criteria[k].second(detail);
        } catch (const std::exception& ex) {
            detail = std::string("exception: ") + ex.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("[%s] criterion %zu: %s — %s (%.1f s)\n", ok ? "PASS" : "FAIL", k + 1,
                    criteria[k].first, detail.c_str(), secs);
        std::fflush(stdout);
        all_ok = all_ok && ok;
    }
    return all_ok ? 0 : 1;
}
