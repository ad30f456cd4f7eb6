#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace anderson {

inline constexpr const char* kArtifactVersion = "0.1.0";

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

enum class Experiment { qi_sweep, cavity, ct_audit, conc_audit, dos_compare, phase_report };

std::string experiment_name(Experiment e);
Experiment experiment_from_name(const std::string& name);

// Flat key-value configuration; list keys (N, E, eta, s) repeat.
struct RunConfig {
    Experiment experiment = Experiment::qi_sweep;

    // model
    int d = 0;
    double g = 0.0;  // exactly one of g/t set by the config
    double t = 0.0;
    bool has_g = false;
    bool has_t = false;
    std::vector<int> N;
    std::vector<double> E_grid;
    std::vector<double> eta_ladder;
    std::vector<double> s_list;  // moment orders for conc-audit
    int realizations = 1;
    double s_half = 0.5;  // fractional order: qi CSV reports Q_I(s_half/2)

    // sampler
    int M = 100'000;
    int sweeps = 200;
    int root_draws = 0;  // 0 means "use M"

    // audits
    int checks = 200;

    // phase report: crossover where the log QI vs log(1/eta) slope passes
    // theta. The blow-up reference slope is 1 (the hopping-free extreme), but
    // finite-size transients pull the delocalized side up toward ~0.7 and
    // count starvation pulls the localized side below 1, so the separating
    // threshold sits between them.
    std::string input;
    double slope_threshold = 0.85;

    // run control
    uint64_t seed = 0;
    std::string out_dir = ".";
    int workers = 1;
};

RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);

// canonical key-value rendering; parse(render(cfg)) reproduces cfg
std::string render_config(const RunConfig& cfg);

// hopping and coupling constants, whichever was given deriving the other
double config_t(const RunConfig& cfg);
double config_g(const RunConfig& cfg);

struct RunResult {
    int exit_code = 0;  // 0 ok, 1 config error (thrown instead), 2 partial failure
    int tasks_total = 0;
    int tasks_failed = 0;
    std::vector<std::string> outputs;
};

RunResult run_experiment(const RunConfig& cfg);

// Rerun the effective configuration stored in a manifest. Reproduces the
// results.csv body byte for byte.
RunResult replay_manifest(const std::string& manifest_path, const std::string& out_dir,
                          int workers = 1);

// ---- phase-report core (exposed for tests) ----

struct QiRow {
    double E = 0.0;
    double eta = 0.0;
    int N = 0;
    uint64_t seed = 0;
    long card = 0;
    double qi2 = 0.0;
    double qi_half = 0.0;
};

std::vector<QiRow> parse_qi_csv(const std::string& text);

struct SlopeRow {
    double E = 0.0;
    int rungs = 0;
    double slope = 0.0;       // d log QI / d log(1/eta)
    double median_last = 0.0; // median QI at the smallest eta
};

struct PhaseReport {
    std::vector<SlopeRow> slopes;
    bool crossover_found = false;
    double m_hat = 0.0;   // crossover energy estimate
    double edge = 0.0;    // asymptotic edge from g
    std::string text;     // rendered report body
};

// Requires at least 3 eta rungs; throws ConfigError otherwise.
PhaseReport compute_phase_report(const std::vector<QiRow>& rows, double theta, double g);

}  // namespace anderson
