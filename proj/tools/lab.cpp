#include <CLI11.hpp>
#include <cstdio>
#include <string>

#include "anderson/experiments.hpp"

using namespace anderson;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::string seed_text;
    int workers = 0;
};

void add_common(CLI::App* cmd, CommonOpts* opts) {
    cmd->add_option("--config", opts->config_path, "flat key-value config file")->required();
    cmd->add_option("--seed", opts->seed_text, "override the master seed");
    cmd->add_option("--out", opts->out_dir, "output directory");
    cmd->add_option("--workers", opts->workers, "worker thread count");
}

int run_from(const CommonOpts& opts, Experiment expected) {
    RunConfig cfg = load_config(opts.config_path);
    if (cfg.experiment != expected)
        throw ConfigError("config names experiment '" + experiment_name(cfg.experiment) +
                          "' but the subcommand is '" + experiment_name(expected) + "'");
    if (!opts.seed_text.empty()) cfg.seed = std::stoull(opts.seed_text);
    if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
    if (opts.workers > 0) cfg.workers = opts.workers;

    const RunResult res = run_experiment(cfg);
    std::printf("%s: %d/%d tasks ok\n", experiment_name(cfg.experiment).c_str(),
                res.tasks_total - res.tasks_failed, res.tasks_total);
    for (const auto& path : res.outputs) std::printf("  wrote %s\n", path.c_str());
    return res.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Anderson tight-binding laboratory on random regular graphs"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string manifest_path;

    CLI::App* qi = app.add_subcommand("qi-sweep", "eigenvector moment ladders over (E, eta, N)");
    CLI::App* cavity = app.add_subcommand("cavity", "population-dynamics runs on the tree law");
    CLI::App* ct = app.add_subcommand("ct-audit", "deterministic resolvent inequality audits");
    CLI::App* conc = app.add_subcommand("conc-audit", "moment concentration across N");
    CLI::App* dos = app.add_subcommand("dos-compare", "graph spectral density vs cavity density");
    CLI::App* phase = app.add_subcommand("phase-report", "crossover estimate from qi-sweep output");
    for (CLI::App* cmd : {qi, cavity, ct, conc, dos, phase}) add_common(cmd, &opts);

    CLI::App* replay = app.add_subcommand("replay", "rerun the experiment from a manifest");
    replay->add_option("--manifest", manifest_path, "manifest.json of a previous run")->required();
    replay->add_option("--out", opts.out_dir, "output directory")->required();
    replay->add_option("--workers", opts.workers, "worker thread count");

    CLI11_PARSE(app, argc, argv);

    try {
        if (replay->parsed()) {
            const RunResult res = replay_manifest(manifest_path, opts.out_dir,
                                                  opts.workers > 0 ? opts.workers : 1);
            std::printf("replay: %d/%d tasks ok\n", res.tasks_total - res.tasks_failed,
                        res.tasks_total);
            return res.exit_code;
        }
        if (qi->parsed()) return run_from(opts, Experiment::qi_sweep);
        if (cavity->parsed()) return run_from(opts, Experiment::cavity);
        if (ct->parsed()) return run_from(opts, Experiment::ct_audit);
        if (conc->parsed()) return run_from(opts, Experiment::conc_audit);
        if (dos->parsed()) return run_from(opts, Experiment::dos_compare);
        if (phase->parsed()) return run_from(opts, Experiment::phase_report);
    } catch (const ConfigError& ex) {
        std::fprintf(stderr, "config error: %s\n", ex.what());
        return 1;
    } catch (const std::exception& ex) {
        std::fprintf(stderr, "error: %s\n", ex.what());
        return 1;
    }
    return 1;
}
