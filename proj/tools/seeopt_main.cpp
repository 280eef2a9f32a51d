// seeopt — command-line front end.
//
//   seeopt lq-bench --config cfg.txt [--out DIR] [--seed S] [--paths N] [--threads T]
//   seeopt duality  --config cfg.txt [...]
//   seeopt verify   --config cfg.txt --control control.csv [...]
//
// Exit codes: 0 success, 1 usage/config error, 2 verification or tolerance
// failure.

#include "seeopt/runner.hpp"
#include "seeopt/version.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::int64_t seed = -1;
    int paths = 0;
    int threads = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required = true) {
    auto* c = cmd->add_option("--config", args.config_path, "configuration file");
    if (config_required) c->required();
    cmd->add_option("--out", args.out_dir, "output directory (overrides config)");
    cmd->add_option("--seed", args.seed, "master seed (overrides config)");
    cmd->add_option("--paths", args.paths, "Monte Carlo path count (overrides config)");
    cmd->add_option("--threads", args.threads, "worker threads, 0 = auto (overrides config)");
}

seeopt::ExperimentConfig load_config(const CommonArgs& args) {
    seeopt::ExperimentConfig cfg = args.config_path.empty()
                                       ? seeopt::ExperimentConfig{}
                                       : seeopt::ExperimentConfig::from_file(args.config_path);
    if (!args.out_dir.empty()) cfg.output_dir = args.out_dir;
    if (args.seed >= 0) cfg.seed = static_cast<std::uint64_t>(args.seed);
    if (args.paths > 0) cfg.n_paths = args.paths;
    if (args.threads >= 0) cfg.threads = args.threads;
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"stochastic evolution-equation optimal control toolkit"};
    app.set_version_flag("--version", seeopt::version_string);
    app.require_subcommand(1);

    CommonArgs lq_args, dual_args, verify_args;
    std::string control_path;

    CLI::App* lq = app.add_subcommand(
        "lq-bench", "verify the Riccati candidate on the LQ benchmark");
    add_common(lq, lq_args);

    CLI::App* dual = app.add_subcommand(
        "duality", "Monte Carlo certification of the duality identity");
    add_common(dual, dual_args);

    CLI::App* verify = app.add_subcommand(
        "verify", "verify a candidate control from a CSV file");
    add_common(verify, verify_args);
    verify->add_option("--control", control_path, "control.csv with the candidate")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : seeopt::exit_config_error;
    }

    try {
        if (lq->parsed())
            return seeopt::run_lq_benchmark(load_config(lq_args));
        if (dual->parsed())
            return seeopt::run_duality_experiment(load_config(dual_args));
        if (verify->parsed())
            return seeopt::run_verification(load_config(verify_args), control_path);
    } catch (const seeopt::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return seeopt::exit_config_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return seeopt::exit_config_error;
    }
    return seeopt::exit_config_error;
}
