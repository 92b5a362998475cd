#include <cmath>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "../src/commands.hpp"
#include "qsens/artifacts.hpp"
#include "qsens/errors.hpp"

namespace {

// Exit codes: 0 ok, 2 config, 3 data, 4 numerical, 5 bootstrap reliability.
int run(int argc, char** argv) {
    CLI::App app{"qsens: conditional quantile systems and quantile sensitivities"};
    app.set_version_flag("--version", qsens::kToolVersion);
    app.require_subcommand(1);

    qsens::cli::CommonArgs common;

    auto add_common = [&common](CLI::App* sub) {
        sub->add_option("--config", common.config_path, "run configuration (JSON)")
            ->required();
        sub->add_option("--out", common.out_dir, "output directory (overrides the config)");
    };

    CLI::App* ingest = app.add_subcommand(
        "ingest", "parse series files, transform, align, and write the panel");
    add_common(ingest);

    qsens::cli::FitArgs fit_args;
    CLI::App* fit = app.add_subcommand(
        "fit", "estimate the stacked quantile system from a panel file");
    add_common(fit);
    fit->add_option("--panel", fit_args.panel_path, "panel CSV (from ingest or simulate)")
        ->required();
    fit->add_option("--impulse", fit_args.impulse,
                    "impulse variable name (default: from config roles)");

    qsens::cli::QsArgs qs_args;
    CLI::App* qs = app.add_subcommand(
        "qs", "sensitivity curves from a fitted system artifact");
    add_common(qs);
    qs->add_option("--system", qs_args.system_path, "system artifact (from fit)")->required();
    qs->add_option("--response", qs_args.response,
                   "response variable (default: every non-impulse variable)");
    qs->add_option("--impulse-tau", qs_args.impulse_taus,
                   "impulse level(s); must be fitted grid members");
    double delta_val = 0.0;
    CLI::Option* delta_opt =
        qs->add_option("--delta", delta_val, "impulse quantile shift for the perturbed column");
    qs->add_option("--at-date", qs_args.at_date,
                   "resolve the impulse level observed at this date (YYYY-MM)");

    qsens::cli::BootstrapArgs boot_args;
    int boot_reps = 0;
    int boot_block = 0;
    double boot_cov = 0.0;
    std::uint64_t boot_seed = 0;
    CLI::App* boot = app.add_subcommand(
        "bootstrap", "moving-block bootstrap band for one sensitivity curve");
    add_common(boot);
    boot->add_option("--panel", boot_args.panel_path, "panel CSV")->required();
    boot->add_option("--impulse", boot_args.impulse,
                     "impulse variable name (default: from config roles)");
    boot->add_option("--response", boot_args.response, "response variable")->required();
    boot->add_option("--impulse-tau", boot_args.impulse_tau, "impulse level")->required();
    CLI::Option* reps_opt = boot->add_option("--replicates", boot_reps, "bootstrap replicates");
    CLI::Option* block_opt =
        boot->add_option("--block-length", boot_block, "block length (0: ceil(T^(1/3)))");
    CLI::Option* cov_opt = boot->add_option("--coverage", boot_cov, "band coverage in (0,1)");
    CLI::Option* seed_opt = boot->add_option("--seed", boot_seed, "bootstrap seed");

    qsens::cli::SimulateArgs sim_args;
    int sim_length = 0;
    std::uint64_t sim_seed = 0;
    CLI::App* sim = app.add_subcommand(
        "simulate", "synthetic panel with analytic ground truth");
    add_common(sim);
    CLI::Option* len_opt = sim->add_option("--length", sim_length, "observations to keep");
    CLI::Option* sseed_opt = sim->add_option("--seed", sim_seed, "simulation seed");

    qsens::cli::FetchArgs fetch_args;
    CLI::App* fetch = app.add_subcommand(
        "fetch", "download CSV files over HTTPS (QSENS_API_KEY appended when set)");
    fetch->add_option("--url", fetch_args.urls, "https:// URL(s)")->required();
    fetch->add_option("--out", fetch_args.out_dir, "download directory");

    CLI11_PARSE(app, argc, argv);

    if (ingest->parsed()) {
        qsens::cli::cmd_ingest(common);
    } else if (fit->parsed()) {
        qsens::cli::cmd_fit(common, fit_args);
    } else if (qs->parsed()) {
        if (delta_opt->count() > 0) qs_args.delta = delta_val;
        qsens::cli::cmd_qs(common, qs_args);
    } else if (boot->parsed()) {
        if (reps_opt->count() > 0) boot_args.replicates = boot_reps;
        if (block_opt->count() > 0) boot_args.block_length = boot_block;
        if (cov_opt->count() > 0) boot_args.coverage = boot_cov;
        if (seed_opt->count() > 0) boot_args.seed = boot_seed;
        qsens::cli::cmd_bootstrap(common, boot_args);
    } else if (sim->parsed()) {
        if (len_opt->count() > 0) sim_args.length = sim_length;
        if (sseed_opt->count() > 0) sim_args.seed = sim_seed;
        qsens::cli::cmd_simulate(common, sim_args);
    } else if (fetch->parsed()) {
        qsens::cli::cmd_fetch(fetch_args);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const qsens::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const qsens::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const qsens::NumericalError& e) {
        nlohmann::json payload = {{"error", e.what()}};
        if (std::isfinite(e.condition_number)) payload["cond"] = e.condition_number;
        std::cerr << "numerical error: " << payload.dump() << "\n";
        return 4;
    } catch (const qsens::BootstrapError& e) {
        std::cerr << "bootstrap error: " << e.what() << "\n";
        return 5;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
