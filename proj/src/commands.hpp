#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qsens/config.hpp"

namespace qsens::cli {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;  // empty: use config output_dir
};

void cmd_ingest(const CommonArgs& common);

struct FitArgs {
    std::string panel_path;
    std::string impulse;  // empty: resolve from config series roles
};
void cmd_fit(const CommonArgs& common, const FitArgs& args);

struct QsArgs {
    std::string system_path;
    std::string response;              // empty: every non-impulse variable
    std::vector<double> impulse_taus;  // empty: config impulse_taus
    std::optional<double> delta;
    std::string at_date;               // empty: none
};
void cmd_qs(const CommonArgs& common, const QsArgs& args);

struct BootstrapArgs {
    std::string panel_path;
    std::string impulse;  // empty: resolve from config series roles
    std::string response;
    double impulse_tau = 0.5;
    std::optional<int> replicates;
    std::optional<int> block_length;
    std::optional<double> coverage;
    std::optional<std::uint64_t> seed;
};
void cmd_bootstrap(const CommonArgs& common, const BootstrapArgs& args);

struct SimulateArgs {
    std::optional<int> length;
    std::optional<std::uint64_t> seed;
};
void cmd_simulate(const CommonArgs& common, const SimulateArgs& args);

struct FetchArgs {
    std::vector<std::string> urls;
    std::string out_dir = ".";
};
void cmd_fetch(const FetchArgs& args);

}  // namespace qsens::cli
