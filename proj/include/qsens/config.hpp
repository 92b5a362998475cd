#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qsens/bootstrap.hpp"
#include "qsens/pipeline.hpp"
#include "qsens/series.hpp"
#include "qsens/synthetic.hpp"

namespace qsens {

struct SeriesSpec {
    std::string name;
    std::string path;
    bool is_impulse = false;
    bool is_rate = false;  // true: already a rate, skip the growth transform
    CsvSchema schema;
};

struct DgpSpec {
    LocationScaleDGP model;
    int length = 2000;
};

/// One reproducible run: data sources, estimation settings, query levels,
/// bootstrap settings, and a master seed.
struct RunConfig {
    std::vector<SeriesSpec> series;
    int lag_count = 12;
    int horizon = 12;
    std::vector<double> tau_grid;      // fitted grid (default 0.01..0.99 step 0.01)
    std::vector<double> impulse_taus;  // default {0.10, 0.25, 0.50, 0.75, 0.90}
    bool rearrange = true;
    double cond_threshold = 1e12;
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    BootstrapSpec bootstrap;
    std::vector<YearMonth> breakpoints;
    std::optional<DgpSpec> dgp;

    std::string config_hash;  // fingerprint of the source JSON

    PipelineOptions pipeline_options() const;
};

/// Parse and validate a config file. Enforces: exactly one impulse series,
/// grid strictly increasing inside [0.005, 0.995], every impulse level a
/// grid member, horizon and lag count >= 1.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& json_text);

/// FNV-1a 64-bit fingerprint, hex-encoded.
std::string fnv1a_hex(const std::string& data);

}  // namespace qsens
