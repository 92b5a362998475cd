#include "qsens/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qsens/errors.hpp"

namespace qsens {

namespace {

using nlohmann::json;

std::vector<double> grid_from_spec(const json& spec) {
    std::vector<double> grid;
    if (spec.is_array()) {
        grid = spec.get<std::vector<double>>();
    } else if (spec.is_object()) {
        const double start = spec.at("start").get<double>();
        const double stop = spec.at("stop").get<double>();
        const double step = spec.at("step").get<double>();
        if (!(step > 0.0) || stop < start) {
            throw ConfigError("tau_grid: need step > 0 and stop >= start");
        }
        const int count = static_cast<int>(std::floor((stop - start) / step + 0.5)) + 1;
        for (int i = 0; i < count; ++i) {
            // Snap to a 1e-10 lattice so nominal levels like 0.10 are exact.
            grid.push_back(std::round((start + i * step) * 1e10) / 1e10);
        }
    } else {
        throw ConfigError("tau_grid must be an array or {start, stop, step}");
    }
    return grid;
}

bool grid_member(const std::vector<double>& grid, double tau) {
    for (double g : grid) {
        if (std::abs(g - tau) <= kLevelMatchTol) return true;
    }
    return false;
}

LocationScaleDGP dgp_from_json(const json& j) {
    LocationScaleDGP model;
    const std::string family = j.value("innovation", "normal");
    if (family == "normal") {
        model.innovation = Innovation::normal;
    } else if (family == "uniform") {
        model.innovation = Innovation::uniform;
    } else {
        throw ConfigError("dgp.innovation must be 'normal' or 'uniform'");
    }
    model.burn_in = j.value("burn_in", 200);
    if (!j.contains("variables")) {
        throw ConfigError("dgp block needs a 'variables' array");
    }
    for (const json& v : j.at("variables")) {
        model.names.push_back(v.at("name").get<std::string>());
        const auto loc = v.at("location").get<std::vector<double>>();
        const auto sca = v.at("scale").get<std::vector<double>>();
        model.location.push_back(
            Eigen::Map<const Eigen::VectorXd>(loc.data(), static_cast<Eigen::Index>(loc.size())));
        model.scale.push_back(
            Eigen::Map<const Eigen::VectorXd>(sca.data(), static_cast<Eigen::Index>(sca.size())));
    }
    for (std::size_t i = 0; i < model.names.size(); ++i) {
        if (model.location[i].size() != model.d() || model.scale[i].size() != model.d()) {
            throw ConfigError("dgp: location/scale vectors must have length 1 + n");
        }
    }
    return model;
}

}  // namespace

PipelineOptions RunConfig::pipeline_options() const {
    PipelineOptions opts;
    opts.lag_count = lag_count;
    opts.horizon = horizon;
    opts.taus = tau_grid;
    opts.rearrange = rearrange;
    opts.cond_threshold = cond_threshold;
    return opts;
}

std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

RunConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }

    RunConfig cfg;
    try {
        cfg.config_hash = fnv1a_hex(j.dump());
        for (const json& s : j.value("series", json::array())) {
            SeriesSpec spec;
            spec.name = s.at("name").get<std::string>();
            spec.path = s.at("path").get<std::string>();
            const std::string role = s.at("role").get<std::string>();
            if (role == "impulse") {
                spec.is_impulse = true;
            } else if (role != "response") {
                throw ConfigError("series role must be 'impulse' or 'response'");
            }
            spec.is_rate = s.value("is_rate", false);
            spec.schema.date_column = s.value("date_column", std::string("DATE"));
            spec.schema.value_column = s.value("value_column", std::string());
            cfg.series.push_back(std::move(spec));
        }
        cfg.lag_count = j.value("lags", 12);
        cfg.horizon = j.value("horizon", 12);
        if (j.contains("tau_grid")) {
            cfg.tau_grid = grid_from_spec(j.at("tau_grid"));
        } else {
            for (int i = 1; i <= 99; ++i) cfg.tau_grid.push_back(i / 100.0);
        }
        cfg.impulse_taus =
            j.value("impulse_taus", std::vector<double>{0.10, 0.25, 0.50, 0.75, 0.90});
        cfg.rearrange = j.value("rearrange", true);
        cfg.cond_threshold = j.value("cond_threshold", 1e12);
        cfg.seed = j.value("seed", std::uint64_t{0});
        cfg.output_dir = j.value("output_dir", std::string("out"));
        if (j.contains("bootstrap")) {
            const json& b = j.at("bootstrap");
            cfg.bootstrap.replicates = b.value("replicates", 1000);
            cfg.bootstrap.block_length = b.value("block_length", 0);
            cfg.bootstrap.coverage = b.value("coverage", 0.68);
            cfg.bootstrap.seed = b.value("seed", cfg.seed);
        } else {
            cfg.bootstrap.seed = cfg.seed;
        }
        for (const json& bp : j.value("breakpoints", json::array())) {
            cfg.breakpoints.push_back(YearMonth::parse(bp.get<std::string>()));
        }
        if (j.contains("dgp")) {
            DgpSpec dgp;
            dgp.model = dgp_from_json(j.at("dgp"));
            dgp.length = j.at("dgp").value("length", 2000);
            cfg.dgp = std::move(dgp);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field error: ") + e.what());
    }

    // Validation.
    if (cfg.horizon < 1) throw ConfigError("horizon must be >= 1");
    if (cfg.lag_count < 1) throw ConfigError("lags must be >= 1");
    if (cfg.tau_grid.empty()) throw ConfigError("tau_grid is empty");
    for (std::size_t i = 0; i < cfg.tau_grid.size(); ++i) {
        if (cfg.tau_grid[i] < 0.005 || cfg.tau_grid[i] > 0.995) {
            throw ConfigError("tau_grid values must lie in [0.005, 0.995]");
        }
        if (i > 0 && !(cfg.tau_grid[i - 1] < cfg.tau_grid[i])) {
            throw ConfigError("tau_grid must be strictly increasing");
        }
    }
    for (double tm : cfg.impulse_taus) {
        if (!grid_member(cfg.tau_grid, tm)) {
            throw ConfigError("impulse level " + std::to_string(tm) +
                              " is not a member of the fitted grid");
        }
    }
    if (!cfg.series.empty()) {
        int impulses = 0;
        for (const SeriesSpec& s : cfg.series) impulses += s.is_impulse ? 1 : 0;
        if (impulses != 1) {
            throw ConfigError("exactly one series must have role 'impulse'");
        }
        if (cfg.series.size() < 2) {
            throw ConfigError("need at least two series (one impulse, one response)");
        }
    }
    if (!(cfg.bootstrap.coverage > 0.0 && cfg.bootstrap.coverage < 1.0)) {
        throw ConfigError("bootstrap coverage must lie in (0,1)");
    }
    if (cfg.bootstrap.replicates < 2) throw ConfigError("bootstrap replicates must be >= 2");
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

}  // namespace qsens
