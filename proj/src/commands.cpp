#include "commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "qsens/artifacts.hpp"
#include "qsens/errors.hpp"

#ifdef QSENS_FETCH_TLS
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#endif

namespace qsens::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string resolve_out_dir(const RunConfig& cfg, const CommonArgs& common) {
    const std::string dir = common.out_dir.empty() ? cfg.output_dir : common.out_dir;
    fs::create_directories(dir);
    return dir;
}

std::size_t impulse_column(const AlignedPanel& panel, const RunConfig& cfg,
                           const std::string& flag) {
    if (!flag.empty()) return panel.column_of(flag);
    for (const SeriesSpec& s : cfg.series) {
        if (s.is_impulse) return panel.column_of(s.name);
    }
    throw ConfigError("no impulse variable: pass --impulse or define series roles in the config");
}

std::string tau_tag(double tau) {
    return format_double(tau);
}

}  // namespace

void cmd_ingest(const CommonArgs& common) {
    const RunConfig cfg = load_config(common.config_path);
    if (cfg.series.empty()) throw ConfigError("config has no series to ingest");
    const std::string out_dir = resolve_out_dir(cfg, common);

    std::vector<RawSeries> prepared;
    std::string impulse_name;
    json sources = json::array();
    for (const SeriesSpec& spec : cfg.series) {
        std::ifstream in(spec.path);
        if (!in) throw DataError("cannot open series file: " + spec.path);
        ParsedSeries parsed = parse_series_csv(in, spec.name, spec.schema);
        json src = {{"name", spec.name},
                    {"path", spec.path},
                    {"is_rate", spec.is_rate},
                    {"rows_dropped", parsed.rows_dropped},
                    {"rows_parsed", parsed.series.size()},
                    {"transform", spec.is_rate ? "passthrough" : "log_yoy_x100"}};
        sources.push_back(std::move(src));
        prepared.push_back(spec.is_rate ? std::move(parsed.series)
                                        : to_yoy_growth(parsed.series));
        if (spec.is_impulse) impulse_name = spec.name;
    }
    const AlignedPanel panel = align(prepared, impulse_name);

    const std::string panel_path = out_dir + "/panel.csv";
    write_panel_csv(panel_path, panel);
    json meta = {{"kind", "panel_provenance"},
                 {"sources", std::move(sources)},
                 {"impulse", impulse_name},
                 {"rows", panel.rows()},
                 {"gaps", 0},
                 {"date_range", {panel.dates.front().str(), panel.dates.back().str()}}};
    write_meta_json(panel_path, cfg.config_hash, meta.dump());
    std::cout << "wrote " << panel_path << " (" << panel.rows() << " rows, "
              << panel.n() << " variables)\n";
}

void cmd_fit(const CommonArgs& common, const FitArgs& args) {
    const RunConfig cfg = load_config(common.config_path);
    const std::string out_dir = resolve_out_dir(cfg, common);

    AlignedPanel panel = read_panel_csv(args.panel_path);
    panel.impulse = impulse_column(panel, cfg, args.impulse);

    const PipelineOptions opts = cfg.pipeline_options();
    const SystemEstimate est = estimate_system(panel, opts);
    const SystemArtifact art = make_artifact(est, panel, opts, cfg.config_hash);
    for (const SystemArtifact::FitInfo& f : art.fits) {
        if (f.status != "converged") {
            std::cerr << "warning: fit for " << f.variable << " at tau=" << f.tau
                      << " finished with status " << f.status << "\n";
        }
        if (f.tau_clamped) {
            std::cerr << "warning: level clamped to " << f.tau << " for " << f.variable << "\n";
        }
    }

    const std::string path = out_dir + "/system.json";
    write_system_artifact(path, art);
    std::cout << "wrote " << path << " (cond(B1'B1)=" << est.sensitivity.cond << ")\n";

    // Optional sub-period re-estimation: one independent artifact per period.
    if (!cfg.breakpoints.empty()) {
        const auto ranges = subperiod_ranges(panel, cfg.breakpoints);
        for (std::size_t k = 0; k < ranges.size(); ++k) {
            const AlignedPanel sub = panel.slice(ranges[k].first, ranges[k].second);
            const SystemEstimate sub_est = estimate_system(sub, opts);
            const std::string sub_path =
                out_dir + "/system_period" + std::to_string(k + 1) + ".json";
            write_system_artifact(sub_path,
                                  make_artifact(sub_est, sub, opts, cfg.config_hash));
            std::cout << "wrote " << sub_path << " (" << sub.dates.front().str() << ".."
                      << sub.dates.back().str() << ")\n";
        }
    }
}

void cmd_qs(const CommonArgs& common, const QsArgs& args) {
    const RunConfig cfg = load_config(common.config_path);
    const std::string out_dir = resolve_out_dir(cfg, common);

    const SystemArtifact art = read_system_artifact(args.system_path);
    const SensitivityMatrix sens = projection_matrix(art.system, cfg.cond_threshold);

    std::vector<std::string> responses;
    if (!args.response.empty()) {
        responses.push_back(args.response);
    } else {
        for (const std::string& name : art.system.variables) {
            if (name != art.impulse) responses.push_back(name);
        }
    }

    // Conditioning row: --at-date selects it, otherwise the latest one.
    Eigen::Index row = art.design_rows.rows() - 1;
    if (row < 0 && (args.delta || !args.at_date.empty())) {
        throw DataError("system artifact carries no design rows to condition on");
    }
    std::optional<double> tau_t;
    if (!args.at_date.empty()) {
        const YearMonth when = YearMonth::parse(args.at_date);
        row = -1;
        for (std::size_t t = 0; t < art.design_dates.size(); ++t) {
            if (art.design_dates[t] == when) row = static_cast<Eigen::Index>(t);
        }
        if (row < 0) throw DataError("--at-date " + when.str() + " is not a design row date");
        const FitGrid impulse_grid = art.grid_for(art.impulse, true);
        tau_t = tau_level_lookup(impulse_grid, art.design_rows.row(row).transpose(),
                                 art.impulse_observed(row), art.rearrange);
    }

    std::vector<double> levels;
    if (tau_t) {
        levels.push_back(*tau_t);
    } else if (!args.impulse_taus.empty()) {
        levels = args.impulse_taus;
    } else {
        levels = cfg.impulse_taus;
    }

    for (const std::string& response : responses) {
        for (double level : levels) {
            const SensitivityCurve curve =
                sensitivity_curve(sens, response, art.system.taus, art.impulse, level);
            const std::string path =
                out_dir + "/qs_" + response + "_tau" + tau_tag(level) + ".csv";

            json meta = {{"kind", "sensitivity_curve"},
                         {"response", response},
                         {"impulse", art.impulse},
                         {"impulse_tau", level},
                         {"horizon", art.system.horizon},
                         {"cond_b1tb1", sens.cond}};
            if (tau_t) {
                meta["at_date"] = args.at_date;
                meta["tau_t"] = *tau_t;
            }
            if (args.delta) {
                const FitGrid response_grid = art.grid_for(response, false);
                const std::vector<double> baseline = predicted_quantiles(
                    response_grid, art.design_rows.row(row).transpose(), art.rearrange);
                const PerturbedDistribution shift = perturb_distribution(
                    baseline, sens, response, art.impulse, level, *args.delta);
                meta["delta"] = *args.delta;
                meta["baseline_date"] = art.design_dates[static_cast<std::size_t>(row)].str();
                write_curve_csv(path, curve, &shift.perturbed);
            } else {
                write_curve_csv(path, curve);
            }
            write_meta_json(path, cfg.config_hash, meta.dump());
            std::cout << "wrote " << path << "\n";
        }
    }
}

void cmd_bootstrap(const CommonArgs& common, const BootstrapArgs& args) {
    const RunConfig cfg = load_config(common.config_path);
    const std::string out_dir = resolve_out_dir(cfg, common);

    AlignedPanel panel = read_panel_csv(args.panel_path);
    panel.impulse = impulse_column(panel, cfg, args.impulse);

    BootstrapSpec spec = cfg.bootstrap;
    if (args.replicates) spec.replicates = *args.replicates;
    if (args.block_length) spec.block_length = *args.block_length;
    if (args.coverage) spec.coverage = *args.coverage;
    if (args.seed) spec.seed = *args.seed;

    CurveQuery query;
    query.response = args.response;
    query.grid = cfg.tau_grid;
    query.impulse = panel.names[panel.impulse];
    query.impulse_tau = args.impulse_tau;

    const CurveBand band = bootstrap_curve(panel, cfg.pipeline_options(), query, spec);

    const int resolved_block =
        spec.block_length > 0
            ? spec.block_length
            : static_cast<int>(std::ceil(std::cbrt(static_cast<double>(panel.rows()))));
    const std::string path =
        out_dir + "/band_" + args.response + "_tau" + tau_tag(args.impulse_tau) + ".csv";
    write_band_csv(path, band);
    json meta = {{"kind", "sensitivity_band"},
                 {"response", args.response},
                 {"impulse", query.impulse},
                 {"impulse_tau", args.impulse_tau},
                 {"horizon", cfg.horizon},
                 {"replicates", spec.replicates},
                 {"replicates_used", band.replicates_used},
                 {"replicates_failed", band.replicates_failed},
                 {"block_length", resolved_block},
                 {"coverage", spec.coverage},
                 {"seed", spec.seed},
                 {"point_estimate", band.point_estimate}};
    write_meta_json(path, cfg.config_hash, meta.dump());
    std::cout << "wrote " << path << " (" << band.replicates_used << " replicates, "
              << band.replicates_failed << " failed)\n";
}

void cmd_simulate(const CommonArgs& common, const SimulateArgs& args) {
    const RunConfig cfg = load_config(common.config_path);
    const std::string out_dir = resolve_out_dir(cfg, common);

    LocationScaleDGP model = cfg.dgp ? cfg.dgp->model : default_dgp();
    const int length = args.length.value_or(cfg.dgp ? cfg.dgp->length : 2000);
    const std::uint64_t seed = args.seed.value_or(cfg.seed);

    const AlignedPanel panel = simulate(model, length, seed);
    const std::string panel_path = out_dir + "/sim_panel.csv";
    write_panel_csv(panel_path, panel);
    json meta = {{"kind", "simulated_panel"},
                 {"length", length},
                 {"seed", seed},
                 {"variables", model.names},
                 {"innovation", model.innovation == Innovation::normal ? "normal" : "uniform"}};
    write_meta_json(panel_path, cfg.config_hash, meta.dump());

    // Per-variable files in the raw-series schema, so the ingest command can
    // consume simulated data too (values are already rates).
    for (std::size_t v = 0; v < model.names.size(); ++v) {
        const std::string path = out_dir + "/sim_" + model.names[v] + ".csv";
        std::ofstream out(path, std::ios::binary);
        if (!out) throw DataError("cannot write file: " + path);
        out << "DATE," << model.names[v] << '\n';
        for (std::size_t t = 0; t < panel.rows(); ++t) {
            out << panel.dates[t].str() << ','
                << format_double(panel.values(static_cast<Eigen::Index>(t),
                                              static_cast<Eigen::Index>(v)))
                << '\n';
        }
    }

    // Ground truth for the configured grid and horizon; independent of seed.
    const QuantileSystem truth = analytic_system(model, cfg.tau_grid, cfg.horizon);
    const SensitivityMatrix truth_qs = projection_matrix(truth, cfg.cond_threshold);
    json tj;
    tj["kind"] = "analytic_truth";
    tj["version"] = kToolVersion;
    tj["config_hash"] = cfg.config_hash;
    tj["variables"] = truth.variables;
    tj["taus"] = truth.taus;
    tj["horizon"] = truth.horizon;
    tj["innovation"] = model.innovation == Innovation::normal ? "normal" : "uniform";
    {
        json b1 = json::array(), bh = json::array(), qs = json::array();
        for (Eigen::Index r = 0; r < truth.coeffs_one.rows(); ++r) {
            json r1 = json::array(), rh = json::array();
            for (Eigen::Index c = 0; c < truth.coeffs_one.cols(); ++c) {
                r1.push_back(truth.coeffs_one(r, c));
                rh.push_back(truth.coeffs_h(r, c));
            }
            b1.push_back(std::move(r1));
            bh.push_back(std::move(rh));
        }
        for (Eigen::Index r = 0; r < truth_qs.values.rows(); ++r) {
            json row = json::array();
            for (Eigen::Index c = 0; c < truth_qs.values.cols(); ++c) {
                row.push_back(truth_qs.values(r, c));
            }
            qs.push_back(std::move(row));
        }
        tj["b1_true"] = std::move(b1);
        tj["bh_true"] = std::move(bh);
        tj["qs_true"] = std::move(qs);
    }
    std::ofstream tout(out_dir + "/truth.json", std::ios::binary);
    if (!tout) throw DataError("cannot write truth file");
    tout << tj.dump(2) << '\n';
    std::cout << "wrote " << panel_path << " and " << out_dir << "/truth.json\n";
}

void cmd_fetch(const FetchArgs& args) {
#ifndef QSENS_FETCH_TLS
    (void)args;
    throw ConfigError("this build has no TLS support; fetch is unavailable");
#else
    if (args.urls.empty()) throw ConfigError("fetch: no URLs given");
    fs::create_directories(args.out_dir);
    const char* key = std::getenv("QSENS_API_KEY");
    for (const std::string& url : args.urls) {
        const auto scheme_end = url.find("://");
        if (scheme_end == std::string::npos || url.substr(0, scheme_end) != "https") {
            throw ConfigError("fetch: only https:// URLs are supported: " + url);
        }
        const auto host_start = scheme_end + 3;
        const auto path_start = url.find('/', host_start);
        const std::string host = url.substr(host_start, path_start - host_start);
        std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);
        if (key != nullptr) {
            path += (path.find('?') == std::string::npos ? "?" : "&");
            path += "api_key=";
            path += key;
        }
        httplib::SSLClient client(host);
        client.set_follow_location(true);
        const httplib::Result res = client.Get(path);
        if (!res || res->status != 200) {
            throw DataError("fetch failed for " + url +
                            (res ? " (status " + std::to_string(res->status) + ")"
                                 : " (no response)"));
        }
        std::string file = path.substr(0, path.find('?'));
        const auto slash = file.rfind('/');
        file = file.substr(slash + 1);
        if (file.empty()) file = "download.csv";
        std::ofstream out(args.out_dir + "/" + file, std::ios::binary);
        out << res->body;
        std::cout << "fetched " << url << " -> " << args.out_dir << "/" << file << "\n";
    }
#endif
}

}  // namespace qsens::cli
