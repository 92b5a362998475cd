#include "qsens/artifacts.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qsens/errors.hpp"

namespace qsens {

namespace {

using nlohmann::json;

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path);
    return out;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows) {
    const Eigen::Index nr = static_cast<Eigen::Index>(rows.size());
    if (nr == 0) return {};
    const Eigen::Index nc = static_cast<Eigen::Index>(rows.front().size());
    Eigen::MatrixXd m(nr, nc);
    for (Eigen::Index r = 0; r < nr; ++r) {
        const json& row = rows[static_cast<std::size_t>(r)];
        if (static_cast<Eigen::Index>(row.size()) != nc) {
            throw DataError("artifact matrix rows have inconsistent lengths");
        }
        for (Eigen::Index c = 0; c < nc; ++c) {
            m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
        }
    }
    return m;
}

}  // namespace

std::string format_double(double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw DataError("number formatting failed");
    return std::string(buf, p);
}

void write_panel_csv(const std::string& path, const AlignedPanel& panel) {
    std::ofstream out = open_out(path);
    out << "date";
    for (const std::string& name : panel.names) out << ',' << name;
    out << '\n';
    for (std::size_t t = 0; t < panel.rows(); ++t) {
        out << panel.dates[t].str();
        for (Eigen::Index v = 0; v < panel.values.cols(); ++v) {
            out << ',' << format_double(panel.values(static_cast<Eigen::Index>(t), v));
        }
        out << '\n';
    }
}

AlignedPanel read_panel_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open panel file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError("panel file is empty: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();

    AlignedPanel panel;
    {
        std::istringstream header(line);
        std::string cell;
        bool first = true;
        while (std::getline(header, cell, ',')) {
            if (first) {
                if (cell != "date") throw DataError("panel file must start with a 'date' column");
                first = false;
            } else {
                panel.names.push_back(cell);
            }
        }
    }
    if (panel.names.empty()) throw DataError("panel file has no variable columns");

    std::vector<std::vector<double>> cols(panel.names.size());
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        std::getline(row, cell, ',');
        panel.dates.push_back(YearMonth::parse(cell));
        for (std::size_t v = 0; v < panel.names.size(); ++v) {
            if (!std::getline(row, cell, ',')) {
                throw DataError("panel row has too few columns: " + line);
            }
            try {
                cols[v].push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw DataError("panel row has a non-numeric cell: " + line);
            }
        }
    }
    panel.values.resize(static_cast<Eigen::Index>(panel.dates.size()),
                        static_cast<Eigen::Index>(panel.names.size()));
    for (std::size_t v = 0; v < cols.size(); ++v) {
        for (std::size_t t = 0; t < cols[v].size(); ++t) {
            panel.values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(v)) = cols[v][t];
        }
    }
    for (std::size_t t = 1; t < panel.dates.size(); ++t) {
        if (YearMonth::months_between(panel.dates[t - 1], panel.dates[t]) != 1) {
            throw DataError("panel file has a month gap at " + panel.dates[t].str());
        }
    }
    return panel;
}

FitGrid SystemArtifact::grid_for(const std::string& variable, bool one_step) const {
    const Eigen::MatrixXd& coeffs = one_step ? system.coeffs_one : system.coeffs_h;
    FitGrid grid;
    grid.variable = variable;
    grid.horizon = one_step ? 1 : system.horizon;
    grid.taus = system.taus;
    const Eigen::Index v = system.variable_index(variable);
    for (Eigen::Index a = 0; a < system.k(); ++a) {
        QuantileFit fit;
        fit.tau = system.taus[static_cast<std::size_t>(a)];
        fit.beta = coeffs.row(system.row_of(v, a)).transpose();
        fit.status = FitStatus::converged;
        grid.fits.push_back(std::move(fit));
    }
    return grid;
}

SystemArtifact make_artifact(const SystemEstimate& estimate, const AlignedPanel& panel,
                             const PipelineOptions& options, const std::string& config_hash) {
    SystemArtifact art;
    art.system = estimate.system;
    art.lag_count = options.lag_count;
    art.rearrange = options.rearrange;
    art.cond = estimate.sensitivity.cond;
    art.impulse = panel.names[panel.impulse];
    art.design_dates = estimate.design_one.dates;
    art.design_rows = estimate.design_one.Z;
    art.impulse_observed =
        estimate.design_one.targets.col(static_cast<Eigen::Index>(panel.impulse));
    art.config_hash = config_hash;

    const auto record = [&art](const FitGrid& grid) {
        for (std::size_t a = 0; a < grid.fits.size(); ++a) {
            const QuantileFit& f = grid.fits[a];
            SystemArtifact::FitInfo info;
            info.variable = grid.variable;
            info.horizon = grid.horizon;
            info.tau = f.tau;
            info.status = f.status == FitStatus::converged
                              ? "converged"
                              : (f.status == FitStatus::degenerate ? "degenerate"
                                                                   : "max_iterations");
            info.iterations = f.iterations;
            info.objective = f.objective;
            info.tau_clamped = f.tau_clamped;
            art.fits.push_back(std::move(info));
        }
    };
    for (const FitGrid& g : estimate.one_step) record(g);
    if (estimate.system.horizon != 1) {
        for (const FitGrid& g : estimate.h_step) record(g);
    }
    return art;
}

void write_system_artifact(const std::string& path, const SystemArtifact& artifact) {
    json j;
    j["kind"] = "quantile_system";
    j["version"] = artifact.version;
    j["config_hash"] = artifact.config_hash;
    j["variables"] = artifact.system.variables;
    j["impulse"] = artifact.impulse;
    j["taus"] = artifact.system.taus;
    j["horizon"] = artifact.system.horizon;
    j["lag_count"] = artifact.lag_count;
    j["rearrange"] = artifact.rearrange;
    j["cond_b1tb1"] = artifact.cond;
    j["b1"] = matrix_to_json(artifact.system.coeffs_one);
    j["bh"] = matrix_to_json(artifact.system.coeffs_h);

    json fits = json::array();
    for (const SystemArtifact::FitInfo& f : artifact.fits) {
        fits.push_back({{"variable", f.variable},
                        {"horizon", f.horizon},
                        {"tau", f.tau},
                        {"status", f.status},
                        {"iterations", f.iterations},
                        {"objective", f.objective},
                        {"tau_clamped", f.tau_clamped}});
    }
    j["fits"] = std::move(fits);

    json dates = json::array();
    for (const YearMonth& ym : artifact.design_dates) dates.push_back(ym.str());
    j["design"] = {{"dates", std::move(dates)},
                   {"rows", matrix_to_json(artifact.design_rows)},
                   {"impulse_observed",
                    std::vector<double>(artifact.impulse_observed.begin(),
                                        artifact.impulse_observed.end())}};

    std::ofstream out = open_out(path);
    out << j.dump(2) << '\n';
}

SystemArtifact read_system_artifact(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open system artifact: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError("system artifact is not valid JSON: " + std::string(e.what()));
    }
    try {
        if (j.at("kind").get<std::string>() != "quantile_system") {
            throw DataError("not a quantile_system artifact: " + path);
        }
        SystemArtifact art;
        art.version = j.at("version").get<std::string>();
        art.config_hash = j.at("config_hash").get<std::string>();
        art.system.variables = j.at("variables").get<std::vector<std::string>>();
        art.impulse = j.at("impulse").get<std::string>();
        art.system.taus = j.at("taus").get<std::vector<double>>();
        art.system.horizon = j.at("horizon").get<int>();
        art.lag_count = j.at("lag_count").get<int>();
        art.rearrange = j.at("rearrange").get<bool>();
        art.cond = j.at("cond_b1tb1").get<double>();
        art.system.coeffs_one = matrix_from_json(j.at("b1"));
        art.system.coeffs_h = matrix_from_json(j.at("bh"));
        for (const json& f : j.at("fits")) {
            SystemArtifact::FitInfo info;
            info.variable = f.at("variable").get<std::string>();
            info.horizon = f.at("horizon").get<int>();
            info.tau = f.at("tau").get<double>();
            info.status = f.at("status").get<std::string>();
            info.iterations = f.at("iterations").get<int>();
            info.objective = f.at("objective").get<double>();
            info.tau_clamped = f.at("tau_clamped").get<bool>();
            art.fits.push_back(std::move(info));
        }
        const json& design = j.at("design");
        for (const json& dt : design.at("dates")) {
            art.design_dates.push_back(YearMonth::parse(dt.get<std::string>()));
        }
        art.design_rows = matrix_from_json(design.at("rows"));
        const auto obs = design.at("impulse_observed").get<std::vector<double>>();
        art.impulse_observed =
            Eigen::Map<const Eigen::VectorXd>(obs.data(), static_cast<Eigen::Index>(obs.size()));
        return art;
    } catch (const json::exception& e) {
        throw DataError("system artifact field error: " + std::string(e.what()));
    }
}

void write_curve_csv(const std::string& path, const SensitivityCurve& curve,
                     const std::vector<double>* perturbed) {
    std::ofstream out = open_out(path);
    out << (perturbed ? "tau,qs,perturbed" : "tau,qs") << '\n';
    for (std::size_t i = 0; i < curve.grid.size(); ++i) {
        out << format_double(curve.grid[i]) << ',' << format_double(curve.values[i]);
        if (perturbed) out << ',' << format_double((*perturbed)[i]);
        out << '\n';
    }
}

void write_band_csv(const std::string& path, const CurveBand& band) {
    std::ofstream out = open_out(path);
    out << "tau,lower,center,upper\n";
    for (std::size_t i = 0; i < band.grid.size(); ++i) {
        out << format_double(band.grid[i]) << ',' << format_double(band.lower[i]) << ','
            << format_double(band.center[i]) << ',' << format_double(band.upper[i]) << '\n';
    }
}

void write_meta_json(const std::string& csv_path, const std::string& config_hash,
                     const std::string& body_json) {
    json j = json::parse(body_json);
    j["config_hash"] = config_hash;
    j["version"] = kToolVersion;
    std::ofstream out = open_out(csv_path + ".meta.json");
    out << j.dump(2) << '\n';
}

}  // namespace qsens
