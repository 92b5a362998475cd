#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qsens/bootstrap.hpp"
#include "qsens/pipeline.hpp"
#include "qsens/series.hpp"
#include "qsens/system.hpp"

namespace qsens {

inline constexpr const char* kToolVersion = "0.1.0";

/// Shortest decimal form that round-trips to the same double. Used for all
/// CSV output so identical runs produce identical bytes.
std::string format_double(double v);

/// Canonical panel CSV: header "date,<name1>,<name2>,..." and one YYYY-MM
/// row per month.
void write_panel_csv(const std::string& path, const AlignedPanel& panel);
AlignedPanel read_panel_csv(const std::string& path);

/// Everything a query needs, detached from the raw series: the stacked
/// system, per-fit diagnostics, and the 1-step design rows with the
/// observed impulse values (for level lookups and baselines).
struct SystemArtifact {
    QuantileSystem system;
    int lag_count = 12;
    bool rearrange = true;
    double cond = 0.0;  // cond(B1'B1) recorded at estimation time
    std::string impulse;

    std::vector<YearMonth> design_dates;
    Eigen::MatrixXd design_rows;       // 1-step design Z
    Eigen::VectorXd impulse_observed;  // 1-step-ahead impulse realization per row

    std::string config_hash;
    std::string version = kToolVersion;

    struct FitInfo {
        std::string variable;
        int horizon = 1;
        double tau = 0.5;
        std::string status;
        int iterations = 0;
        double objective = 0.0;
        bool tau_clamped = false;
    };
    std::vector<FitInfo> fits;

    /// Rebuild a per-variable fit grid from the stacked rows (horizon 1 or h).
    FitGrid grid_for(const std::string& variable, bool one_step) const;
};

SystemArtifact make_artifact(const SystemEstimate& estimate, const AlignedPanel& panel,
                             const PipelineOptions& options, const std::string& config_hash);

void write_system_artifact(const std::string& path, const SystemArtifact& artifact);
SystemArtifact read_system_artifact(const std::string& path);

/// Header "tau,qs" or "tau,qs,perturbed".
void write_curve_csv(const std::string& path, const SensitivityCurve& curve,
                     const std::vector<double>* perturbed = nullptr);

/// Header "tau,lower,center,upper".
void write_band_csv(const std::string& path, const CurveBand& band);

/// Sidecar metadata: `body` plus config_hash and version, written to
/// <csv path>.meta.json so the CSV headers stay column-exact.
void write_meta_json(const std::string& csv_path, const std::string& config_hash,
                     const std::string& body_json);

}  // namespace qsens
