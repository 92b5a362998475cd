#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qsens/quantile_fit.hpp"
#include "qsens/series.hpp"

namespace qsens {

/// Tolerance used to match a requested level against grid members. Levels
/// must be grid members; this only absorbs floating-point fuzz, it is not
/// interpolation.
constexpr double kLevelMatchTol = 1e-9;

/// Stacked coefficient matrices for the 1-step and h-step quantile systems.
///
/// Rows are grouped by variable and ordered by increasing level within a
/// variable: row(variable i, level index a) = i*k + a.
struct QuantileSystem {
    Eigen::MatrixXd coeffs_one;  // nk x d, 1-step-ahead coefficients
    Eigen::MatrixXd coeffs_h;    // nk x d, h-step-ahead coefficients
    std::vector<std::string> variables;  // size n
    std::vector<double> taus;            // size k, strictly increasing
    int horizon = 1;

    Eigen::Index n() const { return static_cast<Eigen::Index>(variables.size()); }
    Eigen::Index k() const { return static_cast<Eigen::Index>(taus.size()); }
    Eigen::Index d() const { return coeffs_one.cols(); }

    Eigen::Index level_index(double tau) const;
    Eigen::Index variable_index(const std::string& name) const;
    Eigen::Index row_of(Eigen::Index variable, Eigen::Index level) const;
    Eigen::Index row_of(const std::string& variable, double tau) const;
    /// Inverse of row_of: (variable index, level index).
    std::pair<Eigen::Index, Eigen::Index> location_of(Eigen::Index row) const;
};

/// Assemble per-variable fit grids (1-step and h-step) into a system.
/// All grids must share the same levels and coefficient dimension, and the
/// stacked 1-step matrix must have full column rank.
QuantileSystem stack_system(const std::vector<FitGrid>& one_step,
                            const std::vector<FitGrid>& h_step);

/// The nk x nk map from 1-step quantile perturbations to h-step responses.
/// Entry (row_of(i,tau), row_of(j,tau')) is the sensitivity of variable i's
/// h-step tau-quantile to variable j's 1-step tau'-quantile.
struct SensitivityMatrix {
    Eigen::MatrixXd values;              // nk x nk
    double cond = 0.0;                   // condition number of B1'B1
    int horizon = 1;
    std::vector<std::string> variables;
    std::vector<double> taus;

    Eigen::Index k() const { return static_cast<Eigen::Index>(taus.size()); }
    Eigen::Index row_of(const std::string& variable, double tau) const;
};

/// B_h (B_1'B_1)^{-1} B_1' computed through a Householder factorization of
/// B_1 (no explicit inverse). Fails when cond(B_1'B_1) exceeds the
/// threshold; the condition number travels with the error and the result.
SensitivityMatrix projection_matrix(const QuantileSystem& system,
                                    double cond_threshold = 1e12);

double quantile_sensitivity(const SensitivityMatrix& S, const std::string& response,
                            double tau, const std::string& impulse, double tau_prime);

struct SensitivityCurve {
    std::string response;
    std::string impulse;
    double impulse_level = 0.5;
    std::vector<double> grid;    // response levels, strictly increasing
    std::vector<double> values;  // one sensitivity per grid point
};

/// Extract the response profile of variable `response` over `grid` for a
/// perturbation of `impulse` at `tau_prime`. Every grid point must be a
/// member of the fitted grid.
SensitivityCurve sensitivity_curve(const SensitivityMatrix& S, const std::string& response,
                                   const std::vector<double>& grid, const std::string& impulse,
                                   double tau_prime);

struct PerturbedDistribution {
    std::string response;
    std::string impulse;
    double impulse_level = 0.5;
    double delta = 0.0;
    std::vector<double> grid;
    std::vector<double> baseline;
    std::vector<double> perturbed;  // baseline + sensitivity * delta
};

/// First-order response of the whole h-step quantile function of `response`
/// to moving the impulse's 1-step tau'-quantile by delta.
PerturbedDistribution perturb_distribution(const std::vector<double>& baseline,
                                           const SensitivityMatrix& S,
                                           const std::string& response,
                                           const std::string& impulse, double tau_prime,
                                           double delta);

/// Predicted quantiles of one variable at conditioning vector z over the
/// grid, optionally monotonized by sorting (linear fits can cross).
std::vector<double> predicted_quantiles(const FitGrid& fits, const Eigen::VectorXd& z,
                                        bool rearrange = true);

/// Level at which y_obs sits inside the fitted conditional distribution:
/// the smallest grid level whose predicted quantile is >= y_obs, clamped to
/// the grid endpoints when y_obs falls outside the predicted range.
double tau_level_lookup(const FitGrid& fits, const Eigen::VectorXd& z, double y_obs,
                        bool rearrange = true);

struct DatedCurve {
    YearMonth date;
    double tau_t = 0.5;
    SensitivityCurve curve;
};

/// Per-date sensitivity curves: each row of Z resolves the observed impulse
/// value to its level tau_t, then reads the curve at that level.
std::vector<DatedCurve> time_varying_qs(const SensitivityMatrix& S,
                                        const FitGrid& impulse_fits, const Eigen::MatrixXd& Z,
                                        const std::vector<YearMonth>& dates,
                                        const Eigen::VectorXd& observed,
                                        const std::string& response,
                                        const std::vector<double>& grid,
                                        bool rearrange = true);

}  // namespace qsens
