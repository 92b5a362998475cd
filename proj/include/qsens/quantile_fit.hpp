#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qsens {

/// Check loss rho_tau(x) = x * (tau - 1{x <= 0}). Requires tau in (0,1).
double pinball_loss(double x, double tau);

/// Sum of check losses of the residuals y - Z*beta.
double check_loss_sum(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y,
                      const Eigen::VectorXd& beta, double tau);

enum class FitStatus {
    converged,       // interior-point met the duality-gap tolerance
    degenerate,      // exact basic-solution fallback used after a stall
    max_iterations,  // no optimum certified
};

struct QuantileFit {
    double tau = 0.5;           // possibly clamped, see FitOptions
    Eigen::VectorXd beta;
    double objective = 0.0;     // check loss recomputed from beta
    FitStatus status = FitStatus::max_iterations;
    int iterations = 0;
    bool tau_clamped = false;
};

struct FitOptions {
    /// Stop when (primal - dual) <= tol * (1 + |primal|).
    double tol = 1e-9;
    int max_iterations = 100;
    /// On a stall, fall back to exact vertex enumeration when the instance
    /// is small enough for it (all size-d row subsets).
    bool tiny_fallback = true;
};

/// Exact minimization of sum_t rho_tau(y_t - z_t' beta) via a Mehrotra-style
/// predictor-corrector interior-point method on the bounded-variable dual
///   max y'a  s.t.  Z'a = (1 - tau) Z'1,  0 <= a <= 1.
/// Levels outside [0.005, 0.995] are clamped (flagged on the result).
/// Throws NumericalError for rank-deficient Z or non-finite inputs.
QuantileFit fit_quantile(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y, double tau,
                         const FitOptions& options = {});

/// Fits for one variable over an ordered grid of levels.
struct FitGrid {
    std::string variable;
    int horizon = 1;
    std::vector<double> taus;
    std::vector<QuantileFit> fits;

    Eigen::Index d() const { return fits.empty() ? 0 : fits.front().beta.size(); }
};

/// One fit per level; a level that fails to converge raises NumericalError
/// identifying the offending tau.
FitGrid fit_grid(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y,
                 const std::vector<double>& taus, const std::string& variable, int horizon,
                 const FitOptions& options = {});

/// z' beta.
double predict(const QuantileFit& fit, const Eigen::VectorXd& z);

}  // namespace qsens
