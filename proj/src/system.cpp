#include "qsens/system.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "qsens/errors.hpp"

namespace qsens {

namespace {

Eigen::Index find_level(const std::vector<double>& taus, double tau) {
    for (std::size_t i = 0; i < taus.size(); ++i) {
        if (std::abs(taus[i] - tau) <= kLevelMatchTol) return static_cast<Eigen::Index>(i);
    }
    return -1;
}

Eigen::Index find_variable(const std::vector<std::string>& names, const std::string& name) {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) return static_cast<Eigen::Index>(i);
    }
    return -1;
}

}  // namespace

Eigen::Index QuantileSystem::level_index(double tau) const {
    const Eigen::Index i = find_level(taus, tau);
    if (i < 0) throw ConfigError("level " + std::to_string(tau) + " is not a grid member");
    return i;
}

Eigen::Index QuantileSystem::variable_index(const std::string& name) const {
    const Eigen::Index i = find_variable(variables, name);
    if (i < 0) throw DataError("unknown variable '" + name + "'");
    return i;
}

Eigen::Index QuantileSystem::row_of(Eigen::Index variable, Eigen::Index level) const {
    return variable * k() + level;
}

Eigen::Index QuantileSystem::row_of(const std::string& variable, double tau) const {
    return row_of(variable_index(variable), level_index(tau));
}

std::pair<Eigen::Index, Eigen::Index> QuantileSystem::location_of(Eigen::Index row) const {
    if (row < 0 || row >= n() * k()) throw DataError("system row out of range");
    return {row / k(), row % k()};
}

QuantileSystem stack_system(const std::vector<FitGrid>& one_step,
                            const std::vector<FitGrid>& h_step) {
    if (one_step.empty() || one_step.size() != h_step.size()) {
        throw ConfigError("stack_system: need matching per-variable grids for both horizons");
    }
    const std::vector<double>& taus = one_step.front().taus;
    const Eigen::Index d = one_step.front().d();
    const int horizon = h_step.front().horizon;
    for (std::size_t a = 0; a < taus.size(); ++a) {
        if (!(taus[a] > 0.0 && taus[a] < 1.0) || (a > 0 && !(taus[a - 1] < taus[a]))) {
            throw ConfigError("stack_system: levels must be strictly increasing in (0,1)");
        }
    }
    for (std::size_t i = 0; i < one_step.size(); ++i) {
        if (one_step[i].taus != taus || h_step[i].taus != taus) {
            throw ConfigError("stack_system: level grids differ across variables or horizons");
        }
        if (one_step[i].d() != d || h_step[i].d() != d) {
            throw ConfigError("stack_system: coefficient dimensions differ");
        }
        if (one_step[i].horizon != 1) {
            throw ConfigError("stack_system: first argument must hold 1-step fits");
        }
        if (h_step[i].horizon != horizon) {
            throw ConfigError("stack_system: h-step grids disagree on the horizon");
        }
        if (one_step[i].variable != h_step[i].variable) {
            throw ConfigError("stack_system: variable order differs between horizons");
        }
    }

    QuantileSystem sys;
    sys.taus = taus;
    sys.horizon = horizon;
    const Eigen::Index n = static_cast<Eigen::Index>(one_step.size());
    const Eigen::Index k = static_cast<Eigen::Index>(taus.size());
    if (n * k < d) {
        throw NumericalError("stack_system: nk < d, the stacked system cannot identify z");
    }
    sys.coeffs_one.resize(n * k, d);
    sys.coeffs_h.resize(n * k, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        sys.variables.push_back(one_step[static_cast<std::size_t>(i)].variable);
        for (Eigen::Index a = 0; a < k; ++a) {
            sys.coeffs_one.row(i * k + a) =
                one_step[static_cast<std::size_t>(i)].fits[static_cast<std::size_t>(a)].beta;
            sys.coeffs_h.row(i * k + a) =
                h_step[static_cast<std::size_t>(i)].fits[static_cast<std::size_t>(a)].beta;
        }
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys.coeffs_one);
    const auto& sv = svd.singularValues();
    const double smax = sv(0);
    const double smin = sv(sv.size() - 1);
    const double rank_tol = std::max(sys.coeffs_one.rows(), sys.coeffs_one.cols()) *
                            std::numeric_limits<double>::epsilon() * smax;
    if (smin <= rank_tol) {
        const double cond =
            (smin > 0.0) ? (smax / smin) * (smax / smin) : std::numeric_limits<double>::infinity();
        throw NumericalError("stack_system: stacked 1-step matrix is rank deficient "
                             "(cond(B1'B1)=" + std::to_string(cond) + ")", cond);
    }
    return sys;
}

Eigen::Index SensitivityMatrix::row_of(const std::string& variable, double tau) const {
    const Eigen::Index v = find_variable(variables, variable);
    if (v < 0) throw DataError("unknown variable '" + variable + "'");
    const Eigen::Index a = find_level(taus, tau);
    if (a < 0) throw ConfigError("level " + std::to_string(tau) + " is not a grid member");
    return v * k() + a;
}

SensitivityMatrix projection_matrix(const QuantileSystem& system, double cond_threshold) {
    const Eigen::MatrixXd& B1 = system.coeffs_one;
    const Eigen::MatrixXd& Bh = system.coeffs_h;
    if (B1.rows() != Bh.rows() || B1.cols() != Bh.cols()) {
        throw NumericalError("projection_matrix: coefficient matrices disagree in shape");
    }
    const Eigen::Index nk = B1.rows();
    const Eigen::Index d = B1.cols();

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(B1);
    const auto& sv = svd.singularValues();
    const double smax = sv(0);
    const double smin = sv(sv.size() - 1);
    const double cond = (smin > 0.0) ? (smax / smin) * (smax / smin)
                                     : std::numeric_limits<double>::infinity();
    if (!(cond < cond_threshold)) {
        throw NumericalError("projection_matrix: cond(B1'B1)=" + std::to_string(cond) +
                             " exceeds threshold " + std::to_string(cond_threshold), cond);
    }

    // B1 = Q R  =>  Bh (B1'B1)^{-1} B1' = (Bh R^{-1}) Q'.
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(B1);
    const Eigen::MatrixXd R = qr.matrixQR().topRows(d).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd thin_q =
        qr.householderQ() * Eigen::MatrixXd::Identity(nk, d);
    Eigen::MatrixXd coeff = R.transpose()
                                .triangularView<Eigen::Lower>()
                                .solve(Bh.transpose())
                                .transpose();  // Bh R^{-1}

    SensitivityMatrix S;
    S.values.noalias() = coeff * thin_q.transpose();
    S.cond = cond;
    S.horizon = system.horizon;
    S.variables = system.variables;
    S.taus = system.taus;
    return S;
}

double quantile_sensitivity(const SensitivityMatrix& S, const std::string& response,
                            double tau, const std::string& impulse, double tau_prime) {
    return S.values(S.row_of(response, tau), S.row_of(impulse, tau_prime));
}

SensitivityCurve sensitivity_curve(const SensitivityMatrix& S, const std::string& response,
                                   const std::vector<double>& grid, const std::string& impulse,
                                   double tau_prime) {
    SensitivityCurve curve;
    curve.response = response;
    curve.impulse = impulse;
    curve.impulse_level = tau_prime;
    curve.grid = grid;
    const Eigen::Index col = S.row_of(impulse, tau_prime);
    curve.values.reserve(grid.size());
    for (double tau : grid) {
        curve.values.push_back(S.values(S.row_of(response, tau), col));
    }
    return curve;
}

PerturbedDistribution perturb_distribution(const std::vector<double>& baseline,
                                           const SensitivityMatrix& S,
                                           const std::string& response,
                                           const std::string& impulse, double tau_prime,
                                           double delta) {
    if (baseline.size() != S.taus.size()) {
        throw DataError("perturb_distribution: baseline length differs from the grid");
    }
    const SensitivityCurve curve = sensitivity_curve(S, response, S.taus, impulse, tau_prime);
    PerturbedDistribution out;
    out.response = response;
    out.impulse = impulse;
    out.impulse_level = tau_prime;
    out.delta = delta;
    out.grid = S.taus;
    out.baseline = baseline;
    out.perturbed.resize(baseline.size());
    for (std::size_t i = 0; i < baseline.size(); ++i) {
        out.perturbed[i] = baseline[i] + curve.values[i] * delta;
    }
    return out;
}

std::vector<double> predicted_quantiles(const FitGrid& fits, const Eigen::VectorXd& z,
                                        bool rearrange) {
    std::vector<double> preds;
    preds.reserve(fits.fits.size());
    for (const QuantileFit& fit : fits.fits) {
        preds.push_back(predict(fit, z));
    }
    if (rearrange) {
        std::sort(preds.begin(), preds.end());
    }
    return preds;
}

double tau_level_lookup(const FitGrid& fits, const Eigen::VectorXd& z, double y_obs,
                        bool rearrange) {
    if (fits.taus.empty()) throw ConfigError("tau_level_lookup: empty level grid");
    const std::vector<double> preds = predicted_quantiles(fits, z, rearrange);
    for (std::size_t a = 0; a < preds.size(); ++a) {
        if (preds[a] >= y_obs) return fits.taus[a];
    }
    return fits.taus.back();
}

std::vector<DatedCurve> time_varying_qs(const SensitivityMatrix& S,
                                        const FitGrid& impulse_fits, const Eigen::MatrixXd& Z,
                                        const std::vector<YearMonth>& dates,
                                        const Eigen::VectorXd& observed,
                                        const std::string& response,
                                        const std::vector<double>& grid, bool rearrange) {
    if (Z.rows() != observed.size() ||
        static_cast<std::size_t>(Z.rows()) != dates.size()) {
        throw DataError("time_varying_qs: design rows, dates and observations must align");
    }
    std::vector<DatedCurve> out;
    out.reserve(dates.size());
    for (Eigen::Index t = 0; t < Z.rows(); ++t) {
        DatedCurve dc;
        dc.date = dates[static_cast<std::size_t>(t)];
        dc.tau_t = tau_level_lookup(impulse_fits, Z.row(t).transpose(), observed(t), rearrange);
        dc.curve = sensitivity_curve(S, response, grid, impulse_fits.variable, dc.tau_t);
        out.push_back(std::move(dc));
    }
    return out;
}

}  // namespace qsens
