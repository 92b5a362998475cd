#include "qsens/quantile_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "qsens/errors.hpp"

namespace qsens {

namespace {

constexpr double kTauFloor = 0.005;
constexpr double kTauCeil = 0.995;
constexpr double kStepScale = 0.99995;

double max_step(const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
    // Largest alpha with v + alpha*dv > 0.
    double alpha = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (dv(i) < 0.0) alpha = std::min(alpha, -v(i) / dv(i));
    }
    return alpha;
}

/// Exact optimum by enumeration of basic solutions: every full-rank size-d
/// row subset defines a candidate vertex. Viable only for tiny instances.
bool basic_solution_search(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y, double tau,
                           Eigen::VectorXd& best_beta, double& best_obj) {
    const Eigen::Index m = Z.rows();
    const Eigen::Index d = Z.cols();
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(d));
    for (Eigen::Index i = 0; i < d; ++i) idx[static_cast<std::size_t>(i)] = i;

    bool found = false;
    Eigen::MatrixXd sub(d, d);
    Eigen::VectorXd rhs(d);
    while (true) {
        for (Eigen::Index r = 0; r < d; ++r) {
            sub.row(r) = Z.row(idx[static_cast<std::size_t>(r)]);
            rhs(r) = y(idx[static_cast<std::size_t>(r)]);
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(sub);
        if (lu.isInvertible()) {
            const Eigen::VectorXd beta = lu.solve(rhs);
            const double obj = check_loss_sum(Z, y, beta, tau);
            if (!found || obj < best_obj) {
                best_obj = obj;
                best_beta = beta;
                found = true;
            }
        }
        // next combination
        Eigen::Index k = d - 1;
        while (k >= 0 && idx[static_cast<std::size_t>(k)] == m - d + k) --k;
        if (k < 0) break;
        ++idx[static_cast<std::size_t>(k)];
        for (Eigen::Index j = k + 1; j < d; ++j) {
            idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
        }
    }
    return found;
}

}  // namespace

double pinball_loss(double x, double tau) {
    if (!(tau > 0.0 && tau < 1.0)) {
        throw ConfigError("pinball_loss: tau must lie in (0,1)");
    }
    return x <= 0.0 ? x * (tau - 1.0) : x * tau;
}

double check_loss_sum(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y,
                      const Eigen::VectorXd& beta, double tau) {
    const Eigen::VectorXd r = y - Z * beta;
    double total = 0.0;
    for (Eigen::Index i = 0; i < r.size(); ++i) {
        total += r(i) <= 0.0 ? r(i) * (tau - 1.0) : r(i) * tau;
    }
    return total;
}

QuantileFit fit_quantile(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y, double tau,
                         const FitOptions& options) {
    const Eigen::Index m = Z.rows();
    const Eigen::Index d = Z.cols();
    if (m != y.size()) throw NumericalError("fit_quantile: Z and y row counts differ");
    if (m < d) throw NumericalError("fit_quantile: fewer rows than columns");
    if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("fit_quantile: tau must lie in (0,1)");
    if (!Z.allFinite() || !y.allFinite()) {
        throw NumericalError("fit_quantile: non-finite values in inputs");
    }

    QuantileFit fit;
    fit.tau_clamped = tau < kTauFloor || tau > kTauCeil;
    tau = std::clamp(tau, kTauFloor, kTauCeil);
    fit.tau = tau;

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> zqr(Z);
    if (zqr.rank() < d) {
        throw NumericalError("fit_quantile: design matrix is rank deficient");
    }

    // Dual LP state: a in (0,1)^m with Z'a fixed, s = 1 - a, and the
    // complementary pair (z, w) with w - z tracking the primal residual.
    Eigen::VectorXd a = Eigen::VectorXd::Constant(m, 1.0 - tau);
    Eigen::VectorXd s = Eigen::VectorXd::Constant(m, tau);
    Eigen::VectorXd beta = zqr.solve(y);
    Eigen::VectorXd resid = y - Z * beta;

    const double bump = 1e-8 * (1.0 + resid.cwiseAbs().mean());
    Eigen::VectorXd zv(m), wv(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        double zp = std::max(-resid(i), 0.0);
        double wp = std::max(resid(i), 0.0);
        if (std::abs(resid(i)) < bump) {
            zp += bump;
            wp += bump;
        }
        zv(i) = zp;
        wv(i) = wp;
    }

    const double y_sum = y.sum();
    double primal = check_loss_sum(Z, y, beta, tau);
    // Either bound certifies suboptimality of beta: the complementarity gap
    // a'z + s'w equals the LP primal-dual gap at the iterates, and
    // primal - dual measures the returned beta directly.
    const auto gap_now = [&]() {
        const double dual = y.dot(a) - (1.0 - tau) * y_sum;
        return std::min(a.dot(zv) + s.dot(wv), primal - dual);
    };
    double gap = gap_now();

    Eigen::VectorXd q(m), rr(m), phi(m), da(m), dz(m), dw(m), dbeta(d), zb(m);
    Eigen::MatrixXd normal_eq(d, d);

    int it = 0;
    while (gap > options.tol * (1.0 + std::abs(primal)) && it < options.max_iterations) {
        ++it;
        q = (zv.array() / a.array() + wv.array() / s.array()).inverse();
        rr = wv - zv;

        normal_eq.noalias() = Z.transpose() * q.asDiagonal() * Z;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(normal_eq);
        if (ldlt.info() != Eigen::Success) {
            normal_eq.diagonal().array() +=
                1e-12 * (1.0 + normal_eq.diagonal().cwiseAbs().maxCoeff());
            ldlt.compute(normal_eq);
            if (ldlt.info() != Eigen::Success) break;
        }

        // Affine (predictor) direction.
        phi = q.array() * rr.array();
        dbeta = ldlt.solve(Z.transpose() * phi);
        zb.noalias() = Z * dbeta;
        da = phi - (q.array() * zb.array()).matrix();
        dz = -(zv.array() * (1.0 + da.array() / a.array())).matrix();
        dw = -(wv.array() * (1.0 - da.array() / s.array())).matrix();

        double alpha_p = std::min(max_step(a, da), max_step(s, -da));
        double alpha_d = std::min(max_step(zv, dz), max_step(wv, dw));
        alpha_p = std::min(kStepScale * alpha_p, 1.0);
        alpha_d = std::min(kStepScale * alpha_d, 1.0);

        if (std::min(alpha_p, alpha_d) < 1.0) {
            // Mehrotra corrector with sigma = (mu_aff / mu)^3.
            const double mu = (a.dot(zv) + s.dot(wv)) / static_cast<double>(2 * m);
            const double mu_aff =
                ((a + alpha_p * da).dot(zv + alpha_d * dz) +
                 (s - alpha_p * da).dot(wv + alpha_d * dw)) /
                static_cast<double>(2 * m);
            const double ratio = mu_aff / mu;
            const double sigma_mu = ratio * ratio * ratio * mu;

            const Eigen::ArrayXd dadz = da.array() * dz.array();
            const Eigen::ArrayXd dadw = da.array() * dw.array();
            phi = (q.array() *
                   (sigma_mu * (a.array().inverse() - s.array().inverse()) + rr.array() -
                    dadz / a.array() - dadw / s.array()))
                      .matrix();
            dbeta = ldlt.solve(Z.transpose() * phi);
            zb.noalias() = Z * dbeta;
            da = phi - (q.array() * zb.array()).matrix();
            dz = ((sigma_mu - dadz) / a.array() - zv.array() -
                  zv.array() / a.array() * da.array())
                     .matrix();
            dw = ((sigma_mu + dadw) / s.array() - wv.array() +
                  wv.array() / s.array() * da.array())
                     .matrix();

            alpha_p = std::min(max_step(a, da), max_step(s, -da));
            alpha_d = std::min(max_step(zv, dz), max_step(wv, dw));
            alpha_p = std::min(kStepScale * alpha_p, 1.0);
            alpha_d = std::min(kStepScale * alpha_d, 1.0);
        }

        if (!da.allFinite() || !dz.allFinite() || !dw.allFinite() || !dbeta.allFinite()) {
            break;  // numerically exhausted; judge the current iterate below
        }

        a += alpha_p * da;
        s = Eigen::VectorXd::Ones(m) - a;
        beta += alpha_d * dbeta;
        zv += alpha_d * dz;
        wv += alpha_d * dw;

        primal = check_loss_sum(Z, y, beta, tau);
        gap = gap_now();
    }

    // Vertex polish: the optimum interpolates d rows, so refitting through
    // the d smallest residuals usually lands exactly on it.
    {
        Eigen::VectorXd r_abs = (y - Z * beta).cwiseAbs();
        std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
        for (Eigen::Index i = 0; i < m; ++i) order[static_cast<std::size_t>(i)] = i;
        std::partial_sort(order.begin(), order.begin() + d, order.end(),
                          [&r_abs](Eigen::Index lhs, Eigen::Index rhs) {
                              return r_abs(lhs) < r_abs(rhs);
                          });
        Eigen::MatrixXd sub(d, d);
        Eigen::VectorXd rhs(d);
        for (Eigen::Index r = 0; r < d; ++r) {
            sub.row(r) = Z.row(order[static_cast<std::size_t>(r)]);
            rhs(r) = y(order[static_cast<std::size_t>(r)]);
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(sub);
        if (lu.isInvertible()) {
            const Eigen::VectorXd polished = lu.solve(rhs);
            const double obj = check_loss_sum(Z, y, polished, tau);
            if (obj <= primal) {
                beta = polished;
                primal = obj;
                gap = gap_now();
            }
        }
    }

    fit.iterations = it;
    fit.beta = beta;
    fit.objective = primal;
    if (gap <= options.tol * (1.0 + std::abs(primal))) {
        fit.status = FitStatus::converged;
        return fit;
    }

    if (options.tiny_fallback && m <= 40 && d <= 4) {
        Eigen::VectorXd vb;
        double vobj = 0.0;
        if (basic_solution_search(Z, y, tau, vb, vobj) && vobj <= primal) {
            fit.beta = vb;
            fit.objective = vobj;
            fit.status = FitStatus::degenerate;
            return fit;
        }
    }
    fit.status = FitStatus::max_iterations;
    return fit;
}

FitGrid fit_grid(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y,
                 const std::vector<double>& taus, const std::string& variable, int horizon,
                 const FitOptions& options) {
    if (taus.empty()) throw ConfigError("fit_grid: empty level grid");
    for (std::size_t i = 0; i + 1 < taus.size(); ++i) {
        if (!(taus[i] < taus[i + 1])) {
            throw ConfigError("fit_grid: levels must be strictly increasing");
        }
    }
    FitGrid grid;
    grid.variable = variable;
    grid.horizon = horizon;
    grid.taus = taus;
    grid.fits.reserve(taus.size());
    for (double tau : taus) {
        QuantileFit fit = fit_quantile(Z, y, tau, options);
        if (fit.status == FitStatus::max_iterations) {
            throw NumericalError("fit_grid: solver did not converge for variable '" + variable +
                                 "' at tau=" + std::to_string(tau));
        }
        grid.fits.push_back(std::move(fit));
    }
    return grid;
}

double predict(const QuantileFit& fit, const Eigen::VectorXd& z) {
    if (z.size() != fit.beta.size()) {
        throw NumericalError("predict: dimension mismatch");
    }
    return z.dot(fit.beta);
}

}  // namespace qsens
