#include "qsens/design.hpp"

#include <string>

#include <Eigen/SVD>

#include "qsens/errors.hpp"

namespace qsens {

LagDesign build_design(const AlignedPanel& panel, int lag_count, int horizon) {
    if (lag_count < 1) throw ConfigError("lag count must be >= 1");
    if (horizon < 1) throw ConfigError("horizon must be >= 1");

    const int T = static_cast<int>(panel.rows());
    const int n = static_cast<int>(panel.n());
    const int d = 1 + n * lag_count;
    const int t_eff = T - horizon - lag_count + 1;
    if (t_eff < d) {
        throw DataError("panel too short: " + std::to_string(T) + " rows give " +
                        std::to_string(t_eff) + " usable rows for d=" + std::to_string(d) +
                        " columns (need T >= h + p + d)");
    }

    LagDesign design;
    design.lag_count = lag_count;
    design.horizon = horizon;
    design.names = panel.names;
    design.Z.resize(t_eff, d);
    design.targets.resize(t_eff, n);
    design.dates.reserve(static_cast<std::size_t>(t_eff));

    // Rows are indexed by the conditioning time t = p-1 .. T-1-h.
    for (int r = 0; r < t_eff; ++r) {
        const int t = lag_count - 1 + r;
        design.dates.push_back(panel.dates[static_cast<std::size_t>(t)]);
        design.Z(r, 0) = 1.0;
        int c = 1;
        for (int v = 0; v < n; ++v) {
            for (int lag = 0; lag < lag_count; ++lag) {
                design.Z(r, c++) = panel.values(t - lag, v);
            }
        }
        for (int v = 0; v < n; ++v) {
            design.targets(r, v) = panel.values(t + horizon, v);
        }
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(design.Z);
    const auto& sv = svd.singularValues();
    const double smax = sv(0);
    const double smin = sv(sv.size() - 1);
    const double rank_tol = std::max(design.Z.rows(), design.Z.cols()) *
                            std::numeric_limits<double>::epsilon() * smax;
    design.cond = (smin > 0.0) ? smax / smin : std::numeric_limits<double>::infinity();
    if (smin <= rank_tol) {
        throw NumericalError("design matrix is rank deficient (condition number " +
                             std::to_string(design.cond) + ")", design.cond);
    }
    return design;
}

}  // namespace qsens
