#pragma once

#include <vector>

#include <Eigen/Dense>

#include "qsens/series.hpp"

namespace qsens {

/// Lagged regression design aligned to horizon-h targets.
///
/// Row t of Z is [1, var1 at t, var1 at t-1, ..., var1 at t-p+1, var2 at t, ...]
/// and targets(t, i) is variable i observed h months after row t's date.
struct LagDesign {
    Eigen::MatrixXd Z;               // T_eff x d, first column all ones
    Eigen::MatrixXd targets;         // T_eff x n
    std::vector<YearMonth> dates;    // date of the conditioning row t
    std::vector<std::string> names;  // target variable names (panel order)
    int lag_count = 0;
    int horizon = 0;
    double cond = 0.0;               // 2-norm condition number of Z

    Eigen::Index rows() const { return Z.rows(); }
    Eigen::Index d() const { return Z.cols(); }
    Eigen::Index n() const { return targets.cols(); }
};

/// Build the design for one horizon. T_eff = T - h - p + 1 rows; requires
/// T_eff >= d and full column rank (the condition number is reported on
/// failure).
LagDesign build_design(const AlignedPanel& panel, int lag_count, int horizon);

}  // namespace qsens
