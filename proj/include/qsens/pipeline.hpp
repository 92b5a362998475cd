#pragma once

#include <vector>

#include "qsens/design.hpp"
#include "qsens/quantile_fit.hpp"
#include "qsens/system.hpp"

namespace qsens {

struct PipelineOptions {
    int lag_count = 12;
    int horizon = 12;
    std::vector<double> taus;  // fitted grid, strictly increasing in (0,1)
    bool rearrange = true;
    double cond_threshold = 1e12;
    FitOptions fit;
};

struct SystemEstimate {
    LagDesign design_one;
    LagDesign design_h;               // aliases design_one when horizon == 1
    std::vector<FitGrid> one_step;    // one grid per panel variable
    std::vector<FitGrid> h_step;
    QuantileSystem system;
    SensitivityMatrix sensitivity;
};

/// Full estimation pass: lagged designs at horizons 1 and h, per-variable
/// quantile fits over the grid, the stacked system, and its projection.
SystemEstimate estimate_system(const AlignedPanel& panel, const PipelineOptions& options);

/// Row ranges [first, count) induced by breakpoint dates; each breakpoint
/// starts a new sub-period. Breakpoints must be panel dates and no
/// sub-period may be empty.
std::vector<std::pair<std::size_t, std::size_t>> subperiod_ranges(
    const AlignedPanel& panel, const std::vector<YearMonth>& breakpoints);

/// Independent full-pipeline estimation per sub-period. Each breakpoint
/// date starts a new sub-period; sub-periods too short for the design are
/// errors.
std::vector<SensitivityMatrix> subperiod_systems(const AlignedPanel& panel,
                                                 const std::vector<YearMonth>& breakpoints,
                                                 const PipelineOptions& options);

}  // namespace qsens
