#include "qsens/pipeline.hpp"

#include <algorithm>

#include "qsens/errors.hpp"

namespace qsens {

SystemEstimate estimate_system(const AlignedPanel& panel, const PipelineOptions& options) {
    if (options.taus.empty()) throw ConfigError("estimate_system: empty level grid");

    SystemEstimate est;
    est.design_one = build_design(panel, options.lag_count, 1);
    est.design_h = (options.horizon == 1)
                       ? est.design_one
                       : build_design(panel, options.lag_count, options.horizon);

    for (Eigen::Index v = 0; v < est.design_one.n(); ++v) {
        const std::string& name = panel.names[static_cast<std::size_t>(v)];
        est.one_step.push_back(fit_grid(est.design_one.Z, est.design_one.targets.col(v),
                                        options.taus, name, 1, options.fit));
        if (options.horizon == 1) {
            est.h_step.push_back(est.one_step.back());
        } else {
            est.h_step.push_back(fit_grid(est.design_h.Z, est.design_h.targets.col(v),
                                          options.taus, name, options.horizon, options.fit));
        }
    }
    est.system = stack_system(est.one_step, est.h_step);
    est.sensitivity = projection_matrix(est.system, options.cond_threshold);
    return est;
}

std::vector<std::pair<std::size_t, std::size_t>> subperiod_ranges(
    const AlignedPanel& panel, const std::vector<YearMonth>& breakpoints) {
    std::vector<YearMonth> bps = breakpoints;
    std::sort(bps.begin(), bps.end());

    std::vector<std::size_t> starts{0};
    for (const YearMonth& bp : bps) {
        const auto it = std::lower_bound(panel.dates.begin(), panel.dates.end(), bp);
        if (it == panel.dates.end() || *it != bp) {
            throw ConfigError("breakpoint " + bp.str() + " is not a panel date");
        }
        starts.push_back(static_cast<std::size_t>(it - panel.dates.begin()));
    }

    std::vector<std::pair<std::size_t, std::size_t>> ranges;
    for (std::size_t i = 0; i < starts.size(); ++i) {
        const std::size_t first = starts[i];
        const std::size_t stop = (i + 1 < starts.size()) ? starts[i + 1] : panel.rows();
        if (stop <= first) {
            throw ConfigError("breakpoints produce an empty sub-period starting at index " +
                              std::to_string(first));
        }
        ranges.emplace_back(first, stop - first);
    }
    return ranges;
}

std::vector<SensitivityMatrix> subperiod_systems(const AlignedPanel& panel,
                                                 const std::vector<YearMonth>& breakpoints,
                                                 const PipelineOptions& options) {
    std::vector<SensitivityMatrix> out;
    for (const auto& [first, count] : subperiod_ranges(panel, breakpoints)) {
        out.push_back(estimate_system(panel.slice(first, count), options).sensitivity);
    }
    return out;
}

}  // namespace qsens
