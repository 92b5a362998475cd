#include "qsens/bootstrap.hpp"

#include <algorithm>
#include <cmath>

#include "qsens/errors.hpp"
#include "qsens/system.hpp"

namespace qsens {

AlignedPanel moving_block_resample(const AlignedPanel& panel, int block_length, Rng& rng) {
    const std::size_t T = panel.rows();
    const std::size_t L = static_cast<std::size_t>(block_length);
    if (block_length < 1 || L > T) {
        throw DataError("block length must lie in [1, T]");
    }
    AlignedPanel out;
    out.names = panel.names;
    out.impulse = panel.impulse;
    out.dates = panel.dates;  // calendar labels are metadata, kept as-is
    out.values.resize(panel.values.rows(), panel.values.cols());

    std::size_t filled = 0;
    while (filled < T) {
        const std::size_t start = rng.uniform_below(T - L + 1);
        const std::size_t take = std::min(L, T - filled);
        out.values.middleRows(static_cast<Eigen::Index>(filled),
                              static_cast<Eigen::Index>(take)) =
            panel.values.middleRows(static_cast<Eigen::Index>(start),
                                    static_cast<Eigen::Index>(take));
        filled += take;
    }
    return out;
}

double empirical_quantile(std::vector<double> values, double q) {
    if (values.empty()) throw DataError("empirical_quantile: no values");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    if (lo + 1 >= values.size()) return values.back();
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

CurveBand bootstrap_curve(const AlignedPanel& panel, const PipelineOptions& options,
                          const CurveQuery& query, const BootstrapSpec& spec) {
    if (spec.replicates < 2) throw ConfigError("bootstrap needs at least 2 replicates");
    if (!(spec.coverage > 0.0 && spec.coverage < 1.0)) {
        throw ConfigError("band coverage must lie in (0,1)");
    }
    const std::size_t T = panel.rows();
    const int L = spec.block_length > 0
                      ? spec.block_length
                      : static_cast<int>(std::ceil(std::cbrt(static_cast<double>(T))));
    if (static_cast<std::size_t>(L) > T) throw DataError("block length exceeds panel length");

    CurveBand band;
    band.grid = query.grid;
    {
        const SystemEstimate point = estimate_system(panel, options);
        band.point_estimate = sensitivity_curve(point.sensitivity, query.response, query.grid,
                                                query.impulse, query.impulse_tau)
                                  .values;
    }

    const Rng master(spec.seed);
    std::vector<std::vector<double>> curves;  // per replicate
    curves.reserve(static_cast<std::size_t>(spec.replicates));
    int failed = 0;
    for (int b = 0; b < spec.replicates; ++b) {
        Rng stream = master.substream(static_cast<std::uint64_t>(b));
        const AlignedPanel resampled = moving_block_resample(panel, L, stream);
        try {
            const SystemEstimate est = estimate_system(resampled, options);
            curves.push_back(sensitivity_curve(est.sensitivity, query.response, query.grid,
                                               query.impulse, query.impulse_tau)
                                 .values);
        } catch (const NumericalError&) {
            ++failed;
        }
    }
    band.replicates_failed = failed;
    band.replicates_used = static_cast<int>(curves.size());
    if (failed > spec.replicates / 5) {
        throw BootstrapError("bootstrap unreliable: " + std::to_string(failed) + " of " +
                             std::to_string(spec.replicates) + " replicates failed");
    }
    if (curves.empty()) {
        throw BootstrapError("bootstrap produced no usable replicates");
    }

    const double q_lo = (1.0 - spec.coverage) / 2.0;
    const double q_hi = 1.0 - q_lo;
    const std::size_t points = query.grid.size();
    band.lower.resize(points);
    band.center.resize(points);
    band.upper.resize(points);
    std::vector<double> slice(curves.size());
    for (std::size_t g = 0; g < points; ++g) {
        double mean = 0.0;
        for (std::size_t b = 0; b < curves.size(); ++b) {
            slice[b] = curves[b][g];
            mean += curves[b][g];
        }
        band.center[g] = mean / static_cast<double>(curves.size());
        band.lower[g] = empirical_quantile(slice, q_lo);
        band.upper[g] = empirical_quantile(slice, q_hi);
    }
    return band;
}

}  // namespace qsens
