#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qsens/pipeline.hpp"
#include "qsens/rng.hpp"
#include "qsens/series.hpp"

namespace qsens {

struct BootstrapSpec {
    int replicates = 1000;
    int block_length = 0;  // 0: ceil(T^(1/3))
    std::uint64_t seed = 0;
    double coverage = 0.68;
};

struct CurveQuery {
    std::string response;
    std::vector<double> grid;
    std::string impulse;
    double impulse_tau = 0.5;
};

struct CurveBand {
    std::vector<double> grid;
    std::vector<double> lower;
    std::vector<double> center;          // mean of replicate curves
    std::vector<double> upper;
    std::vector<double> point_estimate;  // curve on the original panel
    int replicates_used = 0;
    int replicates_failed = 0;
};

/// Joint moving-block resample: ceil(T/L) block start indices drawn
/// uniformly, blocks concatenated and truncated to T rows; all columns are
/// resampled with the same blocks. Dates are carried over as metadata.
AlignedPanel moving_block_resample(const AlignedPanel& panel, int block_length, Rng& rng);

/// Empirical quantile with linear interpolation between order statistics
/// (values need not be pre-sorted).
double empirical_quantile(std::vector<double> values, double q);

/// Pointwise percentile band over full-pipeline re-estimates on block
/// resamples. Replicate b uses the substream (seed, b), so results do not
/// depend on execution order. Replicates that fail rank or conditioning
/// checks are dropped and counted; more than 20% failures is an error.
CurveBand bootstrap_curve(const AlignedPanel& panel, const PipelineOptions& options,
                          const CurveQuery& query, const BootstrapSpec& spec);

}  // namespace qsens
