#include <doctest.h>

#include <algorithm>
#include <set>

#include <qsens/bootstrap.hpp>
#include <qsens/errors.hpp>
#include <qsens/synthetic.hpp>

using namespace qsens;

namespace {

PipelineOptions small_options() {
    PipelineOptions opts;
    opts.lag_count = 1;
    opts.horizon = 1;
    opts.taus = {0.1, 0.25, 0.5, 0.75, 0.9};
    return opts;
}

CurveQuery cross_query(const std::vector<double>& grid) {
    CurveQuery q;
    q.response = "y2";
    q.grid = grid;
    q.impulse = "y1";
    q.impulse_tau = 0.9;
    return q;
}

}  // namespace

TEST_CASE("block resample: L = T reproduces the panel") {
    const AlignedPanel panel = simulate(default_dgp(), 50, 1);
    Rng rng(2);
    const AlignedPanel out = moving_block_resample(panel, 50, rng);
    CHECK(out.values == panel.values);
    CHECK(out.dates == panel.dates);
}

TEST_CASE("block resample: same stream, same resample") {
    const AlignedPanel panel = simulate(default_dgp(), 80, 3);
    Rng a(77), b(77);
    const AlignedPanel ra = moving_block_resample(panel, 7, a);
    const AlignedPanel rb = moving_block_resample(panel, 7, b);
    CHECK(ra.values == rb.values);
}

TEST_CASE("block resample: L = 1 draws rows from the original multiset") {
    const AlignedPanel panel = simulate(default_dgp(), 40, 4);
    std::set<double> pool(panel.values.col(0).begin(), panel.values.col(0).end());
    Rng rng(5);
    const AlignedPanel out = moving_block_resample(panel, 1, rng);
    CHECK(out.rows() == panel.rows());
    for (Eigen::Index t = 0; t < out.values.rows(); ++t) {
        CHECK(pool.count(out.values(t, 0)) == 1);
    }
}

TEST_CASE("block resample: columns move jointly") {
    // col2 = col1 + 10 identifies the row pairing; it must survive resampling
    AlignedPanel panel = simulate(default_dgp(), 60, 6);
    panel.values.col(1) = panel.values.col(0).array() + 10.0;
    Rng rng(8);
    const AlignedPanel out = moving_block_resample(panel, 6, rng);
    for (Eigen::Index t = 0; t < out.values.rows(); ++t) {
        CHECK(out.values(t, 1) == doctest::Approx(out.values(t, 0) + 10.0));
    }
}

TEST_CASE("block resample: blocks are contiguous runs of the source") {
    const AlignedPanel panel = simulate(default_dgp(), 30, 7);
    Rng rng(9);
    const AlignedPanel out = moving_block_resample(panel, 5, rng);
    // locate each output row in the source, then check run structure
    std::vector<Eigen::Index> src;
    for (Eigen::Index t = 0; t < out.values.rows(); ++t) {
        for (Eigen::Index s = 0; s < panel.values.rows(); ++s) {
            if (out.values(t, 0) == panel.values(s, 0)) {
                src.push_back(s);
                break;
            }
        }
    }
    REQUIRE(src.size() == 30);
    for (std::size_t t = 0; t < src.size(); ++t) {
        if (t % 5 != 0) CHECK(src[t] == src[t - 1] + 1);
    }
}

TEST_CASE("block resample: invalid block length") {
    const AlignedPanel panel = simulate(default_dgp(), 20, 1);
    Rng rng(1);
    CHECK_THROWS_AS(moving_block_resample(panel, 21, rng), DataError);
    CHECK_THROWS_AS(moving_block_resample(panel, 0, rng), DataError);
}

TEST_CASE("empirical quantile endpoints and interpolation") {
    std::vector<double> v{4.0, 1.0, 3.0, 2.0};
    CHECK(empirical_quantile(v, 0.0) == doctest::Approx(1.0));
    CHECK(empirical_quantile(v, 1.0) == doctest::Approx(4.0));
    CHECK(empirical_quantile(v, 0.5) == doctest::Approx(2.5));
    CHECK(empirical_quantile(v, 1.0 / 3.0) == doctest::Approx(2.0));
}

TEST_CASE("bootstrap band: determinism and ordering") {
    const AlignedPanel panel = simulate(default_dgp(), 250, 11);
    const PipelineOptions opts = small_options();
    const CurveQuery query = cross_query(opts.taus);
    BootstrapSpec spec;
    spec.replicates = 25;
    spec.seed = 404;

    const CurveBand a = bootstrap_curve(panel, opts, query, spec);
    const CurveBand b = bootstrap_curve(panel, opts, query, spec);
    CHECK(a.lower == b.lower);
    CHECK(a.center == b.center);
    CHECK(a.upper == b.upper);
    CHECK(a.replicates_used == 25);
    for (std::size_t g = 0; g < a.grid.size(); ++g) {
        CHECK(a.lower[g] <= a.center[g]);
        CHECK(a.center[g] <= a.upper[g]);
    }

    BootstrapSpec other = spec;
    other.seed = 405;
    const CurveBand c = bootstrap_curve(panel, opts, query, other);
    CHECK(c.lower != a.lower);
}

TEST_CASE("bootstrap band: wider coverage contains narrower") {
    const AlignedPanel panel = simulate(default_dgp(), 250, 12);
    const PipelineOptions opts = small_options();
    const CurveQuery query = cross_query(opts.taus);
    BootstrapSpec narrow;
    narrow.replicates = 40;
    narrow.seed = 1;
    narrow.coverage = 0.68;
    BootstrapSpec wide = narrow;
    wide.coverage = 0.90;

    const CurveBand nb = bootstrap_curve(panel, opts, query, narrow);
    const CurveBand wb = bootstrap_curve(panel, opts, query, wide);
    for (std::size_t g = 0; g < nb.grid.size(); ++g) {
        CHECK(wb.lower[g] <= nb.lower[g] + 1e-12);
        CHECK(wb.upper[g] >= nb.upper[g] - 1e-12);
    }
}

TEST_CASE("bootstrap band: percentile definition at B=200") {
    const AlignedPanel panel = simulate(default_dgp(), 200, 13);
    const PipelineOptions opts = small_options();
    const CurveQuery query = cross_query({0.5});
    BootstrapSpec spec;
    spec.replicates = 200;
    spec.seed = 7;

    const CurveBand band = bootstrap_curve(panel, opts, query, spec);
    // reproduce the replicate values independently and take 16th/84th percentiles
    const Rng master(spec.seed);
    std::vector<double> values;
    for (int b = 0; b < 200; ++b) {
        Rng stream = master.substream(static_cast<std::uint64_t>(b));
        const AlignedPanel re = moving_block_resample(
            panel, static_cast<int>(std::ceil(std::cbrt(200.0))), stream);
        const SystemEstimate est = estimate_system(re, opts);
        values.push_back(
            quantile_sensitivity(est.sensitivity, "y2", 0.5, "y1", 0.9));
    }
    CHECK(band.replicates_used == 200);
    CHECK(band.lower[0] == doctest::Approx(empirical_quantile(values, 0.16)).epsilon(1e-12));
    CHECK(band.upper[0] == doctest::Approx(empirical_quantile(values, 0.84)).epsilon(1e-12));
    const double mean =
        std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    CHECK(band.center[0] == doctest::Approx(mean).epsilon(1e-12));
}

TEST_CASE("bootstrap band: B=2 with the forced full-length block degenerates") {
    // L = T leaves a single admissible start index, so both replicates equal
    // the original panel and the band collapses onto the point estimate.
    const AlignedPanel panel = simulate(default_dgp(), 150, 14);
    const PipelineOptions opts = small_options();
    const CurveQuery query = cross_query({0.5});
    BootstrapSpec spec;
    spec.replicates = 2;
    spec.seed = 3;
    spec.block_length = 150;
    const CurveBand band = bootstrap_curve(panel, opts, query, spec);
    CHECK(band.upper[0] == band.lower[0]);
    CHECK(band.center[0] == doctest::Approx(band.point_estimate[0]).epsilon(1e-12));
}

TEST_CASE("bootstrap: invalid specs are config errors") {
    const AlignedPanel panel = simulate(default_dgp(), 100, 15);
    const PipelineOptions opts = small_options();
    const CurveQuery query = cross_query({0.5});
    BootstrapSpec spec;
    spec.replicates = 1;
    CHECK_THROWS_AS(bootstrap_curve(panel, opts, query, spec), ConfigError);
    spec.replicates = 10;
    spec.coverage = 1.0;
    CHECK_THROWS_AS(bootstrap_curve(panel, opts, query, spec), ConfigError);
    spec.coverage = 0.68;
    spec.block_length = 101;
    CHECK_THROWS_AS(bootstrap_curve(panel, opts, query, spec), DataError);
}
