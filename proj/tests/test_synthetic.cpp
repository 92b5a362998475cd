#include <doctest.h>

#include <algorithm>
#include <cmath>

#include <qsens/design.hpp>
#include <qsens/errors.hpp>
#include <qsens/pipeline.hpp>
#include <qsens/rng.hpp>
#include <qsens/synthetic.hpp>

using namespace qsens;

TEST_CASE("innovation quantiles") {
    CHECK(innovation_quantile(Innovation::normal, 0.5) == doctest::Approx(0.0));
    CHECK(innovation_quantile(Innovation::uniform, 0.75) == doctest::Approx(0.25));
    CHECK(innovation_quantile(Innovation::uniform, 0.25) == doctest::Approx(-0.25));
    CHECK_THROWS_AS(innovation_quantile(Innovation::normal, 0.0), ConfigError);
}

TEST_CASE("simulate: deterministic per seed, seed changes the path") {
    const LocationScaleDGP dgp = default_dgp();
    const AlignedPanel a = simulate(dgp, 100, 42);
    const AlignedPanel b = simulate(dgp, 100, 42);
    const AlignedPanel c = simulate(dgp, 100, 43);
    CHECK(a.values == b.values);
    CHECK(a.values != c.values);
    CHECK(a.rows() == 100);
    CHECK(a.n() == 2);
    CHECK(a.names == std::vector<std::string>{"y1", "y2"});
}

TEST_CASE("simulate: shapes as configured") {
    const AlignedPanel panel = simulate(default_dgp(), 2000, 7);
    CHECK(panel.rows() == 2000);
    CHECK(panel.values.allFinite());
}

TEST_CASE("simulate: scale positivity violations are reported") {
    LocationScaleDGP dgp = default_dgp();
    dgp.scale[0] = (Eigen::VectorXd(3) << 0.1, 1.0, 0.0).finished();  // goes negative fast
    CHECK_THROWS_AS(simulate(dgp, 500, 1), DataError);
}

TEST_CASE("homoskedastic flag distinguishes the fixtures") {
    CHECK(default_dgp().homoskedastic());
    CHECK_FALSE(heteroskedastic_dgp().homoskedastic());
}

TEST_CASE("analytic system: median row is the location vector") {
    const LocationScaleDGP dgp = default_dgp();
    const QuantileSystem sys = analytic_system(dgp, {0.25, 0.5, 0.75}, 1);
    CHECK((sys.coeffs_one.row(sys.row_of("y1", 0.5)).transpose() - dgp.location[0])
              .cwiseAbs()
              .maxCoeff() < 1e-14);
}

TEST_CASE("analytic system: normal one-sigma level") {
    const LocationScaleDGP dgp = default_dgp();
    const double p = 0.8413447460685429;  // Phi(1)
    const QuantileSystem sys = analytic_system(dgp, {0.5, p}, 1);
    const Eigen::VectorXd row = sys.coeffs_one.row(sys.row_of("y1", p)).transpose();
    const Eigen::VectorXd expected = dgp.location[0] + dgp.scale[0];
    CHECK((row - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("analytic system: uniform inverse CDF is linear") {
    const LocationScaleDGP dgp = heteroskedastic_dgp();
    const QuantileSystem sys = analytic_system(dgp, {0.25, 0.75}, 1);
    const Eigen::VectorXd row = sys.coeffs_one.row(sys.row_of("y2", 0.75)).transpose();
    const Eigen::VectorXd expected = dgp.location[1] + 0.25 * dgp.scale[1];
    CHECK((row - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("analytic system: symmetric levels mirror around the location") {
    const LocationScaleDGP dgp = default_dgp();
    const QuantileSystem sys = analytic_system(dgp, {0.2, 0.8}, 1);
    const Eigen::VectorXd lo = sys.coeffs_one.row(sys.row_of("y2", 0.2)).transpose();
    const Eigen::VectorXd hi = sys.coeffs_one.row(sys.row_of("y2", 0.8)).transpose();
    CHECK(((lo + hi) / 2.0 - dgp.location[1]).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("multi-horizon truth: location iterates the recursion") {
    const LocationScaleDGP dgp = default_dgp();
    const HorizonCoefficients h2 = horizon_coefficients(dgp, 2);
    // E[y1,t+2 | z] = b1' (A z) with A the companion map
    const Eigen::VectorXd& b1 = dgp.location[0];
    const Eigen::VectorXd& b2 = dgp.location[1];
    Eigen::VectorXd expected(3);
    expected(0) = b1(0) + b1(1) * b1(0) + b1(2) * b2(0);
    expected(1) = b1(1) * b1(1) + b1(2) * b2(1);
    expected(2) = b1(1) * b1(2) + b1(2) * b2(2);
    CHECK((h2.location[0] - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("multi-horizon truth: variance accumulates the moving average") {
    const LocationScaleDGP dgp = default_dgp();
    const HorizonCoefficients h2 = horizon_coefficients(dgp, 2);
    const double s1 = dgp.scale[0](0), s2 = dgp.scale[1](0);
    const double b11 = dgp.location[0](1), b12 = dgp.location[0](2);
    const double expected_var = s1 * s1 + b11 * b11 * s1 * s1 + b12 * b12 * s2 * s2;
    CHECK(h2.scale[0](0) == doctest::Approx(std::sqrt(expected_var)).epsilon(1e-12));
    for (Eigen::Index j = 1; j < 3; ++j) CHECK(h2.scale[0](j) == 0.0);
}

TEST_CASE("multi-horizon truth requires the closed-form case") {
    CHECK_THROWS_AS(horizon_coefficients(heteroskedastic_dgp(), 2), ConfigError);
    CHECK_NOTHROW(horizon_coefficients(heteroskedastic_dgp(), 1));
}

TEST_CASE("analytic qs: identical horizons reconstruct exactly") {
    const LocationScaleDGP dgp = default_dgp();
    const std::vector<double> taus{0.2, 0.5, 0.8};
    const QuantileSystem sys = analytic_system(dgp, taus, 1);
    const SensitivityMatrix S = projection_matrix(sys);
    CHECK((S.values * sys.coeffs_one - sys.coeffs_h).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((S.values * S.values - S.values).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("analytic qs: matches a direct normal-equation evaluation") {
    const LocationScaleDGP dgp = default_dgp();
    const std::vector<double> taus{0.1, 0.3, 0.5, 0.7, 0.9};
    const QuantileSystem sys = analytic_system(dgp, taus, 4);
    const Eigen::MatrixXd& B1 = sys.coeffs_one;
    const Eigen::MatrixXd direct =
        sys.coeffs_h * (B1.transpose() * B1).ldlt().solve(B1.transpose());
    const double got = analytic_qs(dgp, taus, 4, "y2", 0.3, "y1", 0.9);
    const QuantileSystem forward = analytic_system(dgp, taus, 4);
    CHECK(got == doctest::Approx(direct(forward.row_of("y2", 0.3), forward.row_of("y1", 0.9)))
                     .epsilon(1e-12));
}

TEST_CASE("homoskedastic truth: z-perturbations off the intercept shift all "
          "response levels equally") {
    const LocationScaleDGP dgp = default_dgp();
    const std::vector<double> taus{0.2, 0.5, 0.8};
    const QuantileSystem sys = analytic_system(dgp, taus, 3);
    const SensitivityMatrix S = projection_matrix(sys);
    Eigen::VectorXd dz(3);
    dz << 0.0, 1.0, -0.4;  // no intercept movement
    const Eigen::VectorXd response = S.values * (sys.coeffs_one * dz);
    for (const std::string& var : sys.variables) {
        const double first = response(sys.row_of(var, taus[0]));
        for (double tau : taus) {
            CHECK(response(sys.row_of(var, tau)) == doctest::Approx(first).epsilon(1e-10));
        }
    }
}

TEST_CASE("empirical conditional quantiles converge to the analytic line") {
    // Intercept-only check at scale: the marginal of a location-scale draw
    // with fixed z matches z'(b + g F^{-1}(tau)) closely at T = 1e5.
    const LocationScaleDGP dgp = default_dgp();
    Rng rng(31);
    const Eigen::VectorXd z = (Eigen::VectorXd(3) << 1.0, 0.3, -0.2).finished();
    const double loc = dgp.location[0].dot(z);
    const double sca = dgp.scale[0].dot(z);
    std::vector<double> draws(100000);
    for (double& v : draws) v = loc + sca * rng.normal();
    std::sort(draws.begin(), draws.end());
    for (double tau : {0.1, 0.5, 0.9}) {
        const double empirical = draws[static_cast<std::size_t>(tau * 100000.0)];
        const double analytic = loc + sca * normal_quantile(tau);
        CHECK(empirical == doctest::Approx(analytic).epsilon(0.02));
    }
}

TEST_CASE("estimated grids approach the analytic rows as T grows") {
    const LocationScaleDGP dgp = default_dgp();
    const std::vector<double> taus{0.25, 0.5, 0.75};
    const QuantileSystem truth = analytic_system(dgp, taus, 1);

    std::vector<double> errs;
    for (int T : {500, 2000, 8000}) {
        std::vector<double> per_seed;
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            const AlignedPanel panel = simulate(dgp, T, seed);
            PipelineOptions opts;
            opts.lag_count = 1;
            opts.horizon = 1;
            opts.taus = taus;
            const SystemEstimate est = estimate_system(panel, opts);
            per_seed.push_back(
                (est.system.coeffs_one - truth.coeffs_one).cwiseAbs().maxCoeff());
        }
        std::sort(per_seed.begin(), per_seed.end());
        errs.push_back((per_seed[9] + per_seed[10]) / 2.0);  // median of 20
    }
    CHECK(errs[1] < errs[0]);
    CHECK(errs[2] < errs[1]);
}

TEST_CASE("heteroskedastic one-step estimates recover the analytic rows") {
    const LocationScaleDGP dgp = heteroskedastic_dgp();
    const std::vector<double> taus{0.1, 0.5, 0.9};
    const QuantileSystem truth = analytic_system(dgp, taus, 1);
    const AlignedPanel panel = simulate(dgp, 6000, 3);
    PipelineOptions opts;
    opts.lag_count = 1;
    opts.horizon = 1;
    opts.taus = taus;
    const SystemEstimate est = estimate_system(panel, opts);
    CHECK((est.system.coeffs_one - truth.coeffs_one).cwiseAbs().maxCoeff() < 0.15);
}
