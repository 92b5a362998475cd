#include <doctest.h>

#include <qsens/design.hpp>
#include <qsens/errors.hpp>
#include <qsens/rng.hpp>

using namespace qsens;

namespace {

AlignedPanel random_panel(int T, int n, std::uint64_t seed) {
    Rng rng(seed);
    AlignedPanel panel;
    panel.values.resize(T, n);
    for (int t = 0; t < T; ++t) {
        panel.dates.push_back(YearMonth{2000, 1}.plus_months(t));
        for (int v = 0; v < n; ++v) panel.values(t, v) = rng.normal();
    }
    for (int v = 0; v < n; ++v) panel.names.push_back("v" + std::to_string(v + 1));
    return panel;
}

// Counting oracle: enumerate the usable conditioning times directly.
int usable_rows(int T, int p, int h) {
    int count = 0;
    for (int t = 0; t < T; ++t) {
        if (t - (p - 1) >= 0 && t + h <= T - 1) ++count;
    }
    return count;
}

}  // namespace

TEST_CASE("design shape: T=30, n=2, p=2, h=12") {
    const AlignedPanel panel = random_panel(30, 2, 1);
    const LagDesign design = build_design(panel, 2, 12);
    CHECK(usable_rows(30, 2, 12) == 17);
    CHECK(design.Z.rows() == 17);
    CHECK(design.Z.cols() == 5);
    CHECK(design.targets.rows() == 17);
    CHECK(design.targets.cols() == 2);
}

TEST_CASE("design shape: T=10, n=2, p=1, h=1") {
    const AlignedPanel panel = random_panel(10, 2, 2);
    const LagDesign design = build_design(panel, 1, 1);
    CHECK(usable_rows(10, 1, 1) == 9);
    CHECK(design.Z.rows() == 9);
    CHECK(design.Z.cols() == 3);
}

TEST_CASE("design rows reproduce panel entries exactly") {
    const AlignedPanel panel = random_panel(40, 2, 3);
    const int p = 3, h = 2;
    const LagDesign design = build_design(panel, p, h);
    for (int r = 0; r < design.Z.rows(); ++r) {
        const int t = p - 1 + r;
        CHECK(design.Z(r, 0) == 1.0);
        CHECK(design.dates[static_cast<std::size_t>(r)] ==
              panel.dates[static_cast<std::size_t>(t)]);
        int c = 1;
        for (int v = 0; v < 2; ++v) {
            for (int lag = 0; lag < p; ++lag) {
                CHECK(design.Z(r, c++) == panel.values(t - lag, v));
            }
        }
        for (int v = 0; v < 2; ++v) {
            CHECK(design.targets(r, v) == panel.values(t + h, v));
        }
    }
}

TEST_CASE("shifting dates changes no numeric content") {
    const AlignedPanel panel = random_panel(30, 2, 4);
    AlignedPanel shifted = panel;
    for (YearMonth& ym : shifted.dates) ym = ym.plus_months(1);
    const LagDesign a = build_design(panel, 2, 3);
    const LagDesign b = build_design(shifted, 2, 3);
    CHECK(a.Z == b.Z);
    CHECK(a.targets == b.targets);
}

TEST_CASE("too short panel is an error") {
    const AlignedPanel panel = random_panel(20, 2, 5);
    // d = 1 + 2*4 = 9 but T_eff = 20 - 12 - 4 + 1 = 5
    CHECK_THROWS_AS(build_design(panel, 4, 12), DataError);
}

TEST_CASE("constant column duplicating the intercept is rank deficient") {
    AlignedPanel panel = random_panel(30, 2, 6);
    panel.values.col(1).setConstant(3.5);
    try {
        build_design(panel, 2, 1);
        FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
        CHECK((std::isinf(e.condition_number) || e.condition_number > 1e10));
    }
}

TEST_CASE("condition number is recorded") {
    const AlignedPanel panel = random_panel(50, 2, 7);
    const LagDesign design = build_design(panel, 2, 1);
    CHECK(design.cond >= 1.0);
    CHECK(std::isfinite(design.cond));
}
