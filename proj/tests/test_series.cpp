#include <doctest.h>

#include <cmath>
#include <sstream>

#include <qsens/errors.hpp>
#include <qsens/series.hpp>

using namespace qsens;

namespace {

RawSeries make_series(const std::string& name, YearMonth start,
                      const std::vector<double>& values) {
    RawSeries s;
    s.name = name;
    for (std::size_t t = 0; t < values.size(); ++t) {
        s.dates.push_back(start.plus_months(static_cast<int>(t)));
        s.values.push_back(values[t]);
    }
    return s;
}

}  // namespace

TEST_CASE("year-month parsing and arithmetic") {
    CHECK(YearMonth::parse("2020-01") == YearMonth{2020, 1});
    CHECK(YearMonth::parse("2020-01-31") == YearMonth{2020, 1});
    CHECK(YearMonth{2020, 12}.plus_months(1) == YearMonth{2021, 1});
    CHECK(YearMonth{2020, 3}.plus_months(-15) == YearMonth{2018, 12});
    CHECK(YearMonth::months_between({2019, 11}, {2020, 2}) == 3);
    CHECK(YearMonth{2020, 7}.str() == "2020-07");
    CHECK_THROWS_AS(YearMonth::parse("2020/01"), DataError);
    CHECK_THROWS_AS(YearMonth::parse("2020-13"), DataError);
    CHECK_THROWS_AS(YearMonth::parse("Jan 2020"), DataError);
}

TEST_CASE("csv parse: plain three-row file") {
    std::istringstream in("DATE,VALUE\n2020-01,100\n2020-02,101\n2020-03,99\n");
    const ParsedSeries p = parse_series_csv(in, "x");
    CHECK(p.series.size() == 3);
    CHECK(p.rows_dropped == 0);
    CHECK(p.series.values == std::vector<double>{100.0, 101.0, 99.0});
    CHECK(p.series.dates.front() == YearMonth{2020, 1});
}

TEST_CASE("csv parse: missing marker rows are dropped and counted") {
    std::istringstream in("DATE,VALUE\n2020-01,100\n2020-02,.\n2020-03,99\n2020-04,\n");
    const ParsedSeries p = parse_series_csv(in, "x");
    CHECK(p.series.size() == 2);
    CHECK(p.rows_dropped == 2);
}

TEST_CASE("csv parse: rows come out sorted by date") {
    std::istringstream in("DATE,VALUE\n2020-03,3\n2020-01,1\n2020-02,2\n");
    const ParsedSeries p = parse_series_csv(in, "x");
    CHECK(p.series.values == std::vector<double>{1.0, 2.0, 3.0});
}

TEST_CASE("csv parse: duplicate dates are an error") {
    std::istringstream in("DATE,VALUE\n2020-01,1\n2020-01,2\n");
    CHECK_THROWS_AS(parse_series_csv(in, "x"), DataError);
}

TEST_CASE("csv parse: zero usable rows is an error") {
    std::istringstream in("DATE,VALUE\n2020-01,.\n");
    CHECK_THROWS_AS(parse_series_csv(in, "x"), DataError);
}

TEST_CASE("csv parse: bad date cell is an error") {
    std::istringstream in("DATE,VALUE\nnot-a-date,1\n");
    CHECK_THROWS_AS(parse_series_csv(in, "x"), DataError);
}

TEST_CASE("csv parse: named value column") {
    std::istringstream in("DATE,A,B\n2020-01,1,10\n2020-02,2,20\n");
    CsvSchema schema;
    schema.value_column = "B";
    const ParsedSeries p = parse_series_csv(in, "x", schema);
    CHECK(p.series.values == std::vector<double>{10.0, 20.0});
}

TEST_CASE("yoy growth of a constant series is zero") {
    const RawSeries s = make_series("x", {2000, 1}, std::vector<double>(30, 100.0));
    const RawSeries g = to_yoy_growth(s);
    CHECK(g.size() == 18);
    CHECK(g.dates.front() == YearMonth{2001, 1});
    for (double v : g.values) CHECK(v == doctest::Approx(0.0));
}

TEST_CASE("yoy growth of an annually doubling series is 100 ln 2") {
    std::vector<double> values;
    for (int t = 0; t < 36; ++t) values.push_back(100.0 * std::pow(2.0, t / 12.0));
    const RawSeries g = to_yoy_growth(make_series("x", {2000, 1}, values));
    for (double v : g.values) {
        CHECK(v == doctest::Approx(100.0 * std::log(2.0)).epsilon(1e-10));
    }
}

TEST_CASE("yoy growth needs at least 13 observations") {
    const RawSeries s = make_series("x", {2000, 1}, std::vector<double>(12, 1.0));
    CHECK_THROWS_AS(to_yoy_growth(s), DataError);
}

TEST_CASE("yoy growth rejects non-positive levels") {
    std::vector<double> values(20, 1.0);
    values[15] = 0.0;
    CHECK_THROWS_AS(to_yoy_growth(make_series("x", {2000, 1}, values)), DataError);
}

TEST_CASE("yoy growth is invariant to positive rescaling") {
    std::vector<double> values;
    for (int t = 0; t < 40; ++t) values.push_back(95.0 + 2.0 * t + (t % 5));
    const RawSeries base = make_series("x", {2000, 1}, values);
    for (double& v : values) v *= 37.5;
    const RawSeries scaled = make_series("x", {2000, 1}, values);
    const RawSeries ga = to_yoy_growth(base);
    const RawSeries gb = to_yoy_growth(scaled);
    for (std::size_t t = 0; t < ga.size(); ++t) {
        CHECK(ga.values[t] == doctest::Approx(gb.values[t]).epsilon(1e-12));
    }
}

TEST_CASE("align restricts to the common range") {
    const RawSeries a = make_series("a", {2000, 1}, std::vector<double>(60, 1.0));
    const RawSeries b = make_series("b", {2002, 6}, std::vector<double>(60, 2.0));
    const AlignedPanel panel = align({a, b}, "a");
    CHECK(panel.dates.front() == YearMonth{2002, 6});
    CHECK(panel.dates.back() == YearMonth{2004, 12});  // end of series a
    CHECK(panel.rows() == 31);
    CHECK(panel.impulse == 0);
    CHECK(panel.values.col(1).minCoeff() == 2.0);
}

TEST_CASE("align keeps full length for identical ranges") {
    const RawSeries a = make_series("a", {2000, 1}, {1, 2, 3, 4});
    RawSeries b = a;
    b.name = "b";
    const AlignedPanel panel = align({a, b}, "b");
    CHECK(panel.rows() == 4);
    CHECK(panel.impulse == 1);
}

TEST_CASE("align rejects disjoint ranges") {
    const RawSeries a = make_series("a", {2000, 1}, {1, 2, 3});
    const RawSeries b = make_series("b", {2010, 1}, {1, 2, 3});
    CHECK_THROWS_AS(align({a, b}, "a"), DataError);
}

TEST_CASE("align rejects internal month gaps") {
    RawSeries a = make_series("a", {2000, 1}, std::vector<double>(10, 1.0));
    a.dates.erase(a.dates.begin() + 5);
    a.values.erase(a.values.begin() + 5);
    const RawSeries b = make_series("b", {2000, 1}, std::vector<double>(10, 2.0));
    CHECK_THROWS_AS(align({a, b}, "a"), DataError);
}

TEST_CASE("align needs at least two series") {
    const RawSeries a = make_series("a", {2000, 1}, {1, 2, 3});
    CHECK_THROWS_AS(align({a}, "a"), DataError);
}

TEST_CASE("panel slice keeps names and roles") {
    const RawSeries a = make_series("a", {2000, 1}, {1, 2, 3, 4, 5});
    const RawSeries b = make_series("b", {2000, 1}, {6, 7, 8, 9, 10});
    const AlignedPanel panel = align({a, b}, "b");
    const AlignedPanel sub = panel.slice(1, 3);
    CHECK(sub.rows() == 3);
    CHECK(sub.impulse == 1);
    CHECK(sub.dates.front() == YearMonth{2000, 2});
    CHECK(sub.values(0, 0) == 2.0);
}
