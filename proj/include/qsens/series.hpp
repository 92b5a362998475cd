#pragma once

#include <compare>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qsens {

/// Calendar year-month stamp. Accepts "YYYY-MM" and "YYYY-MM-DD" on parse,
/// always prints as "YYYY-MM".
struct YearMonth {
    int year = 0;
    int month = 1;  // 1..12

    auto operator<=>(const YearMonth&) const = default;

    static YearMonth parse(const std::string& text);
    std::string str() const;

    YearMonth plus_months(int m) const;
    /// Signed month count from a to b (b - a).
    static int months_between(const YearMonth& a, const YearMonth& b);
};

/// A dated monthly univariate series (index levels or rates).
struct RawSeries {
    std::string name;
    std::vector<YearMonth> dates;   // strictly increasing
    std::vector<double> values;     // same length as dates

    std::size_t size() const { return dates.size(); }
};

struct CsvSchema {
    std::string date_column = "DATE";
    std::string value_column;  // empty: first column other than the date column
};

struct ParsedSeries {
    RawSeries series;
    std::size_t rows_dropped = 0;  // empty / non-numeric / "." value cells
};

/// Parse one monthly series from CSV. Header row is required; rows are
/// sorted by date; rows whose value cell is empty, "." (the FRED missing
/// marker) or non-numeric are dropped and counted. Duplicate dates and
/// unparseable date cells are errors.
ParsedSeries parse_series_csv(std::istream& in, const std::string& name,
                              const CsvSchema& schema = {});

/// Year-over-year log growth: 100 * ln(x_t / x_{t-12}); the first 12
/// observations are consumed. Requires at least 13 observations and
/// strictly positive levels.
RawSeries to_yoy_growth(const RawSeries& s);

/// Monthly panel on a common contiguous date range.
struct AlignedPanel {
    std::vector<YearMonth> dates;
    std::vector<std::string> names;   // column names, one per variable
    Eigen::MatrixXd values;           // rows() == dates.size(), cols() == names.size()
    std::size_t impulse = 0;          // column index of the impulse variable

    std::size_t rows() const { return dates.size(); }
    std::size_t n() const { return names.size(); }
    std::size_t column_of(const std::string& name) const;
    std::vector<std::size_t> responses() const;

    /// Contiguous sub-panel [first, first+count).
    AlignedPanel slice(std::size_t first, std::size_t count) const;
};

/// Restrict >= 2 series to their maximal common contiguous date range and
/// mark the impulse column. Internal month gaps and empty intersections are
/// errors.
AlignedPanel align(const std::vector<RawSeries>& series, const std::string& impulse_name);

}  // namespace qsens
