#include "qsens/series.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <sstream>

#include "qsens/errors.hpp"

namespace qsens {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (char c : line) {
        if (c == '"') {
            quoted = !quoted;
        } else if (c == ',' && !quoted) {
            cells.push_back(trim(cell));
            cell.clear();
        } else {
            cell.push_back(c);
        }
    }
    cells.push_back(trim(cell));
    return cells;
}

bool parse_int(const std::string& s, int& out) {
    const char* b = s.data();
    const char* e = s.data() + s.size();
    auto [p, ec] = std::from_chars(b, e, out);
    return ec == std::errc{} && p == e;
}

}  // namespace

YearMonth YearMonth::parse(const std::string& text) {
    // YYYY-MM or YYYY-MM-DD
    const std::string t = trim(text);
    if (t.size() != 7 && t.size() != 10) {
        throw DataError("unparseable date '" + text + "' (expected YYYY-MM or YYYY-MM-DD)");
    }
    if (t[4] != '-' || (t.size() == 10 && t[7] != '-')) {
        throw DataError("unparseable date '" + text + "' (expected YYYY-MM or YYYY-MM-DD)");
    }
    YearMonth ym;
    if (!parse_int(t.substr(0, 4), ym.year) || !parse_int(t.substr(5, 2), ym.month) ||
        ym.month < 1 || ym.month > 12) {
        throw DataError("unparseable date '" + text + "'");
    }
    if (t.size() == 10) {
        int day = 0;
        if (!parse_int(t.substr(8, 2), day) || day < 1 || day > 31) {
            throw DataError("unparseable date '" + text + "'");
        }
    }
    return ym;
}

std::string YearMonth::str() const {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "%04d-%02d", year, month);
    return buf;
}

YearMonth YearMonth::plus_months(int m) const {
    int idx = year * 12 + (month - 1) + m;
    YearMonth out;
    out.year = idx / 12;
    out.month = idx % 12 + 1;
    if (out.month < 1) {  // guard for negative idx rounding toward zero
        out.month += 12;
        out.year -= 1;
    }
    return out;
}

int YearMonth::months_between(const YearMonth& a, const YearMonth& b) {
    return (b.year * 12 + b.month) - (a.year * 12 + a.month);
}

ParsedSeries parse_series_csv(std::istream& in, const std::string& name,
                              const CsvSchema& schema) {
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError("series '" + name + "': empty CSV input");
    }
    if (!line.empty() && line.front() == '\xEF') {  // strip UTF-8 BOM
        line.erase(0, 3);
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> header = split_csv_line(line);

    std::ptrdiff_t date_col = -1, value_col = -1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == schema.date_column) date_col = static_cast<std::ptrdiff_t>(i);
    }
    if (date_col < 0) {
        throw DataError("series '" + name + "': date column '" + schema.date_column +
                        "' not found in header");
    }
    if (schema.value_column.empty()) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (static_cast<std::ptrdiff_t>(i) != date_col) {
                value_col = static_cast<std::ptrdiff_t>(i);
                break;
            }
        }
    } else {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == schema.value_column) value_col = static_cast<std::ptrdiff_t>(i);
        }
    }
    if (value_col < 0) {
        throw DataError("series '" + name + "': value column '" + schema.value_column +
                        "' not found in header");
    }

    std::map<YearMonth, double> rows;
    std::size_t dropped = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const std::vector<std::string> cells = split_csv_line(line);
        if (static_cast<std::size_t>(date_col) >= cells.size()) {
            throw DataError("series '" + name + "': row with too few columns: " + line);
        }
        const YearMonth ym = YearMonth::parse(cells[static_cast<std::size_t>(date_col)]);
        std::string cell = static_cast<std::size_t>(value_col) < cells.size()
                               ? cells[static_cast<std::size_t>(value_col)]
                               : std::string{};
        if (cell.empty() || cell == ".") {
            ++dropped;
            continue;
        }
        char* end = nullptr;
        const double v = std::strtod(cell.c_str(), &end);
        if (end != cell.c_str() + cell.size() || !std::isfinite(v)) {
            ++dropped;
            continue;
        }
        if (!rows.emplace(ym, v).second) {
            throw DataError("series '" + name + "': duplicate date " + ym.str());
        }
    }
    if (rows.empty()) {
        throw DataError("series '" + name + "': no usable rows");
    }

    ParsedSeries out;
    out.series.name = name;
    out.rows_dropped = dropped;
    for (const auto& [ym, v] : rows) {
        out.series.dates.push_back(ym);
        out.series.values.push_back(v);
    }
    return out;
}

RawSeries to_yoy_growth(const RawSeries& s) {
    if (s.size() < 13) {
        throw DataError("series '" + s.name + "': need at least 13 observations for a "
                        "year-over-year transform, got " + std::to_string(s.size()));
    }
    RawSeries out;
    out.name = s.name;
    for (std::size_t t = 12; t < s.size(); ++t) {
        if (s.values[t] <= 0.0 || s.values[t - 12] <= 0.0) {
            throw DataError("series '" + s.name + "': non-positive level at " +
                            s.dates[t].str() + "; log growth undefined");
        }
        if (YearMonth::months_between(s.dates[t - 12], s.dates[t]) != 12) {
            throw DataError("series '" + s.name + "': date gap breaks the 12-month spacing at " +
                            s.dates[t].str());
        }
        out.dates.push_back(s.dates[t]);
        out.values.push_back(100.0 * std::log(s.values[t] / s.values[t - 12]));
    }
    return out;
}

std::size_t AlignedPanel::column_of(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) return i;
    }
    throw DataError("unknown variable '" + name + "'");
}

std::vector<std::size_t> AlignedPanel::responses() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i != impulse) out.push_back(i);
    }
    return out;
}

AlignedPanel AlignedPanel::slice(std::size_t first, std::size_t count) const {
    if (first + count > rows()) {
        throw DataError("panel slice out of range");
    }
    AlignedPanel out;
    out.names = names;
    out.impulse = impulse;
    out.dates.assign(dates.begin() + static_cast<std::ptrdiff_t>(first),
                     dates.begin() + static_cast<std::ptrdiff_t>(first + count));
    out.values = values.middleRows(static_cast<Eigen::Index>(first),
                                   static_cast<Eigen::Index>(count));
    return out;
}

AlignedPanel align(const std::vector<RawSeries>& series, const std::string& impulse_name) {
    if (series.size() < 2) {
        throw DataError("alignment needs at least 2 series");
    }
    YearMonth start = series.front().dates.front();
    YearMonth stop = series.front().dates.back();
    for (const auto& s : series) {
        if (s.size() == 0) throw DataError("series '" + s.name + "' is empty");
        start = std::max(start, s.dates.front());
        stop = std::min(stop, s.dates.back());
    }
    if (stop < start) {
        throw DataError("series have no overlapping date range");
    }
    const int length = YearMonth::months_between(start, stop) + 1;

    AlignedPanel panel;
    panel.values.resize(length, static_cast<Eigen::Index>(series.size()));
    for (int t = 0; t < length; ++t) {
        panel.dates.push_back(start.plus_months(t));
    }
    for (std::size_t j = 0; j < series.size(); ++j) {
        const RawSeries& s = series[j];
        panel.names.push_back(s.name);
        const auto it = std::lower_bound(s.dates.begin(), s.dates.end(), start);
        std::size_t base = static_cast<std::size_t>(it - s.dates.begin());
        for (int t = 0; t < length; ++t) {
            const std::size_t k = base + static_cast<std::size_t>(t);
            if (k >= s.size() || s.dates[k] != panel.dates[static_cast<std::size_t>(t)]) {
                throw DataError("series '" + s.name + "': month gap at " +
                                panel.dates[static_cast<std::size_t>(t)].str() +
                                " inside the common range");
            }
            panel.values(t, static_cast<Eigen::Index>(j)) = s.values[k];
        }
    }
    panel.impulse = panel.column_of(impulse_name);
    return panel;
}

}  // namespace qsens
