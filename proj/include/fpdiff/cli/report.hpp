#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace fpdiff::cli {

using CsvCell = std::variant<double, std::string>;

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<CsvCell>> rows;

    void add_row(std::vector<CsvCell> row);
};

/// 17 significant digits, '.' as decimal separator, independent of locale.
std::string format_number(double value);

/// Header line plus one line per row, fields quoted only when they contain
/// a comma, a double quote or a line break. Lines end in "\n".
std::string to_csv(const CsvTable& table);

/// Throws IoError naming the path.
void emit_csv(const CsvTable& table, const std::filesystem::path& path);

/// Parses text produced by to_csv back into header and numeric cells
/// (non-numeric cells become NaN). Used for round-trip checks.
CsvTable parse_numeric_csv(const std::string& text);

struct SvgSeries {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

struct SvgChart {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
    std::vector<SvgSeries> series;
};

std::string to_svg(const SvgChart& chart);
void emit_svg(const SvgChart& chart, const std::filesystem::path& path);

} // namespace fpdiff::cli
