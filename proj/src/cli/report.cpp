#include "fpdiff/cli/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "fpdiff/error.hpp"

namespace fpdiff::cli {

namespace {

std::string quote_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string cell_text(const CsvCell& cell) {
    if (const auto* d = std::get_if<double>(&cell)) return format_number(*d);
    return quote_field(std::get<std::string>(cell));
}

void write_file(const std::string& text, const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) throw Error(ErrorCode::IoError, "cannot create directory " + path.parent_path().string());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
    out << text;
    out.close();
    if (!out) throw Error(ErrorCode::IoError, "write to " + path.string() + " failed");
}

std::vector<std::string> split_record(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

} // namespace

void CsvTable::add_row(std::vector<CsvCell> row) {
    if (row.size() != columns.size()) {
        throw Error(ErrorCode::InvalidArgument, "CSV row has " + std::to_string(row.size()) + " cells, schema has " +
                                                    std::to_string(columns.size()));
    }
    rows.push_back(std::move(row));
}

std::string format_number(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

std::string to_csv(const CsvTable& table) {
    std::string out;
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        if (i) out += ',';
        out += quote_field(table.columns[i]);
    }
    out += '\n';
    for (const auto& row : table.rows) {
        if (row.size() != table.columns.size()) throw Error(ErrorCode::InvalidArgument, "CSV row width mismatch");
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += cell_text(row[i]);
        }
        out += '\n';
    }
    return out;
}

void emit_csv(const CsvTable& table, const std::filesystem::path& path) { write_file(to_csv(table), path); }

CsvTable parse_numeric_csv(const std::string& text) {
    CsvTable table;
    std::istringstream in(text);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto fields = split_record(line);
        if (header) {
            table.columns = std::move(fields);
            header = false;
            continue;
        }
        std::vector<CsvCell> row;
        for (const auto& f : fields) {
            char* end = nullptr;
            const double v = std::strtod(f.c_str(), &end);
            row.emplace_back(end != f.c_str() && *end == '\0' ? v : std::numeric_limits<double>::quiet_NaN());
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

std::string to_svg(const SvgChart& chart) {
    constexpr double width = 640, height = 420, left = 80, right = 20, top = 40, bottom = 60;
    const auto tx = [&](double v) { return chart.log_x ? std::log10(v) : v; };
    const auto ty = [&](double v) { return chart.log_y ? std::log10(v) : v; };
    const auto usable = [&](double x, double y) {
        return std::isfinite(x) && std::isfinite(y) && (!chart.log_x || x > 0.0) && (!chart.log_y || y > 0.0);
    };
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : chart.series) {
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!usable(s.x[i], s.y[i])) continue;
            x0 = std::min(x0, tx(s.x[i]));
            x1 = std::max(x1, tx(s.x[i]));
            y0 = std::min(y0, ty(s.y[i]));
            y1 = std::max(y1, ty(s.y[i]));
        }
    }
    if (!(x0 <= x1)) x0 = 0, x1 = 1;
    if (!(y0 <= y1)) y0 = 0, y1 = 1;
    if (x1 == x0) x0 -= 0.5, x1 += 0.5;
    if (y1 == y0) y0 -= 0.5, y1 += 0.5;
    const auto px = [&](double v) { return left + (tx(v) - x0) / (x1 - x0) * (width - left - right); };
    const auto py = [&](double v) { return height - bottom - (ty(v) - y0) / (y1 - y0) * (height - top - bottom); };
    const auto axis_value = [](double v, bool log) { return format_number(log ? std::pow(10.0, v) : v); };
    const auto escape = [](const std::string& s) {
        std::string out;
        for (char c : s) {
            if (c == '<') out += "&lt;";
            else if (c == '>') out += "&gt;";
            else if (c == '&') out += "&amp;";
            else out += c;
        }
        return out;
    };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << escape(chart.title)
      << "</text>\n";
    o << "<line x1=\"" << left << "\" y1=\"" << height - bottom << "\" x2=\"" << width - right << "\" y2=\""
      << height - bottom << "\" stroke=\"black\"/>\n";
    o << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << height - bottom
      << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << left << "\" y=\"" << height - bottom + 16 << "\" font-size=\"10\">"
      << axis_value(x0, chart.log_x) << "</text>\n";
    o << "<text x=\"" << width - right << "\" y=\"" << height - bottom + 16
      << "\" font-size=\"10\" text-anchor=\"end\">" << axis_value(x1, chart.log_x) << "</text>\n";
    o << "<text x=\"" << left - 4 << "\" y=\"" << height - bottom << "\" font-size=\"10\" text-anchor=\"end\">"
      << axis_value(y0, chart.log_y) << "</text>\n";
    o << "<text x=\"" << left - 4 << "\" y=\"" << top + 10 << "\" font-size=\"10\" text-anchor=\"end\">"
      << axis_value(y1, chart.log_y) << "</text>\n";
    o << "<text x=\"" << width / 2 << "\" y=\"" << height - 16 << "\" text-anchor=\"middle\" font-size=\"12\">"
      << escape(chart.x_label) << (chart.log_x ? " (log)" : "") << "</text>\n";
    o << "<text x=\"16\" y=\"" << height / 2 << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
      << height / 2 << ")\">" << escape(chart.y_label) << (chart.log_y ? " (log)" : "") << "</text>\n";
    for (std::size_t k = 0; k < chart.series.size(); ++k) {
        const auto& s = chart.series[k];
        const char* colour = kPalette[k % (sizeof kPalette / sizeof kPalette[0])];
        o << "<polyline fill=\"none\" stroke=\"" << colour << "\" points=\"";
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (usable(s.x[i], s.y[i])) o << format_number(px(s.x[i])) << ',' << format_number(py(s.y[i])) << ' ';
        }
        o << "\"/>\n";
        o << "<text x=\"" << width - right - 4 << "\" y=\"" << top + 14 * (k + 1)
          << "\" text-anchor=\"end\" font-size=\"11\" fill=\"" << colour << "\">" << escape(s.name) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

void emit_svg(const SvgChart& chart, const std::filesystem::path& path) { write_file(to_svg(chart), path); }

} // namespace fpdiff::cli
