#pragma once

// Minimal CSV support for the tool surface: comma-separated, first row is a
// mandatory header, numeric cells written as shortest round-trip decimals.
// Parse failures carry the file name and 1-based line number.

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "qbat/core.hpp"

namespace qbat {

class CsvError : public ValidationError {
  public:
    using ValidationError::ValidationError;
};

/// Shortest decimal string that round-trips to the same double.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

struct CsvTable {
    std::string source;  ///< file name, for error messages
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> row_lines;  ///< 1-based source line per row

    std::size_t column_index(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw CsvError(source + ": missing required column '" + name + "'");
    }

    double number_at(std::size_t row, std::size_t col) const {
        const std::string& cell = rows[row][col];
        double v = 0.0;
        auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size())
            throw CsvError(source + ":" + std::to_string(row_lines[row]) +
                           ": cell '" + cell + "' in column '" + header[col] +
                           "' is not a number");
        return v;
    }

    std::vector<double> numeric_column(const std::string& name) const {
        const std::size_t c = column_index(name);
        std::vector<double> out;
        out.reserve(rows.size());
        for (std::size_t r = 0; r < rows.size(); ++r) out.push_back(number_at(r, c));
        return out;
    }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    cells.push_back(cur);
    return cells;
}

} // namespace detail

inline CsvTable read_csv(std::istream& in, const std::string& source) {
    CsvTable table;
    table.source = source;
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto cells = detail::split_csv_line(line);
        if (!have_header) {
            table.header = std::move(cells);
            have_header = true;
            continue;
        }
        if (cells.size() != table.header.size())
            throw CsvError(source + ":" + std::to_string(lineno) + ": expected " +
                           std::to_string(table.header.size()) + " cells, found " +
                           std::to_string(cells.size()));
        table.rows.push_back(std::move(cells));
        table.row_lines.push_back(lineno);
    }
    if (!have_header)
        throw CsvError(source + ": empty file, header row required");
    return table;
}

inline CsvTable read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CsvError(path + ": cannot open for reading");
    return read_csv(in, path);
}

inline void write_csv(std::ostream& out, const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
    for (std::size_t i = 0; i < header.size(); ++i)
        out << (i ? "," : "") << header[i];
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << row[i];
        out << '\n';
    }
}

inline void write_csv_file(const std::string& path, const std::vector<std::string>& header,
                           const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path);
    if (!out) throw CsvError(path + ": cannot open for writing");
    write_csv(out, header, rows);
    if (!out) throw CsvError(path + ": write failed");
}

/// Convenience for purely numeric tables.
inline void write_csv_file(const std::string& path, const std::vector<std::string>& header,
                           const std::vector<std::vector<double>>& rows) {
    std::vector<std::vector<std::string>> cells;
    cells.reserve(rows.size());
    for (const auto& row : rows) {
        std::vector<std::string> r;
        r.reserve(row.size());
        for (double v : row) r.push_back(format_double(v));
        cells.push_back(std::move(r));
    }
    write_csv_file(path, header, cells);
}

} // namespace qbat
