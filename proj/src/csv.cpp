#include "cobra/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <utility>
#include <vector>

namespace cobra {

namespace {

std::string format_cell(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(std::move(cell));
            cell.clear();
        } else if (c != '\r') {
            cell += c;
        }
    }
    cells.push_back(std::move(cell));
    return cells;
}

double parse_cell(const std::string& cell, std::size_t line_no, std::size_t col_no) {
    double value = 0.0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
        fail(ErrorCode::parse, "cannot parse '" + cell + "' as a finite number at line " +
                                   std::to_string(line_no) + " column " + std::to_string(col_no));
    }
    return value;
}

}  // namespace

void save_csv(const Dataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorCode::io, "cannot open '" + path + "' for writing");

    for (std::size_t j = 0; j < data.cols(); ++j) {
        if (j > 0) out << ',';
        out << 'x' << (j + 1);
    }
    if (data.has_targets()) out << ",y";
    out << '\n';

    for (std::size_t i = 0; i < data.rows(); ++i) {
        for (std::size_t j = 0; j < data.cols(); ++j) {
            if (j > 0) out << ',';
            out << format_cell(data.feature(i, j));
        }
        if (data.has_targets()) out << ',' << format_cell(data.target(i));
        out << '\n';
    }
    if (!out) fail(ErrorCode::io, "failed writing '" + path + "'");
}

Dataset load_csv(const std::string& path, const std::string& target_column, bool has_header) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::io, "cannot open '" + path + "'");

    std::vector<std::string> header;
    std::string line;
    std::size_t line_no = 0;

    if (has_header) {
        if (!std::getline(in, line)) fail(ErrorCode::parse, "'" + path + "' is empty");
        ++line_no;
        header = split_line(line);
    }

    std::optional<std::size_t> target_index;
    const bool want_target = !target_column.empty();
    if (want_target) {
        if (has_header) {
            for (std::size_t j = 0; j < header.size(); ++j) {
                if (header[j] == target_column) {
                    target_index = j;
                    break;
                }
            }
        }
        if (!target_index) {
            // fall back to a numeric column index
            std::size_t idx = 0;
            const auto [ptr, ec] = std::from_chars(
                target_column.data(), target_column.data() + target_column.size(), idx);
            if (ec == std::errc() && ptr == target_column.data() + target_column.size()) {
                target_index = idx;
            } else {
                fail(ErrorCode::config, "target column '" + target_column + "' not found in '" +
                                            path + "'");
            }
        }
    }

    std::vector<double> features;
    std::vector<double> targets;
    std::size_t columns = 0;
    std::size_t rows = 0;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cells = split_line(line);
        if (columns == 0) {
            columns = cells.size();
            if (want_target && *target_index >= columns) {
                fail(ErrorCode::config, "target column index " + std::to_string(*target_index) +
                                            " out of range for " + std::to_string(columns) +
                                            " columns");
            }
            if (want_target && columns < 2) {
                fail(ErrorCode::parse, "need at least one feature column besides the target");
            }
        } else if (cells.size() != columns) {
            fail(ErrorCode::parse, "line " + std::to_string(line_no) + " has " +
                                       std::to_string(cells.size()) + " cells, expected " +
                                       std::to_string(columns));
        }
        for (std::size_t j = 0; j < columns; ++j) {
            const double v = parse_cell(cells[j], line_no, j + 1);
            if (want_target && j == *target_index) targets.push_back(v);
            else features.push_back(v);
        }
        ++rows;
    }
    if (rows == 0) fail(ErrorCode::parse, "'" + path + "' has no data rows");

    const std::size_t d = want_target ? columns - 1 : columns;
    std::optional<std::vector<double>> target_opt;
    if (want_target) target_opt = std::move(targets);
    return Dataset(rows, d, std::move(features), std::move(target_opt));
}

}  // namespace cobra
