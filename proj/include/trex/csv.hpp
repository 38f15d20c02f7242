#pragma once

#include <Eigen/Dense>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "trex/common.hpp"

namespace trex {

/// Shortest decimal string that round-trips the double (locale-independent).
inline std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view token, const std::string& file, long line, long col) {
    double value = 0.0;
    const char* begin = token.data();
    const char* end = begin + token.size();
    const auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc() || res.ptr != end)
        throw DataError(file + ": non-numeric cell '" + std::string(token) + "' at line " +
                        std::to_string(line) + ", column " + std::to_string(col));
    return value;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    return s;
}

}  // namespace detail

/// Reads a rectangular numeric CSV. Errors carry the file name and the 1-based
/// line/column of the offending cell.
inline Eigen::MatrixXd read_numeric_csv(const std::string& path, bool has_header) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open file: " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (has_header && line_no == 1) continue;
        const std::string_view trimmed = detail::trim(line);
        if (trimmed.empty()) continue;
        std::vector<double> row;
        std::size_t start = 0;
        long col = 0;
        const std::string cell_source(trimmed);
        while (true) {
            ++col;
            const std::size_t comma = cell_source.find(',', start);
            const std::string_view token = detail::trim(
                std::string_view(cell_source).substr(start, comma == std::string::npos
                                                                ? std::string::npos
                                                                : comma - start));
            row.push_back(parse_double(token, path, line_no, col));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw DataError(path + ": line " + std::to_string(line_no) + " has " +
                            std::to_string(row.size()) + " cells, expected " +
                            std::to_string(rows.front().size()));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DataError(path + ": no data rows");
    Eigen::MatrixXd M(static_cast<long>(rows.size()), static_cast<long>(rows.front().size()));
    for (long i = 0; i < M.rows(); ++i)
        for (long j = 0; j < M.cols(); ++j) M(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return M;
}

inline void write_matrix_csv(const Eigen::MatrixXd& M, std::ostream& out) {
    for (long i = 0; i < M.rows(); ++i) {
        for (long j = 0; j < M.cols(); ++j) {
            if (j) out << ',';
            out << format_double(M(i, j));
        }
        out << '\n';
    }
}

}  // namespace trex
