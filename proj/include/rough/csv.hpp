#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "rough/errors.hpp"

namespace rough {

// Shortest round-trip decimal formatting, locale-independent.
inline std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

using CsvCell = std::variant<std::string, double, std::int64_t>;

// Long-format table writer: header row, comma separated, '.' decimal point.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

    void add_row(std::vector<CsvCell> row) {
        if (row.size() != header_.size())
            throw ParameterError("CsvWriter: row width does not match header");
        rows_.push_back(std::move(row));
    }

    void write(std::ostream& os) const {
        for (std::size_t i = 0; i < header_.size(); ++i)
            os << (i ? "," : "") << header_[i];
        os << '\n';
        for (const auto& row : rows_) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                if (i) os << ',';
                if (const auto* s = std::get_if<std::string>(&row[i]))
                    os << *s;
                else if (const auto* d = std::get_if<double>(&row[i]))
                    os << format_double(*d);
                else
                    os << std::get<std::int64_t>(row[i]);
            }
            os << '\n';
        }
    }

    void write_file(const std::string& path) const {
        std::ofstream os(path, std::ios::binary);
        if (!os) throw std::runtime_error("cannot open for writing: " + path);
        write(os);
    }

    std::size_t row_count() const { return rows_.size(); }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<CsvCell>> rows_;
};

} // namespace rough
