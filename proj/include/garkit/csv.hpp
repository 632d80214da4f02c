#pragma once

#include <charconv>
#include <cstddef>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "garkit/errors.hpp"

namespace garkit {

// Numeric CSV table: comma-separated doubles, LF or CRLF line endings, no
// quoting.  A non-numeric first row is treated as a header.  Ragged rows are
// rejected with their 1-based row number.
struct csv_table {
    std::optional<std::vector<std::string>> header;
    std::vector<std::vector<double>> columns;

    std::size_t rows() const noexcept { return columns.empty() ? 0 : columns[0].size(); }
};

namespace csvdetail {

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t");
    if (b == std::string::npos) {
        return {};
    }
    std::size_t e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

inline bool parse_field(const std::string& raw, double& out) {
    std::string t = trim(raw);
    if (t.empty()) {
        return false;
    }
    auto res = std::from_chars(t.data(), t.data() + t.size(), out);
    return res.ec == std::errc{} && res.ptr == t.data() + t.size();
}

inline std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t pos = 0;
    for (;;) {
        std::size_t comma = line.find(',', pos);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(pos));
            return fields;
        }
        fields.push_back(line.substr(pos, comma - pos));
        pos = comma + 1;
    }
}

} // namespace csvdetail

inline csv_table read_numeric_csv(std::istream& in, const std::string& source = "<stream>") {
    csv_table table;
    std::string line;
    std::size_t row_number = 0;
    std::size_t width = 0;
    bool saw_data = false;
    while (std::getline(in, line)) {
        ++row_number;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            // A blank final line is a trailing newline; a blank interior
            // line is a ragged row.
            if (in.peek() == std::char_traits<char>::eof()) {
                break;
            }
            throw config_error(source + ": row " + std::to_string(row_number) + " is empty");
        }
        std::vector<std::string> fields = csvdetail::split_row(line);
        std::vector<double> values(fields.size());
        bool all_numeric = true;
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (!csvdetail::parse_field(fields[i], values[i])) {
                all_numeric = false;
                break;
            }
        }
        if (!saw_data && !all_numeric && !table.header) {
            table.header = std::vector<std::string>();
            for (const auto& f : fields) {
                table.header->push_back(csvdetail::trim(f));
            }
            width = fields.size();
            table.columns.assign(width, {});
            continue;
        }
        if (!all_numeric) {
            throw config_error(source + ": row " + std::to_string(row_number) +
                               " has a non-numeric field");
        }
        if (!saw_data && table.columns.empty()) {
            width = fields.size();
            table.columns.assign(width, {});
        }
        if (fields.size() != width) {
            throw config_error(source + ": row " + std::to_string(row_number) + " has " +
                               std::to_string(fields.size()) + " fields, expected " +
                               std::to_string(width));
        }
        for (std::size_t i = 0; i < width; ++i) {
            table.columns[i].push_back(values[i]);
        }
        saw_data = true;
    }
    if (table.rows() == 0) {
        throw config_error(source + ": no data rows");
    }
    return table;
}

inline csv_table read_numeric_csv_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw config_error("cannot open input file '" + path + "'");
    }
    return read_numeric_csv(in, path);
}

} // namespace garkit
