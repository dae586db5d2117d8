#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "paristf/types.hpp"

namespace paristf {

// Shortest decimal representation that round-trips the double exactly.
inline std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// Line-buffered CSV writer. Numeric cells use shortest round-trip formatting
// so re-running with the same seed yields byte-identical files.
class CsvWriter {
public:
    explicit CsvWriter(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) throw ConfigError("cannot open for writing: " + path);
    }

    void header(const std::vector<std::string>& names) { row_strings(names); }

    CsvWriter& cell(double v) {
        sep();
        line_ += format_double(v);
        return *this;
    }
    CsvWriter& cell(long v) {
        sep();
        line_ += std::to_string(v);
        return *this;
    }
    CsvWriter& cell(int v) { return cell(static_cast<long>(v)); }
    CsvWriter& cell(const std::string& v) {
        sep();
        line_ += v;
        return *this;
    }

    void end_row() {
        line_ += '\n';
        out_ << line_;
        line_.clear();
        first_ = true;
    }

    void row_strings(const std::vector<std::string>& cells) {
        for (const auto& c : cells) cell(c);
        end_row();
    }

    void flush() { out_.flush(); }

private:
    void sep() {
        if (!first_) line_ += ',';
        first_ = false;
    }

    std::ofstream out_;
    std::string line_;
    bool first_ = true;
};

// Parses a numeric CSV produced by CsvWriter; the header row is returned
// separately. Tolerates non-numeric cells by storing NaN.
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    int col(const std::string& name) const {
        for (size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return static_cast<int>(i);
        throw ConfigError("csv column not found: " + name);
    }
};

CsvTable read_csv(const std::string& path);

}  // namespace paristf
