#include "sapit/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sapit {

CsvWriter::CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvWriter::add_row(const std::vector<std::string>& cells) {
    if (cells.size() != header_.size())
        throw std::invalid_argument("csv: row width does not match header");
    rows_.push_back(cells);
}

std::string CsvWriter::str() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < header_.size(); ++i)
        os << header_[i] << (i + 1 < header_.size() ? "," : "\n");
    for (const auto& row : rows_)
        for (std::size_t i = 0; i < row.size(); ++i)
            os << row[i] << (i + 1 < row.size() ? "," : "\n");
    return os.str();
}

void CsvWriter::write(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("csv: cannot open " + path);
    f << str();
}

std::string CsvWriter::num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string CsvWriter::num(std::int64_t v) { return std::to_string(v); }
std::string CsvWriter::num(std::uint64_t v) { return std::to_string(v); }

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace sapit
