#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sapit {

// Minimal deterministic CSV emitter: '.' decimal separator, %.12g numbers,
// UTF-8, comma separated, header row mandatory.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header);

    void add_row(const std::vector<std::string>& cells);
    void write(const std::string& path) const;
    std::string str() const;

    static std::string num(double v);
    static std::string num(std::int64_t v);
    static std::string num(std::uint64_t v);

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

// FNV-1a over the normalized config text; stable across runs and platforms.
std::uint64_t fnv1a(const std::string& text);

}  // namespace sapit
