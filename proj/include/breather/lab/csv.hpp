#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <variant>
#include <vector>

namespace breather::lab {

/// Empty cell, integer or real. Reals are written in scientific notation
/// with 17 significant digits so files round-trip exactly.
using Cell = std::variant<std::monostate, std::int64_t, double>;

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, std::vector<std::string> columns);
    void row(std::initializer_list<Cell> cells);
    void row(const std::vector<Cell>& cells);

private:
    std::ofstream out_;
    std::size_t width_;
};

std::string format_cell(const Cell& c);

}  // namespace breather::lab
