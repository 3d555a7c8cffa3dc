#include "breather/lab/csv.hpp"

#include <cmath>
#include <cstdio>

#include "breather/errors.hpp"

namespace breather::lab {

std::string format_cell(const Cell& c) {
    if (std::holds_alternative<std::monostate>(c)) return {};
    if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
    const double v = std::get<double>(c);
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, std::vector<std::string> columns)
    : out_(path, std::ios::binary | std::ios::trunc), width_(columns.size()) {
    if (!out_) throw Error("cannot write " + path.string());
    for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
    out_ << '\n';
}

void CsvWriter::row(std::initializer_list<Cell> cells) { row(std::vector<Cell>(cells)); }

void CsvWriter::row(const std::vector<Cell>& cells) {
    if (cells.size() != width_) throw InvalidInput("CsvWriter: row width does not match the header");
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << format_cell(cells[i]);
    out_ << '\n';
}

}  // namespace breather::lab
