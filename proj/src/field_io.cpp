#include "breather/field_io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

#include "breather/errors.hpp"

namespace breather {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <class T>
void put(std::ostream& os, T v) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get(std::istream& is) {
    unsigned char bytes[sizeof(T)];
    if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw InvalidInput("read_field: truncated stream");
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    T v;
    std::memcpy(&v, bytes, sizeof(T));
    return v;
}

}  // namespace

void write_field(std::ostream& os, const ComplexField& field) {
    os.write("BRTH", 4);
    put<std::uint32_t>(os, kFieldFormatVersion);
    put<std::uint8_t>(os, static_cast<std::uint8_t>(field.grid.rank()));
    for (const auto& a : field.grid.axes()) {
        put<std::uint8_t>(os, static_cast<std::uint8_t>(a.label));
        put<std::uint64_t>(os, a.count);
        put<double>(os, a.origin);
        put<double>(os, a.spacing);
    }
    for (const auto& v : field.values) {
        put<double>(os, v.real());
        put<double>(os, v.imag());
    }
    if (!os) throw Error("write_field: stream error");
}

void write_field(const std::filesystem::path& path, const ComplexField& field) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("write_field: cannot open " + path.string());
    write_field(os, field);
}

ComplexField read_field(std::istream& is) {
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, "BRTH", 4) != 0) throw InvalidInput("read_field: bad magic");
    const auto version = get<std::uint32_t>(is);
    if (version != kFieldFormatVersion) throw InvalidInput("read_field: unsupported version");
    const auto rank = get<std::uint8_t>(is);
    std::vector<AxisSpec> axes;
    for (std::uint8_t i = 0; i < rank; ++i) {
        const auto label = static_cast<char>(get<std::uint8_t>(is));
        const auto count = get<std::uint64_t>(is);
        const auto origin = get<double>(is);
        const auto spacing = get<double>(is);
        axes.push_back({axis_from_label(label), static_cast<std::size_t>(count), origin, spacing});
    }
    ComplexField f{Grid(std::move(axes))};
    for (auto& v : f.values) {
        const double re = get<double>(is);
        const double im = get<double>(is);
        v = {re, im};
    }
    return f;
}

ComplexField read_field(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw InvalidInput("read_field: cannot open " + path.string());
    return read_field(is);
}

}  // namespace breather
