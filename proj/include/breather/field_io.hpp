#pragma once

#include <filesystem>
#include <iosfwd>

#include "grid.hpp"

namespace breather {

/// Binary field dump, all little-endian IEEE 754:
///
///   "BRTH" | u32 version | u8 axis count
///   per axis: u8 label ('t','x','y','z') | u64 count | f64 origin | f64 spacing
///   row-major f64 pairs (re, im)
///
/// Coordinates of unsampled axes are not stored and read back as zero.
inline constexpr std::uint32_t kFieldFormatVersion = 1;

void write_field(std::ostream& os, const ComplexField& field);
void write_field(const std::filesystem::path& path, const ComplexField& field);

/// Throws InvalidInput on a bad magic, unknown version, or truncated stream.
ComplexField read_field(std::istream& is);
ComplexField read_field(const std::filesystem::path& path);

}  // namespace breather
