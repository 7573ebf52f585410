#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "lfpp/grid.hpp"

namespace lfpp {

// Binary field file, little-endian:
//   "LFPPFLD1" | version u32 | n_cells u32 | spacing f64 | origin 2 x f64 |
//   padding u32 | seed u64 | n_cells^2 x f64 (row-major, rows = y)
// Mollified fields append the mollification scale as one trailing f64.
inline constexpr char kFieldMagic[8] = {'L', 'F', 'P', 'P', 'F', 'L', 'D', '1'};
inline constexpr std::uint32_t kFieldFormatVersion = 1;

void write_field(std::ostream& out, const FieldGrid& field,
                 std::optional<double> epsilon = std::nullopt);
void write_field(const std::filesystem::path& path, const FieldGrid& field,
                 std::optional<double> epsilon = std::nullopt);

struct LoadedField {
  FieldGrid field;
  std::optional<double> epsilon;
};

LoadedField read_field(std::istream& in);
LoadedField read_field(const std::filesystem::path& path);

}  // namespace lfpp
