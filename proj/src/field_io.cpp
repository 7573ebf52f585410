#include "lfpp/field_io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace lfpp {
namespace {

template <typename T>
void put(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T)))
    throw std::runtime_error("field file truncated");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

void write_field(std::ostream& out, const FieldGrid& field, std::optional<double> epsilon) {
  const GridSpec& s = field.spec;
  out.write(kFieldMagic, sizeof(kFieldMagic));
  put<std::uint32_t>(out, kFieldFormatVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.n_cells));
  put<double>(out, s.spacing);
  put<double>(out, s.origin.x());
  put<double>(out, s.origin.y());
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.padding_cells));
  put<std::uint64_t>(out, field.seed);
  for (int iy = 0; iy < s.n_cells; ++iy)
    for (int ix = 0; ix < s.n_cells; ++ix) put<double>(out, field.values(iy, ix));
  if (epsilon) put<double>(out, *epsilon);
  if (!out) throw std::runtime_error("failed writing field");
}

void write_field(const std::filesystem::path& path, const FieldGrid& field,
                 std::optional<double> epsilon) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_field(out, field, epsilon);
}

LoadedField read_field(std::istream& in) {
  char magic[8];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kFieldMagic, sizeof(magic)) != 0)
    throw std::runtime_error("not an LFPPFLD1 field file");
  const auto version = get<std::uint32_t>(in);
  if (version != kFieldFormatVersion)
    throw std::runtime_error("unsupported field file version " + std::to_string(version));
  LoadedField lf;
  GridSpec& s = lf.field.spec;
  s.n_cells = static_cast<int>(get<std::uint32_t>(in));
  s.spacing = get<double>(in);
  const double ox = get<double>(in);
  const double oy = get<double>(in);
  s.origin = Point(ox, oy);
  s.padding_cells = static_cast<int>(get<std::uint32_t>(in));
  lf.field.seed = get<std::uint64_t>(in);
  s.validate();
  lf.field.values.resize(s.n_cells, s.n_cells);
  for (int iy = 0; iy < s.n_cells; ++iy)
    for (int ix = 0; ix < s.n_cells; ++ix) lf.field.values(iy, ix) = get<double>(in);
  if (in.peek() != std::char_traits<char>::eof()) lf.epsilon = get<double>(in);
  return lf;
}

LoadedField read_field(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_field(in);
}

}  // namespace lfpp
