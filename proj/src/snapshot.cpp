#include "calabi/snapshot.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

namespace calabi {

namespace {

static_assert(sizeof(double) == 8);

std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    return __builtin_bswap64(v);
  }
}

}  // namespace

std::string snapshot_header(const PeriodicGrid& grid, const std::optional<std::string>& kind) {
  nlohmann::ordered_json header;
  header["dim"] = grid.dim();
  header["N"] = grid.points_per_axis();
  if (grid.half_length() != 1.0) header["half_length"] = grid.half_length();
  if (kind) header["kind"] = *kind;
  return header.dump();
}

void write_snapshot(const std::filesystem::path& path, const ScalarField& field,
                    const std::optional<std::string>& kind) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("write_snapshot: cannot open " + path.string());
  const std::string header = snapshot_header(field.grid(), kind) + "\n";
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  std::vector<std::uint64_t> raw(field.size());
  for (std::size_t i = 0; i < field.size(); ++i) {
    raw[i] = to_little_endian(std::bit_cast<std::uint64_t>(field[i]));
  }
  out.write(reinterpret_cast<const char*>(raw.data()),
            static_cast<std::streamsize>(raw.size() * sizeof(std::uint64_t)));
  if (!out) throw std::runtime_error("write_snapshot: write failed for " + path.string());
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_snapshot: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("read_snapshot: missing header in " + path.string());

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("read_snapshot: malformed header in " + path.string() + ": " + e.what());
  }
  if (!header.contains("dim") || !header.contains("N")) {
    throw std::runtime_error("read_snapshot: header needs \"dim\" and \"N\"");
  }
  const double half_length = header.value("half_length", 1.0);
  PeriodicGrid grid(header["dim"].get<int>(), header["N"].get<int>(), half_length);

  std::vector<std::uint64_t> raw(grid.size());
  in.read(reinterpret_cast<char*>(raw.data()),
          static_cast<std::streamsize>(raw.size() * sizeof(std::uint64_t)));
  if (in.gcount() != static_cast<std::streamsize>(raw.size() * sizeof(std::uint64_t))) {
    throw std::runtime_error("read_snapshot: truncated payload in " + path.string());
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw std::runtime_error("read_snapshot: trailing bytes in " + path.string());
  }
  std::vector<double> values(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    values[i] = std::bit_cast<double>(to_little_endian(raw[i]));
  }

  Snapshot snap{ScalarField(grid, std::move(values)), std::nullopt};
  if (header.contains("kind")) snap.kind = header["kind"].get<std::string>();
  return snap;
}

}  // namespace calabi
