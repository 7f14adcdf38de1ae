#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "calabi/grid.hpp"

namespace calabi {

/// A field snapshot: one header line `{"dim":n,"N":N[,"kind":...]}` followed by
/// N^n little-endian float64 values in row-major order. Grids with a half
/// length other than 1 add a "half_length" key.
struct Snapshot {
  ScalarField field;
  std::optional<std::string> kind;  // "symplectic", "kahler", or "weak"
};

std::string snapshot_header(const PeriodicGrid& grid, const std::optional<std::string>& kind);

void write_snapshot(const std::filesystem::path& path, const ScalarField& field,
                    const std::optional<std::string>& kind = std::nullopt);

/// Throws std::runtime_error on I/O failure or a malformed header/payload.
Snapshot read_snapshot(const std::filesystem::path& path);

}  // namespace calabi
