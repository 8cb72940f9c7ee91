#pragma once

#include "signorini/grid.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace signorini {

/// SIGF binary dump: "SIGF", u32 version (1), u32 n, n x u32 axis sizes,
/// u32 slice count, then little-endian f64 values row-major, time-slowest.
/// A sidecar `<path>.json` repeats the GridSpec.
void write_sigf(const std::filesystem::path& path, const ScalarField& field);
ScalarField read_sigf(const std::filesystem::path& path);

struct SigfHeader {
  std::uint32_t version = 1;
  std::uint32_t n = 0;
  std::vector<std::uint32_t> sizes;
  std::uint32_t slices = 0;
};
SigfHeader read_sigf_header(const std::filesystem::path& path);

std::string grid_spec_json(const GridSpec& spec);
GridSpec grid_spec_from_json(const std::string& text);

/// FNV-1a 64-bit digest of a file's bytes, as 16 hex digits.
std::string file_checksum(const std::filesystem::path& path);

}  // namespace signorini
