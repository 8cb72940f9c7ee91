#include "signorini/field_io.hpp"

#include "json.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace signorini {

namespace {

constexpr std::array<char, 4> kMagic{'S', 'I', 'G', 'F'};

template <typename T>
void put(std::ostream& out, T value) {
  std::array<char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.write(bytes.data(), bytes.size());
}

template <typename T>
T get(std::istream& in) {
  std::array<char, sizeof(T)> bytes;
  if (!in.read(bytes.data(), bytes.size())) throw std::runtime_error("truncated SIGF file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

std::vector<std::uint32_t> axis_sizes(const GridSpec& spec) {
  std::vector<std::uint32_t> sizes(spec.n, static_cast<std::uint32_t>(spec.m));
  sizes.back() = static_cast<std::uint32_t>(spec.half_nodes());
  return sizes;
}

SigfHeader parse_header(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), 4) || magic != kMagic) throw std::runtime_error("not a SIGF file");
  SigfHeader h;
  h.version = get<std::uint32_t>(in);
  if (h.version != 1) throw std::runtime_error("unsupported SIGF version");
  h.n = get<std::uint32_t>(in);
  if (h.n < 1 || h.n > 3) throw std::runtime_error("bad SIGF dimension");
  for (std::uint32_t a = 0; a < h.n; ++a) h.sizes.push_back(get<std::uint32_t>(in));
  h.slices = get<std::uint32_t>(in);
  return h;
}

}  // namespace

std::string grid_spec_json(const GridSpec& spec) {
  nlohmann::json j{{"n", spec.n}, {"m", spec.m}, {"dt", spec.dt}, {"t0", spec.t0}, {"t1", spec.t1}};
  return j.dump(2);
}

GridSpec grid_spec_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  GridSpec spec;
  spec.n = j.at("n").get<int>();
  spec.m = j.at("m").get<int>();
  spec.dt = j.at("dt").get<double>();
  spec.t0 = j.at("t0").get<double>();
  spec.t1 = j.at("t1").get<double>();
  return spec;
}

void write_sigf(const std::filesystem::path& path, const ScalarField& field) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(out, 1);
  const auto sizes = axis_sizes(field.spec());
  put<std::uint32_t>(out, static_cast<std::uint32_t>(sizes.size()));
  for (const auto s : sizes) put<std::uint32_t>(out, s);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(field.slices()));
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(field.data().data()),
              static_cast<std::streamsize>(field.data().size() * sizeof(double)));
  } else {
    for (Eigen::Index i = 0; i < field.data().size(); ++i) put<double>(out, field.data()[i]);
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());

  std::ofstream side(path.string() + ".json");
  side << grid_spec_json(field.spec()) << "\n";
}

SigfHeader read_sigf_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return parse_header(in);
}

ScalarField read_sigf(const std::filesystem::path& path) {
  std::ifstream side(path.string() + ".json");
  if (!side) throw std::runtime_error("missing sidecar header for " + path.string());
  std::stringstream text;
  text << side.rdbuf();
  const GridSpec spec = grid_spec_from_json(text.str());

  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const SigfHeader h = parse_header(in);
  if (h.sizes != axis_sizes(spec) || static_cast<int>(h.slices) != spec.slices()) {
    throw std::runtime_error("SIGF header disagrees with sidecar in " + path.string());
  }
  ScalarField field(spec);
  if constexpr (std::endian::native == std::endian::little) {
    const auto bytes = static_cast<std::streamsize>(field.data().size() * sizeof(double));
    if (!in.read(reinterpret_cast<char*>(field.data().data()), bytes)) {
      throw std::runtime_error("truncated SIGF file");
    }
  } else {
    for (Eigen::Index i = 0; i < field.data().size(); ++i) field.data()[i] = get<double>(in);
  }
  return field;
}

std::string file_checksum(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::uint64_t hash = 1469598103934665603ULL;
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      hash ^= static_cast<unsigned char>(buf[i]);
      hash *= 1099511628211ULL;
    }
  }
  std::ostringstream hex;
  hex << std::hex << std::setw(16) << std::setfill('0') << hash;
  return hex.str();
}

}  // namespace signorini
