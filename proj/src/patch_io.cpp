#include "tacpose/patch_io.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace tacpose {

namespace {

constexpr std::uint16_t kTpatVersion = 1;

void put_u16(char* dst, std::uint16_t v) { std::memcpy(dst, &v, 2); }
std::uint16_t get_u16(const char* src) {
  std::uint16_t v;
  std::memcpy(&v, src, 2);
  return v;
}

}  // namespace

void write_tpat(const std::filesystem::path& path, const TactilePatch& patch) {
  if (!patch.is_valid()) throw std::invalid_argument("invalid patch");
  if (patch.pixels_u > 0xFFFF || patch.pixels_v > 0xFFFF) throw std::invalid_argument("patch too large for TPAT");
  std::array<char, 16> header{};
  std::memcpy(header.data(), "TPAT", 4);
  put_u16(header.data() + 4, kTpatVersion);
  put_u16(header.data() + 6, static_cast<std::uint16_t>(patch.pixels_u));
  put_u16(header.data() + 8, static_cast<std::uint16_t>(patch.pixels_v));
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write: " + path.string());
  out.write(header.data(), header.size());
  out.write(reinterpret_cast<const char*>(patch.depth.data()),
            static_cast<std::streamsize>(patch.depth.size() * sizeof(float)));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

TactilePatch read_tpat(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open patch: " + path.string());
  std::array<char, 16> header{};
  in.read(header.data(), header.size());
  if (!in || std::memcmp(header.data(), "TPAT", 4) != 0) throw std::runtime_error("not a TPAT file: " + path.string());
  if (get_u16(header.data() + 4) != kTpatVersion) throw std::runtime_error("unsupported TPAT version");
  TactilePatch patch(get_u16(header.data() + 6), get_u16(header.data() + 8));
  in.read(reinterpret_cast<char*>(patch.depth.data()), static_cast<std::streamsize>(patch.depth.size() * sizeof(float)));
  if (!in) throw std::runtime_error("truncated TPAT file: " + path.string());
  if (!patch.is_valid()) throw std::runtime_error("TPAT depths outside [0, 1]: " + path.string());
  return patch;
}

}  // namespace tacpose
