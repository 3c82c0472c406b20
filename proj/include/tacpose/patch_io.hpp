#pragma once

#include <filesystem>

#include "tacpose/render.hpp"

namespace tacpose {

/// TPAT: "TPAT", u16 version (1), u16 pixels_u, u16 pixels_v, 6 reserved zero
/// bytes, then pixels_v * pixels_u little-endian f32 depths, row-major.
void write_tpat(const std::filesystem::path& path, const TactilePatch& patch);
TactilePatch read_tpat(const std::filesystem::path& path);

}  // namespace tacpose
