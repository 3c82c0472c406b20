#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "tacpose/mesh.hpp"

namespace tacpose {

/// ASCII OBJ: `v` and `f` records; polygons are fan-triangulated; negative
/// (relative) indices and `v/vt/vn` forms are accepted.
TriMesh load_obj(const std::filesystem::path& path, double scale = 1.0);

/// Binary little-endian PLY with float/double vertex x, y, z and a face
/// `vertex_indices` (or `vertex_index`) list property.
TriMesh load_ply(const std::filesystem::path& path, double scale = 1.0);

/// Dispatches on extension (.obj / .ply).
TriMesh load_mesh(const std::filesystem::path& path, double scale = 1.0);

/// Resolves "primitive:<name>" (or a bare suite name) or a file path.
TriMesh resolve_mesh(const std::string& spec, double scale = 1.0);

void write_obj(const std::filesystem::path& path, const TriMesh& mesh);

/// Binary little-endian PLY point cloud (x, y, z as float).
void write_ply_points(const std::filesystem::path& path, std::span<const Vec3> points);

}  // namespace tacpose
