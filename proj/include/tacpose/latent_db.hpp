#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tacpose/encoder.hpp"

namespace tacpose {

struct DatabaseEntry {
  std::uint32_t sample_id = 0;
  Vec3 position = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  LatentFeature feature;
};

/// LDB1: "LDB1", u32 version (1), u32 D, u32 M, char[32] encoder id (zero
/// padded), f32[D] h_nc; then M records of u32 sample_id, f64[3] position,
/// f64[3] normal, f32[D] vector, f32 contact_score. Little-endian.
struct LatentDatabase {
  std::string encoder_id;
  std::size_t dim = 0;
  std::vector<float> h_nc;
  std::vector<DatabaseEntry> entries;

  std::size_t size() const { return entries.size(); }
  void check_encoder(const Encoder& encoder) const;

  void save(const std::filesystem::path& path) const;
  static LatentDatabase load(const std::filesystem::path& path);
};

/// Quantile of feature distances between the query and every entry.
double auto_delta_h(const LatentDatabase& db, const LatentFeature& query, double quantile = 0.10,
                    FeatureMetric metric = FeatureMetric::projection);

}  // namespace tacpose
