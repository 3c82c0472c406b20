#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "tacpose/render.hpp"

namespace tacpose {

/// Encoded patch. contact_score = vector . h_nc, rounded to float so scores
/// read back from a database compare exactly with freshly encoded ones.
struct LatentFeature {
  std::vector<float> vector;
  double contact_score = 0.0;
};

class Encoder {
 public:
  virtual ~Encoder() = default;
  virtual std::string id() const = 0;
  virtual std::size_t dim() const = 0;
  /// Encoding of the all-zero patch.
  virtual const std::vector<float>& h_nc() const = 0;
  virtual LatentFeature encode(const TactilePatch& patch) const = 0;
};

double contact_score(std::span<const float> vector, std::span<const float> h_nc);

/// Fixed 128-dimensional descriptor, L2-normalized:
///   [0, 64)    contact-mask occupancy on 8 rings x 8 sectors about the image
///              center, sector angle taken modulo 180 degrees, per total pixels
///   [64, 96)   32-bin histogram of all pixel depths, per total pixels
///   [96, 112)  contact fraction, saturated fraction, centroid (x, y), second
///              central moments (xx, xy, yy), eccentricity, mean / max / std of
///              contact depth, then zeros
///   [112, 128) zeros
/// The all-zero patch lands exactly on e_nc = unit vector 64, so the contact
/// score is the normalized share of the first depth-histogram bin.
class AnalyticEncoder final : public Encoder {
 public:
  static constexpr std::size_t kDim = 128;
  static constexpr std::size_t kNoContactSlot = 64;

  AnalyticEncoder();
  std::string id() const override { return "analytic-v1"; }
  std::size_t dim() const override { return kDim; }
  const std::vector<float>& h_nc() const override { return h_nc_; }
  LatentFeature encode(const TactilePatch& patch) const override;
  /// Descriptor before normalization.
  std::vector<double> raw_descriptor(const TactilePatch& patch) const;

 private:
  std::vector<float> h_nc_;
};

/// How two features are compared. `projection` is |score difference|; `cosine`
/// is 1 - cos(angle) between the full vectors.
enum class FeatureMetric { projection, cosine };

double feature_distance(const LatentFeature& query, const LatentFeature& candidate,
                        FeatureMetric metric = FeatureMetric::projection);

/// |candidate.score - query.score| < delta_h. Throws "encoder mismatch" when the
/// feature dimensions differ.
bool compatible(const LatentFeature& query, const LatentFeature& candidate, double delta_h);

/// Nearest-rank quantile: the ceil(q n)-th smallest of the given distances.
double distance_quantile(std::vector<double> distances, double quantile);

}  // namespace tacpose
