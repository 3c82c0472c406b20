#include "tacpose/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tacpose {

double contact_score(std::span<const float> vector, std::span<const float> h_nc) {
  if (vector.size() != h_nc.size()) throw std::runtime_error("encoder mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < vector.size(); ++i) s += static_cast<double>(vector[i]) * h_nc[i];
  return static_cast<float>(s);
}

AnalyticEncoder::AnalyticEncoder() : h_nc_(kDim, 0.0f) { h_nc_[kNoContactSlot] = 1.0f; }

std::vector<double> AnalyticEncoder::raw_descriptor(const TactilePatch& patch) const {
  if (!patch.is_valid()) throw std::invalid_argument("invalid patch");
  std::vector<double> d(kDim, 0.0);
  const int nu = patch.pixels_u, nv = patch.pixels_v;
  const double total = static_cast<double>(patch.size());
  const double hx = 0.5 * nu, hy = 0.5 * nv;
  const double r_max = std::hypot(hx, hy);
  constexpr int kRings = 8, kSectors = 8;

  double count = 0.0, sx = 0.0, sy = 0.0, sd = 0.0, sdd = 0.0, dmax = 0.0;
  for (int v = 0; v < nv; ++v) {
    for (int u = 0; u < nu; ++u) {
      const double depth = patch.at(v, u);
      const int bin = std::min(31, static_cast<int>(depth * 32.0));
      d[64 + bin] += 1.0;
      if (depth <= kContactThreshold) continue;
      double x = u + 0.5 - hx, y = v + 0.5 - hy;
      const double xn = x / hx, yn = y / hy;
      count += 1.0;
      sx += xn;
      sy += yn;
      sd += depth;
      sdd += depth * depth;
      dmax = std::max(dmax, depth);
      // Canonical half-plane representative keeps the sector exactly symmetric.
      if (y < 0.0 || (y == 0.0 && x < 0.0)) {
        x = -x;
        y = -y;
      }
      const double angle = std::atan2(y, x);  // [0, pi]
      const int sector = std::min(kSectors - 1, static_cast<int>(angle / std::numbers::pi * kSectors));
      const int ring = std::min(kRings - 1, static_cast<int>(std::hypot(x, y) / r_max * kRings));
      d[ring * kSectors + sector] += 1.0;
    }
  }
  for (int i = 0; i < 96; ++i) d[i] /= total;

  d[96] = count / total;
  d[97] = patch.saturated_fraction();
  if (count > 0.0) {
    const double cx = sx / count, cy = sy / count;
    double mxx = 0.0, mxy = 0.0, myy = 0.0;
    for (int v = 0; v < nv; ++v) {
      for (int u = 0; u < nu; ++u) {
        if (patch.at(v, u) <= kContactThreshold) continue;
        const double dx = (u + 0.5 - hx) / hx - cx, dy = (v + 0.5 - hy) / hy - cy;
        mxx += dx * dx;
        mxy += dx * dy;
        myy += dy * dy;
      }
    }
    mxx /= count;
    mxy /= count;
    myy /= count;
    const double tr = mxx + myy;
    const double disc = std::sqrt(std::max(0.0, 0.25 * (mxx - myy) * (mxx - myy) + mxy * mxy));
    const double l1 = 0.5 * tr + disc, l2 = std::max(0.0, 0.5 * tr - disc);
    const double mean = sd / count;
    d[98] = cx;
    d[99] = cy;
    d[100] = mxx;
    d[101] = mxy;
    d[102] = myy;
    d[103] = l1 > 0.0 ? std::sqrt(std::max(0.0, 1.0 - l2 / l1)) : 0.0;
    d[104] = mean;
    d[105] = dmax;
    d[106] = std::sqrt(std::max(0.0, sdd / count - mean * mean));
  }
  return d;
}

LatentFeature AnalyticEncoder::encode(const TactilePatch& patch) const {
  const auto raw = raw_descriptor(patch);
  double norm = 0.0;
  for (double x : raw) norm += x * x;
  norm = std::sqrt(norm);
  LatentFeature f;
  f.vector.resize(kDim);
  for (std::size_t i = 0; i < kDim; ++i) f.vector[i] = static_cast<float>(raw[i] / norm);
  f.contact_score = contact_score(f.vector, h_nc_);
  return f;
}

double feature_distance(const LatentFeature& q, const LatentFeature& c, FeatureMetric metric) {
  if (q.vector.size() != c.vector.size()) throw std::runtime_error("encoder mismatch");
  if (metric == FeatureMetric::projection) return std::abs(c.contact_score - q.contact_score);
  double dot = 0.0, nq = 0.0, nc = 0.0;
  for (std::size_t i = 0; i < q.vector.size(); ++i) {
    dot += static_cast<double>(q.vector[i]) * c.vector[i];
    nq += static_cast<double>(q.vector[i]) * q.vector[i];
    nc += static_cast<double>(c.vector[i]) * c.vector[i];
  }
  if (nq == 0.0 || nc == 0.0) return nq == nc ? 0.0 : 1.0;
  return std::max(0.0, 1.0 - dot / std::sqrt(nq * nc));
}

bool compatible(const LatentFeature& query, const LatentFeature& candidate, double delta_h) {
  if (!(delta_h > 0.0)) throw std::invalid_argument("delta_h must be positive");
  return feature_distance(query, candidate, FeatureMetric::projection) < delta_h;
}

double distance_quantile(std::vector<double> distances, double quantile) {
  if (distances.empty()) throw std::invalid_argument("empty database");
  if (!(quantile > 0.0 && quantile <= 1.0)) throw std::invalid_argument("quantile must lie in (0, 1]");
  const auto n = distances.size();
  auto rank = static_cast<std::size_t>(std::ceil(quantile * static_cast<double>(n) - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, n);
  std::nth_element(distances.begin(), distances.begin() + static_cast<std::ptrdiff_t>(rank - 1), distances.end());
  return distances[rank - 1];
}

}  // namespace tacpose
