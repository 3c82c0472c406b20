#pragma once

#include <cstdint>
#include <vector>

#include "tacpose/render.hpp"

namespace tacpose {

/// Axis-aligned superquadric centered at the origin:
/// F = (|x/a|^(2/eps2) + |y/b|^(2/eps2))^(eps2/eps1) + |z/c|^(2/eps1), inside iff F < 1.
struct Superquadric {
  double a = 0.05, b = 0.05, c = 0.05;
  double eps1 = 1.0, eps2 = 1.0;

  void validate() const;
  double inside_outside(const Vec3& p) const;
  /// F^(eps1/2), homogeneous of degree one in p.
  double radial(const Vec3& p) const;
  Vec3 gradient(const Vec3& p) const;
  /// Directional derivative of radial() along d.
  double radial_slope(const Vec3& p, const Vec3& d) const;
  /// Radial projection of a nonzero direction onto the surface.
  Vec3 project(const Vec3& p) const;
  Vec3 normal_at(const Vec3& surface_point) const;
};

/// Same contract as render_patch. Rays start at the gel plane; an origin inside
/// the solid reads 1. Otherwise the crossing in [0, max_indent] is bracketed
/// (ray end inside, or 16 uniform sign checks when the convex radial function
/// may dip below 1 in between) and refined by bisection (<= 64 steps, 1e-7 m).
TactilePatch render_superquadric_patch(const Superquadric& sq, const Pose& placement, const SensorModel& sensor);

struct TrainingRanges {
  double semi_axis_min = 0.02;
  double semi_axis_max = 0.10;
  double eps_min = 0.1;
  double eps_max = 1.0;
  double indent_min = 0.3;  // fraction of max_indent
  double indent_max = 1.0;
  double no_contact_fraction = 0.05;
};

struct TrainingSample {
  Superquadric shape;
  Vec3 contact_point = Vec3::Zero();
  Vec3 contact_normal = Vec3::UnitZ();
  double indent = 0.0;
  bool no_contact = false;
  TactilePatch patch;
};

/// Patch i is a no-contact patch iff floor((i+1) k / n) > floor(i k / n) with
/// k = round(n * no_contact_fraction), so exactly k are all zero and they are
/// spread evenly. Sample i draws from Philox(seed, i).
std::vector<TrainingSample> generate_training_set(std::size_t n, std::uint64_t seed, const SensorModel& sensor,
                                                  const TrainingRanges& ranges = {});

}  // namespace tacpose
