#include "tacpose/superquadric.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tacpose/rng.hpp"

namespace tacpose {

void Superquadric::validate() const {
  if (!(a > 0 && b > 0 && c > 0)) throw std::invalid_argument("superquadric semi-axes must be positive");
  if (!(eps1 >= 0.1 && eps1 <= 2.0 && eps2 >= 0.1 && eps2 <= 2.0)) {
    throw std::invalid_argument("superquadric exponents must lie in [0.1, 2]");
  }
}

namespace {

// x^p for x >= 0, p > 0.
double upow(double x, double p) { return x > 0.0 ? std::exp2(p * std::log2(x)) : 0.0; }

}  // namespace

double Superquadric::inside_outside(const Vec3& p) const {
  const double e = 2.0 / eps2;
  const double xy = upow(std::abs(p.x() / a), e) + upow(std::abs(p.y() / b), e);
  return upow(xy, eps2 / eps1) + upow(std::abs(p.z() / c), 2.0 / eps1);
}

double Superquadric::radial(const Vec3& p) const { return std::pow(inside_outside(p), 0.5 * eps1); }

Vec3 Superquadric::gradient(const Vec3& p) const {
  const double ax = std::abs(p.x() / a), ay = std::abs(p.y() / b), az = std::abs(p.z() / c);
  const double xy = std::pow(ax, 2.0 / eps2) + std::pow(ay, 2.0 / eps2);
  const double k = xy > 1e-300 ? (2.0 / eps1) * std::pow(xy, eps2 / eps1 - 1.0) : 0.0;
  auto sgn = [](double v) { return v < 0 ? -1.0 : 1.0; };
  return {k * std::pow(ax, 2.0 / eps2 - 1.0) * sgn(p.x()) / a, k * std::pow(ay, 2.0 / eps2 - 1.0) * sgn(p.y()) / b,
          (2.0 / eps1) * std::pow(az, 2.0 / eps1 - 1.0) * sgn(p.z()) / c};
}

Vec3 Superquadric::project(const Vec3& p) const { return p / radial(p); }

Vec3 Superquadric::normal_at(const Vec3& s) const {
  const Vec3 g = gradient(s);
  const double n = g.norm();
  if (!(n > 0) || !std::isfinite(n)) return s.normalized();
  return g / n;
}

double Superquadric::radial_slope(const Vec3& p, const Vec3& d) const {
  return 0.5 * eps1 * std::pow(inside_outside(p), 0.5 * eps1 - 1.0) * gradient(p).dot(d);
}

TactilePatch render_superquadric_patch(const Superquadric& sq, const Pose& placement, const SensorModel& sensor) {
  constexpr int kScan = 16;
  constexpr int kBisect = 64;
  constexpr double kTol = 1e-7;
  TactilePatch patch(sensor.pixels_u, sensor.pixels_v);
  const Vec3 dir = placement.rotation.col(2);
  const double range = sensor.max_indent;
  for (int v = 0; v < sensor.pixels_v; ++v) {
    for (int u = 0; u < sensor.pixels_u; ++u) {
      const Vec3 o = placement.apply(sensor.pixel_center(v, u));
      const Vec3 e = o + range * dir;
      auto outside = [&](double t) { return sq.inside_outside(o + t * dir) >= 1.0; };
      if (!outside(0.0)) {
        patch.at(v, u) = 1.0f;
        continue;
      }
      double lo = 0.0, hi = -1.0;
      if (!outside(range)) {
        hi = range;
      } else {
        // Convex gauge along the ray: no interior crossing when the two end
        // tangents already bound it above zero.
        const double s0 = sq.radial_slope(o, dir), s1 = sq.radial_slope(e, dir);
        if (s0 < 0.0 && s1 > 0.0) {
          const double g0 = sq.radial(o) - 1.0, g1 = sq.radial(e) - 1.0;
          const double t = (g1 - s1 * range - g0) / (s0 - s1);
          if (g0 + s0 * t < 0.0) {
            for (int s = 1; s < kScan; ++s) {
              const double ts = range * s / kScan;
              if (!outside(ts)) {
                hi = ts;
                break;
              }
              lo = ts;
            }
          }
        }
      }
      double d = 0.0;
      if (hi > 0.0) {
        for (int it = 0; it < kBisect && hi - lo > kTol; ++it) {
          const double mid = 0.5 * (lo + hi);
          (outside(mid) ? lo : hi) = mid;
        }
        d = std::clamp((range - 0.5 * (lo + hi)) / range, 0.0, 1.0);
      }
      patch.at(v, u) = static_cast<float>(d);
    }
  }
  return patch;
}

namespace {

double log_uniform(Philox& rng, double lo, double hi) { return lo * std::exp(rng.uniform() * std::log(hi / lo)); }

// Uniform point on the surface of the box [-a,a]x[-b,b]x[-c,c].
Vec3 box_surface_point(Philox& rng, double a, double b, double c) {
  const double ayz = b * c, axz = a * c, axy = a * b;
  const double pick = rng.uniform() * (ayz + axz + axy);
  const double side = rng.uniform() < 0.5 ? -1.0 : 1.0;
  const double s = rng.uniform(-1.0, 1.0), t = rng.uniform(-1.0, 1.0);
  if (pick < ayz) return {side * a, s * b, t * c};
  if (pick < ayz + axz) return {s * a, side * b, t * c};
  return {s * a, t * b, side * c};
}

}  // namespace

std::vector<TrainingSample> generate_training_set(std::size_t n, std::uint64_t seed, const SensorModel& sensor,
                                                  const TrainingRanges& ranges) {
  if (n == 0) throw std::invalid_argument("training set size must be >= 1");
  sensor.validate();
  const auto k = static_cast<std::size_t>(std::llround(static_cast<double>(n) * ranges.no_contact_fraction));
  std::vector<TrainingSample> out(n);
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t ii = 0; ii < count; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    TrainingSample& s = out[i];
    Philox rng(seed, i);
    s.shape.a = log_uniform(rng, ranges.semi_axis_min, ranges.semi_axis_max);
    s.shape.b = log_uniform(rng, ranges.semi_axis_min, ranges.semi_axis_max);
    s.shape.c = log_uniform(rng, ranges.semi_axis_min, ranges.semi_axis_max);
    s.shape.eps1 = log_uniform(rng, ranges.eps_min, ranges.eps_max);
    s.shape.eps2 = log_uniform(rng, ranges.eps_min, ranges.eps_max);
    s.contact_point = s.shape.project(box_surface_point(rng, s.shape.a, s.shape.b, s.shape.c));
    s.contact_normal = s.shape.normal_at(s.contact_point);
    s.indent = rng.uniform(ranges.indent_min, ranges.indent_max) * sensor.max_indent;
    s.no_contact = (i + 1) * k / n > i * k / n;
    if (s.no_contact) {
      s.indent = 0.0;
      s.patch = TactilePatch(sensor.pixels_u, sensor.pixels_v);
    } else {
      s.patch = render_superquadric_patch(
          s.shape, place_sensor(s.contact_point, s.contact_normal, s.indent, sensor), sensor);
    }
  }
  return out;
}

}  // namespace tacpose
