#include "tacpose/optimizer.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "tacpose/rng.hpp"

namespace tacpose {

void GdConfig::validate() const {
  if (!(gain_translation > 0.0 && gain_rotation > 0.0)) throw std::invalid_argument("gains must be positive");
  if (k_max < 1) throw std::invalid_argument("k_max must be >= 1");
  if (!(l_s >= 0.0)) throw std::invalid_argument("l_s must be non-negative");
  if (n_rot_seeds < 1) throw std::invalid_argument("n_rot_seeds must be >= 1");
  if (!(divergence_cap > 0.0)) throw std::invalid_argument("divergence_cap must be positive");
}

namespace {

struct Evaluation {
  double loss;
  Vec6 grad;
};

// Vector form of the Rodrigues map: R v = v + a (w x v) + b w x (w x v), and
// J_l^T m = m - b (w x m) + c w x (w x m), with the same coefficients as
// rodrigues_jacobian. Plain scalars keep the step cheap.
inline void cross(const double* u, const double* v, double* out) {
  out[0] = u[1] * v[2] - u[2] * v[1];
  out[1] = u[2] * v[0] - u[0] * v[2];
  out[2] = u[0] * v[1] - u[1] * v[0];
}

inline double evaluate_raw(const double* xi, const double* t, const double* s, std::size_t l, double* grad) {
  const double* w = xi + 3;
  const double theta2 = w[0] * w[0] + w[1] * w[1] + w[2] * w[2];
  const double theta = std::sqrt(theta2);
  double a, b, c, bj;
  if (theta < 1e-4) {
    a = 1.0 - theta2 / 6.0;
    bj = 0.5 - theta2 / 24.0;
    b = theta < 1e-12 ? 0.0 : bj;
    c = 1.0 / 6.0 - theta2 / 120.0;
  } else {
    const double sn = std::sin(theta), cs = std::cos(theta);
    a = sn / theta;
    b = bj = (1.0 - cs) / theta2;
    c = (theta - sn) / (theta2 * theta);
  }
  double loss = 0.0;
  double sr[3] = {0.0, 0.0, 0.0}, sm[3] = {0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < l; ++i) {
    const double* ti = t + 3 * i;
    const double* si = s + 3 * i;
    double wt[3], wwt[3], q[3], r[3], m[3];
    cross(w, ti, wt);
    cross(w, wt, wwt);
    for (int k = 0; k < 3; ++k) q[k] = ti[k] + a * wt[k] + b * wwt[k];
    for (int k = 0; k < 3; ++k) r[k] = si[k] - (q[k] + xi[k]);
    loss += r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
    cross(q, r, m);
    for (int k = 0; k < 3; ++k) {
      sr[k] += r[k];
      sm[k] += m[k];
    }
  }
  const double inv = 1.0 / static_cast<double>(l);
  double wm[3], wwm[3];
  cross(w, sm, wm);
  cross(w, wm, wwm);
  for (int k = 0; k < 3; ++k) {
    grad[k] = (-2.0 * inv) * sr[k];
    grad[3 + k] = (-2.0 * inv) * (sm[k] - bj * wm[k] + c * wwm[k]);
  }
  return loss * inv;
}

Evaluation evaluate(const Vec6& xi, std::span<const Vec3> t, std::span<const Vec3> s) {
  std::vector<double> tb(3 * t.size()), sb(3 * s.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (int k = 0; k < 3; ++k) {
      tb[3 * i + k] = t[i][k];
      sb[3 * i + k] = s[i][k];
    }
  }
  Evaluation e;
  e.loss = evaluate_raw(xi.data(), tb.data(), sb.data(), t.size(), e.grad.data());
  return e;
}

// One descent, advanced a step at a time so several can run interleaved.
struct Descent {
  double xi[6];
  double grad[6];
  double loss;
  int k = 0;
  bool active = true;
  bool diverged = false;

  void start(const Vec6& x, const double* t, const double* s, std::size_t l, const GdConfig& cfg) {
    for (int i = 0; i < 6; ++i) xi[i] = x[i];
    loss = evaluate_raw(xi, t, s, l, grad);
    check(cfg);
  }
  void check(const GdConfig& cfg) {
    bool finite = std::isfinite(loss);
    double g2 = 0.0;
    for (double g : grad) {
      finite = finite && std::isfinite(g);
      g2 += g * g;
    }
    if (!finite || loss > cfg.divergence_cap) {
      diverged = true;
      active = false;
    } else if (k >= cfg.k_max || std::sqrt(g2) < cfg.gradient_tol) {
      active = false;
    }
  }
  void step(const double* t, const double* s, std::size_t l, const GdConfig& cfg) {
    for (int i = 0; i < 3; ++i) xi[i] -= cfg.gain_translation * grad[i];
    for (int i = 3; i < 6; ++i) xi[i] -= cfg.gain_rotation * grad[i];
    const double theta = std::sqrt(xi[3] * xi[3] + xi[4] * xi[4] + xi[5] * xi[5]);
    if (theta > std::numbers::pi + 0.1) {
      const double f = std::remainder(theta, 2.0 * std::numbers::pi) / theta;
      for (int i = 3; i < 6; ++i) xi[i] *= f;
    }
    loss = evaluate_raw(xi, t, s, l, grad);
    ++k;
    check(cfg);
  }
};

void flatten(std::span<const Vec3> v, std::vector<double>& out) {
  out.resize(3 * v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (int k = 0; k < 3; ++k) out[3 * i + k] = v[i][k];
  }
}

void run_descents(std::span<PoseHypothesis> hyps, std::span<const Vec3> candidates, std::span<const Vec3> sensors,
                  const GdConfig& cfg) {
  std::vector<double> t, s;
  flatten(candidates, t);
  flatten(sensors, s);
  const std::size_t l = candidates.size();
  std::vector<Descent> runs(hyps.size());
  for (std::size_t h = 0; h < hyps.size(); ++h) runs[h].start(hyps[h].xi.xi, t.data(), s.data(), l, cfg);
  for (bool any = true; any;) {
    any = false;
    for (auto& r : runs) {
      if (!r.active) continue;
      r.step(t.data(), s.data(), l, cfg);
      any = true;
    }
  }
  for (std::size_t h = 0; h < hyps.size(); ++h) {
    Vec6 x;
    for (int i = 0; i < 6; ++i) x[i] = runs[h].xi[i];
    hyps[h].xi = Twist(x);
    hyps[h].loss = runs[h].loss;
    hyps[h].k = runs[h].k;
    hyps[h].diverged = runs[h].diverged;
  }
}

void check_sizes(std::span<const Vec3> t, std::span<const Vec3> s) {
  if (t.empty() || t.size() != s.size()) throw std::invalid_argument("tuple arity does not match sensor count");
}

}  // namespace

double loss_of(const Twist& xi, std::span<const Vec3> candidates, std::span<const Vec3> sensors) {
  check_sizes(candidates, sensors);
  const Pose pose = exp_map(xi);
  double loss = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    loss += (sensors[i] - pose.apply(candidates[i])).squaredNorm();
  }
  return loss * (1.0 / static_cast<double>(candidates.size()));
}

Vec6 gradient(const Twist& xi, std::span<const Vec3> candidates, std::span<const Vec3> sensors) {
  check_sizes(candidates, sensors);
  return evaluate(xi.xi, candidates, sensors).grad;
}

Vec3 rewrap_rotation(const Vec3& w) {
  const double theta = w.norm();
  if (!(theta > std::numbers::pi + 0.1)) return w;
  const double wrapped = std::remainder(theta, 2.0 * std::numbers::pi);  // in [-pi, pi]
  return w * (wrapped / theta);
}

const std::array<Vec3, 15>& hypothesis_directions() {
  static const std::array<Vec3, 15> dirs = [] {
    std::array<Vec3, 15> d;
    d[0] = Vec3::Zero();
    int n = 1;
    const double c = 1.0 / std::sqrt(3.0);
    for (int sx : {-1, 1}) {
      for (int sy : {-1, 1}) {
        for (int sz : {-1, 1}) d[n++] = Vec3(sx * c, sy * c, sz * c);
      }
    }
    for (int axis = 0; axis < 3; ++axis) {
      d[n++] = Vec3::Unit(axis);
      d[n++] = -Vec3::Unit(axis);
    }
    return d;
  }();
  return dirs;
}

std::vector<PoseHypothesis> init_hypotheses(std::span<const Vec3> sensors, const GdConfig& cfg, std::uint64_t seed,
                                            std::size_t tuple_index) {
  cfg.validate();
  if (sensors.empty()) throw std::invalid_argument("need at least one sensor");
  Vec3 center = Vec3::Zero();
  for (const auto& s : sensors) center += s;
  center /= static_cast<double>(sensors.size());
  std::vector<PoseHypothesis> out;
  out.reserve(15 * static_cast<std::size_t>(cfg.n_rot_seeds));
  for (const auto& dir : hypothesis_directions()) {
    for (int r = 0; r < cfg.n_rot_seeds; ++r) {
      PoseHypothesis h;
      h.tuple_index = tuple_index;
      h.hypothesis = static_cast<int>(out.size());
      Philox rng(seed, static_cast<std::uint64_t>(tuple_index) * 65536u + static_cast<std::uint64_t>(h.hypothesis));
      h.xi = Twist(center + cfg.l_s * dir, log_so3(random_rotation(rng)));
      out.push_back(h);
    }
  }
  return out;
}

void descend(PoseHypothesis& h, std::span<const Vec3> candidates, std::span<const Vec3> sensors,
             const GdConfig& cfg) {
  check_sizes(candidates, sensors);
  run_descents(std::span<PoseHypothesis>(&h, 1), candidates, sensors, cfg);
}

namespace {

TupleEstimate optimize_one(const CandidateTuple& tuple, std::size_t index, std::span<const Vec3> sensors,
                           const GdConfig& cfg, std::uint64_t seed) {
  TupleEstimate best;
  best.tuple_index = index;
  check_sizes(tuple.positions, sensors);
  auto hyps = init_hypotheses(sensors, cfg, seed, index);
  run_descents(hyps, tuple.positions, sensors, cfg);
  for (const auto& h : hyps) {
    if (h.diverged) continue;
    if (!best.valid || h.loss < best.loss) {
      best.valid = true;
      best.loss = h.loss;
      best.xi = h.xi;
      best.hypothesis = h.hypothesis;
    }
  }
  if (best.valid) best.pose = exp_map(best.xi);
  return best;
}

}  // namespace

std::vector<TupleEstimate> optimize(std::span<const CandidateTuple> tuples, std::span<const Vec3> sensors,
                                    const GdConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::vector<TupleEstimate> out(tuples.size());
  const auto n = static_cast<std::ptrdiff_t>(tuples.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t j = 0; j < n; ++j) out[j] = optimize_one(tuples[j], static_cast<std::size_t>(j), sensors, cfg, seed);
  return out;
}

std::vector<TupleEstimate> optimize_serial(std::span<const CandidateTuple> tuples, std::span<const Vec3> sensors,
                                           const GdConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::vector<TupleEstimate> out;
  out.reserve(tuples.size());
  for (std::size_t j = 0; j < tuples.size(); ++j) out.push_back(optimize_one(tuples[j], j, sensors, cfg, seed));
  return out;
}

}  // namespace tacpose
