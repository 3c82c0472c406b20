#pragma once

#include <array>
#include <span>
#include <vector>

#include "tacpose/tuple_filter.hpp"

namespace tacpose {

struct GdConfig {
  double gain_translation = 1e-2;
  double gain_rotation = 1.0;
  int k_max = 700;
  double l_s = 0.2;
  int n_rot_seeds = 1;
  double divergence_cap = 1e6;
  double gradient_tol = 1e-10;

  void validate() const;
};

/// E = (1/L) sum |s_i - (R t_i + p)|^2 with (R, p) = exp_map(xi).
double loss_of(const Twist& xi, std::span<const Vec3> candidates, std::span<const Vec3> sensors);

/// Analytic dE/dxi: translation block -(2/L) sum r_i, rotation block
/// -(2/L) J_l(w)^T sum (R t_i) x r_i.
Vec6 gradient(const Twist& xi, std::span<const Vec3> candidates, std::span<const Vec3> sensors);

/// Axis-angle of norm above pi + 0.1 is replaced by the equivalent vector of
/// norm below pi; anything else is returned unchanged.
Vec3 rewrap_rotation(const Vec3& w);

struct PoseHypothesis {
  Twist xi;
  double loss = 0.0;
  int k = 0;
  bool diverged = false;
  std::size_t tuple_index = 0;
  int hypothesis = 0;
};

/// The 15 unit translation directions: zero, the 8 cube vertices over sqrt(3)
/// in sign order (-,-,-), (-,-,+), ..., then +x, -x, +y, -y, +z, -z.
const std::array<Vec3, 15>& hypothesis_directions();

/// 15 * n_rot_seeds hypotheses around the sensor centroid. Hypothesis h pairs
/// translation h / n_rot_seeds with a Haar rotation drawn from
/// Philox(seed, tuple_index * 65536 + h).
std::vector<PoseHypothesis> init_hypotheses(std::span<const Vec3> sensors, const GdConfig& cfg, std::uint64_t seed,
                                            std::size_t tuple_index = 0);

/// xi <- xi - K grad until k_max steps, |grad| < gradient_tol, or divergence
/// (loss above the cap or non-finite). `loss` always matches the final xi.
void descend(PoseHypothesis& h, std::span<const Vec3> candidates, std::span<const Vec3> sensors, const GdConfig& cfg);

struct TupleEstimate {
  std::size_t tuple_index = 0;
  Twist xi;
  Pose pose;
  double loss = 0.0;
  int hypothesis = -1;
  bool valid = false;  // false when every hypothesis diverged
};

/// Runs every hypothesis of every tuple and keeps each tuple's lowest-loss
/// (then lowest-index) hypothesis. Parallel over tuples.
std::vector<TupleEstimate> optimize(std::span<const CandidateTuple> tuples, std::span<const Vec3> sensors,
                                    const GdConfig& cfg, std::uint64_t seed);
std::vector<TupleEstimate> optimize_serial(std::span<const CandidateTuple> tuples, std::span<const Vec3> sensors,
                                           const GdConfig& cfg, std::uint64_t seed);

}  // namespace tacpose
