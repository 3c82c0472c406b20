#pragma once

#include <span>
#include <vector>

#include "tacpose/selection.hpp"

namespace tacpose {

inline constexpr std::size_t kMaxSensors = 8;

struct CandidateTuple {
  std::vector<std::uint32_t> refs;  // database indices, one per sensor
  std::vector<Vec3> positions;      // object frame
  double cost = 0.0;
};

/// (2 / (L (L - 1))) * sum over i < k of | |s_i - s_k| - |t_i - t_k| |, pairs
/// summed with k outer and i inner. 0 for L = 1.
double pairwise_cost(std::span<const Vec3> sensors, std::span<const Vec3> candidates);

struct FilterConfig {
  std::size_t n_max = 2000;
  double delta_d0 = 0.05;
  double shrink = 0.8;
};

struct FilterResult {
  std::vector<CandidateTuple> tuples;  // ascending (cost, refs)
  double delta_d = 0.0;                // final threshold
  int rounds = 0;                      // shrink steps taken
  std::uint64_t product_size = 0;
};

/// Keeps the tuples with cost < delta_d, where delta_d = delta_d0 * shrink^k for
/// the smallest k leaving at most n_max. The product is enumerated depth-first
/// with partial-sum pruning and a bounded heap of the n_max + 1 best tuples;
/// workers split the first sensor's set and their heaps are merged, so the
/// result does not depend on the thread count. L = 1 keeps the first n_max
/// tuples in stream order. Throws when nothing passes delta_d0.
FilterResult filter_by_distance(const TupleStream& tuples, const LatentDatabase& db,
                                std::span<const SensorObservation> observations, const FilterConfig& cfg = {});
FilterResult filter_by_distance_serial(const TupleStream& tuples, const LatentDatabase& db,
                                       std::span<const SensorObservation> observations, const FilterConfig& cfg = {});

/// Full scan of the product, then the literal shrink loop.
FilterResult filter_by_distance_reference(TupleStream tuples, const LatentDatabase& db,
                                          std::span<const SensorObservation> observations,
                                          const FilterConfig& cfg = {});

}  // namespace tacpose
