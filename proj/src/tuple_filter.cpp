#include "tacpose/tuple_filter.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <stdexcept>

#include <omp.h>

namespace tacpose {

double pairwise_cost(std::span<const Vec3> sensors, std::span<const Vec3> candidates) {
  const std::size_t l = sensors.size();
  if (candidates.size() != l) throw std::invalid_argument("tuple arity mismatch");
  if (l < 2) return 0.0;
  double sum = 0.0;
  for (std::size_t k = 1; k < l; ++k) {
    for (std::size_t i = 0; i < k; ++i) {
      sum += std::abs((sensors[i] - sensors[k]).norm() - (candidates[i] - candidates[k]).norm());
    }
  }
  return sum * (2.0 / static_cast<double>(l * (l - 1)));
}

namespace {

struct Entry {
  double cost;
  std::array<std::uint32_t, kMaxSensors> refs;
};

struct EntryLess {
  std::size_t l;
  bool operator()(const Entry& a, const Entry& b) const {
    if (a.cost != b.cost) return a.cost < b.cost;
    return std::lexicographical_compare(a.refs.begin(), a.refs.begin() + l, b.refs.begin(), b.refs.begin() + l);
  }
};

using Heap = std::priority_queue<Entry, std::vector<Entry>, EntryLess>;

void validate(const TupleStream& tuples, std::span<const SensorObservation> obs, const FilterConfig& cfg) {
  if (tuples.arity() != obs.size()) throw std::invalid_argument("tuple arity does not match sensor count");
  if (tuples.arity() > kMaxSensors) throw std::invalid_argument("too many sensors");
  if (cfg.n_max < 1) throw std::invalid_argument("n_max must be >= 1");
  if (!(cfg.delta_d0 > 0.0) || !(cfg.shrink > 0.0 && cfg.shrink < 1.0)) {
    throw std::invalid_argument("invalid distance schedule");
  }
}

CandidateTuple to_candidate(const Entry& e, std::size_t l, const LatentDatabase& db) {
  CandidateTuple t;
  t.cost = e.cost;
  t.refs.assign(e.refs.begin(), e.refs.begin() + l);
  for (auto r : t.refs) t.positions.push_back(db.entries.at(r).position);
  return t;
}

// Applies the shrink schedule to the n_max + 1 best entries, sorted.
FilterResult finish(std::vector<Entry> best, std::size_t l, const LatentDatabase& db, const FilterConfig& cfg) {
  if (best.empty()) throw std::runtime_error("no geometrically consistent tuples");
  FilterResult res;
  res.delta_d = cfg.delta_d0;
  if (best.size() > cfg.n_max) {
    const double c = best[cfg.n_max].cost;
    while (res.delta_d > c) {
      res.delta_d *= cfg.shrink;
      ++res.rounds;
    }
  }
  for (const auto& e : best) {
    if (res.tuples.size() == cfg.n_max) break;
    // A zero threshold means n_max + 1 tuples cost exactly 0; keep the first n_max.
    if (res.delta_d > 0.0 && !(e.cost < res.delta_d)) break;
    res.tuples.push_back(to_candidate(e, l, db));
  }
  return res;
}

FilterResult single_sensor(const TupleStream& tuples, const LatentDatabase& db, const FilterConfig& cfg) {
  FilterResult res;
  res.delta_d = cfg.delta_d0;
  res.product_size = tuples.size();
  for (auto r : tuples.omegas()[0]) {
    if (res.tuples.size() == cfg.n_max) break;
    Entry e{0.0, {}};
    e.refs[0] = r;
    res.tuples.push_back(to_candidate(e, 1, db));
  }
  return res;
}

class Scanner {
 public:
  Scanner(const TupleStream& tuples, const LatentDatabase& db, std::span<const SensorObservation> obs,
          const FilterConfig& cfg)
      : om_(tuples.omegas()), l_(om_.size()), cap_(cfg.n_max + 1), delta0_(cfg.delta_d0),
        factor_(2.0 / static_cast<double>(l_ * (l_ - 1))) {
    // terms_[k][i] holds |S_ik - D_ik| for every (Omega_i, Omega_k) pair, row-major in i.
    terms_.resize(l_);
    for (std::size_t k = 1; k < l_; ++k) {
      terms_[k].resize(k);
      for (std::size_t i = 0; i < k; ++i) {
        const double s = (obs[i].position() - obs[k].position()).norm();
        auto& t = terms_[k][i];
        t.resize(om_[i].size() * om_[k].size());
        for (std::size_t a = 0; a < om_[i].size(); ++a) {
          const Vec3& pa = db.entries.at(om_[i][a]).position;
          for (std::size_t b = 0; b < om_[k].size(); ++b) {
            t[a * om_[k].size() + b] = std::abs(s - (pa - db.entries.at(om_[k][b]).position).norm());
          }
        }
      }
    }
  }

  void scan_outer(std::size_t a, Heap& heap) const {
    std::array<std::size_t, kMaxSensors> pos{};
    pos[0] = a;
    descend(1, 0.0, pos, heap);
  }

  std::size_t outer_size() const { return om_[0].size(); }
  std::size_t arity() const { return l_; }

 private:
  void descend(std::size_t k, double partial, std::array<std::size_t, kMaxSensors>& pos, Heap& heap) const {
    if (k >= kMaxSensors) return;  // arity is checked on construction
    const std::size_t nk = om_[k].size();
    std::array<const double*, kMaxSensors> rows{};
    for (std::size_t i = 0; i < k; ++i) rows[i] = terms_[k][i].data() + pos[i] * nk;
    for (std::size_t c = 0; c < nk; ++c) {
      double s = partial;
      for (std::size_t i = 0; i < k; ++i) s += rows[i][c];
      const double bound = s * factor_;
      if (bound >= delta0_) continue;
      if (heap.size() == cap_ && bound > heap.top().cost) continue;
      pos[k] = c;
      if (k + 1 < l_) {
        descend(k + 1, s, pos, heap);
        continue;
      }
      Entry e{bound, {}};
      for (std::size_t i = 0; i < l_; ++i) e.refs[i] = om_[i][pos[i]];
      if (heap.size() < cap_) {
        heap.push(e);
      } else if (EntryLess{l_}(e, heap.top())) {
        heap.pop();
        heap.push(e);
      }
    }
  }

  const std::vector<std::vector<std::uint32_t>>& om_;
  std::size_t l_;
  std::size_t cap_;
  double delta0_;
  double factor_;
  std::vector<std::vector<std::vector<double>>> terms_;
};

std::vector<Entry> drain(Heap& heap) {
  std::vector<Entry> v;
  v.reserve(heap.size());
  while (!heap.empty()) {
    v.push_back(heap.top());
    heap.pop();
  }
  return v;
}

FilterResult run(const TupleStream& tuples, const LatentDatabase& db, std::span<const SensorObservation> obs,
                 const FilterConfig& cfg, bool parallel) {
  validate(tuples, obs, cfg);
  if (tuples.arity() == 1) return single_sensor(tuples, db, cfg);
  const Scanner scanner(tuples, db, obs, cfg);
  const std::size_t l = scanner.arity();
  std::vector<Entry> merged;
  const auto outer = static_cast<std::ptrdiff_t>(scanner.outer_size());
  if (parallel) {
#pragma omp parallel
    {
      Heap heap(EntryLess{l});
#pragma omp for schedule(dynamic, 1) nowait
      for (std::ptrdiff_t a = 0; a < outer; ++a) scanner.scan_outer(static_cast<std::size_t>(a), heap);
      auto part = drain(heap);
#pragma omp critical(tacpose_filter_merge)
      merged.insert(merged.end(), part.begin(), part.end());
    }
  } else {
    Heap heap(EntryLess{l});
    for (std::ptrdiff_t a = 0; a < outer; ++a) scanner.scan_outer(static_cast<std::size_t>(a), heap);
    merged = drain(heap);
  }
  std::sort(merged.begin(), merged.end(), EntryLess{l});
  if (merged.size() > cfg.n_max + 1) merged.resize(cfg.n_max + 1);
  auto res = finish(std::move(merged), l, db, cfg);
  res.product_size = tuples.size();
  return res;
}

}  // namespace

FilterResult filter_by_distance(const TupleStream& tuples, const LatentDatabase& db,
                                std::span<const SensorObservation> observations, const FilterConfig& cfg) {
  return run(tuples, db, observations, cfg, true);
}

FilterResult filter_by_distance_serial(const TupleStream& tuples, const LatentDatabase& db,
                                       std::span<const SensorObservation> observations, const FilterConfig& cfg) {
  return run(tuples, db, observations, cfg, false);
}

FilterResult filter_by_distance_reference(TupleStream tuples, const LatentDatabase& db,
                                          std::span<const SensorObservation> observations,
                                          const FilterConfig& cfg) {
  validate(tuples, observations, cfg);
  const std::size_t l = tuples.arity();
  FilterResult res;
  res.product_size = tuples.size();
  res.delta_d = cfg.delta_d0;
  tuples.reset();
  std::vector<std::uint32_t> refs;
  if (l == 1) {
    while (res.tuples.size() < cfg.n_max && tuples.next(refs)) {
      Entry e{0.0, {}};
      e.refs[0] = refs[0];
      res.tuples.push_back(to_candidate(e, 1, db));
    }
    return res;
  }
  std::vector<Vec3> sensors;
  for (const auto& o : observations) sensors.push_back(o.position());
  std::vector<Entry> all;
  std::vector<Vec3> cand(l);
  while (tuples.next(refs)) {
    for (std::size_t i = 0; i < l; ++i) cand[i] = db.entries.at(refs[i]).position;
    Entry e{pairwise_cost(sensors, cand), {}};
    std::copy(refs.begin(), refs.end(), e.refs.begin());
    if (e.cost < cfg.delta_d0) all.push_back(e);
  }
  if (all.empty()) throw std::runtime_error("no geometrically consistent tuples");
  std::sort(all.begin(), all.end(), EntryLess{l});
  auto count_below = [&](double d) {
    return static_cast<std::size_t>(std::count_if(all.begin(), all.end(), [&](const Entry& e) { return e.cost < d; }));
  };
  while (count_below(res.delta_d) > cfg.n_max && res.delta_d > 0.0) {
    res.delta_d *= cfg.shrink;
    ++res.rounds;
  }
  for (const auto& e : all) {
    if (res.tuples.size() == cfg.n_max) break;
    if (res.delta_d > 0.0 && !(e.cost < res.delta_d)) break;
    res.tuples.push_back(to_candidate(e, l, db));
  }
  return res;
}

}  // namespace tacpose
