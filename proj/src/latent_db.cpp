#include "tacpose/latent_db.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace tacpose {

namespace {

constexpr std::size_t kIdBytes = 32;

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("truncated LDB1 file");
  return v;
}

}  // namespace

void LatentDatabase::check_encoder(const Encoder& encoder) const {
  if (encoder.id() != encoder_id || encoder.dim() != dim) throw std::runtime_error("encoder mismatch");
}

void LatentDatabase::save(const std::filesystem::path& path) const {
  if (encoder_id.size() > kIdBytes) throw std::invalid_argument("encoder id longer than 32 bytes");
  if (h_nc.size() != dim) throw std::invalid_argument("h_nc dimension mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write: " + path.string());
  out.write("LDB1", 4);
  put<std::uint32_t>(out, 1);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(dim));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(entries.size()));
  char id[kIdBytes] = {};
  std::memcpy(id, encoder_id.data(), encoder_id.size());
  out.write(id, kIdBytes);
  out.write(reinterpret_cast<const char*>(h_nc.data()), static_cast<std::streamsize>(dim * sizeof(float)));
  for (const auto& e : entries) {
    if (e.feature.vector.size() != dim) throw std::invalid_argument("feature dimension mismatch");
    put(out, e.sample_id);
    for (int k = 0; k < 3; ++k) put(out, e.position[k]);
    for (int k = 0; k < 3; ++k) put(out, e.normal[k]);
    out.write(reinterpret_cast<const char*>(e.feature.vector.data()), static_cast<std::streamsize>(dim * sizeof(float)));
    put(out, static_cast<float>(e.feature.contact_score));
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

LatentDatabase LatentDatabase::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open database: " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "LDB1", 4) != 0) throw std::runtime_error("not an LDB1 file: " + path.string());
  if (get<std::uint32_t>(in) != 1) throw std::runtime_error("unsupported LDB1 version");
  LatentDatabase db;
  db.dim = get<std::uint32_t>(in);
  const auto m = get<std::uint32_t>(in);
  char id[kIdBytes];
  in.read(id, kIdBytes);
  if (!in) throw std::runtime_error("truncated LDB1 file");
  db.encoder_id.assign(id, strnlen(id, kIdBytes));
  db.h_nc.resize(db.dim);
  in.read(reinterpret_cast<char*>(db.h_nc.data()), static_cast<std::streamsize>(db.dim * sizeof(float)));
  db.entries.resize(m);
  for (auto& e : db.entries) {
    e.sample_id = get<std::uint32_t>(in);
    for (int k = 0; k < 3; ++k) e.position[k] = get<double>(in);
    for (int k = 0; k < 3; ++k) e.normal[k] = get<double>(in);
    e.feature.vector.resize(db.dim);
    in.read(reinterpret_cast<char*>(e.feature.vector.data()), static_cast<std::streamsize>(db.dim * sizeof(float)));
    e.feature.contact_score = get<float>(in);
  }
  if (in.peek() != std::char_traits<char>::eof()) throw std::runtime_error("trailing bytes in LDB1 file");
  return db;
}

double auto_delta_h(const LatentDatabase& db, const LatentFeature& query, double quantile, FeatureMetric metric) {
  std::vector<double> d;
  d.reserve(db.size());
  for (const auto& e : db.entries) d.push_back(feature_distance(query, e.feature, metric));
  return distance_quantile(std::move(d), quantile);
}

}  // namespace tacpose
