#include "tacpose/conv_encoder.hpp"

#include <cstring>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <sstream>
#include <stdexcept>

namespace tacpose {

std::size_t Tensor::numel() const {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::uint64_t fnv1a64(const char* data, std::size_t size) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

class Reader {
 public:
  explicit Reader(const std::vector<char>& b) : bytes_(b) {}
  std::uint32_t u32() {
    std::uint32_t v;
    take(&v, 4);
    return v;
  }
  void take(void* dst, std::size_t n) {
    if (pos_ + n > bytes_.size()) throw std::runtime_error("truncated ENCW file");
    std::memcpy(dst, bytes_.data() + pos_, n);
    pos_ += n;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  const std::vector<char>& bytes_;
  std::size_t pos_ = 0;
};

void put_u32(std::vector<char>& out, std::uint32_t v) {
  const char* p = reinterpret_cast<const char*>(&v);
  out.insert(out.end(), p, p + 4);
}

}  // namespace

EncoderWeights EncoderWeights::parse(const std::vector<char>& bytes) {
  Reader r(bytes);
  char magic[4];
  r.take(magic, 4);
  if (std::memcmp(magic, "ENCW", 4) != 0) throw std::runtime_error("not an ENCW file");
  if (r.u32() != 1) throw std::runtime_error("unsupported ENCW version");
  const auto count = r.u32();
  EncoderWeights w;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto len = r.u32();
    if (len > 4096) throw std::runtime_error("malformed ENCW tensor name");
    std::string name(len, '\0');
    r.take(name.data(), len);
    Tensor t;
    const auto ndim = r.u32();
    if (ndim > 8) throw std::runtime_error("malformed ENCW tensor rank");
    for (std::uint32_t k = 0; k < ndim; ++k) t.shape.push_back(r.u32());
    t.data.resize(t.numel());
    r.take(t.data.data(), t.data.size() * sizeof(float));
    w.tensors[name] = std::move(t);
  }
  if (!r.done()) throw std::runtime_error("trailing bytes in ENCW file");
  std::ostringstream id;
  id << "encw-" << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(bytes.data(), bytes.size());
  w.encoder_id = id.str();
  return w;
}

EncoderWeights EncoderWeights::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open weights: " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse(bytes);
}

void EncoderWeights::save(const std::filesystem::path& path) const {
  std::vector<char> out{'E', 'N', 'C', 'W'};
  put_u32(out, 1);
  put_u32(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) {
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
    put_u32(out, static_cast<std::uint32_t>(t.shape.size()));
    for (auto d : t.shape) put_u32(out, d);
    const char* p = reinterpret_cast<const char*>(t.data.data());
    out.insert(out.end(), p, p + t.data.size() * sizeof(float));
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write: " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

const Tensor& EncoderWeights::at(const std::string& name) const {
  const auto it = tensors.find(name);
  if (it == tensors.end()) throw std::runtime_error("ENCW missing tensor: " + name);
  return it->second;
}

namespace {

constexpr int kLayers = 4;
constexpr int kChannels[kLayers] = {8, 16, 32, 64};

int conv_out(int n) { return (n + 2 - 4) / 2 + 1; }

// Kernel 4, stride 2, padding 1, ReLU. Input/output channel-major.
std::vector<float> conv_layer(const std::vector<float>& in, int cin, int h, int w, const Tensor& weight,
                              const Tensor& bias, int& oh, int& ow) {
  const int cout = static_cast<int>(weight.shape[0]);
  oh = conv_out(h);
  ow = conv_out(w);
  std::vector<float> out(static_cast<std::size_t>(cout) * oh * ow);
  for (int co = 0; co < cout; ++co) {
    for (int y = 0; y < oh; ++y) {
      for (int x = 0; x < ow; ++x) {
        double acc = bias.data[co];
        for (int ci = 0; ci < cin; ++ci) {
          const float* k = &weight.data[((static_cast<std::size_t>(co) * cin + ci) * 4) * 4];
          const float* src = &in[static_cast<std::size_t>(ci) * h * w];
          for (int ky = 0; ky < 4; ++ky) {
            const int iy = 2 * y - 1 + ky;
            if (iy < 0 || iy >= h) continue;
            for (int kx = 0; kx < 4; ++kx) {
              const int ix = 2 * x - 1 + kx;
              if (ix < 0 || ix >= w) continue;
              acc += static_cast<double>(k[ky * 4 + kx]) * src[iy * w + ix];
            }
          }
        }
        out[(static_cast<std::size_t>(co) * oh + y) * ow + x] = static_cast<float>(acc > 0.0 ? acc : 0.0);
      }
    }
  }
  return out;
}

}  // namespace

ConvEncoder::ConvEncoder(EncoderWeights weights) : weights_(std::move(weights)) {
  const auto& ref_in = weights_.at("reference.input");
  if (ref_in.shape.size() != 2) throw std::runtime_error("encoder mismatch");
  height_ = static_cast<int>(ref_in.shape[0]);
  width_ = static_cast<int>(ref_in.shape[1]);
  int h = height_, w = width_, cin = 1;
  for (int l = 0; l < kLayers; ++l) {
    const std::string p = "conv" + std::to_string(l + 1);
    const auto& wt = weights_.at(p + ".weight");
    const auto& bt = weights_.at(p + ".bias");
    const std::vector<std::uint32_t> want{static_cast<std::uint32_t>(kChannels[l]), static_cast<std::uint32_t>(cin), 4, 4};
    if (wt.shape != want || bt.numel() != static_cast<std::size_t>(kChannels[l])) {
      throw std::runtime_error("encoder mismatch");
    }
    h = conv_out(h);
    w = conv_out(w);
    cin = kChannels[l];
  }
  if (h < 1 || w < 1) throw std::runtime_error("encoder mismatch");
  const auto& dw = weights_.at("dense.weight");
  if (dw.shape.size() != 2 || dw.shape[1] != static_cast<std::uint32_t>(cin * h * w)) {
    throw std::runtime_error("encoder mismatch");
  }
  dim_ = dw.shape[0];
  if (weights_.at("dense.bias").numel() != dim_ || weights_.at("h_nc").numel() != dim_ ||
      weights_.at("reference.output").numel() != dim_) {
    throw std::runtime_error("encoder mismatch");
  }
  h_nc_ = weights_.at("h_nc").data;
}

std::vector<float> ConvEncoder::forward(const std::vector<float>& image) const {
  if (image.size() != static_cast<std::size_t>(height_) * width_) throw std::runtime_error("encoder mismatch");
  std::vector<float> act = image;
  int h = height_, w = width_, cin = 1;
  for (int l = 0; l < kLayers; ++l) {
    const std::string p = "conv" + std::to_string(l + 1);
    int oh = 0, ow = 0;
    act = conv_layer(act, cin, h, w, weights_.at(p + ".weight"), weights_.at(p + ".bias"), oh, ow);
    h = oh;
    w = ow;
    cin = kChannels[l];
  }
  const auto& dw = weights_.at("dense.weight");
  const auto& db = weights_.at("dense.bias");
  const std::size_t in = act.size();
  std::vector<float> out(dim_);
  for (std::size_t o = 0; o < dim_; ++o) {
    double acc = db.data[o];
    const float* row = &dw.data[o * in];
    for (std::size_t i = 0; i < in; ++i) acc += static_cast<double>(row[i]) * act[i];
    out[o] = static_cast<float>(acc);
  }
  return out;
}

LatentFeature ConvEncoder::encode(const TactilePatch& patch) const {
  const TactilePatch* src = &patch;
  TactilePatch reduced;
  if (patch.pixels_v == 2 * height_ && patch.pixels_u == 2 * width_) {
    reduced = patch.downsampled();
    src = &reduced;
  } else if (patch.pixels_v != height_ || patch.pixels_u != width_) {
    throw std::runtime_error("encoder mismatch");
  }
  LatentFeature f;
  f.vector = forward(src->depth);
  f.contact_score = contact_score(f.vector, h_nc_);
  return f;
}

}  // namespace tacpose
