#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "tacpose/encoder.hpp"

namespace tacpose {

struct Tensor {
  std::vector<std::uint32_t> shape;
  std::vector<float> data;
  std::size_t numel() const;
};

/// ENCW container: "ENCW", u32 version (1), u32 tensor count, then per tensor
/// u32 name length, name bytes, u32 ndim, u32 dims[ndim], f32 data (all
/// little-endian). Required tensors:
///   conv{1..4}.weight [out, in, 4, 4], conv{1..4}.bias [out]   (8-16-32-64)
///   dense.weight [D, 64 * h4 * w4], dense.bias [D]
///   h_nc [D], reference.input [H, W], reference.output [D]
struct EncoderWeights {
  std::map<std::string, Tensor> tensors;
  std::string encoder_id;  // "encw-" + FNV-1a 64-bit hex of the file bytes

  static EncoderWeights load(const std::filesystem::path& path);
  static EncoderWeights parse(const std::vector<char>& bytes);
  void save(const std::filesystem::path& path) const;

  const Tensor& at(const std::string& name) const;
};

std::uint64_t fnv1a64(const char* data, std::size_t size);

/// Convolutional encoder: 4 conv layers (kernel 4, stride 2, padding 1, ReLU)
/// then a linear layer over the channel-major flattening. Patches twice the
/// input size in each dimension are 2x2 box-filtered first.
class ConvEncoder final : public Encoder {
 public:
  explicit ConvEncoder(EncoderWeights weights);

  std::string id() const override { return weights_.encoder_id; }
  std::size_t dim() const override { return dim_; }
  const std::vector<float>& h_nc() const override { return h_nc_; }
  LatentFeature encode(const TactilePatch& patch) const override;

  int input_height() const { return height_; }
  int input_width() const { return width_; }
  std::vector<float> forward(const std::vector<float>& image) const;
  const EncoderWeights& weights() const { return weights_; }

 private:
  EncoderWeights weights_;
  std::size_t dim_ = 0;
  int height_ = 0, width_ = 0;
  std::vector<float> h_nc_;
};

}  // namespace tacpose
