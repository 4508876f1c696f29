#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sonoforge/layers.hpp"

namespace sonoforge {

/// Geometry of the classifier: batch norm over frequency, four conv/pool
/// stages, flatten, dense + dropout, dense softmax output.
struct ModelSpec {
  std::size_t input_height = 128;  // feature bins
  std::size_t input_width = 216;   // frames
  std::size_t n_classes = 50;
  std::array<std::size_t, 4> conv_filters{64, 128, 256, 256};
  std::size_t dense_units = 256;
  double dropout_rate = 0.5;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

struct StageGeometry {
  std::size_t height;
  std::size_t width;
  std::size_t channels;
};

/// Spatial size after each of the four pools; throws Geometry if any
/// extent would reach zero.
std::array<StageGeometry, 4> pooled_geometry(const ModelSpec& spec);
std::size_t flatten_size(const ModelSpec& spec);
/// Trainable parameter count by closed form.
std::size_t parameter_count(const ModelSpec& spec);

class Model {
 public:
  explicit Model(const ModelSpec& spec);

  const ModelSpec& spec() const noexcept { return spec_; }

  /// Glorot-uniform conv/dense weights, zero biases, gamma 1, beta 0,
  /// running mean 0 / variance 1.
  void initialize(std::uint64_t seed);
  void zero_parameters();

  /// x is [N, H, W, 1]; returns logits [N, n_classes]. Train mode caches
  /// activations for backward and draws the dropout mask from dropout_seed.
  Tensor forward(const Tensor& x, Mode mode, std::uint64_t dropout_seed = 0);
  /// Accumulates parameter gradients from dL/dlogits.
  void backward(const Tensor& dlogits);
  void zero_grad();
  void release_caches();

  /// Trainable parameters in declaration order.
  std::vector<Parameter<float>*> parameters();
  std::vector<const Parameter<float>*> parameters() const;
  /// Non-trainable state (batch-norm running statistics).
  std::vector<std::pair<std::string, Tensor*>> buffers();
  std::vector<std::pair<std::string, const Tensor*>> buffers() const;
  std::size_t trainable_count() const;

 private:
  ModelSpec spec_;
  BatchNormFreq<float> bn_;
  std::array<Conv2d<float>, 4> conv_;
  std::array<MaxPool2<float>, 4> pool_;
  Dense<float> hidden_;
  Dropout<float> dropout_;
  Dense<float> output_;

  // ReLU outputs kept for the backward mask
  std::array<Tensor, 4> conv_out_;
  Tensor hidden_out_;
  Shape flat_from_;
};

}  // namespace sonoforge
