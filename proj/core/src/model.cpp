#include "sonoforge/model.hpp"

#include <cmath>
#include <random>

namespace sonoforge {
namespace {

void require_finite(const Tensor& t, const char* stage) {
  if (!t.all_finite()) fail(ErrorKind::NonFinite, std::string("non-finite activation after ") + stage);
}

void glorot_uniform(Tensor& w, std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (float& v : w.values()) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    v = static_cast<float>((2.0 * u - 1.0) * limit);
  }
}

}  // namespace

std::array<StageGeometry, 4> pooled_geometry(const ModelSpec& spec) {
  std::array<StageGeometry, 4> out{};
  std::size_t h = spec.input_height, w = spec.input_width;
  if (h == 0 || w == 0) fail(ErrorKind::Geometry, "input has an empty spatial dimension");
  for (std::size_t i = 0; i < 4; ++i) {
    h = pooled_extent(h);
    w = pooled_extent(w);
    if (h == 0 || w == 0) fail(ErrorKind::Geometry, "feature map collapsed at pool " + std::to_string(i + 1));
    out[i] = {h, w, spec.conv_filters[i]};
  }
  return out;
}

std::size_t flatten_size(const ModelSpec& spec) {
  const auto g = pooled_geometry(spec).back();
  return g.height * g.width * g.channels;
}

std::size_t parameter_count(const ModelSpec& spec) {
  std::size_t total = 2 * spec.input_height;  // gamma, beta
  std::size_t cin = 1;
  for (std::size_t f : spec.conv_filters) {
    total += 9 * cin * f + f;
    cin = f;
  }
  total += flatten_size(spec) * spec.dense_units + spec.dense_units;
  total += spec.dense_units * spec.n_classes + spec.n_classes;
  return total;
}

Model::Model(const ModelSpec& spec)
    : spec_(spec),
      bn_(spec.input_height),
      dropout_(spec.dropout_rate) {
  (void)pooled_geometry(spec);  // validates geometry
  std::size_t cin = 1;
  for (std::size_t i = 0; i < 4; ++i) {
    conv_[i] = Conv2d<float>(cin, spec.conv_filters[i], "conv" + std::to_string(i + 1));
    cin = spec.conv_filters[i];
  }
  hidden_ = Dense<float>(flatten_size(spec), spec.dense_units, "dense1");
  output_ = Dense<float>(spec.dense_units, spec.n_classes, "dense2");
}

void Model::initialize(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  bn_.gamma.value.fill(1.0f);
  bn_.beta.value.fill(0.0f);
  bn_.running_mean.fill(0.0f);
  bn_.running_var.fill(1.0f);
  for (auto& c : conv_) {
    glorot_uniform(c.kernel.value, 9 * c.in_channels(), 9 * c.out_channels(), rng);
    c.bias.value.fill(0.0f);
  }
  for (Dense<float>* d : {&hidden_, &output_}) {
    glorot_uniform(d->weight.value, d->in_features(), d->out_features(), rng);
    d->bias.value.fill(0.0f);
  }
  zero_grad();
}

void Model::zero_parameters() {
  for (auto* p : parameters()) p->value.fill(0.0f);
  bn_.running_mean.fill(0.0f);
  bn_.running_var.fill(1.0f);
}

Tensor Model::forward(const Tensor& x, Mode mode, std::uint64_t dropout_seed) {
  if (x.rank() != 4 || x.dim(1) != spec_.input_height || x.dim(2) != spec_.input_width || x.dim(3) != 1) {
    fail(ErrorKind::Geometry, "model expects [N," + std::to_string(spec_.input_height) + "," +
                                  std::to_string(spec_.input_width) + ",1], got " + shape_string(x.shape()));
  }
  Tensor a = bn_.forward(x, mode);
  require_finite(a, "batch norm");
  for (std::size_t i = 0; i < 4; ++i) {
    a = conv_[i].forward(a);
    relu_inplace(a);
    require_finite(a, "conv");
    if (mode == Mode::Train) conv_out_[i] = a;
    a = pool_[i].forward(a);
  }
  flat_from_ = a.shape();
  a.reshape({a.dim(0), a.size() / a.dim(0)});
  a = hidden_.forward(a);
  relu_inplace(a);
  if (mode == Mode::Train) hidden_out_ = a;
  a = dropout_.forward(a, mode, dropout_seed);
  a = output_.forward(a);
  require_finite(a, "output layer");
  return a;
}

void Model::backward(const Tensor& dlogits) {
  Tensor g = output_.backward(dlogits);
  g = dropout_.backward(g);
  relu_backward_inplace(g, hidden_out_);
  g = hidden_.backward(g);
  g.reshape(flat_from_);
  for (std::size_t i = 4; i-- > 0;) {
    g = pool_[i].backward(g);
    relu_backward_inplace(g, conv_out_[i]);
    conv_out_[i] = {};
    g = conv_[i].backward(g, true);
  }
  (void)bn_.backward(g);
  for (auto* p : parameters()) {
    if (!p->grad.all_finite()) fail(ErrorKind::NonFinite, "non-finite gradient for " + p->name);
  }
}

void Model::zero_grad() {
  for (auto* p : parameters()) p->grad.fill(0.0f);
}

void Model::release_caches() {
  for (auto& c : conv_) c.release_cache();
  for (auto& p : pool_) p.release_cache();
  hidden_.release_cache();
  output_.release_cache();
  for (auto& t : conv_out_) t = {};
  hidden_out_ = {};
}

std::vector<Parameter<float>*> Model::parameters() {
  std::vector<Parameter<float>*> out{&bn_.gamma, &bn_.beta};
  for (auto& c : conv_) {
    out.push_back(&c.kernel);
    out.push_back(&c.bias);
  }
  for (Dense<float>* d : {&hidden_, &output_}) {
    out.push_back(&d->weight);
    out.push_back(&d->bias);
  }
  return out;
}

std::vector<const Parameter<float>*> Model::parameters() const {
  auto mut = const_cast<Model*>(this)->parameters();
  return {mut.begin(), mut.end()};
}

std::vector<std::pair<std::string, Tensor*>> Model::buffers() {
  return {{"bn.running_mean", &bn_.running_mean}, {"bn.running_var", &bn_.running_var}};
}

std::vector<std::pair<std::string, const Tensor*>> Model::buffers() const {
  return {{"bn.running_mean", &bn_.running_mean}, {"bn.running_var", &bn_.running_var}};
}

std::size_t Model::trainable_count() const {
  std::size_t n = 0;
  for (const auto* p : parameters()) n += p->value.size();
  return n;
}

}  // namespace sonoforge
