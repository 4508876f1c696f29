#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "sonoforge/tensor.hpp"

namespace sonoforge {

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-7;
};

template <typename T>
struct AdamState {
  AdamOptions options;
  std::uint64_t step = 0;
  std::vector<std::vector<T>> m;  // one per parameter, lazily sized
  std::vector<std::vector<T>> v;
};

/// One bias-corrected Adam update of every parameter from its grad.
/// Gradients are left untouched.
template <typename T>
void adam_step(std::span<Parameter<T>* const> params, AdamState<T>& state) {
  if (state.m.size() != params.size()) {
    state.m.assign(params.size(), {});
    state.v.assign(params.size(), {});
  }
  ++state.step;
  const auto& o = state.options;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(o.beta1, t);
  const double c2 = 1.0 - std::pow(o.beta2, t);
  const T b1 = static_cast<T>(o.beta1), b2 = static_cast<T>(o.beta2);
  for (std::size_t p = 0; p < params.size(); ++p) {
    auto& param = *params[p];
    if (param.grad.shape() != param.value.shape()) fail(ErrorKind::Shape, "grad/value shape mismatch for " + param.name);
    auto& m = state.m[p];
    auto& v = state.v[p];
    if (m.size() != param.value.size()) {
      m.assign(param.value.size(), T(0));
      v.assign(param.value.size(), T(0));
    }
    T* theta = param.value.data();
    const T* g = param.grad.data();
    for (std::size_t i = 0; i < m.size(); ++i) {
      m[i] = b1 * m[i] + (T(1) - b1) * g[i];
      v[i] = b2 * v[i] + (T(1) - b2) * g[i] * g[i];
      const double m_hat = static_cast<double>(m[i]) / c1;
      const double v_hat = static_cast<double>(v[i]) / c2;
      theta[i] = static_cast<T>(theta[i] - o.lr * m_hat / (std::sqrt(v_hat) + o.eps));
    }
  }
}

}  // namespace sonoforge
