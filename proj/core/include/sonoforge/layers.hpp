#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "sonoforge/error.hpp"
#include "sonoforge/tensor.hpp"

namespace sonoforge {

enum class Mode { Train, Infer };

namespace detail {

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMatrix<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMatrix<T>>;

inline void expect_rank(const Shape& s, std::size_t rank, const char* what) {
  if (s.size() != rank) fail(ErrorKind::Shape, std::string(what) + " expects rank " + std::to_string(rank) + ", got " + shape_string(s));
}

}  // namespace detail

/// Batch normalization per frequency row: for input [N, H, W, C], the
/// statistics of row h are taken over the N, W and C axes.
template <typename T>
class BatchNormFreq {
 public:
  static constexpr T kMomentum = T(0.99);
  static constexpr T kEps = T(1e-3);

  BatchNormFreq() = default;
  explicit BatchNormFreq(std::size_t height)
      : gamma("bn.gamma", {height}), beta("bn.beta", {height}), running_mean({height}), running_var({height}, T(1)) {
    gamma.value.fill(T(1));
  }

  std::size_t height() const noexcept { return gamma.value.size(); }

  BasicTensor<T> forward(const BasicTensor<T>& x, Mode mode) {
    detail::expect_rank(x.shape(), 4, "batchnorm");
    if (x.dim(0) == 0) fail(ErrorKind::EmptyBatch, "batch norm on an empty batch");
    if (x.dim(1) != height()) fail(ErrorKind::Shape, "batch norm height mismatch: " + shape_string(x.shape()));
    const std::size_t n = x.dim(0), h = x.dim(1), inner = x.dim(2) * x.dim(3);
    const double count = static_cast<double>(n * inner);
    mode_ = mode;
    inv_std_.assign(h, T(0));
    xhat_ = BasicTensor<T>(x.shape());
    BasicTensor<T> y(x.shape());
    for (std::size_t r = 0; r < h; ++r) {
      T mean, var;
      if (mode == Mode::Train) {
        double s = 0.0;
        for (std::size_t b = 0; b < n; ++b) {
          const T* p = x.data() + (b * h + r) * inner;
          for (std::size_t i = 0; i < inner; ++i) s += p[i];
        }
        const double mu = s / count;
        double ss = 0.0;
        for (std::size_t b = 0; b < n; ++b) {
          const T* p = x.data() + (b * h + r) * inner;
          for (std::size_t i = 0; i < inner; ++i) ss += (p[i] - mu) * (p[i] - mu);
        }
        mean = static_cast<T>(mu);
        var = static_cast<T>(ss / count);
        running_mean[r] = kMomentum * running_mean[r] + (T(1) - kMomentum) * mean;
        running_var[r] = kMomentum * running_var[r] + (T(1) - kMomentum) * var;
      } else {
        mean = running_mean[r];
        var = running_var[r];
      }
      const T inv = T(1) / std::sqrt(var + kEps);
      inv_std_[r] = inv;
      const T g = gamma.value[r], bt = beta.value[r];
      for (std::size_t b = 0; b < n; ++b) {
        const std::size_t off = (b * h + r) * inner;
        for (std::size_t i = 0; i < inner; ++i) {
          const T xh = (x[off + i] - mean) * inv;
          xhat_[off + i] = xh;
          y[off + i] = g * xh + bt;
        }
      }
    }
    return y;
  }

  /// Accumulates into gamma.grad / beta.grad; returns dL/dx.
  BasicTensor<T> backward(const BasicTensor<T>& dy) {
    if (dy.shape() != xhat_.shape()) fail(ErrorKind::Shape, "batch norm backward shape mismatch");
    const std::size_t n = dy.dim(0), h = dy.dim(1), inner = dy.dim(2) * dy.dim(3);
    const double count = static_cast<double>(n * inner);
    BasicTensor<T> dx(dy.shape());
    for (std::size_t r = 0; r < h; ++r) {
      double sum_dy = 0.0, sum_dy_xhat = 0.0;
      for (std::size_t b = 0; b < n; ++b) {
        const std::size_t off = (b * h + r) * inner;
        for (std::size_t i = 0; i < inner; ++i) {
          sum_dy += dy[off + i];
          sum_dy_xhat += dy[off + i] * xhat_[off + i];
        }
      }
      gamma.grad[r] += static_cast<T>(sum_dy_xhat);
      beta.grad[r] += static_cast<T>(sum_dy);
      const T g = gamma.value[r], inv = inv_std_[r];
      for (std::size_t b = 0; b < n; ++b) {
        const std::size_t off = (b * h + r) * inner;
        for (std::size_t i = 0; i < inner; ++i) {
          if (mode_ == Mode::Train) {
            // dx = g * inv / M * (M dy - sum(dy) - xhat * sum(dy xhat))
            dx[off + i] = static_cast<T>(g * inv / count *
                                         (count * dy[off + i] - sum_dy - xhat_[off + i] * sum_dy_xhat));
          } else {
            dx[off + i] = g * inv * dy[off + i];
          }
        }
      }
    }
    return dx;
  }

  Parameter<T> gamma, beta;
  BasicTensor<T> running_mean, running_var;

 private:
  Mode mode_ = Mode::Train;
  BasicTensor<T> xhat_;
  std::vector<T> inv_std_;
};

/// 3x3 "same" convolution (cross-correlation, zero padding 1), NHWC input,
/// kernel [3, 3, Cin, Cout]. Lowered to im2col + GEMM one sample at a time.
template <typename T>
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(std::size_t cin, std::size_t cout, std::string prefix = "conv")
      : kernel(prefix + ".kernel", {3, 3, cin, cout}), bias(prefix + ".bias", {cout}) {}

  std::size_t in_channels() const noexcept { return kernel.value.dim(2); }
  std::size_t out_channels() const noexcept { return kernel.value.dim(3); }

  BasicTensor<T> forward(const BasicTensor<T>& x) {
    detail::expect_rank(x.shape(), 4, "conv2d");
    if (x.dim(3) != in_channels()) {
      fail(ErrorKind::Shape, "conv2d input " + shape_string(x.shape()) + " vs kernel " + shape_string(kernel.value.shape()));
    }
    input_ = x;
    const std::size_t n = x.dim(0), h = x.dim(1), w = x.dim(2), cin = x.dim(3), cout = out_channels();
    BasicTensor<T> y({n, h, w, cout});
    detail::ConstMatMap<T> k(kernel.value.data(), static_cast<Eigen::Index>(9 * cin), static_cast<Eigen::Index>(cout));
    Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>> b(bias.value.data(), static_cast<Eigen::Index>(cout));
    AlignedVector<T> col(h * w * 9 * cin);
    for (std::size_t s = 0; s < n; ++s) {
      im2col(x.data() + s * h * w * cin, h, w, cin, col.data());
      detail::ConstMatMap<T> c(col.data(), static_cast<Eigen::Index>(h * w), static_cast<Eigen::Index>(9 * cin));
      detail::MatMap<T> out(y.data() + s * h * w * cout, static_cast<Eigen::Index>(h * w), static_cast<Eigen::Index>(cout));
      out.noalias() = c * k;
      out.rowwise() += b;
    }
    return y;
  }

  /// Accumulates kernel/bias gradients. Returns dL/dx unless
  /// `need_input_grad` is false, in which case an empty tensor.
  BasicTensor<T> backward(const BasicTensor<T>& dy, bool need_input_grad = true) {
    const std::size_t n = input_.dim(0), h = input_.dim(1), w = input_.dim(2), cin = input_.dim(3), cout = out_channels();
    if (dy.shape() != Shape{n, h, w, cout}) fail(ErrorKind::Shape, "conv2d backward shape mismatch");
    detail::ConstMatMap<T> k(kernel.value.data(), static_cast<Eigen::Index>(9 * cin), static_cast<Eigen::Index>(cout));
    detail::MatMap<T> dk(kernel.grad.data(), static_cast<Eigen::Index>(9 * cin), static_cast<Eigen::Index>(cout));
    Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>> db(bias.grad.data(), static_cast<Eigen::Index>(cout));
    BasicTensor<T> dx;
    if (need_input_grad) dx = BasicTensor<T>(input_.shape());
    AlignedVector<T> col(h * w * 9 * cin);
    AlignedVector<T> dcol(need_input_grad ? col.size() : 0);
    for (std::size_t s = 0; s < n; ++s) {
      im2col(input_.data() + s * h * w * cin, h, w, cin, col.data());
      detail::ConstMatMap<T> c(col.data(), static_cast<Eigen::Index>(h * w), static_cast<Eigen::Index>(9 * cin));
      detail::ConstMatMap<T> g(dy.data() + s * h * w * cout, static_cast<Eigen::Index>(h * w), static_cast<Eigen::Index>(cout));
      dk.noalias() += c.transpose() * g;
      db += g.colwise().sum();
      if (need_input_grad) {
        detail::MatMap<T> dc(dcol.data(), static_cast<Eigen::Index>(h * w), static_cast<Eigen::Index>(9 * cin));
        dc.noalias() = g * k.transpose();
        col2im(dcol.data(), h, w, cin, dx.data() + s * h * w * cin);
      }
    }
    return dx;
  }

  void release_cache() { input_ = {}; }

  Parameter<T> kernel, bias;

 private:
  // col row p = (y, x); col column = (ky * 3 + kx) * cin + ci
  static void im2col(const T* img, std::size_t h, std::size_t w, std::size_t cin, T* col) {
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        T* dst = col + (y * w + x) * 9 * cin;
        for (int ky = 0; ky < 3; ++ky) {
          const auto sy = static_cast<std::ptrdiff_t>(y) + ky - 1;
          for (int kx = 0; kx < 3; ++kx, dst += cin) {
            const auto sx = static_cast<std::ptrdiff_t>(x) + kx - 1;
            if (sy < 0 || sx < 0 || sy >= static_cast<std::ptrdiff_t>(h) || sx >= static_cast<std::ptrdiff_t>(w)) {
              std::fill(dst, dst + cin, T(0));
            } else {
              const T* src = img + (static_cast<std::size_t>(sy) * w + static_cast<std::size_t>(sx)) * cin;
              std::copy(src, src + cin, dst);
            }
          }
        }
      }
    }
  }

  static void col2im(const T* col, std::size_t h, std::size_t w, std::size_t cin, T* img) {
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        const T* src = col + (y * w + x) * 9 * cin;
        for (int ky = 0; ky < 3; ++ky) {
          const auto sy = static_cast<std::ptrdiff_t>(y) + ky - 1;
          for (int kx = 0; kx < 3; ++kx, src += cin) {
            const auto sx = static_cast<std::ptrdiff_t>(x) + kx - 1;
            if (sy < 0 || sx < 0 || sy >= static_cast<std::ptrdiff_t>(h) || sx >= static_cast<std::ptrdiff_t>(w)) continue;
            T* dst = img + (static_cast<std::size_t>(sy) * w + static_cast<std::size_t>(sx)) * cin;
            for (std::size_t c = 0; c < cin; ++c) dst[c] += src[c];
          }
        }
      }
    }
  }

  BasicTensor<T> input_;
};

inline std::size_t pooled_extent(std::size_t n) noexcept { return (n + 1) / 2; }

/// 2x2 max pooling, stride 2, ceiling semantics. A trailing odd row or
/// column forms a partial window.
template <typename T>
class MaxPool2 {
 public:
  BasicTensor<T> forward(const BasicTensor<T>& x) {
    detail::expect_rank(x.shape(), 4, "maxpool");
    in_shape_ = x.shape();
    const std::size_t n = x.dim(0), h = x.dim(1), w = x.dim(2), c = x.dim(3);
    if (h == 0 || w == 0) fail(ErrorKind::Geometry, "max pooling of an empty map");
    const std::size_t oh = pooled_extent(h), ow = pooled_extent(w);
    BasicTensor<T> y({n, oh, ow, c});
    argmax_.assign(y.size(), 0);
    for (std::size_t b = 0; b < n; ++b) {
      for (std::size_t oy = 0; oy < oh; ++oy) {
        for (std::size_t ox = 0; ox < ow; ++ox) {
          const std::size_t out_off = ((b * oh + oy) * ow + ox) * c;
          for (std::size_t ch = 0; ch < c; ++ch) {
            std::size_t best_idx = ((b * h + 2 * oy) * w + 2 * ox) * c + ch;
            T best = x[best_idx];
            for (std::size_t dy = 0; dy < 2; ++dy) {
              const std::size_t iy = 2 * oy + dy;
              if (iy >= h) break;
              for (std::size_t dx = 0; dx < 2; ++dx) {
                const std::size_t ix = 2 * ox + dx;
                if (ix >= w) break;
                const std::size_t idx = ((b * h + iy) * w + ix) * c + ch;
                if (x[idx] > best) {  // strict: first index wins ties
                  best = x[idx];
                  best_idx = idx;
                }
              }
            }
            y[out_off + ch] = best;
            argmax_[out_off + ch] = best_idx;
          }
        }
      }
    }
    return y;
  }

  BasicTensor<T> backward(const BasicTensor<T>& dy) {
    if (dy.size() != argmax_.size()) fail(ErrorKind::Shape, "maxpool backward shape mismatch");
    BasicTensor<T> dx(in_shape_);
    for (std::size_t i = 0; i < dy.size(); ++i) dx[argmax_[i]] += dy[i];
    return dx;
  }

  void release_cache() { argmax_ = {}; }

 private:
  Shape in_shape_;
  std::vector<std::size_t> argmax_;
};

/// y = x W + b with x [N, D], W [D, U].
template <typename T>
class Dense {
 public:
  Dense() = default;
  Dense(std::size_t in, std::size_t out, std::string prefix = "dense")
      : weight(prefix + ".weight", {in, out}), bias(prefix + ".bias", {out}) {}

  std::size_t in_features() const noexcept { return weight.value.dim(0); }
  std::size_t out_features() const noexcept { return weight.value.dim(1); }

  BasicTensor<T> forward(const BasicTensor<T>& x) {
    detail::expect_rank(x.shape(), 2, "dense");
    if (x.dim(1) != in_features()) {
      fail(ErrorKind::Shape, "dense input " + shape_string(x.shape()) + " vs weight " + shape_string(weight.value.shape()));
    }
    input_ = x;
    const auto n = static_cast<Eigen::Index>(x.dim(0));
    const auto d = static_cast<Eigen::Index>(in_features()), u = static_cast<Eigen::Index>(out_features());
    BasicTensor<T> y({x.dim(0), out_features()});
    detail::MatMap<T> out(y.data(), n, u);
    out.noalias() = detail::ConstMatMap<T>(x.data(), n, d) * detail::ConstMatMap<T>(weight.value.data(), d, u);
    out.rowwise() += Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>>(bias.value.data(), u);
    return y;
  }

  BasicTensor<T> backward(const BasicTensor<T>& dy) {
    const auto n = static_cast<Eigen::Index>(input_.dim(0));
    const auto d = static_cast<Eigen::Index>(in_features()), u = static_cast<Eigen::Index>(out_features());
    if (dy.shape() != Shape{input_.dim(0), out_features()}) fail(ErrorKind::Shape, "dense backward shape mismatch");
    detail::ConstMatMap<T> g(dy.data(), n, u);
    detail::ConstMatMap<T> x(input_.data(), n, d);
    detail::MatMap<T>(weight.grad.data(), d, u).noalias() += x.transpose() * g;
    Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>>(bias.grad.data(), u) += g.colwise().sum();
    BasicTensor<T> dx(input_.shape());
    detail::MatMap<T>(dx.data(), n, d).noalias() = g * detail::ConstMatMap<T>(weight.value.data(), d, u).transpose();
    return dx;
  }

  void release_cache() { input_ = {}; }

  Parameter<T> weight, bias;

 private:
  BasicTensor<T> input_;
};

template <typename T>
void relu_inplace(BasicTensor<T>& x) {
  for (T& v : x.values()) v = v > T(0) ? v : T(0);
}

/// Masks dy where the ReLU output was zero.
template <typename T>
void relu_backward_inplace(BasicTensor<T>& dy, const BasicTensor<T>& relu_output) {
  for (std::size_t i = 0; i < dy.size(); ++i) {
    if (!(relu_output[i] > T(0))) dy[i] = T(0);
  }
}

/// Inverted dropout. The mask is drawn from a generator seeded per call, so
/// a forward pass is reproducible from (input, seed).
template <typename T>
class Dropout {
 public:
  explicit Dropout(double rate = 0.5) : rate_(rate) {
    if (!(rate >= 0.0 && rate < 1.0)) fail(ErrorKind::Range, "dropout rate must be in [0, 1)");
  }

  double rate() const noexcept { return rate_; }

  BasicTensor<T> forward(const BasicTensor<T>& x, Mode mode, std::uint64_t seed) {
    mask_.clear();
    if (mode == Mode::Infer || rate_ == 0.0) return x;
    std::mt19937_64 rng(seed);
    const T scale = static_cast<T>(1.0 / (1.0 - rate_));
    mask_.resize(x.size());
    BasicTensor<T> y(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      mask_[i] = u >= rate_ ? scale : T(0);
      y[i] = x[i] * mask_[i];
    }
    return y;
  }

  BasicTensor<T> backward(const BasicTensor<T>& dy) const {
    if (mask_.empty()) return dy;
    BasicTensor<T> dx(dy.shape());
    for (std::size_t i = 0; i < dy.size(); ++i) dx[i] = dy[i] * mask_[i];
    return dx;
  }

 private:
  double rate_;
  std::vector<T> mask_;
};

template <typename T>
struct LossResult {
  double loss = 0.0;
  BasicTensor<T> grad;  // dL/dlogits
  std::size_t correct = 0;
};

/// Row-wise softmax with max subtraction.
template <typename T>
BasicTensor<T> softmax(const BasicTensor<T>& logits) {
  detail::expect_rank(logits.shape(), 2, "softmax");
  BasicTensor<T> p(logits.shape());
  const std::size_t n = logits.dim(0), c = logits.dim(1);
  for (std::size_t i = 0; i < n; ++i) {
    const T* row = logits.data() + i * c;
    const T peak = *std::max_element(row, row + c);
    double z = 0.0;
    for (std::size_t k = 0; k < c; ++k) z += std::exp(static_cast<double>(row[k] - peak));
    for (std::size_t k = 0; k < c; ++k) p[i * c + k] = static_cast<T>(std::exp(static_cast<double>(row[k] - peak)) / z);
  }
  return p;
}

/// Sparse categorical cross-entropy, mean over the batch; grad is
/// (softmax - onehot) / N. `correct` counts argmax hits (first max wins).
template <typename T>
LossResult<T> softmax_xent(const BasicTensor<T>& logits, std::span<const int> labels) {
  detail::expect_rank(logits.shape(), 2, "softmax_xent");
  const std::size_t n = logits.dim(0), c = logits.dim(1);
  if (n == 0) fail(ErrorKind::EmptyBatch, "loss over an empty batch");
  if (labels.size() != n) fail(ErrorKind::Shape, "one label per logit row required");
  LossResult<T> r;
  r.grad = BasicTensor<T>(logits.shape());
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const int label = labels[i];
    if (label < 0 || static_cast<std::size_t>(label) >= c) {
      fail(ErrorKind::Label, "label " + std::to_string(label) + " outside 0.." + std::to_string(c - 1));
    }
    const T* row = logits.data() + i * c;
    const auto best = static_cast<std::size_t>(std::max_element(row, row + c) - row);
    if (best == static_cast<std::size_t>(label)) ++r.correct;
    const double peak = static_cast<double>(row[best]);
    double z = 0.0;
    for (std::size_t k = 0; k < c; ++k) z += std::exp(static_cast<double>(row[k]) - peak);
    const double log_z = std::log(z) + peak;
    total += log_z - static_cast<double>(row[label]);
    for (std::size_t k = 0; k < c; ++k) {
      const double p = std::exp(static_cast<double>(row[k]) - log_z);
      r.grad[i * c + k] = static_cast<T>((p - (k == static_cast<std::size_t>(label) ? 1.0 : 0.0)) / static_cast<double>(n));
    }
  }
  r.loss = total / static_cast<double>(n);
  return r;
}

}  // namespace sonoforge
