#include "cftrack/ops.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "cftrack/error.hpp"
#include "gemm.hpp"

namespace cftrack::ops {

namespace {

thread_local std::uint64_t mac_total = 0;
thread_local bool mac_active = false;

template <typename T>
using NodeT = cftrack::detail::TensorNode<T>;

void require_rank(const Shape& shape, std::size_t rank, const char* what) {
  if (shape.size() != rank) {
    throw ShapeError(std::string(what) + ": expected rank " + std::to_string(rank) + ", got shape " +
                     shape_to_string(shape));
  }
}

int conv_out_size(int size, int k, int stride, int padding) {
  return (size + 2 * padding - k) / stride + 1;
}

void check_conv_geometry(const Shape& in, int k, int stride, int padding, const char* what) {
  if (k % 2 == 0) throw ShapeError(std::string(what) + ": kernel size must be odd, got " + std::to_string(k));
  if (stride < 1) throw ShapeError(std::string(what) + ": stride must be >= 1");
  if (padding < 0) throw ShapeError(std::string(what) + ": padding must be >= 0");
  if (in[1] + 2 * padding < k || in[2] + 2 * padding < k) {
    throw ShapeError(std::string(what) + ": input " + shape_to_string(in) + " smaller than kernel " +
                     std::to_string(k) + " with padding " + std::to_string(padding));
  }
}

// Valid output-column range for tap offset `v`: stride*j + v - padding in [0, size).
void tap_range(int out_size, int in_size, int stride, int padding, int v, int& lo, int& hi) {
  const int start = padding - v;
  lo = start <= 0 ? 0 : (start + stride - 1) / stride;
  const int last = in_size - 1 + padding - v;
  hi = last < 0 ? -1 : std::min(out_size - 1, last / stride);
}

template <typename T>
void im2col(const T* in, int C, int H, int W, int k, int stride, int padding, int Ho, int Wo, T* col) {
  const std::size_t plane = static_cast<std::size_t>(Ho) * Wo;
  for (int c = 0; c < C; ++c) {
    for (int u = 0; u < k; ++u) {
      for (int v = 0; v < k; ++v) {
        T* row = col + (static_cast<std::size_t>(c) * k * k + u * k + v) * plane;
        std::fill(row, row + plane, T(0));
        int jlo, jhi;
        tap_range(Wo, W, stride, padding, v, jlo, jhi);
        for (int i = 0; i < Ho; ++i) {
          const int y = i * stride + u - padding;
          if (y < 0 || y >= H) continue;
          const T* src = in + (static_cast<std::size_t>(c) * H + y) * W;
          T* dst = row + static_cast<std::size_t>(i) * Wo;
          for (int j = jlo; j <= jhi; ++j) dst[j] = src[j * stride + v - padding];
        }
      }
    }
  }
}

template <typename T>
void col2im_add(const T* col, int C, int H, int W, int k, int stride, int padding, int Ho, int Wo, T* in) {
  const std::size_t plane = static_cast<std::size_t>(Ho) * Wo;
  for (int c = 0; c < C; ++c) {
    for (int u = 0; u < k; ++u) {
      for (int v = 0; v < k; ++v) {
        const T* row = col + (static_cast<std::size_t>(c) * k * k + u * k + v) * plane;
        int jlo, jhi;
        tap_range(Wo, W, stride, padding, v, jlo, jhi);
        for (int i = 0; i < Ho; ++i) {
          const int y = i * stride + u - padding;
          if (y < 0 || y >= H) continue;
          T* dst = in + (static_cast<std::size_t>(c) * H + y) * W;
          const T* src = row + static_cast<std::size_t>(i) * Wo;
          for (int j = jlo; j <= jhi; ++j) dst[j * stride + v - padding] += src[j];
        }
      }
    }
  }
}

}  // namespace

namespace detail {
void add_macs(std::uint64_t n) {
  if (mac_active) mac_total += n;
}
}  // namespace detail

MacCounter::MacCounter() : start_(mac_total), was_active_(mac_active) { mac_active = true; }
MacCounter::~MacCounter() { mac_active = was_active_; }
std::uint64_t MacCounter::count() const { return mac_total - start_; }

template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& kernel, const Tensor<T>& bias, int stride,
                 int padding) {
  require_rank(input.shape(), 3, "conv2d input");
  require_rank(kernel.shape(), 4, "conv2d kernel");
  const int C = input.dim(0), H = input.dim(1), W = input.dim(2);
  const int O = kernel.dim(0), k = kernel.dim(2);
  if (kernel.dim(1) != C || kernel.dim(3) != k) {
    throw ShapeError("conv2d: input " + shape_to_string(input.shape()) + " incompatible with kernel " +
                     shape_to_string(kernel.shape()));
  }
  if (bias.numel() != static_cast<std::size_t>(O)) {
    throw ShapeError("conv2d: bias " + shape_to_string(bias.shape()) + " does not match " +
                     std::to_string(O) + " output channels");
  }
  check_conv_geometry(input.shape(), k, stride, padding, "conv2d");
  const int Ho = conv_out_size(H, k, stride, padding);
  const int Wo = conv_out_size(W, k, stride, padding);
  const int HWo = Ho * Wo;
  const int Ckk = C * k * k;
  const bool direct = k == 1 && stride == 1 && padding == 0;

  std::shared_ptr<std::vector<T>> col;
  const T* col_data = input.data().data();
  if (!direct) {
    col = std::make_shared<std::vector<T>>(static_cast<std::size_t>(Ckk) * HWo);
    im2col(input.data().data(), C, H, W, k, stride, padding, Ho, Wo, col->data());
    col_data = col->data();
  }

  auto backward = [=](NodeT<T>& self) {
    auto& in = *self.parents[0];
    auto& ker = *self.parents[1];
    auto& b = *self.parents[2];
    const T* g = self.grad.data();
    const T* cd = direct ? in.data.data() : col->data();
    if (ker.requires_grad) kernels::gemm_nt(O, Ckk, HWo, g, cd, ker.grad.data());
    if (b.requires_grad) {
      for (int o = 0; o < O; ++o) {
        T s = T(0);
        const T* row = g + static_cast<std::size_t>(o) * HWo;
        for (int j = 0; j < HWo; ++j) s += row[j];
        b.grad[o] += s;
      }
    }
    if (in.requires_grad) {
      if (direct) {
        kernels::gemm_tn(Ckk, HWo, O, ker.data.data(), g, in.grad.data());
      } else {
        std::vector<T> dcol(static_cast<std::size_t>(Ckk) * HWo, T(0));
        kernels::gemm_tn(Ckk, HWo, O, ker.data.data(), g, dcol.data());
        col2im_add(dcol.data(), C, H, W, k, stride, padding, Ho, Wo, in.grad.data());
      }
    }
  };

  Tensor<T> out = Tensor<T>::make_result({O, Ho, Wo}, {input.node_ptr(), kernel.node_ptr(), bias.node_ptr()},
                                         backward);
  T* o = out.data().data();
  for (int oc = 0; oc < O; ++oc) std::fill(o + static_cast<std::size_t>(oc) * HWo, o + static_cast<std::size_t>(oc + 1) * HWo, bias[oc]);
  kernels::gemm_nn(O, HWo, Ckk, kernel.data().data(), col_data, o);
  detail::add_macs(static_cast<std::uint64_t>(O) * Ckk * HWo);
  return out;
}

template <typename T>
Tensor<T> depthwise_conv2d(const Tensor<T>& input, const Tensor<T>& kernel, const Tensor<T>& bias,
                           int stride, int padding) {
  require_rank(input.shape(), 3, "depthwise_conv2d input");
  require_rank(kernel.shape(), 4, "depthwise_conv2d kernel");
  const int C = input.dim(0), H = input.dim(1), W = input.dim(2);
  const int k = kernel.dim(2);
  if (kernel.dim(0) != C || kernel.dim(1) != 1 || kernel.dim(3) != k) {
    throw ShapeError("depthwise_conv2d: input " + shape_to_string(input.shape()) +
                     " incompatible with kernel " + shape_to_string(kernel.shape()));
  }
  if (bias.numel() != static_cast<std::size_t>(C)) {
    throw ShapeError("depthwise_conv2d: bias " + shape_to_string(bias.shape()) + " does not match " +
                     std::to_string(C) + " channels");
  }
  check_conv_geometry(input.shape(), k, stride, padding, "depthwise_conv2d");
  const int Ho = conv_out_size(H, k, stride, padding);
  const int Wo = conv_out_size(W, k, stride, padding);

  auto backward = [=](NodeT<T>& self) {
    auto& in = *self.parents[0];
    auto& ker = *self.parents[1];
    auto& b = *self.parents[2];
    const T* g = self.grad.data();
    for (int c = 0; c < C; ++c) {
      const T* gc = g + static_cast<std::size_t>(c) * Ho * Wo;
      if (b.requires_grad) {
        T s = T(0);
        for (int j = 0; j < Ho * Wo; ++j) s += gc[j];
        b.grad[c] += s;
      }
      const T* inc = in.data.data() + static_cast<std::size_t>(c) * H * W;
      T* dinc = in.requires_grad ? in.grad.data() + static_cast<std::size_t>(c) * H * W : nullptr;
      for (int u = 0; u < k; ++u) {
        for (int v = 0; v < k; ++v) {
          const T w = ker.data[(static_cast<std::size_t>(c) * k + u) * k + v];
          int jlo, jhi;
          tap_range(Wo, W, stride, padding, v, jlo, jhi);
          T acc = T(0);
          for (int i = 0; i < Ho; ++i) {
            const int y = i * stride + u - padding;
            if (y < 0 || y >= H) continue;
            const T* src = inc + static_cast<std::size_t>(y) * W + v - padding;
            const T* gr = gc + static_cast<std::size_t>(i) * Wo;
            for (int j = jlo; j <= jhi; ++j) acc += gr[j] * src[j * stride];
            if (dinc) {
              T* dst = dinc + static_cast<std::size_t>(y) * W + v - padding;
              for (int j = jlo; j <= jhi; ++j) dst[j * stride] += w * gr[j];
            }
          }
          if (ker.requires_grad) ker.grad[(static_cast<std::size_t>(c) * k + u) * k + v] += acc;
        }
      }
    }
  };

  Tensor<T> out = Tensor<T>::make_result({C, Ho, Wo}, {input.node_ptr(), kernel.node_ptr(), bias.node_ptr()},
                                         backward);
  T* o = out.data().data();
  const T* in = input.data().data();
  const T* ker = kernel.data().data();
  for (int c = 0; c < C; ++c) {
    T* oc = o + static_cast<std::size_t>(c) * Ho * Wo;
    std::fill(oc, oc + Ho * Wo, bias[c]);
    const T* inc = in + static_cast<std::size_t>(c) * H * W;
    for (int u = 0; u < k; ++u) {
      for (int v = 0; v < k; ++v) {
        const T w = ker[(static_cast<std::size_t>(c) * k + u) * k + v];
        int jlo, jhi;
        tap_range(Wo, W, stride, padding, v, jlo, jhi);
        for (int i = 0; i < Ho; ++i) {
          const int y = i * stride + u - padding;
          if (y < 0 || y >= H) continue;
          const T* src = inc + static_cast<std::size_t>(y) * W + v - padding;
          T* dst = oc + static_cast<std::size_t>(i) * Wo;
          if (stride == 1) {
#pragma omp simd
            for (int j = jlo; j <= jhi; ++j) dst[j] += w * src[j];
          } else {
            for (int j = jlo; j <= jhi; ++j) dst[j] += w * src[j * stride];
          }
        }
      }
    }
  }
  detail::add_macs(static_cast<std::uint64_t>(C) * k * k * Ho * Wo);
  return out;
}

template <typename T>
Tensor<T> depthwise_separable_conv(const Tensor<T>& input, const Tensor<T>& depthwise_kernel,
                                   const Tensor<T>& depthwise_bias, const Tensor<T>& pointwise_kernel,
                                   const Tensor<T>& pointwise_bias, int stride, int padding) {
  if (pointwise_kernel.rank() != 4 || pointwise_kernel.dim(2) != 1 || pointwise_kernel.dim(3) != 1) {
    throw ShapeError("depthwise_separable_conv: pointwise kernel must be [Cout,Cin,1,1], got " +
                     shape_to_string(pointwise_kernel.shape()));
  }
  Tensor<T> mid = depthwise_conv2d(input, depthwise_kernel, depthwise_bias, stride, padding);
  return conv2d(mid, pointwise_kernel, pointwise_bias, 1, 0);
}

template <typename T>
Tensor<T> fully_connected(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias) {
  require_rank(weight.shape(), 2, "fully_connected weight");
  const int M = weight.dim(0), N = weight.dim(1);
  if (input.numel() != static_cast<std::size_t>(N) || bias.numel() != static_cast<std::size_t>(M)) {
    throw ShapeError("fully_connected: input " + shape_to_string(input.shape()) + ", weight " +
                     shape_to_string(weight.shape()) + ", bias " + shape_to_string(bias.shape()));
  }
  auto backward = [=](NodeT<T>& self) {
    auto& x = *self.parents[0];
    auto& w = *self.parents[1];
    auto& b = *self.parents[2];
    const T* g = self.grad.data();
    for (int i = 0; i < M; ++i) {
      if (b.requires_grad) b.grad[i] += g[i];
      if (w.requires_grad) {
        T* wr = w.grad.data() + static_cast<std::size_t>(i) * N;
        for (int j = 0; j < N; ++j) wr[j] += g[i] * x.data[j];
      }
      if (x.requires_grad) {
        const T* wr = w.data.data() + static_cast<std::size_t>(i) * N;
        for (int j = 0; j < N; ++j) x.grad[j] += g[i] * wr[j];
      }
    }
  };
  Tensor<T> out = Tensor<T>::make_result({M}, {input.node_ptr(), weight.node_ptr(), bias.node_ptr()}, backward);
  for (int i = 0; i < M; ++i) {
    T s = bias[i];
    const T* wr = weight.data().data() + static_cast<std::size_t>(i) * N;
    for (int j = 0; j < N; ++j) s += wr[j] * input[j];
    out[i] = s;
  }
  detail::add_macs(static_cast<std::uint64_t>(M) * N);
  return out;
}

template <typename T>
Tensor<T> activation(const Tensor<T>& input, Activation kind) {
  const std::size_t n = input.numel();
  auto backward = [kind, n](NodeT<T>& self) {
    auto& x = *self.parents[0];
    if (!x.requires_grad) return;
    for (std::size_t i = 0; i < n; ++i) {
      if (kind == Activation::kRelu) {
        if (x.data[i] > T(0)) x.grad[i] += self.grad[i];
      } else {
        const T y = self.data[i];
        x.grad[i] += self.grad[i] * y * (T(1) - y);
      }
    }
  };
  Tensor<T> out = Tensor<T>::make_result(input.shape(), {input.node_ptr()}, backward);
  for (std::size_t i = 0; i < n; ++i) {
    const T x = input[i];
    if (kind == Activation::kRelu) {
      out[i] = x > T(0) ? x : T(0);
    } else {
      // Branch on sign so exp never overflows.
      out[i] = x >= T(0) ? T(1) / (T(1) + std::exp(-x)) : std::exp(x) / (T(1) + std::exp(x));
    }
  }
  return out;
}

template <typename T>
Tensor<T> global_avg_pool(const Tensor<T>& input) {
  require_rank(input.shape(), 3, "global_avg_pool");
  const int C = input.dim(0);
  const std::size_t plane = static_cast<std::size_t>(input.dim(1)) * input.dim(2);
  const T inv = T(1) / static_cast<T>(plane);
  auto backward = [=](NodeT<T>& self) {
    auto& x = *self.parents[0];
    if (!x.requires_grad) return;
    for (int c = 0; c < C; ++c) {
      const T g = self.grad[c] * inv;
      T* dst = x.grad.data() + c * plane;
      for (std::size_t j = 0; j < plane; ++j) dst[j] += g;
    }
  };
  Tensor<T> out = Tensor<T>::make_result({C}, {input.node_ptr()}, backward);
  for (int c = 0; c < C; ++c) {
    T s = T(0);
    const T* src = input.data().data() + c * plane;
    for (std::size_t j = 0; j < plane; ++j) s += src[j];
    out[c] = s * inv;
  }
  return out;
}

template <typename T>
Tensor<T> scale_channels(const Tensor<T>& input, const Tensor<T>& gates) {
  require_rank(input.shape(), 3, "scale_channels");
  const int C = input.dim(0);
  if (gates.numel() != static_cast<std::size_t>(C)) {
    throw ShapeError("scale_channels: " + std::to_string(gates.numel()) + " gates for input " +
                     shape_to_string(input.shape()));
  }
  const std::size_t plane = static_cast<std::size_t>(input.dim(1)) * input.dim(2);
  auto backward = [=](NodeT<T>& self) {
    auto& x = *self.parents[0];
    auto& g = *self.parents[1];
    for (int c = 0; c < C; ++c) {
      const T* gout = self.grad.data() + c * plane;
      if (x.requires_grad) {
        T* dx = x.grad.data() + c * plane;
        for (std::size_t j = 0; j < plane; ++j) dx[j] += g.data[c] * gout[j];
      }
      if (g.requires_grad) {
        const T* xs = x.data.data() + c * plane;
        T s = T(0);
        for (std::size_t j = 0; j < plane; ++j) s += gout[j] * xs[j];
        g.grad[c] += s;
      }
    }
  };
  Tensor<T> out = Tensor<T>::make_result(input.shape(), {input.node_ptr(), gates.node_ptr()}, backward);
  for (int c = 0; c < C; ++c) {
    const T* src = input.data().data() + c * plane;
    T* dst = out.data().data() + c * plane;
    for (std::size_t j = 0; j < plane; ++j) dst[j] = gates[c] * src[j];
  }
  return out;
}

template <typename T>
Tensor<T> crop_window(const Tensor<T>& input, int row, int col, int rows, int cols) {
  require_rank(input.shape(), 3, "crop_window");
  const int C = input.dim(0), H = input.dim(1), W = input.dim(2);
  if (row < 0 || col < 0 || rows < 1 || cols < 1 || row + rows > H || col + cols > W) {
    throw ShapeError("crop_window: window at (" + std::to_string(row) + "," + std::to_string(col) + ") of size " +
                     std::to_string(rows) + "x" + std::to_string(cols) + " exceeds " +
                     shape_to_string(input.shape()));
  }
  auto backward = [=](NodeT<T>& self) {
    auto& x = *self.parents[0];
    if (!x.requires_grad) return;
    for (int c = 0; c < C; ++c)
      for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j)
          x.grad[(static_cast<std::size_t>(c) * H + row + i) * W + col + j] +=
              self.grad[(static_cast<std::size_t>(c) * rows + i) * cols + j];
  };
  Tensor<T> out = Tensor<T>::make_result({C, rows, cols}, {input.node_ptr()}, backward);
  for (int c = 0; c < C; ++c)
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j)
        out[(static_cast<std::size_t>(c) * rows + i) * cols + j] =
            input[(static_cast<std::size_t>(c) * H + row + i) * W + col + j];
  return out;
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError("add: " + shape_to_string(a.shape()) + " vs " + shape_to_string(b.shape()));
  }
  const std::size_t n = a.numel();
  auto backward = [n](NodeT<T>& self) {
    for (int p = 0; p < 2; ++p) {
      auto& x = *self.parents[p];
      if (!x.requires_grad) continue;
      for (std::size_t i = 0; i < n; ++i) x.grad[i] += self.grad[i];
    }
  };
  Tensor<T> out = Tensor<T>::make_result(a.shape(), {a.node_ptr(), b.node_ptr()}, backward);
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
  return out;
}

template <typename T>
Tensor<T> scale(const Tensor<T>& a, T factor) {
  const std::size_t n = a.numel();
  auto backward = [n, factor](NodeT<T>& self) {
    auto& x = *self.parents[0];
    if (!x.requires_grad) return;
    for (std::size_t i = 0; i < n; ++i) x.grad[i] += factor * self.grad[i];
  };
  Tensor<T> out = Tensor<T>::make_result(a.shape(), {a.node_ptr()}, backward);
  for (std::size_t i = 0; i < n; ++i) out[i] = factor * a[i];
  return out;
}

template <typename T>
Tensor<T> one_minus(const Tensor<T>& a) {
  const std::size_t n = a.numel();
  auto backward = [n](NodeT<T>& self) {
    auto& x = *self.parents[0];
    if (!x.requires_grad) return;
    for (std::size_t i = 0; i < n; ++i) x.grad[i] -= self.grad[i];
  };
  Tensor<T> out = Tensor<T>::make_result(a.shape(), {a.node_ptr()}, backward);
  for (std::size_t i = 0; i < n; ++i) out[i] = T(1) - a[i];
  return out;
}

template <typename T>
Tensor<T> sum(const Tensor<T>& a) {
  const std::size_t n = a.numel();
  auto backward = [n](NodeT<T>& self) {
    auto& x = *self.parents[0];
    if (!x.requires_grad) return;
    for (std::size_t i = 0; i < n; ++i) x.grad[i] += self.grad[0];
  };
  Tensor<T> out = Tensor<T>::make_result({1}, {a.node_ptr()}, backward);
  T s = T(0);
  for (std::size_t i = 0; i < n; ++i) s += a[i];
  out[0] = s;
  return out;
}

template <typename T>
Tensor<T> mean(const Tensor<T>& a) {
  return scale(sum(a), T(1) / static_cast<T>(a.numel()));
}

template <typename T>
Tensor<T> weighted_sum(const std::vector<Tensor<T>>& terms, const std::vector<T>& weights) {
  if (terms.size() != weights.size() || terms.empty()) {
    throw ShapeError("weighted_sum: " + std::to_string(terms.size()) + " terms, " +
                     std::to_string(weights.size()) + " weights");
  }
  std::vector<std::shared_ptr<NodeT<T>>> parents;
  for (const auto& t : terms) {
    if (t.numel() != 1) throw ShapeError("weighted_sum: term of shape " + shape_to_string(t.shape()));
    parents.push_back(t.node_ptr());
  }
  auto backward = [weights](NodeT<T>& self) {
    for (std::size_t i = 0; i < weights.size(); ++i) {
      auto& x = *self.parents[i];
      if (x.requires_grad) x.grad[0] += weights[i] * self.grad[0];
    }
  };
  Tensor<T> out = Tensor<T>::make_result({1}, std::move(parents), backward);
  T s = T(0);
  for (std::size_t i = 0; i < terms.size(); ++i) s += weights[i] * terms[i][0];
  out[0] = s;
  return out;
}

template <typename T>
Tensor<T> pixelwise_correlation(const Tensor<T>& template_features, const Tensor<T>& search_features) {
  require_rank(template_features.shape(), 3, "pixelwise_correlation template");
  require_rank(search_features.shape(), 3, "pixelwise_correlation search");
  const int C = template_features.dim(0);
  if (search_features.dim(0) != C) {
    throw ShapeError("pixelwise_correlation: template " + shape_to_string(template_features.shape()) +
                     " and search " + shape_to_string(search_features.shape()) + " differ in channels");
  }
  const int P = template_features.dim(1) * template_features.dim(2);
  const int Hs = search_features.dim(1), Ws = search_features.dim(2);
  const int S = Hs * Ws;
  auto backward = [=](NodeT<T>& self) {
    auto& z = *self.parents[0];
    auto& x = *self.parents[1];
    const T* g = self.grad.data();
    // out = Z^T X with Z [C,P], X [C,S]
    if (z.requires_grad) kernels::gemm_nt(C, P, S, x.data.data(), g, z.grad.data());
    if (x.requires_grad) kernels::gemm_nn(C, S, P, z.data.data(), g, x.grad.data());
  };
  Tensor<T> out = Tensor<T>::make_result({P, Hs, Ws}, {template_features.node_ptr(), search_features.node_ptr()},
                                         backward);
  kernels::gemm_tn(P, S, C, template_features.data().data(), search_features.data().data(), out.data().data());
  detail::add_macs(static_cast<std::uint64_t>(P) * C * S);
  return out;
}

#define CFTRACK_INSTANTIATE_OPS(T)                                                                          \
  template Tensor<T> conv2d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, int, int);                \
  template Tensor<T> depthwise_conv2d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, int, int);      \
  template Tensor<T> depthwise_separable_conv(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,         \
                                              const Tensor<T>&, const Tensor<T>&, int, int);                \
  template Tensor<T> fully_connected(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);                 \
  template Tensor<T> activation(const Tensor<T>&, Activation);                                              \
  template Tensor<T> global_avg_pool(const Tensor<T>&);                                                     \
  template Tensor<T> scale_channels(const Tensor<T>&, const Tensor<T>&);                                    \
  template Tensor<T> crop_window(const Tensor<T>&, int, int, int, int);                                     \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                                               \
  template Tensor<T> scale(const Tensor<T>&, T);                                                            \
  template Tensor<T> one_minus(const Tensor<T>&);                                                           \
  template Tensor<T> sum(const Tensor<T>&);                                                                 \
  template Tensor<T> mean(const Tensor<T>&);                                                                \
  template Tensor<T> weighted_sum(const std::vector<Tensor<T>>&, const std::vector<T>&);                    \
  template Tensor<T> pixelwise_correlation(const Tensor<T>&, const Tensor<T>&);

CFTRACK_INSTANTIATE_OPS(float)
CFTRACK_INSTANTIATE_OPS(double)

}  // namespace cftrack::ops
