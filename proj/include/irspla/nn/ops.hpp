#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "irspla/errors.hpp"
#include "irspla/nn/gemm.hpp"
#include "irspla/nn/tensor.hpp"

namespace irspla::nn {

namespace detail {

inline void require_rank(const Tensor& t, std::size_t rank, const char* op) {
  if (t.rank() != rank)
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " + shape_string(t.shape()));
}

inline void require_same(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape())
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
}

inline std::vector<double>* grad_of(Node& n, std::size_t i) {
  Node& in = *n.inputs[i];
  return in.requires_grad ? &in.ensure_grad() : nullptr;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Linear algebra
// ---------------------------------------------------------------------------

/// [m,k] x [k,n] -> [m,n]
inline Tensor matmul(const Tensor& a, const Tensor& b) {
  detail::require_rank(a, 2, "matmul");
  detail::require_rank(b, 2, "matmul");
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) throw ShapeError("matmul: " + shape_string(a.shape()) + " by " + shape_string(b.shape()));
  std::vector<double> out(m * n, 0.0);
  kernels::gemm(m, n, k, a.values().data(), k, b.values().data(), n, out.data(), n);
  return make_result({m, n}, std::move(out), {a, b}, [m, k, n](Node& self) {
    const auto& g = self.grad;
    if (auto* ga = detail::grad_of(self, 0)) {
      const auto bt = kernels::transposed(self.inputs[1]->value.data(), k, n);
      kernels::gemm(m, k, n, g.data(), n, bt.data(), k, ga->data(), k);
    }
    if (auto* gb = detail::grad_of(self, 1)) {
      const auto at = kernels::transposed(self.inputs[0]->value.data(), m, k);
      kernels::gemm(k, n, m, at.data(), m, g.data(), n, gb->data(), n);
    }
  });
}

inline Tensor transpose(const Tensor& a) {
  detail::require_rank(a, 2, "transpose");
  const std::size_t m = a.dim(0), n = a.dim(1);
  std::vector<double> out(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = a.values()[i * n + j];
  return make_result({n, m}, std::move(out), {a}, [m, n](Node& self) {
    auto* ga = detail::grad_of(self, 0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) (*ga)[i * n + j] += self.grad[j * m + i];
  });
}

inline Tensor reshape(const Tensor& a, Shape shape) {
  if (numel(shape) != a.size())
    throw ShapeError("reshape: " + shape_string(a.shape()) + " to " + shape_string(shape));
  return make_result(std::move(shape), a.values(), {a}, [](Node& self) {
    auto* ga = detail::grad_of(self, 0);
    for (std::size_t i = 0; i < self.grad.size(); ++i) (*ga)[i] += self.grad[i];
  });
}

// ---------------------------------------------------------------------------
// Elementwise
// ---------------------------------------------------------------------------

inline Tensor add(const Tensor& a, const Tensor& b) {
  detail::require_same(a, b, "add");
  std::vector<double> out(a.values());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.values()[i];
  return make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
    for (std::size_t k = 0; k < 2; ++k)
      if (auto* g = detail::grad_of(self, k))
        for (std::size_t i = 0; i < self.grad.size(); ++i) (*g)[i] += self.grad[i];
  });
}

/// Sum of any number of same-shape tensors.
inline Tensor add_n(const std::vector<Tensor>& xs) {
  if (xs.empty()) throw ShapeError("add_n: no operands");
  std::vector<double> out(xs[0].values());
  for (std::size_t k = 1; k < xs.size(); ++k) {
    detail::require_same(xs[0], xs[k], "add_n");
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += xs[k].values()[i];
  }
  return make_result(xs[0].shape(), std::move(out), xs, [](Node& self) {
    for (std::size_t k = 0; k < self.inputs.size(); ++k)
      if (auto* g = detail::grad_of(self, k))
        for (std::size_t i = 0; i < self.grad.size(); ++i) (*g)[i] += self.grad[i];
  });
}

/// [m,n] + bias[n] broadcast over rows.
inline Tensor add_bias(const Tensor& a, const Tensor& bias) {
  detail::require_rank(a, 2, "add_bias");
  const std::size_t m = a.dim(0), n = a.dim(1);
  if (bias.size() != n) throw ShapeError("add_bias: " + shape_string(a.shape()) + " with bias " + shape_string(bias.shape()));
  std::vector<double> out(a.values());
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] += bias.values()[j];
  return make_result(a.shape(), std::move(out), {a, bias}, [m, n](Node& self) {
    if (auto* ga = detail::grad_of(self, 0))
      for (std::size_t i = 0; i < m * n; ++i) (*ga)[i] += self.grad[i];
    if (auto* gb = detail::grad_of(self, 1))
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) (*gb)[j] += self.grad[i * n + j];
  });
}

inline Tensor mul(const Tensor& a, const Tensor& b) {
  detail::require_same(a, b, "mul");
  std::vector<double> out(a.values());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.values()[i];
  return make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
    const auto& av = self.inputs[0]->value;
    const auto& bv = self.inputs[1]->value;
    if (auto* ga = detail::grad_of(self, 0))
      for (std::size_t i = 0; i < self.grad.size(); ++i) (*ga)[i] += self.grad[i] * bv[i];
    if (auto* gb = detail::grad_of(self, 1))
      for (std::size_t i = 0; i < self.grad.size(); ++i) (*gb)[i] += self.grad[i] * av[i];
  });
}

inline Tensor scale(const Tensor& a, double s) {
  std::vector<double> out(a.values());
  for (auto& v : out) v *= s;
  return make_result(a.shape(), std::move(out), {a}, [s](Node& self) {
    auto* ga = detail::grad_of(self, 0);
    for (std::size_t i = 0; i < self.grad.size(); ++i) (*ga)[i] += s * self.grad[i];
  });
}

/// s * a for a one-element tensor s.
inline Tensor mul_scalar(const Tensor& a, const Tensor& s) {
  if (s.size() != 1) throw ShapeError("mul_scalar: scalar operand has shape " + shape_string(s.shape()));
  const double sv = s.values()[0];
  std::vector<double> out(a.values());
  for (auto& v : out) v *= sv;
  return make_result(a.shape(), std::move(out), {a, s}, [](Node& self) {
    const auto& av = self.inputs[0]->value;
    const double sv = self.inputs[1]->value[0];
    if (auto* ga = detail::grad_of(self, 0))
      for (std::size_t i = 0; i < self.grad.size(); ++i) (*ga)[i] += sv * self.grad[i];
    if (auto* gs = detail::grad_of(self, 1)) {
      double acc = 0.0;
      for (std::size_t i = 0; i < self.grad.size(); ++i) acc += av[i] * self.grad[i];
      (*gs)[0] += acc;
    }
  });
}

inline Tensor relu(const Tensor& a) {
  std::vector<double> out(a.values());
  for (auto& v : out) v = v > 0.0 ? v : 0.0;
  return make_result(a.shape(), std::move(out), {a}, [](Node& self) {
    auto* ga = detail::grad_of(self, 0);
    const auto& av = self.inputs[0]->value;
    for (std::size_t i = 0; i < self.grad.size(); ++i)
      if (av[i] > 0.0) (*ga)[i] += self.grad[i];
  });
}

/// Keeps entries >= theta and zeroes the rest; gradient flows through the
/// kept entries only.
inline Tensor threshold(const Tensor& a, double theta) {
  std::vector<double> out(a.values());
  for (auto& v : out)
    if (v < theta) v = 0.0;
  return make_result(a.shape(), std::move(out), {a}, [theta](Node& self) {
    auto* ga = detail::grad_of(self, 0);
    const auto& av = self.inputs[0]->value;
    for (std::size_t i = 0; i < self.grad.size(); ++i)
      if (av[i] >= theta) (*ga)[i] += self.grad[i];
  });
}

// ---------------------------------------------------------------------------
// Reductions and normalisations (rank 2)
// ---------------------------------------------------------------------------

/// Softmax along `axis` (1 = within each row, 0 = within each column).
inline Tensor softmax(const Tensor& a, std::size_t axis = 1) {
  detail::require_rank(a, 2, "softmax");
  if (axis > 1) throw ShapeError("softmax: axis must be 0 or 1");
  const std::size_t m = a.dim(0), n = a.dim(1);
  const std::size_t groups = axis == 1 ? m : n, len = axis == 1 ? n : m;
  const std::size_t gstride = axis == 1 ? n : 1, estride = axis == 1 ? 1 : n;
  std::vector<double> out(m * n);
  for (std::size_t g = 0; g < groups; ++g) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t e = 0; e < len; ++e) mx = std::max(mx, a.values()[g * gstride + e * estride]);
    double z = 0.0;
    for (std::size_t e = 0; e < len; ++e) {
      const std::size_t i = g * gstride + e * estride;
      out[i] = std::exp(a.values()[i] - mx);
      z += out[i];
    }
    for (std::size_t e = 0; e < len; ++e) out[g * gstride + e * estride] /= z;
  }
  return make_result(a.shape(), std::move(out), {a}, [=](Node& self) {
    auto* ga = detail::grad_of(self, 0);
    const auto& y = self.value;
    for (std::size_t g = 0; g < groups; ++g) {
      double dot = 0.0;
      for (std::size_t e = 0; e < len; ++e) {
        const std::size_t i = g * gstride + e * estride;
        dot += self.grad[i] * y[i];
      }
      for (std::size_t e = 0; e < len; ++e) {
        const std::size_t i = g * gstride + e * estride;
        (*ga)[i] += y[i] * (self.grad[i] - dot);
      }
    }
  });
}

/// Sum along `axis`: axis 0 -> [1,n], axis 1 -> [m,1].
inline Tensor sum(const Tensor& a, std::size_t axis) {
  detail::require_rank(a, 2, "sum");
  if (axis > 1) throw ShapeError("sum: axis must be 0 or 1");
  const std::size_t m = a.dim(0), n = a.dim(1);
  Shape shape = axis == 0 ? Shape{1, n} : Shape{m, 1};
  std::vector<double> out(axis == 0 ? n : m, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[axis == 0 ? j : i] += a.values()[i * n + j];
  return make_result(std::move(shape), std::move(out), {a}, [m, n, axis](Node& self) {
    auto* ga = detail::grad_of(self, 0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) (*ga)[i * n + j] += self.grad[axis == 0 ? j : i];
  });
}

inline Tensor mean(const Tensor& a, std::size_t axis) {
  detail::require_rank(a, 2, "mean");
  if (axis > 1) throw ShapeError("mean: axis must be 0 or 1");
  return scale(sum(a, axis), 1.0 / static_cast<double>(a.dim(axis)));
}

inline Tensor sum_all(const Tensor& a) {
  double s = 0.0;
  for (double v : a.values()) s += v;
  return make_result({1}, {s}, {a}, [](Node& self) {
    auto* ga = detail::grad_of(self, 0);
    for (auto& g : *ga) g += self.grad[0];
  });
}

/// A_ij / sum_j A_ij; rows with a zero sum stay zero.
inline Tensor row_normalize(const Tensor& a) {
  detail::require_rank(a, 2, "row_normalize");
  const std::size_t m = a.dim(0), n = a.dim(1);
  std::vector<double> out(m * n, 0.0);
  std::vector<double> sums(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) sums[i] += a.values()[i * n + j];
    if (sums[i] != 0.0)
      for (std::size_t j = 0; j < n; ++j) out[i * n + j] = a.values()[i * n + j] / sums[i];
  }
  return make_result(a.shape(), std::move(out), {a}, [m, n, sums](Node& self) {
    auto* ga = detail::grad_of(self, 0);
    for (std::size_t i = 0; i < m; ++i) {
      if (sums[i] == 0.0) continue;
      double dot = 0.0;
      for (std::size_t j = 0; j < n; ++j) dot += self.grad[i * n + j] * self.value[i * n + j];
      for (std::size_t j = 0; j < n; ++j) (*ga)[i * n + j] += (self.grad[i * n + j] - dot) / sums[i];
    }
  });
}

/// Concatenation of rank-2 tensors along `axis`.
inline Tensor concat(const std::vector<Tensor>& xs, std::size_t axis) {
  if (xs.empty()) throw ShapeError("concat: no operands");
  if (axis > 1) throw ShapeError("concat: axis must be 0 or 1");
  for (const auto& x : xs) detail::require_rank(x, 2, "concat");
  const std::size_t other = xs[0].dim(1 - axis);
  std::size_t total = 0;
  std::vector<std::size_t> extent;
  for (const auto& x : xs) {
    if (x.dim(1 - axis) != other)
      throw ShapeError("concat: " + shape_string(xs[0].shape()) + " vs " + shape_string(x.shape()));
    extent.push_back(x.dim(axis));
    total += x.dim(axis);
  }
  const std::size_t m = axis == 0 ? total : other, n = axis == 0 ? other : total;
  std::vector<double> out(m * n);
  std::size_t off = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const auto& v = xs[k].values();
    if (axis == 0) {
      std::copy(v.begin(), v.end(), out.begin() + static_cast<std::ptrdiff_t>(off * n));
    } else {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < extent[k]; ++j) out[i * n + off + j] = v[i * extent[k] + j];
    }
    off += extent[k];
  }
  return make_result({m, n}, std::move(out), xs, [m, n, axis, extent](Node& self) {
    std::size_t off = 0;
    for (std::size_t k = 0; k < extent.size(); ++k) {
      if (auto* g = detail::grad_of(self, k)) {
        if (axis == 0) {
          for (std::size_t i = 0; i < extent[k] * n; ++i) (*g)[i] += self.grad[off * n + i];
        } else {
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < extent[k]; ++j) (*g)[i * extent[k] + j] += self.grad[i * n + off + j];
        }
      }
      off += extent[k];
    }
  });
}

// ---------------------------------------------------------------------------
// Slicing along the last axis
// ---------------------------------------------------------------------------

/// Elements [begin, end) of the last axis, any rank >= 1.
inline Tensor slice_last(const Tensor& a, std::size_t begin, std::size_t end) {
  if (a.rank() == 0) throw ShapeError("slice_last: rank-0 tensor");
  const std::size_t len = a.shape().back();
  if (begin > end || end > len)
    throw ShapeError("slice_last: range [" + std::to_string(begin) + "," + std::to_string(end) + ") on " +
                     shape_string(a.shape()));
  const std::size_t outer = a.size() / len, w = end - begin;
  Shape shape = a.shape();
  shape.back() = w;
  std::vector<double> out(outer * w);
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t j = 0; j < w; ++j) out[o * w + j] = a.values()[o * len + begin + j];
  return make_result(std::move(shape), std::move(out), {a}, [outer, w, len, begin](Node& self) {
    auto* ga = detail::grad_of(self, 0);
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t j = 0; j < w; ++j) (*ga)[o * len + begin + j] += self.grad[o * w + j];
  });
}

/// Prepends `count` zeros along the last axis.
inline Tensor pad_left(const Tensor& a, std::size_t count) {
  if (a.rank() == 0) throw ShapeError("pad_left: rank-0 tensor");
  const std::size_t len = a.shape().back(), outer = a.size() / len, w = len + count;
  Shape shape = a.shape();
  shape.back() = w;
  std::vector<double> out(outer * w, 0.0);
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t j = 0; j < len; ++j) out[o * w + count + j] = a.values()[o * len + j];
  return make_result(std::move(shape), std::move(out), {a}, [outer, w, len, count](Node& self) {
    auto* ga = detail::grad_of(self, 0);
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t j = 0; j < len; ++j) (*ga)[o * len + j] += self.grad[o * w + count + j];
  });
}

// ---------------------------------------------------------------------------
// Causal convolution
// ---------------------------------------------------------------------------

/// Dilated causal 1-D convolution. Input [N, C_in, L] (or [C_in, L]),
/// kernels [C_out, C_in, k], bias [C_out]; output keeps length L by
/// implicit left zero-padding of (k - 1) * dilation, so output t only sees
/// inputs at times <= t. Kernel tap j multiplies input t - (k - 1 - j) * dilation.
///
/// Evaluated as one GEMM over an im2col buffer of shape [C_in * k, N * L].
inline Tensor causal_conv1d(const Tensor& input, const Tensor& kernels, const Tensor& bias, std::size_t dilation) {
  const bool batched = input.rank() == 3;
  if (!batched && input.rank() != 2)
    throw ShapeError("causal_conv1d: input must be [C_in,L] or [N,C_in,L], got " + shape_string(input.shape()));
  detail::require_rank(kernels, 3, "causal_conv1d");
  if (dilation < 1) throw ShapeError("causal_conv1d: dilation must be >= 1");
  const std::size_t nb = batched ? input.dim(0) : 1;
  const std::size_t cin = input.dim(batched ? 1 : 0), len = input.dim(batched ? 2 : 1);
  const std::size_t cout = kernels.dim(0), k = kernels.dim(2);
  if (kernels.dim(1) != cin || k < 1)
    throw ShapeError("causal_conv1d: input " + shape_string(input.shape()) + " with kernels " +
                     shape_string(kernels.shape()));
  if (bias.size() != cout)
    throw ShapeError("causal_conv1d: kernels " + shape_string(kernels.shape()) + " with bias " +
                     shape_string(bias.shape()));
  const std::size_t rows = cin * k, cols = nb * len;
  const double* x = input.values().data();
  std::vector<double> col(rows * cols, 0.0);
  for (std::size_t c = 0; c < cin; ++c)
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t shift = (k - 1 - j) * dilation;
      double* dst = col.data() + (c * k + j) * cols;
      for (std::size_t b = 0; b < nb; ++b) {
        const double* src = x + (b * cin + c) * len;
        for (std::size_t t = shift; t < len; ++t) dst[b * len + t] = src[t - shift];
      }
    }
  const double* w = kernels.values().data();
  std::vector<double> acc(cout * cols);
  for (std::size_t o = 0; o < cout; ++o) std::fill_n(acc.data() + o * cols, cols, bias.values()[o]);
  kernels::gemm(cout, cols, rows, w, rows, col.data(), cols, acc.data(), cols);
  std::vector<double> out(nb * cout * len);
  for (std::size_t o = 0; o < cout; ++o)
    for (std::size_t b = 0; b < nb; ++b)
      std::copy_n(acc.data() + o * cols + b * len, len, out.data() + (b * cout + o) * len);

  Shape shape = batched ? Shape{nb, cout, len} : Shape{cout, len};
  return make_result(std::move(shape), std::move(out), {input, kernels, bias},
                     [=, col = std::move(col)](Node& self) {
                       std::vector<double> gy(cout * cols);
                       for (std::size_t o = 0; o < cout; ++o)
                         for (std::size_t b = 0; b < nb; ++b)
                           std::copy_n(self.grad.data() + (b * cout + o) * len, len, gy.data() + o * cols + b * len);
                       if (auto* gb = detail::grad_of(self, 2))
                         for (std::size_t o = 0; o < cout; ++o) {
                           double s = 0.0;
                           for (std::size_t i = 0; i < cols; ++i) s += gy[o * cols + i];
                           (*gb)[o] += s;
                         }
                       if (auto* gw = detail::grad_of(self, 1)) {
                         const auto col_t = kernels::transposed(col.data(), rows, cols);
                         kernels::gemm(cout, rows, cols, gy.data(), cols, col_t.data(), rows, gw->data(), rows);
                       }
                       if (auto* gx = detail::grad_of(self, 0)) {
                         const double* w = self.inputs[1]->value.data();
                         std::vector<double> gcol(rows * cols, 0.0);
                         const auto w_t = kernels::transposed(w, cout, rows);
                         kernels::gemm(rows, cols, cout, w_t.data(), cout, gy.data(), cols, gcol.data(), cols);
                         for (std::size_t c = 0; c < cin; ++c)
                           for (std::size_t j = 0; j < k; ++j) {
                             const std::size_t shift = (k - 1 - j) * dilation;
                             const double* src = gcol.data() + (c * k + j) * cols;
                             for (std::size_t b = 0; b < nb; ++b) {
                               double* dst = gx->data() + (b * cin + c) * len;
                               for (std::size_t t = shift; t < len; ++t) dst[t - shift] += src[b * len + t];
                             }
                           }
                       }
                     });
}

// ---------------------------------------------------------------------------
// Loss
// ---------------------------------------------------------------------------

inline constexpr double kLogClamp = 1e-12;

/// -(1/N) sum_i sum_j y_ij log(max(p_ij, 1e-12)) for probabilities p [N,K]
/// and targets y [N,K]. Targets are treated as constants.
inline Tensor cross_entropy(const Tensor& probs, const Tensor& targets) {
  detail::require_rank(probs, 2, "cross_entropy");
  detail::require_same(probs, targets, "cross_entropy");
  const double n = static_cast<double>(probs.dim(0));
  double loss = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double y = targets.values()[i];
    if (y != 0.0) loss -= y * std::log(std::max(probs.values()[i], kLogClamp));
  }
  loss /= n;
  return make_result({1}, {loss}, {probs}, [n, y = targets.values()](Node& self) {
    auto* gp = detail::grad_of(self, 0);
    const auto& p = self.inputs[0]->value;
    for (std::size_t i = 0; i < p.size(); ++i)
      if (y[i] != 0.0 && p[i] >= kLogClamp) (*gp)[i] -= self.grad[0] * y[i] / (n * p[i]);
  });
}

}  // namespace irspla::nn
