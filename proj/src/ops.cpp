/* Copyright 2026 The troikit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "troikit/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kernels.hpp"
#include "troikit/error.hpp"

namespace troikit {

using detail::accumulate;
using detail::Node;

namespace {

void require_rank(const Tensor& t, std::size_t r, const char* op) {
  if (t.rank() != r) {
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(r) + ", got " +
                         shape_str(t.shape()));
  }
}

void require_same(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
  }
}

bool wants(const Node& self, std::size_t i) { return self.inputs[i]->requires_grad; }

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) {
    throw DimensionError("matmul: inner dimensions differ, " + shape_str(a.shape()) + " x " +
                         shape_str(b.shape()));
  }
  std::vector<double> out(m * n, 0.0);
  kernels::gemm_nn(m, n, k, a.data().data(), b.data().data(), out.data());
  return Tensor::make_op({m, n}, std::move(out), {a, b}, [m, n, k](const Node& self) {
    const Node& na = *self.inputs[0];
    const Node& nb = *self.inputs[1];
    if (wants(self, 0)) {
      std::vector<double> ga(m * k, 0.0);
      kernels::gemm_nt(m, k, n, self.grad.data(), nb.value.data(), ga.data());
      accumulate(*self.inputs[0], ga);
    }
    if (wants(self, 1)) {
      std::vector<double> gb(k * n, 0.0);
      kernels::gemm_tn(k, n, m, na.value.data(), self.grad.data(), gb.data());
      accumulate(*self.inputs[1], gb);
    }
  });
}

Tensor transpose(const Tensor& a) {
  require_rank(a, 2, "transpose");
  const std::size_t r = a.dim(0), c = a.dim(1);
  std::vector<double> out(r * c);
  auto src = a.data();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = src[i * c + j];
  return Tensor::make_op({c, r}, std::move(out), {a}, [r, c](const Node& self) {
    std::vector<double> g(r * c);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) g[i * c + j] = self.grad[j * r + i];
    accumulate(*self.inputs[0], g);
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same(a, b, "add");
  std::vector<double> out(a.numel());
  auto x = a.data(), y = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + y[i];
  return Tensor::make_op(a.shape(), std::move(out), {a, b}, [](const Node& self) {
    if (wants(self, 0)) accumulate(*self.inputs[0], self.grad);
    if (wants(self, 1)) accumulate(*self.inputs[1], self.grad);
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same(a, b, "mul");
  std::vector<double> out(a.numel());
  auto x = a.data(), y = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * y[i];
  return Tensor::make_op(a.shape(), std::move(out), {a, b}, [](const Node& self) {
    const auto& x = self.inputs[0]->value;
    const auto& y = self.inputs[1]->value;
    const std::size_t n = self.grad.size();
    if (wants(self, 0)) {
      std::vector<double> g(n);
      for (std::size_t i = 0; i < n; ++i) g[i] = self.grad[i] * y[i];
      accumulate(*self.inputs[0], g);
    }
    if (wants(self, 1)) {
      std::vector<double> g(n);
      for (std::size_t i = 0; i < n; ++i) g[i] = self.grad[i] * x[i];
      accumulate(*self.inputs[1], g);
    }
  });
}

Tensor scale(const Tensor& a, double s) {
  std::vector<double> out(a.data().begin(), a.data().end());
  for (double& v : out) v *= s;
  return Tensor::make_op(a.shape(), std::move(out), {a}, [s](const Node& self) {
    std::vector<double> g(self.grad);
    for (double& v : g) v *= s;
    accumulate(*self.inputs[0], g);
  });
}

Tensor add_bias(const Tensor& x, const Tensor& bias) {
  require_rank(bias, 1, "add_bias");
  if (x.rank() == 0 || x.shape().back() != bias.dim(0)) {
    throw DimensionError("add_bias: bias " + shape_str(bias.shape()) + " does not match " +
                         shape_str(x.shape()));
  }
  const std::size_t c = bias.dim(0);
  std::vector<double> out(x.data().begin(), x.data().end());
  auto b = bias.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i % c];
  return Tensor::make_op(x.shape(), std::move(out), {x, bias}, [c](const Node& self) {
    if (wants(self, 0)) accumulate(*self.inputs[0], self.grad);
    if (wants(self, 1)) {
      std::vector<double> g(c, 0.0);
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i % c] += self.grad[i];
      accumulate(*self.inputs[1], g);
    }
  });
}

Tensor relu(const Tensor& x) {
  std::vector<double> out(x.data().begin(), x.data().end());
  for (double& v : out) v = v > 0.0 ? v : 0.0;
  return Tensor::make_op(x.shape(), std::move(out), {x}, [](const Node& self) {
    const auto& in = self.inputs[0]->value;
    std::vector<double> g(self.grad.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = in[i] > 0.0 ? self.grad[i] : 0.0;
    accumulate(*self.inputs[0], g);
  });
}

Tensor softmax_rows(const Tensor& x) {
  require_rank(x, 2, "softmax_rows");
  const std::size_t rows = x.dim(0), cols = x.dim(1);
  std::vector<double> out(rows * cols);
  auto in = x.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = in.data() + r * cols;
    double* dst = out.data() + r * cols;
    const double mx = *std::max_element(row, row + cols);
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      dst[c] = std::exp(row[c] - mx);
      total += dst[c];
    }
    for (std::size_t c = 0; c < cols; ++c) dst[c] /= total;
  }
  return Tensor::make_op(x.shape(), std::move(out), {x}, [rows, cols](const Node& self) {
    std::vector<double> g(rows * cols);
    for (std::size_t r = 0; r < rows; ++r) {
      const double* y = self.value.data() + r * cols;
      const double* gy = self.grad.data() + r * cols;
      double dot = 0.0;
      for (std::size_t c = 0; c < cols; ++c) dot += gy[c] * y[c];
      for (std::size_t c = 0; c < cols; ++c) g[r * cols + c] = y[c] * (gy[c] - dot);
    }
    accumulate(*self.inputs[0], g);
  });
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
  require_rank(x, 2, "layer_norm");
  require_rank(gamma, 1, "layer_norm");
  require_rank(beta, 1, "layer_norm");
  const std::size_t rows = x.dim(0), cols = x.dim(1);
  if (cols == 0 || gamma.dim(0) != cols || beta.dim(0) != cols) {
    throw DimensionError("layer_norm: gamma/beta " + shape_str(gamma.shape()) + "/" +
                         shape_str(beta.shape()) + " vs input " + shape_str(x.shape()));
  }
  if (!(eps > 0.0)) throw ConfigError("layer_norm: eps must be positive");

  // Normalized rows and reciprocal std, kept for the backward pass.
  auto xhat = std::make_shared<std::vector<double>>(rows * cols);
  auto rstd = std::make_shared<std::vector<double>>(rows);
  std::vector<double> out(rows * cols);
  auto in = x.data();
  auto gm = gamma.data();
  auto bt = beta.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = in.data() + r * cols;
    double mean = 0.0;
    for (std::size_t c = 0; c < cols; ++c) mean += row[c];
    mean /= static_cast<double>(cols);
    double var = 0.0;
    for (std::size_t c = 0; c < cols; ++c) var += (row[c] - mean) * (row[c] - mean);
    var /= static_cast<double>(cols);
    const double s = 1.0 / std::sqrt(var + eps);
    (*rstd)[r] = s;
    for (std::size_t c = 0; c < cols; ++c) {
      const double h = (row[c] - mean) * s;
      (*xhat)[r * cols + c] = h;
      out[r * cols + c] = h * gm[c] + bt[c];
    }
  }
  return Tensor::make_op(x.shape(), std::move(out), {x, gamma, beta},
                         [rows, cols, xhat, rstd](const Node& self) {
    const auto& gm = self.inputs[1]->value;
    const auto& gy = self.grad;
    if (wants(self, 0)) {
      std::vector<double> g(rows * cols);
      const double inv_n = 1.0 / static_cast<double>(cols);
      for (std::size_t r = 0; r < rows; ++r) {
        double sum_d = 0.0, sum_dh = 0.0;
        for (std::size_t c = 0; c < cols; ++c) {
          const double d = gy[r * cols + c] * gm[c];
          sum_d += d;
          sum_dh += d * (*xhat)[r * cols + c];
        }
        for (std::size_t c = 0; c < cols; ++c) {
          const double d = gy[r * cols + c] * gm[c];
          g[r * cols + c] = (*rstd)[r] * (d - sum_d * inv_n - (*xhat)[r * cols + c] * sum_dh * inv_n);
        }
      }
      accumulate(*self.inputs[0], g);
    }
    if (wants(self, 1) || wants(self, 2)) {
      std::vector<double> gg(cols, 0.0), gb(cols, 0.0);
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
          gg[c] += gy[r * cols + c] * (*xhat)[r * cols + c];
          gb[c] += gy[r * cols + c];
        }
      }
      if (wants(self, 1)) accumulate(*self.inputs[1], gg);
      if (wants(self, 2)) accumulate(*self.inputs[2], gb);
    }
  });
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  require_rank(x, 2, "linear");
  require_rank(weight, 2, "linear");
  require_rank(bias, 1, "linear");
  const std::size_t n = x.dim(0), in = x.dim(1), out_dim = weight.dim(1);
  if (weight.dim(0) != in || bias.dim(0) != out_dim) {
    throw DimensionError("linear: input " + shape_str(x.shape()) + ", weight " +
                         shape_str(weight.shape()) + ", bias " + shape_str(bias.shape()));
  }
  std::vector<double> out(n * out_dim);
  auto b = bias.data();
  for (std::size_t r = 0; r < n; ++r)
    std::copy(b.begin(), b.end(), out.begin() + static_cast<std::ptrdiff_t>(r * out_dim));
  kernels::gemm_nn(n, out_dim, in, x.data().data(), weight.data().data(), out.data());
  return Tensor::make_op({n, out_dim}, std::move(out), {x, weight, bias},
                         [n, in, out_dim](const Node& self) {
    if (wants(self, 0)) {
      std::vector<double> g(n * in, 0.0);
      kernels::gemm_nt(n, in, out_dim, self.grad.data(), self.inputs[1]->value.data(), g.data());
      accumulate(*self.inputs[0], g);
    }
    if (wants(self, 1)) {
      std::vector<double> g(in * out_dim, 0.0);
      kernels::gemm_tn(in, out_dim, n, self.inputs[0]->value.data(), self.grad.data(), g.data());
      accumulate(*self.inputs[1], g);
    }
    if (wants(self, 2)) {
      std::vector<double> g(out_dim, 0.0);
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < out_dim; ++c) g[c] += self.grad[r * out_dim + c];
      accumulate(*self.inputs[2], g);
    }
  });
}

namespace {

struct ConvGeometry {
  std::size_t batch, w, h, cin, k, cout, stride, pad, wo, ho;
  std::size_t rows() const { return batch * wo * ho; }
  std::size_t patch() const { return k * k * cin; }
};

// Patch matrix [B*Wo*Ho, k*k*Cin]; out-of-bounds taps stay zero.
std::vector<double> im2col(const ConvGeometry& g, const double* x) {
  std::vector<double> cols(g.rows() * g.patch(), 0.0);
  for (std::size_t b = 0; b < g.batch; ++b) {
    for (std::size_t ox = 0; ox < g.wo; ++ox) {
      for (std::size_t oy = 0; oy < g.ho; ++oy) {
        double* row = cols.data() + ((b * g.wo + ox) * g.ho + oy) * g.patch();
        for (std::size_t kx = 0; kx < g.k; ++kx) {
          const long ix = static_cast<long>(ox * g.stride + kx) - static_cast<long>(g.pad);
          if (ix < 0 || ix >= static_cast<long>(g.w)) continue;
          for (std::size_t ky = 0; ky < g.k; ++ky) {
            const long iy = static_cast<long>(oy * g.stride + ky) - static_cast<long>(g.pad);
            if (iy < 0 || iy >= static_cast<long>(g.h)) continue;
            const double* src = x + ((b * g.w + static_cast<std::size_t>(ix)) * g.h + static_cast<std::size_t>(iy)) * g.cin;
            std::copy(src, src + g.cin, row + (kx * g.k + ky) * g.cin);
          }
        }
      }
    }
  }
  return cols;
}

void col2im(const ConvGeometry& g, const double* cols, double* x) {
  for (std::size_t b = 0; b < g.batch; ++b) {
    for (std::size_t ox = 0; ox < g.wo; ++ox) {
      for (std::size_t oy = 0; oy < g.ho; ++oy) {
        const double* row = cols + ((b * g.wo + ox) * g.ho + oy) * g.patch();
        for (std::size_t kx = 0; kx < g.k; ++kx) {
          const long ix = static_cast<long>(ox * g.stride + kx) - static_cast<long>(g.pad);
          if (ix < 0 || ix >= static_cast<long>(g.w)) continue;
          for (std::size_t ky = 0; ky < g.k; ++ky) {
            const long iy = static_cast<long>(oy * g.stride + ky) - static_cast<long>(g.pad);
            if (iy < 0 || iy >= static_cast<long>(g.h)) continue;
            double* dst = x + ((b * g.w + static_cast<std::size_t>(ix)) * g.h + static_cast<std::size_t>(iy)) * g.cin;
            const double* src = row + (kx * g.k + ky) * g.cin;
            for (std::size_t c = 0; c < g.cin; ++c) dst[c] += src[c];
          }
        }
      }
    }
  }
}

}  // namespace

Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias, Conv2dOptions opt) {
  require_rank(x, 4, "conv2d");
  require_rank(weight, 4, "conv2d");
  require_rank(bias, 1, "conv2d");
  if (opt.stride == 0) throw ConfigError("conv2d: stride must be positive");
  ConvGeometry g{};
  g.batch = x.dim(0);
  g.w = x.dim(1);
  g.h = x.dim(2);
  g.cin = x.dim(3);
  g.k = weight.dim(0);
  g.cout = weight.dim(3);
  g.stride = opt.stride;
  g.pad = opt.padding;
  if (weight.dim(1) != g.k || weight.dim(2) != g.cin || bias.dim(0) != g.cout) {
    throw DimensionError("conv2d: weight " + shape_str(weight.shape()) + " / bias " +
                         shape_str(bias.shape()) + " incompatible with input " + shape_str(x.shape()));
  }
  if (g.w + 2 * g.pad < g.k || g.h + 2 * g.pad < g.k) {
    throw DimensionError("conv2d: kernel larger than padded input " + shape_str(x.shape()));
  }
  g.wo = (g.w + 2 * g.pad - g.k) / g.stride + 1;
  g.ho = (g.h + 2 * g.pad - g.k) / g.stride + 1;

  auto cols = std::make_shared<std::vector<double>>(im2col(g, x.data().data()));
  std::vector<double> out(g.rows() * g.cout);
  auto b = bias.data();
  for (std::size_t r = 0; r < g.rows(); ++r)
    std::copy(b.begin(), b.end(), out.begin() + static_cast<std::ptrdiff_t>(r * g.cout));
  kernels::gemm_nn(g.rows(), g.cout, g.patch(), cols->data(), weight.data().data(), out.data());

  return Tensor::make_op({g.batch, g.wo, g.ho, g.cout}, std::move(out), {x, weight, bias},
                         [g, cols](const Node& self) {
    if (wants(self, 0)) {
      std::vector<double> dcols(g.rows() * g.patch(), 0.0);
      kernels::gemm_nt(g.rows(), g.patch(), g.cout, self.grad.data(), self.inputs[1]->value.data(),
                       dcols.data());
      std::vector<double> dx(g.batch * g.w * g.h * g.cin, 0.0);
      col2im(g, dcols.data(), dx.data());
      accumulate(*self.inputs[0], dx);
    }
    if (wants(self, 1)) {
      std::vector<double> dw(g.patch() * g.cout, 0.0);
      kernels::gemm_tn(g.patch(), g.cout, g.rows(), cols->data(), self.grad.data(), dw.data());
      accumulate(*self.inputs[1], dw);
    }
    if (wants(self, 2)) {
      std::vector<double> db(g.cout, 0.0);
      for (std::size_t r = 0; r < g.rows(); ++r)
        for (std::size_t c = 0; c < g.cout; ++c) db[c] += self.grad[r * g.cout + c];
      accumulate(*self.inputs[2], db);
    }
  });
}

namespace {

struct PoolGeometry {
  std::size_t batch, w, h, c, wo, ho;
  PoolWindow win;
};

PoolGeometry pool_geometry(const Tensor& x, PoolWindow win, const char* op) {
  require_rank(x, 4, op);
  if (win.width == 0 || win.height == 0 || win.stride_w == 0 || win.stride_h == 0) {
    throw ConfigError(std::string(op) + ": window and stride must be positive");
  }
  PoolGeometry g{x.dim(0), x.dim(1), x.dim(2), x.dim(3), 0, 0, win};
  if (win.width > g.w || win.height > g.h) {
    throw DimensionError(std::string(op) + ": window larger than input " + shape_str(x.shape()));
  }
  g.wo = (g.w - win.width) / win.stride_w + 1;
  g.ho = (g.h - win.height) / win.stride_h + 1;
  return g;
}

std::size_t cell(const PoolGeometry& g, std::size_t b, std::size_t x, std::size_t y) {
  return ((b * g.w + x) * g.h + y) * g.c;
}

}  // namespace

Tensor mean_pool(const Tensor& x, PoolWindow window) {
  const PoolGeometry g = pool_geometry(x, window, "mean_pool");
  const double inv = 1.0 / static_cast<double>(window.width * window.height);
  std::vector<double> out(g.batch * g.wo * g.ho * g.c, 0.0);
  auto in = x.data();
  for (std::size_t b = 0; b < g.batch; ++b)
    for (std::size_t ox = 0; ox < g.wo; ++ox)
      for (std::size_t oy = 0; oy < g.ho; ++oy) {
        double* dst = out.data() + ((b * g.wo + ox) * g.ho + oy) * g.c;
        for (std::size_t kx = 0; kx < window.width; ++kx)
          for (std::size_t ky = 0; ky < window.height; ++ky) {
            const double* src = in.data() + cell(g, b, ox * window.stride_w + kx, oy * window.stride_h + ky);
            for (std::size_t c = 0; c < g.c; ++c) dst[c] += src[c];
          }
        for (std::size_t c = 0; c < g.c; ++c) dst[c] *= inv;
      }
  return Tensor::make_op({g.batch, g.wo, g.ho, g.c}, std::move(out), {x}, [g, inv](const Node& self) {
    std::vector<double> dx(g.batch * g.w * g.h * g.c, 0.0);
    for (std::size_t b = 0; b < g.batch; ++b)
      for (std::size_t ox = 0; ox < g.wo; ++ox)
        for (std::size_t oy = 0; oy < g.ho; ++oy) {
          const double* src = self.grad.data() + ((b * g.wo + ox) * g.ho + oy) * g.c;
          for (std::size_t kx = 0; kx < g.win.width; ++kx)
            for (std::size_t ky = 0; ky < g.win.height; ++ky) {
              double* dst = dx.data() + cell(g, b, ox * g.win.stride_w + kx, oy * g.win.stride_h + ky);
              for (std::size_t c = 0; c < g.c; ++c) dst[c] += src[c] * inv;
            }
        }
    accumulate(*self.inputs[0], dx);
  });
}

Tensor max_pool(const Tensor& x, PoolWindow window) {
  const PoolGeometry g = pool_geometry(x, window, "max_pool");
  const std::size_t n_out = g.batch * g.wo * g.ho * g.c;
  std::vector<double> out(n_out);
  auto argmax = std::make_shared<std::vector<std::size_t>>(n_out);
  auto in = x.data();
  for (std::size_t b = 0; b < g.batch; ++b)
    for (std::size_t ox = 0; ox < g.wo; ++ox)
      for (std::size_t oy = 0; oy < g.ho; ++oy) {
        const std::size_t o = ((b * g.wo + ox) * g.ho + oy) * g.c;
        for (std::size_t c = 0; c < g.c; ++c) {
          std::size_t best = cell(g, b, ox * window.stride_w, oy * window.stride_h) + c;
          for (std::size_t kx = 0; kx < window.width; ++kx)
            for (std::size_t ky = 0; ky < window.height; ++ky) {
              const std::size_t idx = cell(g, b, ox * window.stride_w + kx, oy * window.stride_h + ky) + c;
              if (in[idx] > in[best]) best = idx;
            }
          out[o + c] = in[best];
          (*argmax)[o + c] = best;
        }
      }
  const std::size_t n_in = x.numel();
  return Tensor::make_op({g.batch, g.wo, g.ho, g.c}, std::move(out), {x}, [argmax, n_in](const Node& self) {
    std::vector<double> dx(n_in, 0.0);
    for (std::size_t i = 0; i < argmax->size(); ++i) dx[(*argmax)[i]] += self.grad[i];
    accumulate(*self.inputs[0], dx);
  });
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (numel(shape) != x.numel()) {
    throw DimensionError("reshape: " + shape_str(x.shape()) + " -> " + shape_str(shape));
  }
  std::vector<double> out(x.data().begin(), x.data().end());
  return Tensor::make_op(std::move(shape), std::move(out), {x},
                         [](const Node& self) { accumulate(*self.inputs[0], self.grad); });
}

Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t end) {
  require_rank(x, 2, "slice_rows");
  const std::size_t rows = x.dim(0), cols = x.dim(1);
  if (begin > end || end > rows) {
    throw DimensionError("slice_rows: [" + std::to_string(begin) + "," + std::to_string(end) +
                         ") out of " + shape_str(x.shape()));
  }
  auto in = x.data();
  std::vector<double> out(in.begin() + static_cast<std::ptrdiff_t>(begin * cols),
                          in.begin() + static_cast<std::ptrdiff_t>(end * cols));
  return Tensor::make_op({end - begin, cols}, std::move(out), {x}, [begin, rows, cols](const Node& self) {
    std::vector<double> g(rows * cols, 0.0);
    std::copy(self.grad.begin(), self.grad.end(), g.begin() + static_cast<std::ptrdiff_t>(begin * cols));
    accumulate(*self.inputs[0], g);
  });
}

Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t end) {
  require_rank(x, 2, "slice_cols");
  const std::size_t rows = x.dim(0), cols = x.dim(1);
  if (begin > end || end > cols) {
    throw DimensionError("slice_cols: [" + std::to_string(begin) + "," + std::to_string(end) +
                         ") out of " + shape_str(x.shape()));
  }
  const std::size_t w = end - begin;
  std::vector<double> out(rows * w);
  auto in = x.data();
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < w; ++c) out[r * w + c] = in[r * cols + begin + c];
  return Tensor::make_op({rows, w}, std::move(out), {x}, [begin, rows, cols, w](const Node& self) {
    std::vector<double> g(rows * cols, 0.0);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < w; ++c) g[r * cols + begin + c] = self.grad[r * w + c];
    accumulate(*self.inputs[0], g);
  });
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw DimensionError("concat_rows: no inputs");
  const std::size_t cols = parts.front().dim(1);
  std::size_t rows = 0;
  for (const Tensor& p : parts) {
    require_rank(p, 2, "concat_rows");
    if (p.dim(1) != cols) {
      throw DimensionError("concat_rows: column mismatch " + shape_str(parts.front().shape()) + " vs " +
                           shape_str(p.shape()));
    }
    rows += p.dim(0);
  }
  std::vector<double> out;
  out.reserve(rows * cols);
  for (const Tensor& p : parts) out.insert(out.end(), p.data().begin(), p.data().end());
  return Tensor::make_op({rows, cols}, std::move(out), parts, [](const Node& self) {
    std::size_t offset = 0;
    for (const auto& in : self.inputs) {
      const std::size_t n = in->value.size();
      if (in->requires_grad) accumulate(*in, std::span<const double>(self.grad).subspan(offset, n));
      offset += n;
    }
  });
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no inputs");
  const std::size_t rows = parts.front().dim(0);
  std::size_t cols = 0;
  std::vector<std::size_t> widths;
  for (const Tensor& p : parts) {
    require_rank(p, 2, "concat_cols");
    if (p.dim(0) != rows) {
      throw DimensionError("concat_cols: row mismatch " + shape_str(parts.front().shape()) + " vs " +
                           shape_str(p.shape()));
    }
    widths.push_back(p.dim(1));
    cols += p.dim(1);
  }
  std::vector<double> out(rows * cols);
  std::size_t offset = 0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    auto in = parts[i].data();
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < widths[i]; ++c) out[r * cols + offset + c] = in[r * widths[i] + c];
    offset += widths[i];
  }
  return Tensor::make_op({rows, cols}, std::move(out), parts, [rows, cols, widths](const Node& self) {
    std::size_t offset = 0;
    for (std::size_t i = 0; i < widths.size(); ++i) {
      auto& in = *self.inputs[i];
      if (in.requires_grad) {
        std::vector<double> g(rows * widths[i]);
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t c = 0; c < widths[i]; ++c) g[r * widths[i] + c] = self.grad[r * cols + offset + c];
        accumulate(in, g);
      }
      offset += widths[i];
    }
  });
}

Tensor sum(const Tensor& x) {
  double total = 0.0;
  for (double v : x.data()) total += v;
  const std::size_t n = x.numel();
  return Tensor::make_op({}, {total}, {x}, [n](const Node& self) {
    std::vector<double> g(n, self.grad[0]);
    accumulate(*self.inputs[0], g);
  });
}

Tensor mean_rows(const Tensor& x) {
  require_rank(x, 2, "mean_rows");
  const std::size_t rows = x.dim(0), cols = x.dim(1);
  if (rows == 0) throw DimensionError("mean_rows: empty input");
  std::vector<double> out(cols, 0.0);
  auto in = x.data();
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out[c] += in[r * cols + c];
  const double inv = 1.0 / static_cast<double>(rows);
  for (double& v : out) v *= inv;
  return Tensor::make_op({cols}, std::move(out), {x}, [rows, cols, inv](const Node& self) {
    std::vector<double> g(rows * cols);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) g[r * cols + c] = self.grad[c] * inv;
    accumulate(*self.inputs[0], g);
  });
}

}  // namespace troikit
