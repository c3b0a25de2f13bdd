/*
 * Copyright 2026 The steglab authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "steglab/nn.hpp"

#include <cblas.h>

#include <cmath>
#include <cstring>

#include "steglab/errors.hpp"

// Present when linking OpenBLAS; weak so other BLAS libraries still link.
extern "C" void openblas_set_num_threads(int) __attribute__((weak));

namespace steglab {

void set_blas_threads(int n) {
  if (n < 1) throw usage_error("thread count must be >= 1");
  if (openblas_set_num_threads) openblas_set_num_threads(n);
}

namespace {

// C (m x n) = alpha * op(A) * op(B) + beta * C, row major.
void gemm(bool ta, bool tb, int m, int n, int k, double alpha, const double* a,
          int lda, const double* b, int ldb, double beta, double* c, int ldc) {
  cblas_dgemm(CblasRowMajor, ta ? CblasTrans : CblasNoTrans,
              tb ? CblasTrans : CblasNoTrans, m, n, k, alpha, a, lda, b, ldb,
              beta, c, ldc);
}

int conv_out(int in, int k, int stride, int pad) {
  return (in + 2 * pad - k) / stride + 1;
}

// Patch matrix for one image: (c*kh*kw) x (oh*ow), zero outside the input.
void im2col(const double* x, int c, int h, int w, int kh, int kw, int stride,
            int pad, int oh, int ow, double* col) {
  for (int ch = 0; ch < c; ++ch) {
    for (int r = 0; r < kh; ++r) {
      for (int s = 0; s < kw; ++s) {
        double* row = col + static_cast<size_t>((ch * kh + r) * kw + s) *
                                (static_cast<size_t>(oh) * ow);
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * stride - pad + r;
          if (iy < 0 || iy >= h) {
            std::memset(row + static_cast<size_t>(oy) * ow, 0,
                        sizeof(double) * ow);
            continue;
          }
          const double* src = x + (static_cast<size_t>(ch) * h + iy) * w;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * stride - pad + s;
            row[static_cast<size_t>(oy) * ow + ox] =
                (ix >= 0 && ix < w) ? src[ix] : 0.0;
          }
        }
      }
    }
  }
}

// Adjoint of im2col: scatter-add columns back onto the (c,h,w) grid.
void col2im(const double* col, int c, int h, int w, int kh, int kw, int stride,
            int pad, int oh, int ow, double* x) {
  std::memset(x, 0, sizeof(double) * c * h * w);
  for (int ch = 0; ch < c; ++ch) {
    for (int r = 0; r < kh; ++r) {
      for (int s = 0; s < kw; ++s) {
        const double* row = col + static_cast<size_t>((ch * kh + r) * kw + s) *
                                      (static_cast<size_t>(oh) * ow);
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * stride - pad + r;
          if (iy < 0 || iy >= h) continue;
          double* dst = x + (static_cast<size_t>(ch) * h + iy) * w;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * stride - pad + s;
            if (ix >= 0 && ix < w) dst[ix] += row[static_cast<size_t>(oy) * ow + ox];
          }
        }
      }
    }
  }
}

void check_kernel(const Tensor4& x, const Tensor4& w, int stride, int pad,
                  bool transposed) {
  if (stride < 1 || pad < 0) throw usage_error("bad stride or padding");
  const int expect = transposed ? w.n : w.c;
  if (x.c != expect)
    throw usage_error("channel mismatch: input " + std::to_string(x.c) +
                      ", kernel expects " + std::to_string(expect));
}

}  // namespace

Tensor4 conv2d(const Tensor4& x, const Tensor4& w, const Tensor4& bias,
               int stride, int pad) {
  check_kernel(x, w, stride, pad, false);
  const int oc = w.n, ic = w.c, kh = w.h, kw = w.w;
  const int oh = conv_out(x.h, kh, stride, pad);
  const int ow = conv_out(x.w, kw, stride, pad);
  if (oh < 1 || ow < 1) throw usage_error("conv output would be empty");
  Tensor4 y(x.n, oc, oh, ow);
  const size_t krows = static_cast<size_t>(ic) * kh * kw;
  const size_t cols = static_cast<size_t>(oh) * ow;
  std::vector<double> col(krows * cols);
  for (int i = 0; i < x.n; ++i) {
    im2col(&x.v[static_cast<size_t>(i) * x.c * x.h * x.w], ic, x.h, x.w, kh,
           kw, stride, pad, oh, ow, col.data());
    gemm(false, false, oc, static_cast<int>(cols), static_cast<int>(krows),
         1.0, w.v.data(), static_cast<int>(krows), col.data(),
         static_cast<int>(cols), 0.0,
         &y.v[static_cast<size_t>(i) * oc * cols], static_cast<int>(cols));
  }
  if (!bias.v.empty()) {
    if (bias.size() != static_cast<size_t>(oc))
      throw usage_error("conv bias size mismatch");
    for (int i = 0; i < x.n; ++i)
      for (int c = 0; c < oc; ++c) {
        double* p = &y.v[(static_cast<size_t>(i) * oc + c) * cols];
        for (size_t j = 0; j < cols; ++j) p[j] += bias.v[c];
      }
  }
  return y;
}

Tensor4 conv2d_backward(const Tensor4& x, const Tensor4& w, const Tensor4& dy,
                        int stride, int pad, Tensor4* dw, Tensor4* db,
                        bool need_dx) {
  const int oc = w.n, ic = w.c, kh = w.h, kw = w.w;
  const int oh = dy.h, ow = dy.w;
  const size_t krows = static_cast<size_t>(ic) * kh * kw;
  const size_t cols = static_cast<size_t>(oh) * ow;
  std::vector<double> col(krows * cols);
  Tensor4 dx;
  if (need_dx) dx = Tensor4(x.n, x.c, x.h, x.w);
  for (int i = 0; i < x.n; ++i) {
    const double* dyi = &dy.v[static_cast<size_t>(i) * oc * cols];
    if (dw || db)
      im2col(&x.v[static_cast<size_t>(i) * x.c * x.h * x.w], ic, x.h, x.w, kh,
             kw, stride, pad, oh, ow, col.data());
    if (dw)  // dW += dy_i * col^T
      gemm(false, true, oc, static_cast<int>(krows), static_cast<int>(cols),
           1.0, dyi, static_cast<int>(cols), col.data(),
           static_cast<int>(cols), 1.0, dw->v.data(),
           static_cast<int>(krows));
    if (db)
      for (int c = 0; c < oc; ++c) {
        double s = 0.0;
        const double* p = dyi + static_cast<size_t>(c) * cols;
        for (size_t j = 0; j < cols; ++j) s += p[j];
        db->v[c] += s;
      }
    if (need_dx) {  // cols = W^T * dy_i, then scatter
      gemm(true, false, static_cast<int>(krows), static_cast<int>(cols), oc,
           1.0, w.v.data(), static_cast<int>(krows), dyi,
           static_cast<int>(cols), 0.0, col.data(), static_cast<int>(cols));
      col2im(col.data(), ic, x.h, x.w, kh, kw, stride, pad, oh, ow,
             &dx.v[static_cast<size_t>(i) * x.c * x.h * x.w]);
    }
  }
  return dx;
}

Tensor4 tconv2d(const Tensor4& x, const Tensor4& w, const Tensor4& bias,
                int stride, int pad) {
  check_kernel(x, w, stride, pad, true);
  const int a = w.n, b = w.c, kh = w.h, kw = w.w;
  const int H = (x.h - 1) * stride - 2 * pad + kh;
  const int W = (x.w - 1) * stride - 2 * pad + kw;
  if (H < 1 || W < 1) throw usage_error("tconv output would be empty");
  Tensor4 y(x.n, b, H, W);
  const size_t krows = static_cast<size_t>(b) * kh * kw;
  const size_t cols = static_cast<size_t>(x.h) * x.w;
  std::vector<double> col(krows * cols);
  for (int i = 0; i < x.n; ++i) {
    // cols = W^T * x_i, scattered onto the large grid (conv backward-data).
    gemm(true, false, static_cast<int>(krows), static_cast<int>(cols), a, 1.0,
         w.v.data(), static_cast<int>(krows),
         &x.v[static_cast<size_t>(i) * a * cols], static_cast<int>(cols), 0.0,
         col.data(), static_cast<int>(cols));
    col2im(col.data(), b, H, W, kh, kw, stride, pad, x.h, x.w,
           &y.v[static_cast<size_t>(i) * b * H * W]);
  }
  if (!bias.v.empty()) {
    if (bias.size() != static_cast<size_t>(b))
      throw usage_error("tconv bias size mismatch");
    const size_t plane = static_cast<size_t>(H) * W;
    for (int i = 0; i < x.n; ++i)
      for (int c = 0; c < b; ++c) {
        double* p = &y.v[(static_cast<size_t>(i) * b + c) * plane];
        for (size_t j = 0; j < plane; ++j) p[j] += bias.v[c];
      }
  }
  return y;
}

Tensor4 tconv2d_backward(const Tensor4& x, const Tensor4& w, const Tensor4& dy,
                         int stride, int pad, Tensor4* dw, Tensor4* db,
                         bool need_dx) {
  const int a = w.n, b = w.c, kh = w.h, kw = w.w;
  const size_t krows = static_cast<size_t>(b) * kh * kw;
  const size_t cols = static_cast<size_t>(x.h) * x.w;
  std::vector<double> col(krows * cols);
  Tensor4 dx;
  if (need_dx) dx = Tensor4(x.n, x.c, x.h, x.w);
  const size_t plane = static_cast<size_t>(dy.h) * dy.w;
  for (int i = 0; i < x.n; ++i) {
    const double* dyi = &dy.v[static_cast<size_t>(i) * b * plane];
    im2col(dyi, b, dy.h, dy.w, kh, kw, stride, pad, x.h, x.w, col.data());
    if (need_dx)  // dx_i = W * im2col(dy_i)
      gemm(false, false, a, static_cast<int>(cols), static_cast<int>(krows),
           1.0, w.v.data(), static_cast<int>(krows), col.data(),
           static_cast<int>(cols), 0.0,
           &dx.v[static_cast<size_t>(i) * a * cols], static_cast<int>(cols));
    if (dw)  // dW += x_i * im2col(dy_i)^T
      gemm(false, true, a, static_cast<int>(krows), static_cast<int>(cols),
           1.0, &x.v[static_cast<size_t>(i) * a * cols],
           static_cast<int>(cols), col.data(), static_cast<int>(cols), 1.0,
           dw->v.data(), static_cast<int>(krows));
    if (db)
      for (int c = 0; c < b; ++c) {
        double s = 0.0;
        const double* p = dyi + static_cast<size_t>(c) * plane;
        for (size_t j = 0; j < plane; ++j) s += p[j];
        db->v[c] += s;
      }
  }
  return dx;
}

Tensor4 batchnorm(const Tensor4& x, const Tensor4& gamma, const Tensor4& beta,
                  Tensor4& running_mean, Tensor4& running_var, BnMode mode,
                  bool update_running, double eps, double momentum,
                  BnCache* cache) {
  const int c = x.c;
  if (gamma.size() != static_cast<size_t>(c) ||
      beta.size() != static_cast<size_t>(c))
    throw usage_error("batchnorm parameter size mismatch");
  const size_t plane = static_cast<size_t>(x.h) * x.w;
  const size_t m = static_cast<size_t>(x.n) * plane;
  Tensor4 y(x.n, x.c, x.h, x.w);
  Tensor4 xhat(x.n, x.c, x.h, x.w);
  std::vector<double> inv_std(c);
  for (int ch = 0; ch < c; ++ch) {
    double mean, var;
    if (mode == BnMode::train) {
      double s = 0.0;
      for (int i = 0; i < x.n; ++i) {
        const double* p = &x.v[(static_cast<size_t>(i) * c + ch) * plane];
        for (size_t j = 0; j < plane; ++j) s += p[j];
      }
      mean = s / static_cast<double>(m);
      double sv = 0.0;
      for (int i = 0; i < x.n; ++i) {
        const double* p = &x.v[(static_cast<size_t>(i) * c + ch) * plane];
        for (size_t j = 0; j < plane; ++j) {
          const double d = p[j] - mean;
          sv += d * d;
        }
      }
      var = sv / static_cast<double>(m);  // biased
      if (update_running) {
        running_mean.v[ch] += momentum * (mean - running_mean.v[ch]);
        running_var.v[ch] += momentum * (var - running_var.v[ch]);
      }
    } else {
      mean = running_mean.v[ch];
      var = running_var.v[ch];
    }
    const double is = 1.0 / std::sqrt(var + eps);
    inv_std[ch] = is;
    for (int i = 0; i < x.n; ++i) {
      const size_t off = (static_cast<size_t>(i) * c + ch) * plane;
      for (size_t j = 0; j < plane; ++j) {
        const double xh = (x.v[off + j] - mean) * is;
        xhat.v[off + j] = xh;
        y.v[off + j] = gamma.v[ch] * xh + beta.v[ch];
      }
    }
  }
  if (cache) {
    cache->xhat = std::move(xhat);
    cache->inv_std = std::move(inv_std);
    cache->mode = mode;
  }
  return y;
}

Tensor4 batchnorm_backward(const BnCache& cache, const Tensor4& gamma,
                           const Tensor4& dy, Tensor4* dgamma, Tensor4* dbeta) {
  const Tensor4& xhat = cache.xhat;
  const int c = xhat.c;
  const size_t plane = static_cast<size_t>(xhat.h) * xhat.w;
  const size_t m = static_cast<size_t>(xhat.n) * plane;
  Tensor4 dx(xhat.n, xhat.c, xhat.h, xhat.w);
  for (int ch = 0; ch < c; ++ch) {
    double sum_dy = 0.0, sum_dy_xhat = 0.0;
    for (int i = 0; i < xhat.n; ++i) {
      const size_t off = (static_cast<size_t>(i) * c + ch) * plane;
      for (size_t j = 0; j < plane; ++j) {
        sum_dy += dy.v[off + j];
        sum_dy_xhat += dy.v[off + j] * xhat.v[off + j];
      }
    }
    if (dbeta) dbeta->v[ch] += sum_dy;
    if (dgamma) dgamma->v[ch] += sum_dy_xhat;
    const double g = gamma.v[ch] * cache.inv_std[ch];
    if (cache.mode == BnMode::train) {
      const double inv_m = 1.0 / static_cast<double>(m);
      for (int i = 0; i < xhat.n; ++i) {
        const size_t off = (static_cast<size_t>(i) * c + ch) * plane;
        for (size_t j = 0; j < plane; ++j)
          dx.v[off + j] = g * (dy.v[off + j] - inv_m * sum_dy -
                               inv_m * xhat.v[off + j] * sum_dy_xhat);
      }
    } else {
      // Running statistics are constants; the map is affine per element.
      for (int i = 0; i < xhat.n; ++i) {
        const size_t off = (static_cast<size_t>(i) * c + ch) * plane;
        for (size_t j = 0; j < plane; ++j) dx.v[off + j] = g * dy.v[off + j];
      }
    }
  }
  return dx;
}

Tensor4 activation(Act kind, const Tensor4& x, double slope) {
  Tensor4 y(x.n, x.c, x.h, x.w);
  const size_t n = x.size();
  switch (kind) {
    case Act::leaky_relu:
      for (size_t i = 0; i < n; ++i)
        y.v[i] = x.v[i] > 0.0 ? x.v[i] : slope * x.v[i];
      break;
    case Act::tanh_out:
      for (size_t i = 0; i < n; ++i) y.v[i] = std::tanh(x.v[i]);
      break;
    case Act::sigmoid:
      for (size_t i = 0; i < n; ++i) y.v[i] = 1.0 / (1.0 + std::exp(-x.v[i]));
      break;
    case Act::gaussian:
      for (size_t i = 0; i < n; ++i) y.v[i] = std::exp(-x.v[i] * x.v[i]);
      break;
  }
  return y;
}

Tensor4 activation_backward(Act kind, const Tensor4& x, const Tensor4& y,
                            const Tensor4& dy, double slope) {
  Tensor4 dx(dy.n, dy.c, dy.h, dy.w);
  const size_t n = dy.size();
  switch (kind) {
    case Act::leaky_relu:
      for (size_t i = 0; i < n; ++i)
        dx.v[i] = dy.v[i] * (x.v[i] > 0.0 ? 1.0 : slope);
      break;
    case Act::tanh_out:
      for (size_t i = 0; i < n; ++i) dx.v[i] = dy.v[i] * (1.0 - y.v[i] * y.v[i]);
      break;
    case Act::sigmoid:
      for (size_t i = 0; i < n; ++i) dx.v[i] = dy.v[i] * y.v[i] * (1.0 - y.v[i]);
      break;
    case Act::gaussian:
      for (size_t i = 0; i < n; ++i) dx.v[i] = dy.v[i] * (-2.0 * x.v[i] * y.v[i]);
      break;
  }
  return dx;
}

Tensor4 pool_avg(const Tensor4& x, int k, int stride) {
  if (k < 1 || stride < 1) throw usage_error("bad pooling window");
  const int oh = (x.h - k) / stride + 1;
  const int ow = (x.w - k) / stride + 1;
  if (oh < 1 || ow < 1) throw usage_error("pool output would be empty");
  Tensor4 y(x.n, x.c, oh, ow);
  const double inv = 1.0 / (static_cast<double>(k) * k);
  for (int i = 0; i < x.n; ++i)
    for (int c = 0; c < x.c; ++c)
      for (int oy = 0; oy < oh; ++oy)
        for (int ox = 0; ox < ow; ++ox) {
          double s = 0.0;
          for (int r = 0; r < k; ++r)
            for (int t = 0; t < k; ++t)
              s += x.at(i, c, oy * stride + r, ox * stride + t);
          y.at(i, c, oy, ox) = s * inv;
        }
  return y;
}

Tensor4 pool_avg_backward(int k, int stride, int in_h, int in_w,
                          const Tensor4& dy) {
  Tensor4 dx(dy.n, dy.c, in_h, in_w);
  const double inv = 1.0 / (static_cast<double>(k) * k);
  for (int i = 0; i < dy.n; ++i)
    for (int c = 0; c < dy.c; ++c)
      for (int oy = 0; oy < dy.h; ++oy)
        for (int ox = 0; ox < dy.w; ++ox) {
          const double g = dy.at(i, c, oy, ox) * inv;
          for (int r = 0; r < k; ++r)
            for (int t = 0; t < k; ++t)
              dx.at(i, c, oy * stride + r, ox * stride + t) += g;
        }
  return dx;
}

Tensor4 fully_connected(const Tensor4& x, const Tensor4& w, const Tensor4& b) {
  const int in = w.c, out = w.n;
  if (x.c * x.h * x.w != in) throw usage_error("fc input size mismatch");
  Tensor4 y(x.n, out, 1, 1);
  gemm(false, true, x.n, out, in, 1.0, x.v.data(), in, w.v.data(), in, 0.0,
       y.v.data(), out);
  if (!b.v.empty()) {
    if (b.size() != static_cast<size_t>(out))
      throw usage_error("fc bias size mismatch");
    for (int i = 0; i < x.n; ++i)
      for (int o = 0; o < out; ++o) y.v[static_cast<size_t>(i) * out + o] += b.v[o];
  }
  return y;
}

Tensor4 fully_connected_backward(const Tensor4& x, const Tensor4& w,
                                 const Tensor4& dy, Tensor4* dw, Tensor4* db,
                                 bool need_dx) {
  const int in = w.c, out = w.n;
  Tensor4 dx;
  if (need_dx) {  // dx = dy * W
    dx = Tensor4(x.n, x.c, x.h, x.w);
    gemm(false, false, x.n, in, out, 1.0, dy.v.data(), out, w.v.data(), in,
         0.0, dx.v.data(), in);
  }
  if (dw)  // dW += dy^T * x
    gemm(true, false, out, in, x.n, 1.0, dy.v.data(), out, x.v.data(), in, 1.0,
         dw->v.data(), in);
  if (db)
    for (int i = 0; i < x.n; ++i)
      for (int o = 0; o < out; ++o) db->v[o] += dy.v[static_cast<size_t>(i) * out + o];
  return dx;
}

Tensor4 softmax(const Tensor4& x) {
  Tensor4 y(x.n, x.c, x.h, x.w);
  const size_t plane = static_cast<size_t>(x.h) * x.w;
  for (int i = 0; i < x.n; ++i)
    for (size_t j = 0; j < plane; ++j) {
      double mx = -1e300;
      for (int c = 0; c < x.c; ++c)
        mx = std::max(mx, x.v[(static_cast<size_t>(i) * x.c + c) * plane + j]);
      double z = 0.0;
      for (int c = 0; c < x.c; ++c) {
        const size_t off = (static_cast<size_t>(i) * x.c + c) * plane + j;
        y.v[off] = std::exp(x.v[off] - mx);
        z += y.v[off];
      }
      for (int c = 0; c < x.c; ++c)
        y.v[(static_cast<size_t>(i) * x.c + c) * plane + j] /= z;
    }
  return y;
}

Tensor4 softmax_backward(const Tensor4& y, const Tensor4& dy) {
  Tensor4 dx(y.n, y.c, y.h, y.w);
  const size_t plane = static_cast<size_t>(y.h) * y.w;
  for (int i = 0; i < y.n; ++i)
    for (size_t j = 0; j < plane; ++j) {
      double dot = 0.0;
      for (int c = 0; c < y.c; ++c) {
        const size_t off = (static_cast<size_t>(i) * y.c + c) * plane + j;
        dot += dy.v[off] * y.v[off];
      }
      for (int c = 0; c < y.c; ++c) {
        const size_t off = (static_cast<size_t>(i) * y.c + c) * plane + j;
        dx.v[off] = y.v[off] * (dy.v[off] - dot);
      }
    }
  return dx;
}

namespace {
double clamp01(double p, double eps) {
  return p < eps ? eps : (p > 1.0 - eps ? 1.0 - eps : p);
}
}  // namespace

double bce_loss(const std::vector<double>& p, const std::vector<double>& label,
                double eps) {
  if (p.size() != label.size() || p.empty())
    throw usage_error("bce operands must be same nonzero size");
  double s = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    const double q = clamp01(p[i], eps);
    s += label[i] * std::log(q) + (1.0 - label[i]) * std::log(1.0 - q);
  }
  return -s / static_cast<double>(p.size());
}

std::vector<double> bce_loss_backward(const std::vector<double>& p,
                                      const std::vector<double>& label,
                                      double eps) {
  std::vector<double> g(p.size());
  const double inv_n = 1.0 / static_cast<double>(p.size());
  for (size_t i = 0; i < p.size(); ++i) {
    const double q = clamp01(p[i], eps);
    g[i] = inv_n * (q - label[i]) / (q * (1.0 - q));
  }
  return g;
}

double mean_log(const std::vector<double>& p, double eps) {
  if (p.empty()) throw usage_error("mean_log of empty batch");
  double s = 0.0;
  for (double q : p) s += std::log(clamp01(q, eps));
  return s / static_cast<double>(p.size());
}

std::vector<double> mean_log_backward(const std::vector<double>& p,
                                      double eps) {
  std::vector<double> g(p.size());
  const double inv_n = 1.0 / static_cast<double>(p.size());
  for (size_t i = 0; i < p.size(); ++i) g[i] = inv_n / clamp01(p[i], eps);
  return g;
}

}  // namespace steglab
