#include "randpad/conv.hpp"

#include <algorithm>

#include "randpad/error.hpp"

namespace randpad {

ConvGeometry ConvGeometry::make(const Shape& x, const Shape& w, std::size_t bias_len,
                                std::size_t stride) {
  if (stride == 0) throw InvalidArgument("conv2d: stride must be >= 1");
  if (w.h != w.w || w.h == 0) throw InvalidArgument("conv2d: kernel must be square, got " + w.str());
  if (w.c != x.c) {
    throw InvalidArgument("conv2d: weight " + w.str() + " expects " + std::to_string(w.c) +
                          " input channels, input is " + x.str());
  }
  if (bias_len != w.n) {
    throw InvalidArgument("conv2d: bias length " + std::to_string(bias_len) + " != " +
                          std::to_string(w.n) + " filters");
  }
  if (x.h < w.h || x.w < w.w) {
    throw InvalidArgument("conv2d: input " + x.str() + " smaller than kernel " + w.str());
  }
  ConvGeometry g;
  g.batch = x.n;
  g.in_channels = x.c;
  g.in_h = x.h;
  g.in_w = x.w;
  g.out_channels = w.n;
  g.kernel = w.h;
  g.stride = stride;
  g.out_h = (x.h - w.h) / stride + 1;
  g.out_w = (x.w - w.w) / stride + 1;
  return g;
}

namespace {

// Register tiles: kRows output rows by kCols positions. Positions are padded
// up to a multiple of kCols (zeros), rows up to a multiple of kRows, so every
// tile is full and the inner loops vectorize without tails.
constexpr std::size_t kRows = 4;
constexpr std::size_t kCols = 32;

std::size_t round_up(std::size_t v, std::size_t m) { return (v + m - 1) / m * m; }

// Weights reordered from (Cout, Cin, kh, kw) to (Cout, kh, kw, Cin), with
// Cout padded to a multiple of kRows.
std::vector<float> reorder_weights(const Tensor& w, const ConvGeometry& g) {
  std::vector<float> out(round_up(g.out_channels, kRows) * g.patch(), 0.0f);
  const std::size_t k = g.kernel;
  for (std::size_t co = 0; co < g.out_channels; ++co) {
    for (std::size_t ci = 0; ci < g.in_channels; ++ci) {
      for (std::size_t kh = 0; kh < k; ++kh) {
        for (std::size_t kw = 0; kw < k; ++kw) {
          out[co * g.patch() + (kh * k + kw) * g.in_channels + ci] = w.at(co, ci, kh, kw);
        }
      }
    }
  }
  return out;
}

// Transposed copy wt[kk][co] of the reordered weights, kk padded to kRows.
std::vector<float> transpose_weights(const std::vector<float>& wr, const ConvGeometry& g) {
  const std::size_t K = g.patch();
  const std::size_t Co = g.out_channels;
  std::vector<float> wt(round_up(K, kRows) * Co, 0.0f);
  for (std::size_t co = 0; co < Co; ++co) {
    for (std::size_t kk = 0; kk < K; ++kk) wt[kk * Co + co] = wr[co * K + kk];
  }
  return wt;
}

// col[(kh, kw, ci)][p] for one sample, row stride ld >= positions (tail zero).
void im2col(std::span<const float> x, const ConvGeometry& g, std::size_t ld,
            std::vector<float>& col) {
  const std::size_t k = g.kernel;
  // Only rows < patch and columns < positions are ever written, so the padded
  // tails stay zero across calls with the same geometry.
  const std::size_t size = round_up(g.patch(), kRows) * ld;
  if (col.size() != size) col.assign(size, 0.0f);
  for (std::size_t kh = 0; kh < k; ++kh) {
    for (std::size_t kw = 0; kw < k; ++kw) {
      for (std::size_t ci = 0; ci < g.in_channels; ++ci) {
        float* dst = col.data() + ((kh * k + kw) * g.in_channels + ci) * ld;
        const float* plane = x.data() + ci * g.in_h * g.in_w;
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
          const float* row = plane + (oy * g.stride + kh) * g.in_w + kw;
          float* out = dst + oy * g.out_w;
          if (g.stride == 1) {
            std::copy(row, row + g.out_w, out);
          } else {
            for (std::size_t ox = 0; ox < g.out_w; ++ox) out[ox] = row[ox * g.stride];
          }
        }
      }
    }
  }
}

// Adjoint of im2col: scatter-add col rows back onto the input planes.
void col2im(const std::vector<float>& col, const ConvGeometry& g, std::size_t ld,
            std::span<float> dx) {
  const std::size_t k = g.kernel;
  std::fill(dx.begin(), dx.end(), 0.0f);
  for (std::size_t kh = 0; kh < k; ++kh) {
    for (std::size_t kw = 0; kw < k; ++kw) {
      for (std::size_t ci = 0; ci < g.in_channels; ++ci) {
        const float* src = col.data() + ((kh * k + kw) * g.in_channels + ci) * ld;
        float* plane = dx.data() + ci * g.in_h * g.in_w;
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
          float* row = plane + (oy * g.stride + kh) * g.in_w + kw;
          const float* in = src + oy * g.out_w;
          if (g.stride == 1) {
            for (std::size_t ox = 0; ox < g.out_w; ++ox) row[ox] += in[ox];
          } else {
            for (std::size_t ox = 0; ox < g.out_w; ++ox) row[ox * g.stride] += in[ox];
          }
        }
      }
    }
  }
}

// c[r][p] = init[r] + sum_i a[r * lda + i] * b[i * ldb + p], for rows padded
// to kRows and ld a multiple of kCols. The sum runs over i in order.
void gemm_rows(const float* a, std::size_t lda, const float* b, std::size_t ldb, std::size_t inner,
               const float* init, std::size_t rows, float* c, std::size_t ldc) {
  for (std::size_t p0 = 0; p0 < ldb; p0 += kCols) {
    for (std::size_t r0 = 0; r0 < rows; r0 += kRows) {
      float acc[kRows][kCols];
      for (std::size_t r = 0; r < kRows; ++r) {
        const float v = init ? init[r0 + r] : 0.0f;
        for (std::size_t p = 0; p < kCols; ++p) acc[r][p] = v;
      }
      for (std::size_t i = 0; i < inner; ++i) {
        const float* brow = b + i * ldb + p0;
        for (std::size_t r = 0; r < kRows; ++r) {
          const float av = a[(r0 + r) * lda + i];
          for (std::size_t p = 0; p < kCols; ++p) acc[r][p] += av * brow[p];
        }
      }
      for (std::size_t r = 0; r < kRows; ++r) {
        std::copy(acc[r], acc[r] + kCols, c + (r0 + r) * ldc + p0);
      }
    }
  }
}

// gw[co][kk] = sum_p g[co][p] col[kk][p] as blocked dot products; rows of
// both padded to kRows, positions zero-padded to ld (a multiple of 16).
void weight_grad_dot(const float* g, const float* col, std::size_t ld, std::size_t co_rows,
                     std::size_t kk_rows, std::size_t K, std::size_t Co, float* gw) {
  for (std::size_t c0 = 0; c0 < co_rows; c0 += kRows) {
    for (std::size_t k0 = 0; k0 < kk_rows; k0 += kRows) {
      float acc[kRows][kRows][16] = {};
      for (std::size_t p0 = 0; p0 < ld; p0 += 16) {
        for (std::size_t i = 0; i < kRows; ++i) {
          const float* grow = g + (c0 + i) * ld + p0;
          for (std::size_t j = 0; j < kRows; ++j) {
            const float* crow = col + (k0 + j) * ld + p0;
            for (std::size_t p = 0; p < 16; ++p) acc[i][j][p] += grow[p] * crow[p];
          }
        }
      }
      for (std::size_t i = 0; i < kRows && c0 + i < Co; ++i) {
        for (std::size_t j = 0; j < kRows && k0 + j < K; ++j) {
          float s = 0.0f;
          for (std::size_t p = 0; p < 16; ++p) s += acc[i][j][p];
          gw[(c0 + i) * K + k0 + j] = s;
        }
      }
    }
  }
}

// Positions at or above this use weight_grad_dot; below it the lane
// reductions dominate and a transpose + row GEMM is cheaper.
constexpr std::size_t kDotPositions = 256;

// dst[p][kk] = col[kk][p] for p < positions, kk < patch; dst row stride ldt.
void transpose_col(const std::vector<float>& col, std::size_t ld, std::size_t K, std::size_t P,
                   std::size_t ldt, std::vector<float>& dst) {
  dst.assign(P * ldt, 0.0f);
  for (std::size_t kk = 0; kk < K; ++kk) {
    const float* src = col.data() + kk * ld;
    for (std::size_t p = 0; p < P; ++p) dst[p * ldt + kk] = src[p];
  }
}

}  // namespace

Tensor conv2d(const Tensor& x, const Tensor& w, std::span<const float> b, std::size_t stride) {
  const ConvGeometry g = ConvGeometry::make(x.shape(), w.shape(), b.size(), stride);
  const std::vector<float> wr = reorder_weights(w, g);
  Tensor out({g.batch, g.out_channels, g.out_h, g.out_w});
  const std::size_t P = g.positions();
  const std::size_t K = g.patch();
  const std::size_t ld = round_up(P, kCols);
  const std::size_t rows = round_up(g.out_channels, kRows);
  std::vector<float> bias(rows, 0.0f);
  std::copy(b.begin(), b.end(), bias.begin());
  const auto batch = static_cast<std::ptrdiff_t>(g.batch);

#pragma omp parallel
  {
    std::vector<float> col;
    std::vector<float> y(rows * ld);
#pragma omp for schedule(static)
    for (std::ptrdiff_t n = 0; n < batch; ++n) {
      im2col(x.sample(static_cast<std::size_t>(n)), g, ld, col);
      gemm_rows(wr.data(), K, col.data(), ld, K, bias.data(), rows, y.data(), ld);
      float* dst = out.sample(static_cast<std::size_t>(n)).data();
      for (std::size_t co = 0; co < g.out_channels; ++co) {
        std::copy(y.data() + co * ld, y.data() + co * ld + P, dst + co * P);
      }
    }
  }
  return out;
}

ConvGrads conv2d_backward(const Tensor& x, const Tensor& w, const Tensor& grad_out,
                          std::size_t stride) {
  const ConvGeometry g = ConvGeometry::make(x.shape(), w.shape(), w.shape().n, stride);
  const Shape expect{g.batch, g.out_channels, g.out_h, g.out_w};
  if (grad_out.shape() != expect) {
    throw InvalidArgument("conv2d_backward: grad_out " + grad_out.shape().str() + ", expected " +
                          expect.str());
  }
  const std::vector<float> wr = reorder_weights(w, g);
  const std::vector<float> wt = transpose_weights(wr, g);
  const std::size_t P = g.positions();
  const std::size_t K = g.patch();
  const std::size_t Co = g.out_channels;
  const std::size_t ld = round_up(P, kCols);
  const std::size_t co_rows = round_up(Co, kRows);
  const std::size_t kk_rows = round_up(K, kRows);
  const std::size_t ldk = round_up(K, kCols);
  const auto batch = static_cast<std::ptrdiff_t>(g.batch);

  ConvGrads grads;
  grads.grad_x = Tensor(x.shape());
  // Per-sample weight gradients, summed in sample order below.
  std::vector<float> partial(g.batch * Co * K, 0.0f);

#pragma omp parallel
  {
    std::vector<float> col;
    std::vector<float> colt;
    std::vector<float> dcol(kk_rows * ld);
    std::vector<float> gw(co_rows * ldk);
    std::vector<float> gpad(co_rows * ld, 0.0f);
#pragma omp for schedule(static)
    for (std::ptrdiff_t n = 0; n < batch; ++n) {
      const auto sn = static_cast<std::size_t>(n);
      im2col(x.sample(sn), g, ld, col);
      const float* go = grad_out.sample(sn).data();
      for (std::size_t co = 0; co < Co; ++co) {
        std::copy(go + co * P, go + (co + 1) * P, gpad.data() + co * ld);
      }
      // gw[co][kk] = sum_p g[co][p] col[kk][p]
      float* part = partial.data() + sn * Co * K;
      if (P >= kDotPositions) {
        weight_grad_dot(gpad.data(), col.data(), ld, co_rows, kk_rows, K, Co, part);
      } else {
        transpose_col(col, ld, K, P, ldk, colt);
        gemm_rows(gpad.data(), ld, colt.data(), ldk, P, nullptr, co_rows, gw.data(), ldk);
        for (std::size_t co = 0; co < Co; ++co) {
          std::copy(gw.data() + co * ldk, gw.data() + co * ldk + K, part + co * K);
        }
      }
      // dcol[kk][p] = sum_co w[co][kk] g[co][p]
      gemm_rows(wt.data(), Co, gpad.data(), ld, Co, nullptr, kk_rows, dcol.data(), ld);
      col2im(dcol, g, ld, grads.grad_x.sample(sn));
    }
  }

  std::vector<float> gw_sum(Co * K, 0.0f);
  for (std::size_t n = 0; n < g.batch; ++n) {
    const float* src = partial.data() + n * Co * K;
    for (std::size_t i = 0; i < Co * K; ++i) gw_sum[i] += src[i];
  }
  grads.grad_w = Tensor(w.shape());
  const std::size_t k = g.kernel;
  for (std::size_t co = 0; co < Co; ++co) {
    for (std::size_t ci = 0; ci < g.in_channels; ++ci) {
      for (std::size_t kh = 0; kh < k; ++kh) {
        for (std::size_t kw = 0; kw < k; ++kw) {
          grads.grad_w.at(co, ci, kh, kw) = gw_sum[co * K + (kh * k + kw) * g.in_channels + ci];
        }
      }
    }
  }

  grads.grad_b.assign(Co, 0.0f);
  for (std::size_t n = 0; n < g.batch; ++n) {
    for (std::size_t co = 0; co < Co; ++co) {
      auto plane = grad_out.plane(n, co);
      float s = 0.0f;
      for (float v : plane) s += v;
      grads.grad_b[co] += s;
    }
  }
  return grads;
}

namespace reference {

Tensor conv2d(const Tensor& x, const Tensor& w, std::span<const float> b, std::size_t stride) {
  const ConvGeometry g = ConvGeometry::make(x.shape(), w.shape(), b.size(), stride);
  Tensor out({g.batch, g.out_channels, g.out_h, g.out_w});
  for (std::size_t n = 0; n < g.batch; ++n) {
    for (std::size_t co = 0; co < g.out_channels; ++co) {
      for (std::size_t oy = 0; oy < g.out_h; ++oy) {
        for (std::size_t ox = 0; ox < g.out_w; ++ox) {
          float acc = b[co];
          for (std::size_t kh = 0; kh < g.kernel; ++kh) {
            for (std::size_t kw = 0; kw < g.kernel; ++kw) {
              for (std::size_t ci = 0; ci < g.in_channels; ++ci) {
                acc += w.at(co, ci, kh, kw) * x.at(n, ci, oy * stride + kh, ox * stride + kw);
              }
            }
          }
          out.at(n, co, oy, ox) = acc;
        }
      }
    }
  }
  return out;
}

ConvGrads conv2d_backward(const Tensor& x, const Tensor& w, const Tensor& grad_out,
                          std::size_t stride) {
  const ConvGeometry g = ConvGeometry::make(x.shape(), w.shape(), w.shape().n, stride);
  const Shape expect{g.batch, g.out_channels, g.out_h, g.out_w};
  if (grad_out.shape() != expect) {
    throw InvalidArgument("conv2d_backward: grad_out " + grad_out.shape().str() + ", expected " +
                          expect.str());
  }
  ConvGrads grads{Tensor(x.shape()), Tensor(w.shape()), std::vector<float>(g.out_channels, 0.0f)};
  for (std::size_t n = 0; n < g.batch; ++n) {
    for (std::size_t co = 0; co < g.out_channels; ++co) {
      for (std::size_t oy = 0; oy < g.out_h; ++oy) {
        for (std::size_t ox = 0; ox < g.out_w; ++ox) {
          const float gv = grad_out.at(n, co, oy, ox);
          grads.grad_b[co] += gv;
          for (std::size_t kh = 0; kh < g.kernel; ++kh) {
            for (std::size_t kw = 0; kw < g.kernel; ++kw) {
              for (std::size_t ci = 0; ci < g.in_channels; ++ci) {
                const std::size_t iy = oy * stride + kh;
                const std::size_t ix = ox * stride + kw;
                grads.grad_w.at(co, ci, kh, kw) += gv * x.at(n, ci, iy, ix);
                grads.grad_x.at(n, ci, iy, ix) += gv * w.at(co, ci, kh, kw);
              }
            }
          }
        }
      }
    }
  }
  return grads;
}

}  // namespace reference

}  // namespace randpad
