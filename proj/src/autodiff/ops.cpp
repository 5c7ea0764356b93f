#include "cfisac/autodiff/ops.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cfisac::ad {
namespace {

void same_graph(Var a, Var b, const char* op) {
  if (!a.valid() || !b.valid() || &a.graph() != &b.graph()) {
    throw std::invalid_argument(std::string(op) + ": operands from different graphs");
  }
}

int broadcast_dim(int x, int y, const char* op, const Shape& a, const Shape& b) {
  if (x == y || y == 1) return x;
  if (x == 1) return y;
  throw std::invalid_argument(std::string(op) + ": cannot broadcast " + a.str() + " with " +
                              b.str());
}

struct Strides {
  std::size_t b, r, c;
};

Strides strides_for(const Shape& s, const Shape& out) {
  const std::size_t sc = 1;
  const std::size_t sr = static_cast<std::size_t>(s.cols);
  const std::size_t sb = static_cast<std::size_t>(s.rows) * s.cols;
  return {s.batch == 1 && out.batch > 1 ? 0 : sb, s.rows == 1 && out.rows > 1 ? 0 : sr,
          s.cols == 1 && out.cols > 1 ? 0 : sc};
}

// Calls f(out_index, a_index, b_index) for every element of `out`.
template <class F>
void for_each_broadcast(const Shape& out, Strides sa, Strides sb, F&& f) {
  std::size_t o = 0;
  for (int bi = 0; bi < out.batch; ++bi) {
    for (int ri = 0; ri < out.rows; ++ri) {
      const std::size_t ia0 = bi * sa.b + ri * sa.r;
      const std::size_t ib0 = bi * sb.b + ri * sb.r;
      for (int ci = 0; ci < out.cols; ++ci, ++o) f(o, ia0 + ci * sa.c, ib0 + ci * sb.c);
    }
  }
}

template <class Fwd, class DA, class DB>
Var binary(Var a, Var b, const char* op, Fwd fwd, DA da, DB db) {
  same_graph(a, b, op);
  const Shape& as = a.shape();
  const Shape& bs = b.shape();
  const Shape out{broadcast_dim(as.batch, bs.batch, op, as, bs),
                  broadcast_dim(as.rows, bs.rows, op, as, bs),
                  broadcast_dim(as.cols, bs.cols, op, as, bs)};
  const Strides sa = strides_for(as, out);
  const Strides sb = strides_for(bs, out);
  Tensor v(out);
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  for_each_broadcast(out, sa, sb,
                     [&](std::size_t o, std::size_t ia, std::size_t ib) { v[o] = fwd(A[ia], B[ib]); });
  const int ida = a.id();
  const int idb = b.id();
  const bool rg = a.requires_grad() || b.requires_grad();
  return a.graph().record(std::move(v), rg, [=](Graph& g, int self) {
    const Tensor& A = g.value(ida);
    const Tensor& B = g.value(idb);
    const Tensor& Y = g.value(self);
    const Tensor& G = g.grad(self);
    Tensor* GA = g.requires_grad(ida) ? &g.grad(ida) : nullptr;
    Tensor* GB = g.requires_grad(idb) ? &g.grad(idb) : nullptr;
    for_each_broadcast(Y.shape(), sa, sb, [&](std::size_t o, std::size_t ia, std::size_t ib) {
      if (GA) (*GA)[ia] += da(A[ia], B[ib], Y[o], G[o]);
      if (GB) (*GB)[ib] += db(A[ia], B[ib], Y[o], G[o]);
    });
  });
}

template <class Fwd, class D>
Var unary(Var a, Fwd fwd, D d) {
  const Tensor& A = a.value();
  Tensor v(A.shape());
  for (std::size_t i = 0; i < A.size(); ++i) v[i] = fwd(A[i]);
  const int ida = a.id();
  return a.graph().record(std::move(v), a.requires_grad(), [=](Graph& g, int self) {
    const Tensor& A = g.value(ida);
    const Tensor& Y = g.value(self);
    const Tensor& G = g.grad(self);
    Tensor& GA = g.grad(ida);
    for (std::size_t i = 0; i < A.size(); ++i) GA[i] += d(A[i], Y[i], G[i]);
  });
}

}  // namespace

Var matmul(Var a, Var b) {
  same_graph(a, b, "matmul");
  const Shape& as = a.shape();
  const Shape& bs = b.shape();
  if (as.cols != bs.rows) {
    throw std::invalid_argument("matmul: inner extents differ " + as.str() + " x " + bs.str());
  }
  const int batch = broadcast_dim(as.batch, bs.batch, "matmul", as, bs);
  const int m = as.rows, k = as.cols, n = bs.cols;
  Tensor v({batch, m, n});
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  const std::size_t sa = as.batch == 1 ? 0 : static_cast<std::size_t>(m) * k;
  const std::size_t sb = bs.batch == 1 ? 0 : static_cast<std::size_t>(k) * n;
  for (int bi = 0; bi < batch; ++bi) {
    const double* pa = A.data() + bi * sa;
    const double* pb = B.data() + bi * sb;
    double* pc = v.data() + static_cast<std::size_t>(bi) * m * n;
    for (int i = 0; i < m; ++i) {
      for (int p = 0; p < k; ++p) {
        const double aip = pa[i * k + p];
        const double* brow = pb + p * n;
        double* crow = pc + i * n;
        for (int j = 0; j < n; ++j) crow[j] += aip * brow[j];
      }
    }
  }
  const int ida = a.id();
  const int idb = b.id();
  const bool rg = a.requires_grad() || b.requires_grad();
  return a.graph().record(std::move(v), rg, [=](Graph& g, int self) {
    const Tensor& A = g.value(ida);
    const Tensor& B = g.value(idb);
    const Tensor& G = g.grad(self);
    Tensor* GA = g.requires_grad(ida) ? &g.grad(ida) : nullptr;
    Tensor* GB = g.requires_grad(idb) ? &g.grad(idb) : nullptr;
    for (int bi = 0; bi < batch; ++bi) {
      const double* pa = A.data() + bi * sa;
      const double* pb = B.data() + bi * sb;
      const double* pg = G.data() + static_cast<std::size_t>(bi) * m * n;
      for (int i = 0; i < m; ++i) {
        const double* grow = pg + i * n;
        for (int p = 0; p < k; ++p) {
          const double* brow = pb + p * n;
          if (GA) {
            double acc = 0.0;
            for (int j = 0; j < n; ++j) acc += grow[j] * brow[j];
            GA->data()[bi * sa + i * k + p] += acc;
          }
          if (GB) {
            const double aip = pa[i * k + p];
            double* gbrow = GB->data() + bi * sb + p * n;
            for (int j = 0; j < n; ++j) gbrow[j] += aip * grow[j];
          }
        }
      }
    }
  });
}

Var transpose(Var a) {
  const Shape s = a.shape();
  const Tensor& A = a.value();
  Tensor v({s.batch, s.cols, s.rows});
  for (int b = 0; b < s.batch; ++b)
    for (int r = 0; r < s.rows; ++r)
      for (int c = 0; c < s.cols; ++c) v(b, c, r) = A(b, r, c);
  const int ida = a.id();
  return a.graph().record(std::move(v), a.requires_grad(), [=](Graph& g, int self) {
    const Tensor& G = g.grad(self);
    Tensor& GA = g.grad(ida);
    for (int b = 0; b < s.batch; ++b)
      for (int r = 0; r < s.rows; ++r)
        for (int c = 0; c < s.cols; ++c) GA(b, r, c) += G(b, c, r);
  });
}

Var add(Var a, Var b) {
  return binary(
      a, b, "add", [](double x, double y) { return x + y; },
      [](double, double, double, double g) { return g; },
      [](double, double, double, double g) { return g; });
}

Var sub(Var a, Var b) {
  return binary(
      a, b, "sub", [](double x, double y) { return x - y; },
      [](double, double, double, double g) { return g; },
      [](double, double, double, double g) { return -g; });
}

Var hadamard(Var a, Var b) {
  return binary(
      a, b, "hadamard", [](double x, double y) { return x * y; },
      [](double, double y, double, double g) { return g * y; },
      [](double x, double, double, double g) { return g * x; });
}

Var divide(Var a, Var b) {
  return binary(
      a, b, "divide", [](double x, double y) { return x / y; },
      [](double, double y, double, double g) { return g / y; },
      [](double, double y, double out, double g) { return -g * out / y; });
}

Var scale(Var a, double factor) {
  return unary(
      a, [factor](double x) { return factor * x; },
      [factor](double, double, double g) { return factor * g; });
}

Var add_scalar(Var a, double offset) {
  return unary(
      a, [offset](double x) { return x + offset; }, [](double, double, double g) { return g; });
}

Var square(Var a) {
  return unary(
      a, [](double x) { return x * x; }, [](double x, double, double g) { return 2.0 * x * g; });
}

Var sqrt(Var a) {
  return unary(
      a, [](double x) { return std::sqrt(x); },
      [](double, double y, double g) { return y > 0.0 ? 0.5 * g / y : 0.0; });
}

Var log2(Var a) {
  return unary(
      a, [](double x) { return std::log2(x); },
      [](double x, double, double g) { return g / (x * std::numbers::ln2); });
}

Var relu(Var a) {
  return unary(
      // NaN passes through so a poisoned forward pass stays visible in the loss
      a, [](double x) { return std::isnan(x) || x > 0.0 ? x : 0.0; },
      [](double x, double, double g) { return std::isnan(x) || x > 0.0 ? g : 0.0; });
}

Var clamp_min_zero(Var a) { return relu(a); }

Var row_softmax(Var a) {
  const Shape s = a.shape();
  const Tensor& A = a.value();
  Tensor v(s);
  const int n = s.cols;
  const std::size_t nrow = static_cast<std::size_t>(s.batch) * s.rows;
  for (std::size_t r = 0; r < nrow; ++r) {
    const double* x = A.data() + r * n;
    double* y = v.data() + r * n;
    const double mx = *std::max_element(x, x + n);
    double z = 0.0;
    for (int j = 0; j < n; ++j) z += (y[j] = std::exp(x[j] - mx));
    for (int j = 0; j < n; ++j) y[j] /= z;
  }
  const int ida = a.id();
  return a.graph().record(std::move(v), a.requires_grad(), [=](Graph& g, int self) {
    const Tensor& Y = g.value(self);
    const Tensor& G = g.grad(self);
    Tensor& GA = g.grad(ida);
    for (std::size_t r = 0; r < nrow; ++r) {
      const double* y = Y.data() + r * n;
      const double* gy = G.data() + r * n;
      double dot = 0.0;
      for (int j = 0; j < n; ++j) dot += gy[j] * y[j];
      double* gx = GA.data() + r * n;
      for (int j = 0; j < n; ++j) gx[j] += y[j] * (gy[j] - dot);
    }
  });
}

Var layer_norm(Var x, Var gain, Var bias, double eps) {
  same_graph(x, gain, "layer_norm");
  same_graph(x, bias, "layer_norm");
  const Shape s = x.shape();
  const Shape ps{1, 1, s.cols};
  if (!(gain.shape() == ps) || !(bias.shape() == ps)) {
    throw std::invalid_argument("layer_norm: gain/bias must be " + ps.str());
  }
  const int n = s.cols;
  const std::size_t nrow = static_cast<std::size_t>(s.batch) * s.rows;
  const Tensor& X = x.value();
  const Tensor& Gn = gain.value();
  const Tensor& Bs = bias.value();
  Tensor v(s);
  std::vector<double> inv_std(nrow);
  for (std::size_t r = 0; r < nrow; ++r) {
    const double* xr = X.data() + r * n;
    double mean = 0.0;
    for (int j = 0; j < n; ++j) mean += xr[j];
    mean /= n;
    double var = 0.0;
    for (int j = 0; j < n; ++j) var += (xr[j] - mean) * (xr[j] - mean);
    var /= n;
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    double* yr = v.data() + r * n;
    for (int j = 0; j < n; ++j) yr[j] = (xr[j] - mean) * inv_std[r] * Gn[j] + Bs[j];
  }
  const int idx = x.id(), idg = gain.id(), idb = bias.id();
  const bool rg = x.requires_grad() || gain.requires_grad() || bias.requires_grad();
  return x.graph().record(std::move(v), rg, [=, inv_std = std::move(inv_std)](Graph& g, int self) {
    const Tensor& X = g.value(idx);
    const Tensor& Gn = g.value(idg);
    const Tensor& G = g.grad(self);
    Tensor* GX = g.requires_grad(idx) ? &g.grad(idx) : nullptr;
    Tensor* GG = g.requires_grad(idg) ? &g.grad(idg) : nullptr;
    Tensor* GB = g.requires_grad(idb) ? &g.grad(idb) : nullptr;
    std::vector<double> xhat(n), dxhat(n);
    for (std::size_t r = 0; r < nrow; ++r) {
      const double* xr = X.data() + r * n;
      const double* gy = G.data() + r * n;
      double mean = 0.0;
      for (int j = 0; j < n; ++j) mean += xr[j];
      mean /= n;
      double m1 = 0.0, m2 = 0.0;
      for (int j = 0; j < n; ++j) {
        xhat[j] = (xr[j] - mean) * inv_std[r];
        dxhat[j] = gy[j] * Gn[j];
        m1 += dxhat[j];
        m2 += dxhat[j] * xhat[j];
        if (GG) (*GG)[j] += gy[j] * xhat[j];
        if (GB) (*GB)[j] += gy[j];
      }
      m1 /= n;
      m2 /= n;
      if (GX) {
        double* gx = GX->data() + r * n;
        for (int j = 0; j < n; ++j) gx[j] += inv_std[r] * (dxhat[j] - m1 - xhat[j] * m2);
      }
    }
  });
}

Var concat(const std::vector<Var>& parts, Axis axis) {
  if (parts.empty()) throw std::invalid_argument("concat: no operands");
  const Shape first = parts.front().shape();
  Shape out = first;
  int total = 0;
  bool rg = false;
  std::vector<int> ids, offsets;
  for (const Var& p : parts) {
    same_graph(parts.front(), p, "concat");
    const Shape s = p.shape();
    const bool ok = axis == Axis::batch ? (s.rows == first.rows && s.cols == first.cols)
                    : axis == Axis::rows ? (s.batch == first.batch && s.cols == first.cols)
                                         : (s.batch == first.batch && s.rows == first.rows);
    if (!ok) throw std::invalid_argument("concat: mismatched " + s.str() + " vs " + first.str());
    offsets.push_back(total);
    total += axis == Axis::batch ? s.batch : axis == Axis::rows ? s.rows : s.cols;
    ids.push_back(p.id());
    rg = rg || p.requires_grad();
  }
  (axis == Axis::batch ? out.batch : axis == Axis::rows ? out.rows : out.cols) = total;
  Tensor v(out);
  auto place = [axis](const Shape& s, int off, int b, int r, int c) {
    if (axis == Axis::batch) return std::array<int, 3>{b + off, r, c};
    if (axis == Axis::rows) return std::array<int, 3>{b, r + off, c};
    (void)s;
    return std::array<int, 3>{b, r, c + off};
  };
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor& P = parts[k].value();
    const Shape s = P.shape();
    for (int b = 0; b < s.batch; ++b)
      for (int r = 0; r < s.rows; ++r)
        for (int c = 0; c < s.cols; ++c) {
          const auto idx = place(s, offsets[k], b, r, c);
          v(idx[0], idx[1], idx[2]) = P(b, r, c);
        }
  }
  return parts.front().graph().record(std::move(v), rg, [=](Graph& g, int self) {
    const Tensor& G = g.grad(self);
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (!g.requires_grad(ids[k])) continue;
      Tensor& GP = g.grad(ids[k]);
      const Shape s = GP.shape();
      for (int b = 0; b < s.batch; ++b)
        for (int r = 0; r < s.rows; ++r)
          for (int c = 0; c < s.cols; ++c) {
            const auto idx = place(s, offsets[k], b, r, c);
            GP(b, r, c) += G(idx[0], idx[1], idx[2]);
          }
    }
  });
}

Var slice(Var a, Axis axis, int start, int length) {
  const Shape s = a.shape();
  const int extent = axis == Axis::batch ? s.batch : axis == Axis::rows ? s.rows : s.cols;
  if (start < 0 || length < 1 || start + length > extent) {
    throw std::invalid_argument("slice: range out of bounds for " + s.str());
  }
  Shape out = s;
  (axis == Axis::batch ? out.batch : axis == Axis::rows ? out.rows : out.cols) = length;
  const int ob = axis == Axis::batch ? start : 0;
  const int orow = axis == Axis::rows ? start : 0;
  const int oc = axis == Axis::cols ? start : 0;
  const Tensor& A = a.value();
  Tensor v(out);
  for (int b = 0; b < out.batch; ++b)
    for (int r = 0; r < out.rows; ++r)
      for (int c = 0; c < out.cols; ++c) v(b, r, c) = A(b + ob, r + orow, c + oc);
  const int ida = a.id();
  return a.graph().record(std::move(v), a.requires_grad(), [=](Graph& g, int self) {
    const Tensor& G = g.grad(self);
    Tensor& GA = g.grad(ida);
    for (int b = 0; b < out.batch; ++b)
      for (int r = 0; r < out.rows; ++r)
        for (int c = 0; c < out.cols; ++c) GA(b + ob, r + orow, c + oc) += G(b, r, c);
  });
}

Var sum(Var a, Axis axis) {
  const Shape s = a.shape();
  Shape out = s;
  (axis == Axis::batch ? out.batch : axis == Axis::rows ? out.rows : out.cols) = 1;
  const Strides so = strides_for(out, s);
  const Tensor& A = a.value();
  Tensor v(out);
  for_each_broadcast(s, Strides{static_cast<std::size_t>(s.rows) * s.cols,
                                static_cast<std::size_t>(s.cols), 1},
                     so, [&](std::size_t i, std::size_t, std::size_t o) { v[o] += A[i]; });
  const int ida = a.id();
  return a.graph().record(std::move(v), a.requires_grad(), [=](Graph& g, int self) {
    const Tensor& G = g.grad(self);
    Tensor& GA = g.grad(ida);
    for_each_broadcast(s, Strides{static_cast<std::size_t>(s.rows) * s.cols,
                                  static_cast<std::size_t>(s.cols), 1},
                       so, [&](std::size_t i, std::size_t, std::size_t o) { GA[i] += G[o]; });
  });
}

Var sum_all(Var a) {
  const Tensor& A = a.value();
  double total = 0.0;
  for (double x : A.values()) total += x;
  const int ida = a.id();
  return a.graph().record(Tensor::scalar(total), a.requires_grad(), [=](Graph& g, int self) {
    const double gs = g.grad(self)[0];
    for (double& x : g.grad(ida).values()) x += gs;
  });
}

Var mean_all(Var a) { return scale(sum_all(a), 1.0 / static_cast<double>(a.value().size())); }

Var frobenius_norm(Var a) {
  const Shape s = a.shape();
  const std::size_t n = static_cast<std::size_t>(s.rows) * s.cols;
  const Tensor& A = a.value();
  Tensor v({s.batch, 1, 1});
  for (int b = 0; b < s.batch; ++b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += A[b * n + i] * A[b * n + i];
    v[b] = std::sqrt(acc);
  }
  const int ida = a.id();
  return a.graph().record(std::move(v), a.requires_grad(), [=](Graph& g, int self) {
    const Tensor& A = g.value(ida);
    const Tensor& Y = g.value(self);
    const Tensor& G = g.grad(self);
    Tensor& GA = g.grad(ida);
    for (int b = 0; b < s.batch; ++b) {
      if (Y[b] == 0.0) continue;
      const double f = G[b] / Y[b];
      for (std::size_t i = 0; i < n; ++i) GA[b * n + i] += f * A[b * n + i];
    }
  });
}

Var conditional_scale(Var z, double budget) {
  if (!(budget > 0.0)) throw std::invalid_argument("conditional_scale: budget must be positive");
  const Shape s = z.shape();
  const std::size_t n = static_cast<std::size_t>(s.rows) * s.cols;
  const Tensor& Z = z.value();
  Tensor v(Z);
  std::vector<double> norms(s.batch);
  for (int b = 0; b < s.batch; ++b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += Z[b * n + i] * Z[b * n + i];
    norms[b] = std::sqrt(acc);
    if (acc > budget) {
      const double f = std::sqrt(budget) / norms[b];
      for (std::size_t i = 0; i < n; ++i) v[b * n + i] *= f;
    }
  }
  const int idz = z.id();
  return z.graph().record(
      std::move(v), z.requires_grad(), [=, norms = std::move(norms)](Graph& g, int self) {
        const Tensor& Z = g.value(idz);
        const Tensor& G = g.grad(self);
        Tensor& GZ = g.grad(idz);
        for (int b = 0; b < s.batch; ++b) {
          const double nz = norms[b];
          if (nz * nz <= budget) {
            for (std::size_t i = 0; i < n; ++i) GZ[b * n + i] += G[b * n + i];
            continue;
          }
          // d/dz [c z / |z|] = (c/|z|) (I - z z^T / |z|^2)
          double zg = 0.0;
          for (std::size_t i = 0; i < n; ++i) zg += Z[b * n + i] * G[b * n + i];
          const double c = std::sqrt(budget) / nz;
          for (std::size_t i = 0; i < n; ++i)
            GZ[b * n + i] += c * (G[b * n + i] - Z[b * n + i] * zg / (nz * nz));
        }
      });
}

}  // namespace cfisac::ad
