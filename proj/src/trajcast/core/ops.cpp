/* Copyright 2026 The Trajcast Authors. All Rights Reserved.

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

#include "trajcast/core/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>

namespace trajcast {

namespace {

template <typename T>
Tape<T>* same_tape(const Var<T>& a, const Var<T>& b) {
  if (a.tape != b.tape) throw Error("operands recorded on different tapes");
  return a.tape;
}

std::vector<int64_t> strides_of(const Shape& s) {
  std::vector<int64_t> st(s.size());
  int64_t acc = 1;
  for (int i = static_cast<int>(s.size()) - 1; i >= 0; --i) {
    st[static_cast<size_t>(i)] = acc;
    acc *= s[static_cast<size_t>(i)];
  }
  return st;
}

void require(bool cond, const std::string& msg) {
  if (!cond) throw ShapeError(msg);
}

}  // namespace

template <typename T>
Var<T> add(Var<T> a, Var<T> b) {
  Tape<T>* t = same_tape(a, b);
  const Array<T>&av = a.value();
  const Array<T>& bv = b.value();
  require(av.same_shape(bv), "add: shapes differ " + shape_str(av.shape()) +
                                 " vs " + shape_str(bv.shape()));
  Array<T> out(av.shape());
  for (int64_t i = 0; i < av.size(); ++i) out[i] = av[i] + bv[i];
  int pa = a.id, pb = b.id;
  return t->record("add", std::move(out), {pa, pb},
                   [pa, pb](Tape<T>& tp, int self) {
                     const Array<T>& g = tp.grad_buffer(self);
                     if (tp.needs_grad(pa)) tp.accum(pa, g);
                     if (tp.needs_grad(pb)) tp.accum(pb, g);
                   });
}

template <typename T>
Var<T> sub(Var<T> a, Var<T> b) {
  Tape<T>* t = same_tape(a, b);
  const Array<T>& av = a.value();
  const Array<T>& bv = b.value();
  require(av.same_shape(bv), "sub: shapes differ " + shape_str(av.shape()) +
                                 " vs " + shape_str(bv.shape()));
  Array<T> out(av.shape());
  for (int64_t i = 0; i < av.size(); ++i) out[i] = av[i] - bv[i];
  int pa = a.id, pb = b.id;
  return t->record("sub", std::move(out), {pa, pb},
                   [pa, pb](Tape<T>& tp, int self) {
                     const Array<T>& g = tp.grad_buffer(self);
                     if (tp.needs_grad(pa)) tp.accum(pa, g);
                     if (tp.needs_grad(pb)) {
                       Array<T> neg(g.shape());
                       for (int64_t i = 0; i < g.size(); ++i) neg[i] = -g[i];
                       tp.accum(pb, neg);
                     }
                   });
}

template <typename T>
Var<T> mul(Var<T> a, Var<T> b) {
  Tape<T>* t = same_tape(a, b);
  const Array<T>& av = a.value();
  const Array<T>& bv = b.value();
  require(av.same_shape(bv), "mul: shapes differ " + shape_str(av.shape()) +
                                 " vs " + shape_str(bv.shape()));
  Array<T> out(av.shape());
  for (int64_t i = 0; i < av.size(); ++i) out[i] = av[i] * bv[i];
  int pa = a.id, pb = b.id;
  return t->record("mul", std::move(out), {pa, pb},
                   [pa, pb](Tape<T>& tp, int self) {
                     const Array<T>& g = tp.grad_buffer(self);
                     const Array<T>& av2 = tp.value(pa);
                     const Array<T>& bv2 = tp.value(pb);
                     if (tp.needs_grad(pa)) {
                       Array<T> da(g.shape());
                       for (int64_t i = 0; i < g.size(); ++i)
                         da[i] = g[i] * bv2[i];
                       tp.accum(pa, da);
                     }
                     if (tp.needs_grad(pb)) {
                       Array<T> db(g.shape());
                       for (int64_t i = 0; i < g.size(); ++i)
                         db[i] = g[i] * av2[i];
                       tp.accum(pb, db);
                     }
                   });
}

template <typename T>
Var<T> mul_const(Var<T> x, Array<T> c) {
  const Array<T>& xv = x.value();
  require(xv.same_shape(c), "mul_const: shapes differ " +
                                shape_str(xv.shape()) + " vs " +
                                shape_str(c.shape()));
  Array<T> out(xv.shape());
  for (int64_t i = 0; i < xv.size(); ++i) out[i] = xv[i] * c[i];
  int px = x.id;
  auto cc = std::make_shared<Array<T>>(std::move(c));
  return x.tape->record("mul_const", std::move(out), {px},
                        [px, cc](Tape<T>& tp, int self) {
                          const Array<T>& g = tp.grad_buffer(self);
                          Array<T> dx(g.shape());
                          for (int64_t i = 0; i < g.size(); ++i)
                            dx[i] = g[i] * (*cc)[i];
                          tp.accum(px, dx);
                        });
}

template <typename T>
Var<T> scale(Var<T> x, double c) {
  const Array<T>& xv = x.value();
  Array<T> out(xv.shape());
  const T cf = static_cast<T>(c);
  for (int64_t i = 0; i < xv.size(); ++i) out[i] = xv[i] * cf;
  int px = x.id;
  return x.tape->record("scale", std::move(out), {px},
                        [px, cf](Tape<T>& tp, int self) {
                          const Array<T>& g = tp.grad_buffer(self);
                          Array<T> dx(g.shape());
                          for (int64_t i = 0; i < g.size(); ++i)
                            dx[i] = g[i] * cf;
                          tp.accum(px, dx);
                        });
}

template <typename T>
Var<T> add_scalar(Var<T> x, double c) {
  const Array<T>& xv = x.value();
  Array<T> out(xv.shape());
  const T cf = static_cast<T>(c);
  for (int64_t i = 0; i < xv.size(); ++i) out[i] = xv[i] + cf;
  int px = x.id;
  return x.tape->record("add_scalar", std::move(out), {px},
                        [px](Tape<T>& tp, int self) {
                          tp.accum(px, tp.grad_buffer(self));
                        });
}

template <typename T>
Var<T> relu(Var<T> x) {
  const Array<T>& xv = x.value();
  Array<T> out(xv.shape());
  for (int64_t i = 0; i < xv.size(); ++i) out[i] = xv[i] > T(0) ? xv[i] : T(0);
  int px = x.id;
  return x.tape->record("relu", std::move(out), {px},
                        [px](Tape<T>& tp, int self) {
                          const Array<T>& g = tp.grad_buffer(self);
                          const Array<T>& xv2 = tp.value(px);
                          Array<T> dx(g.shape());
                          for (int64_t i = 0; i < g.size(); ++i)
                            dx[i] = xv2[i] > T(0) ? g[i] : T(0);
                          tp.accum(px, dx);
                        });
}

template <typename T>
Var<T> vexp(Var<T> x) {
  const Array<T>& xv = x.value();
  Array<T> out(xv.shape());
  for (int64_t i = 0; i < xv.size(); ++i) out[i] = std::exp(xv[i]);
  int px = x.id;
  return x.tape->record("exp", std::move(out), {px},
                        [px](Tape<T>& tp, int self) {
                          const Array<T>& g = tp.grad_buffer(self);
                          const Array<T>& y = tp.value(self);
                          Array<T> dx(g.shape());
                          for (int64_t i = 0; i < g.size(); ++i)
                            dx[i] = g[i] * y[i];
                          tp.accum(px, dx);
                        });
}

template <typename T>
Var<T> clamp(Var<T> x, double lo, double hi) {
  const Array<T>& xv = x.value();
  Array<T> out(xv.shape());
  const T l = static_cast<T>(lo), h = static_cast<T>(hi);
  for (int64_t i = 0; i < xv.size(); ++i)
    out[i] = std::min(h, std::max(l, xv[i]));
  int px = x.id;
  return x.tape->record("clamp", std::move(out), {px},
                        [px, l, h](Tape<T>& tp, int self) {
                          const Array<T>& g = tp.grad_buffer(self);
                          const Array<T>& xv2 = tp.value(px);
                          Array<T> dx(g.shape());
                          for (int64_t i = 0; i < g.size(); ++i)
                            dx[i] = (xv2[i] > l && xv2[i] < h) ? g[i] : T(0);
                          tp.accum(px, dx);
                        });
}

template <typename T>
Var<T> dropout(Var<T> x, double rate, Rng& rng) {
  if (rate <= 0.0) return x;
  if (rate >= 1.0) throw UsageError("dropout rate must be < 1");
  const Array<T>& xv = x.value();
  Array<T> keep(xv.shape());
  const T inv = static_cast<T>(1.0 / (1.0 - rate));
  for (int64_t i = 0; i < xv.size(); ++i)
    keep[i] = rng.uniform() >= rate ? inv : T(0);
  Array<T> out(xv.shape());
  for (int64_t i = 0; i < xv.size(); ++i) out[i] = xv[i] * keep[i];
  int px = x.id;
  auto kc = std::make_shared<Array<T>>(std::move(keep));
  return x.tape->record("dropout", std::move(out), {px},
                        [px, kc](Tape<T>& tp, int self) {
                          const Array<T>& g = tp.grad_buffer(self);
                          Array<T> dx(g.shape());
                          for (int64_t i = 0; i < g.size(); ++i)
                            dx[i] = g[i] * (*kc)[i];
                          tp.accum(px, dx);
                        });
}

template <typename T>
Var<T> reshape(Var<T> x, Shape target) {
  const Array<T>& xv = x.value();
  require(shape_size(target) == xv.size(),
          "reshape: size mismatch " + shape_str(xv.shape()) + " -> " +
              shape_str(target));
  Array<T> out(std::move(target), xv.data());
  int px = x.id;
  Shape src = xv.shape();
  return x.tape->record("reshape", std::move(out), {px},
                        [px, src](Tape<T>& tp, int self) {
                          const Array<T>& g = tp.grad_buffer(self);
                          tp.accum(px, Array<T>(src, g.data()));
                        });
}

namespace {

template <typename T>
Array<T> permute_data(const Array<T>& in, const std::vector<int>& perm) {
  const Shape& is = in.shape();
  const int r = in.rank();
  Shape os(static_cast<size_t>(r));
  for (int d = 0; d < r; ++d)
    os[static_cast<size_t>(d)] = is[static_cast<size_t>(perm[static_cast<size_t>(d)])];
  Array<T> out(os);
  auto ist = strides_of(is);
  auto ost = strides_of(os);
  std::vector<int64_t> idx(static_cast<size_t>(r), 0);
  const int64_t n = in.size();
  for (int64_t lin = 0; lin < n; ++lin) {
    // idx are coordinates in the output layout.
    int64_t rem = lin;
    int64_t src = 0;
    for (int d = 0; d < r; ++d) {
      int64_t c = rem / ost[static_cast<size_t>(d)];
      rem %= ost[static_cast<size_t>(d)];
      src += c * ist[static_cast<size_t>(perm[static_cast<size_t>(d)])];
    }
    out[lin] = in[src];
  }
  return out;
}

std::vector<int> inverse_perm(const std::vector<int>& perm) {
  std::vector<int> inv(perm.size());
  for (size_t i = 0; i < perm.size(); ++i)
    inv[static_cast<size_t>(perm[i])] = static_cast<int>(i);
  return inv;
}

}  // namespace

template <typename T>
Var<T> transpose(Var<T> x, std::vector<int> perm) {
  const Array<T>& xv = x.value();
  require(static_cast<int>(perm.size()) == xv.rank(),
          "transpose: perm rank mismatch");
  Array<T> out = permute_data(xv, perm);
  int px = x.id;
  std::vector<int> inv = inverse_perm(perm);
  return x.tape->record("transpose", std::move(out), {px},
                        [px, inv](Tape<T>& tp, int self) {
                          const Array<T>& g = tp.grad_buffer(self);
                          tp.accum(px, permute_data(g, inv));
                        });
}

template <typename T>
Var<T> concat(const std::vector<Var<T>>& parts, int axis) {
  if (parts.empty()) throw ShapeError("concat: no parts");
  Tape<T>* t = parts[0].tape;
  const Shape& s0 = parts[0].value().shape();
  Shape os = s0;
  int64_t total = 0;
  for (const auto& p : parts) {
    if (p.tape != t) throw Error("concat: parts on different tapes");
    const Shape& s = p.value().shape();
    require(s.size() == s0.size(), "concat: rank mismatch");
    for (size_t d = 0; d < s.size(); ++d) {
      if (static_cast<int>(d) != axis)
        require(s[d] == s0[d], "concat: non-axis dims differ " +
                                   shape_str(s) + " vs " + shape_str(s0));
    }
    total += s[static_cast<size_t>(axis)];
  }
  os[static_cast<size_t>(axis)] = total;
  int64_t outer = 1, inner = 1;
  for (int d = 0; d < axis; ++d) outer *= s0[static_cast<size_t>(d)];
  for (size_t d = static_cast<size_t>(axis) + 1; d < s0.size(); ++d)
    inner *= s0[d];

  Array<T> out(os);
  std::vector<int> pids;
  std::vector<int64_t> widths;
  int64_t off = 0;
  for (const auto& p : parts) {
    const Array<T>& pv = p.value();
    const int64_t w = pv.shape()[static_cast<size_t>(axis)] * inner;
    for (int64_t o = 0; o < outer; ++o) {
      std::copy(pv.ptr() + o * w, pv.ptr() + (o + 1) * w,
                out.ptr() + o * total * inner + off);
    }
    pids.push_back(p.id);
    widths.push_back(w);
    off += w;
  }
  return t->record(
      "concat", std::move(out), pids,
      [pids, widths, outer, total, inner](Tape<T>& tp, int self) {
        const Array<T>& g = tp.grad_buffer(self);
        int64_t off2 = 0;
        for (size_t i = 0; i < pids.size(); ++i) {
          const int64_t w = widths[i];
          if (tp.needs_grad(pids[i])) {
            Array<T> dp(tp.value(pids[i]).shape());
            for (int64_t o = 0; o < outer; ++o) {
              const T* src = g.ptr() + o * total * inner + off2;
              std::transform(src, src + w, dp.ptr() + o * w, dp.ptr() + o * w,
                             [](T a, T b) { return a + b; });
            }
            tp.accum(pids[i], dp);
          }
          off2 += w;
        }
      });
}

template <typename T>
Var<T> slice(Var<T> x, int axis, int64_t start, int64_t len) {
  const Array<T>& xv = x.value();
  const Shape& s = xv.shape();
  require(axis >= 0 && axis < xv.rank(), "slice: bad axis");
  require(start >= 0 && start + len <= s[static_cast<size_t>(axis)],
          "slice: out of range");
  Shape os = s;
  os[static_cast<size_t>(axis)] = len;
  int64_t outer = 1, inner = 1;
  for (int d = 0; d < axis; ++d) outer *= s[static_cast<size_t>(d)];
  for (size_t d = static_cast<size_t>(axis) + 1; d < s.size(); ++d)
    inner *= s[d];
  const int64_t in_w = s[static_cast<size_t>(axis)] * inner;
  const int64_t out_w = len * inner;
  Array<T> out(os);
  for (int64_t o = 0; o < outer; ++o) {
    std::copy(xv.ptr() + o * in_w + start * inner,
              xv.ptr() + o * in_w + start * inner + out_w,
              out.ptr() + o * out_w);
  }
  int px = x.id;
  return x.tape->record(
      "slice", std::move(out), {px},
      [px, outer, inner, in_w, out_w, start](Tape<T>& tp, int self) {
        const Array<T>& g = tp.grad_buffer(self);
        Array<T> dx(tp.value(px).shape());
        for (int64_t o = 0; o < outer; ++o) {
          const T* src = g.ptr() + o * out_w;
          T* dst = dx.ptr() + o * in_w + start * inner;
          for (int64_t i = 0; i < out_w; ++i) dst[i] += src[i];
        }
        tp.accum(px, dx);
      });
}

template <typename T>
Var<T> broadcast0(Var<T> q, int64_t n) {
  const Array<T>& qv = q.value();
  Shape os;
  os.push_back(n);
  for (int64_t d : qv.shape()) os.push_back(d);
  Array<T> out(os);
  const int64_t w = qv.size();
  for (int64_t i = 0; i < n; ++i)
    std::copy(qv.ptr(), qv.ptr() + w, out.ptr() + i * w);
  int pq = q.id;
  return q.tape->record("broadcast0", std::move(out), {pq},
                        [pq, n, w](Tape<T>& tp, int self) {
                          const Array<T>& g = tp.grad_buffer(self);
                          Array<T> dq(tp.value(pq).shape());
                          for (int64_t i = 0; i < n; ++i)
                            for (int64_t j = 0; j < w; ++j)
                              dq[j] += g[i * w + j];
                          tp.accum(pq, dq);
                        });
}

template <typename T>
Var<T> tile_axis1(Var<T> x, int64_t n) {
  const Array<T>& xv = x.value();
  require(xv.rank() >= 2 && xv.dim(1) == 1,
          "tile_axis1: axis 1 must have length 1, got " +
              shape_str(xv.shape()));
  Shape os = xv.shape();
  os[1] = n;
  const int64_t a = xv.dim(0);
  const int64_t w = xv.size() / a;
  Array<T> out(os);
  for (int64_t i = 0; i < a; ++i)
    for (int64_t r = 0; r < n; ++r)
      std::copy(xv.ptr() + i * w, xv.ptr() + (i + 1) * w,
                out.ptr() + (i * n + r) * w);
  int px = x.id;
  return x.tape->record("tile_axis1", std::move(out), {px},
                        [px, a, n, w](Tape<T>& tp, int self) {
                          const Array<T>& g = tp.grad_buffer(self);
                          Array<T> dx(tp.value(px).shape());
                          for (int64_t i = 0; i < a; ++i)
                            for (int64_t r = 0; r < n; ++r) {
                              const T* gp = g.ptr() + (i * n + r) * w;
                              T* dp = dx.ptr() + i * w;
                              for (int64_t j = 0; j < w; ++j) dp[j] += gp[j];
                            }
                          tp.accum(px, dx);
                        });
}

namespace {

// C[m,n] += A[m,k] * B[k,n], ikj order.
template <typename T>
void gemm_acc(const T* a, const T* b, T* c, int64_t m, int64_t k, int64_t n) {
  for (int64_t i = 0; i < m; ++i) {
    for (int64_t p = 0; p < k; ++p) {
      const T av = a[i * k + p];
      if (av == T(0)) continue;
      const T* brow = b + p * n;
      T* crow = c + i * n;
      for (int64_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// C[m,n] += A[m,k] * B[n,k]^T
template <typename T>
void gemm_bt_acc(const T* a, const T* b, T* c, int64_t m, int64_t k,
                 int64_t n) {
  for (int64_t i = 0; i < m; ++i) {
    for (int64_t j = 0; j < n; ++j) {
      T acc = 0;
      const T* arow = a + i * k;
      const T* brow = b + j * k;
      for (int64_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
      c[i * n + j] += acc;
    }
  }
}

// C[k,n] += A[m,k]^T * B[m,n]
template <typename T>
void gemm_at_acc(const T* a, const T* b, T* c, int64_t m, int64_t k,
                 int64_t n) {
  for (int64_t i = 0; i < m; ++i) {
    const T* arow = a + i * k;
    const T* brow = b + i * n;
    for (int64_t p = 0; p < k; ++p) {
      const T av = arow[p];
      if (av == T(0)) continue;
      T* crow = c + p * n;
      for (int64_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

}  // namespace

template <typename T>
Var<T> matmul(Var<T> a, Var<T> b) {
  Tape<T>* t = same_tape(a, b);
  const Array<T>& av = a.value();
  const Array<T>& bv = b.value();
  require(av.rank() == 2 && bv.rank() == 2,
          "matmul: expects rank-2 operands, got " + shape_str(av.shape()) +
              " and " + shape_str(bv.shape()));
  require(av.dim(1) == bv.dim(0),
          "matmul: inner axes differ, " + shape_str(av.shape()) + " x " +
              shape_str(bv.shape()));
  const int64_t m = av.dim(0), k = av.dim(1), n = bv.dim(1);
  Array<T> out(Shape{m, n});
  gemm_acc(av.ptr(), bv.ptr(), out.ptr(), m, k, n);
  int pa = a.id, pb = b.id;
  return t->record("matmul", std::move(out), {pa, pb},
                   [pa, pb, m, k, n](Tape<T>& tp, int self) {
                     const Array<T>& g = tp.grad_buffer(self);
                     const Array<T>& av2 = tp.value(pa);
                     const Array<T>& bv2 = tp.value(pb);
                     if (tp.needs_grad(pa)) {
                       Array<T> da(av2.shape());
                       gemm_bt_acc(g.ptr(), bv2.ptr(), da.ptr(), m, n, k);
                       tp.accum(pa, da);
                     }
                     if (tp.needs_grad(pb)) {
                       Array<T> db(bv2.shape());
                       gemm_at_acc(av2.ptr(), g.ptr(), db.ptr(), m, k, n);
                       tp.accum(pb, db);
                     }
                   });
}

template <typename T>
Var<T> bmm(Var<T> a, Var<T> b) {
  Tape<T>* t = same_tape(a, b);
  const Array<T>& av = a.value();
  const Array<T>& bv = b.value();
  require(av.rank() == 3 && bv.rank() == 3,
          "bmm: expects rank-3 operands, got " + shape_str(av.shape()) +
              " and " + shape_str(bv.shape()));
  require(av.dim(0) == bv.dim(0) && av.dim(2) == bv.dim(1),
          "bmm: incompatible shapes " + shape_str(av.shape()) + " x " +
              shape_str(bv.shape()));
  const int64_t B = av.dim(0), m = av.dim(1), k = av.dim(2), n = bv.dim(2);
  Array<T> out(Shape{B, m, n});
  for (int64_t q = 0; q < B; ++q)
    gemm_acc(av.ptr() + q * m * k, bv.ptr() + q * k * n, out.ptr() + q * m * n,
             m, k, n);
  int pa = a.id, pb = b.id;
  return t->record(
      "bmm", std::move(out), {pa, pb},
      [pa, pb, B, m, k, n](Tape<T>& tp, int self) {
        const Array<T>& g = tp.grad_buffer(self);
        const Array<T>& av2 = tp.value(pa);
        const Array<T>& bv2 = tp.value(pb);
        if (tp.needs_grad(pa)) {
          Array<T> da(av2.shape());
          for (int64_t q = 0; q < B; ++q)
            gemm_bt_acc(g.ptr() + q * m * n, bv2.ptr() + q * k * n,
                        da.ptr() + q * m * k, m, n, k);
          tp.accum(pa, da);
        }
        if (tp.needs_grad(pb)) {
          Array<T> db(bv2.shape());
          for (int64_t q = 0; q < B; ++q)
            gemm_at_acc(av2.ptr() + q * m * k, g.ptr() + q * m * n,
                        db.ptr() + q * k * n, m, k, n);
          tp.accum(pb, db);
        }
      });
}

template <typename T>
Var<T> add_bias(Var<T> x, Var<T> b) {
  Tape<T>* t = same_tape(x, b);
  const Array<T>& xv = x.value();
  const Array<T>& bv = b.value();
  require(bv.rank() == 1 && xv.rank() >= 1 &&
              xv.dim(xv.rank() - 1) == bv.dim(0),
          "add_bias: bias " + shape_str(bv.shape()) + " does not match " +
              shape_str(xv.shape()));
  const int64_t d = bv.dim(0);
  const int64_t rows = xv.size() / d;
  Array<T> out(xv.shape());
  for (int64_t r = 0; r < rows; ++r)
    for (int64_t j = 0; j < d; ++j) out[r * d + j] = xv[r * d + j] + bv[j];
  int px = x.id, pb = b.id;
  return t->record("add_bias", std::move(out), {px, pb},
                   [px, pb, rows, d](Tape<T>& tp, int self) {
                     const Array<T>& g = tp.grad_buffer(self);
                     if (tp.needs_grad(px)) tp.accum(px, g);
                     if (tp.needs_grad(pb)) {
                       Array<T> db(tp.value(pb).shape());
                       for (int64_t r = 0; r < rows; ++r)
                         for (int64_t j = 0; j < d; ++j)
                           db[j] += g[r * d + j];
                       tp.accum(pb, db);
                     }
                   });
}

template <typename T>
Var<T> add_broadcast0(Var<T> x, Var<T> t) {
  Tape<T>* tp0 = same_tape(x, t);
  const Array<T>& xv = x.value();
  const Array<T>& tv = t.value();
  require(xv.rank() == tv.rank() + 1, "add_broadcast0: rank mismatch");
  for (int d = 0; d < tv.rank(); ++d)
    require(xv.dim(d + 1) == tv.dim(d),
            "add_broadcast0: trailing shape mismatch " +
                shape_str(xv.shape()) + " vs " + shape_str(tv.shape()));
  const int64_t n = xv.dim(0);
  const int64_t w = tv.size();
  Array<T> out(xv.shape());
  for (int64_t i = 0; i < n; ++i)
    for (int64_t j = 0; j < w; ++j) out[i * w + j] = xv[i * w + j] + tv[j];
  int px = x.id, pt = t.id;
  return tp0->record("add_broadcast0", std::move(out), {px, pt},
                     [px, pt, n, w](Tape<T>& tp, int self) {
                       const Array<T>& g = tp.grad_buffer(self);
                       if (tp.needs_grad(px)) tp.accum(px, g);
                       if (tp.needs_grad(pt)) {
                         Array<T> dt(tp.value(pt).shape());
                         for (int64_t i = 0; i < n; ++i)
                           for (int64_t j = 0; j < w; ++j)
                             dt[j] += g[i * w + j];
                         tp.accum(pt, dt);
                       }
                     });
}

template <typename T>
Var<T> softmax_masked(Var<T> x, const Mask* mask) {
  const Array<T>& xv = x.value();
  if (mask != nullptr) {
    require(mask->shape() == xv.shape(),
            "softmax_masked: mask shape " + shape_str(mask->shape()) +
                " does not match " + shape_str(xv.shape()));
  }
  const int64_t n = xv.dim(xv.rank() - 1);
  const int64_t rows = xv.size() / n;
  Array<T> out(xv.shape());
  for (int64_t r = 0; r < rows; ++r) {
    const T* xp = xv.ptr() + r * n;
    const uint8_t* mp = mask ? mask->ptr() + r * n : nullptr;
    T mx = -std::numeric_limits<T>::infinity();
    for (int64_t j = 0; j < n; ++j)
      if (!mp || mp[j]) mx = std::max(mx, xp[j]);
    if (!std::isfinite(static_cast<double>(mx))) {
      throw NumericError("softmax over a fully masked row (degenerate "
                         "attention row)");
    }
    T sum = 0;
    T* op = out.ptr() + r * n;
    for (int64_t j = 0; j < n; ++j) {
      if (!mp || mp[j]) {
        op[j] = std::exp(xp[j] - mx);
        sum += op[j];
      } else {
        op[j] = T(0);
      }
    }
    for (int64_t j = 0; j < n; ++j) op[j] /= sum;
  }
  int px = x.id;
  return x.tape->record("softmax", std::move(out), {px},
                        [px, rows, n](Tape<T>& tp, int self) {
                          const Array<T>& g = tp.grad_buffer(self);
                          const Array<T>& y = tp.value(self);
                          Array<T> dx(y.shape());
                          for (int64_t r = 0; r < rows; ++r) {
                            const T* yp = y.ptr() + r * n;
                            const T* gp = g.ptr() + r * n;
                            T dot = 0;
                            for (int64_t j = 0; j < n; ++j)
                              dot += gp[j] * yp[j];
                            T* dp = dx.ptr() + r * n;
                            for (int64_t j = 0; j < n; ++j)
                              dp[j] = yp[j] * (gp[j] - dot);
                          }
                          tp.accum(px, dx);
                        });
}

template <typename T>
Var<T> log_softmax(Var<T> x) {
  const Array<T>& xv = x.value();
  const int64_t n = xv.dim(xv.rank() - 1);
  const int64_t rows = xv.size() / n;
  Array<T> out(xv.shape());
  for (int64_t r = 0; r < rows; ++r) {
    const T* xp = xv.ptr() + r * n;
    T mx = xp[0];
    for (int64_t j = 1; j < n; ++j) mx = std::max(mx, xp[j]);
    T sum = 0;
    for (int64_t j = 0; j < n; ++j) sum += std::exp(xp[j] - mx);
    const T lse = mx + std::log(sum);
    T* op = out.ptr() + r * n;
    for (int64_t j = 0; j < n; ++j) op[j] = xp[j] - lse;
  }
  int px = x.id;
  return x.tape->record("log_softmax", std::move(out), {px},
                        [px, rows, n](Tape<T>& tp, int self) {
                          const Array<T>& g = tp.grad_buffer(self);
                          const Array<T>& y = tp.value(self);
                          Array<T> dx(y.shape());
                          for (int64_t r = 0; r < rows; ++r) {
                            const T* yp = y.ptr() + r * n;
                            const T* gp = g.ptr() + r * n;
                            T gsum = 0;
                            for (int64_t j = 0; j < n; ++j) gsum += gp[j];
                            T* dp = dx.ptr() + r * n;
                            for (int64_t j = 0; j < n; ++j)
                              dp[j] = gp[j] - std::exp(yp[j]) * gsum;
                          }
                          tp.accum(px, dx);
                        });
}

template <typename T>
Var<T> layernorm(Var<T> x, Var<T> gain, Var<T> bias) {
  same_tape(x, gain);
  same_tape(x, bias);
  const Array<T>& xv = x.value();
  const Array<T>& gv = gain.value();
  const Array<T>& bv = bias.value();
  const int64_t d = xv.dim(xv.rank() - 1);
  require(gv.rank() == 1 && gv.dim(0) == d && bv.rank() == 1 && bv.dim(0) == d,
          "layernorm: gain/bias must be [D] with D matching the last axis");
  const int64_t rows = xv.size() / d;
  constexpr double kEps = 1e-6;
  Array<T> out(xv.shape());
  for (int64_t r = 0; r < rows; ++r) {
    const T* xp = xv.ptr() + r * d;
    T mean = 0;
    for (int64_t j = 0; j < d; ++j) mean += xp[j];
    mean /= static_cast<T>(d);
    T var = 0;
    for (int64_t j = 0; j < d; ++j) {
      const T c = xp[j] - mean;
      var += c * c;
    }
    var /= static_cast<T>(d);
    const T inv = T(1) / std::sqrt(var + static_cast<T>(kEps));
    T* op = out.ptr() + r * d;
    for (int64_t j = 0; j < d; ++j)
      op[j] = gv[j] * ((xp[j] - mean) * inv) + bv[j];
  }
  int px = x.id, pg = gain.id, pb = bias.id;
  return x.tape->record(
      "layernorm", std::move(out), {px, pg, pb},
      [px, pg, pb, rows, d](Tape<T>& tp, int self) {
        const Array<T>& g = tp.grad_buffer(self);
        const Array<T>& xv2 = tp.value(px);
        const Array<T>& gv2 = tp.value(pg);
        Array<T> dx(xv2.shape());
        Array<T> dgain(gv2.shape());
        Array<T> dbias(gv2.shape());
        for (int64_t r = 0; r < rows; ++r) {
          const T* xp = xv2.ptr() + r * d;
          const T* gp = g.ptr() + r * d;
          T mean = 0;
          for (int64_t j = 0; j < d; ++j) mean += xp[j];
          mean /= static_cast<T>(d);
          T var = 0;
          for (int64_t j = 0; j < d; ++j) {
            const T c = xp[j] - mean;
            var += c * c;
          }
          var /= static_cast<T>(d);
          const T inv = T(1) / std::sqrt(var + static_cast<T>(1e-6));
          // gh = g * gain; dx = inv * (gh - mean(gh) - xhat * mean(gh*xhat))
          T gh_mean = 0, ghx_mean = 0;
          for (int64_t j = 0; j < d; ++j) {
            const T xh = (xp[j] - mean) * inv;
            const T gh = gp[j] * gv2[j];
            gh_mean += gh;
            ghx_mean += gh * xh;
            dgain[j] += gp[j] * xh;
            dbias[j] += gp[j];
          }
          gh_mean /= static_cast<T>(d);
          ghx_mean /= static_cast<T>(d);
          T* dp = dx.ptr() + r * d;
          for (int64_t j = 0; j < d; ++j) {
            const T xh = (xp[j] - mean) * inv;
            const T gh = gp[j] * gv2[j];
            dp[j] = inv * (gh - gh_mean - xh * ghx_mean);
          }
        }
        if (tp.needs_grad(px)) tp.accum(px, dx);
        if (tp.needs_grad(pg)) tp.accum(pg, dgain);
        if (tp.needs_grad(pb)) tp.accum(pb, dbias);
      });
}

template <typename T>
Var<T> sum_all(Var<T> x) {
  const Array<T>& xv = x.value();
  T s = 0;
  for (int64_t i = 0; i < xv.size(); ++i) s += xv[i];
  Array<T> out(Shape{});
  out[0] = s;
  int px = x.id;
  return x.tape->record("sum_all", std::move(out), {px},
                        [px](Tape<T>& tp, int self) {
                          const Array<T>& g = tp.grad_buffer(self);
                          Array<T> dx =
                              Array<T>::full(tp.value(px).shape(), g[0]);
                          tp.accum(px, dx);
                        });
}

template <typename T>
Var<T> mean_all(Var<T> x) {
  const Array<T>& xv = x.value();
  const int64_t n = xv.size();
  T s = 0;
  for (int64_t i = 0; i < n; ++i) s += xv[i];
  Array<T> out(Shape{});
  out[0] = s / static_cast<T>(n);
  int px = x.id;
  return x.tape->record("mean_all", std::move(out), {px},
                        [px, n](Tape<T>& tp, int self) {
                          const Array<T>& g = tp.grad_buffer(self);
                          Array<T> dx = Array<T>::full(
                              tp.value(px).shape(), g[0] / static_cast<T>(n));
                          tp.accum(px, dx);
                        });
}

template <typename T>
Var<T> sum_trailing(Var<T> x) {
  const Array<T>& xv = x.value();
  require(xv.rank() >= 1, "sum_trailing: rank must be >= 1");
  const int64_t a = xv.dim(0);
  const int64_t w = xv.size() / a;
  Array<T> out(Shape{a});
  for (int64_t i = 0; i < a; ++i) {
    T s = 0;
    const T* xp = xv.ptr() + i * w;
    for (int64_t j = 0; j < w; ++j) s += xp[j];
    out[i] = s;
  }
  int px = x.id;
  return x.tape->record("sum_trailing", std::move(out), {px},
                        [px, a, w](Tape<T>& tp, int self) {
                          const Array<T>& g = tp.grad_buffer(self);
                          Array<T> dx(tp.value(px).shape());
                          for (int64_t i = 0; i < a; ++i)
                            for (int64_t j = 0; j < w; ++j)
                              dx[i * w + j] = g[i];
                          tp.accum(px, dx);
                        });
}

template <typename T>
Var<T> masked_mean_axis1(Var<T> x, const Mask& mask) {
  const Array<T>& xv = x.value();
  require(xv.rank() == 4, "masked_mean_axis1: expects [A,T,S,D]");
  const int64_t A = xv.dim(0), t = xv.dim(1), s = xv.dim(2), d = xv.dim(3);
  require(mask.shape() == Shape({A, t, s}),
          "masked_mean_axis1: mask must be [A,T,S]");
  Array<T> counts(Shape{A, s});
  for (int64_t a = 0; a < A; ++a) {
    T agent_total = 0;
    for (int64_t j = 0; j < s; ++j) {
      T c = 0;
      for (int64_t i = 0; i < t; ++i) c += mask.at(a, i, j) ? T(1) : T(0);
      counts.at(a, j) = c;
      agent_total += c;
    }
    if (agent_total == T(0)) {
      throw NumericError("masked_mean_axis1: agent " + std::to_string(a) +
                         " has no valid cells");
    }
  }
  Array<T> out(Shape{A, s, d});
  for (int64_t a = 0; a < A; ++a)
    for (int64_t i = 0; i < t; ++i)
      for (int64_t j = 0; j < s; ++j) {
        if (!mask.at(a, i, j)) continue;
        const T* xp = xv.ptr() + ((a * t + i) * s + j) * d;
        T* op = out.ptr() + (a * s + j) * d;
        const T inv = T(1) / counts.at(a, j);
        for (int64_t q = 0; q < d; ++q) op[q] += xp[q] * inv;
      }
  int px = x.id;
  auto mc = std::make_shared<Mask>(mask);
  auto cc = std::make_shared<Array<T>>(std::move(counts));
  return x.tape->record(
      "masked_mean_axis1", std::move(out), {px},
      [px, mc, cc, A, t, s, d](Tape<T>& tp, int self) {
        const Array<T>& g = tp.grad_buffer(self);
        Array<T> dx(tp.value(px).shape());
        for (int64_t a = 0; a < A; ++a)
          for (int64_t i = 0; i < t; ++i)
            for (int64_t j = 0; j < s; ++j) {
              if (!mc->at(a, i, j)) continue;
              const T inv = T(1) / cc->at(a, j);
              const T* gp = g.ptr() + (a * s + j) * d;
              T* dp = dx.ptr() + ((a * t + i) * s + j) * d;
              for (int64_t q = 0; q < d; ++q) dp[q] = gp[q] * inv;
            }
        tp.accum(px, dx);
      });
}

template <typename T>
Var<T> take_index1(Var<T> x, const std::vector<int64_t>& idx) {
  const Array<T>& xv = x.value();
  require(xv.rank() >= 2, "take_index1: expects [A,k,...]");
  const int64_t a = xv.dim(0), k = xv.dim(1);
  require(static_cast<int64_t>(idx.size()) == a,
          "take_index1: need one index per leading entry");
  for (int64_t i : idx)
    require(i >= 0 && i < k, "take_index1: index out of range");
  Shape os;
  os.push_back(a);
  for (int dd = 2; dd < xv.rank(); ++dd) os.push_back(xv.dim(dd));
  const int64_t w = xv.size() / (a * k);
  Array<T> out(os);
  for (int64_t i = 0; i < a; ++i)
    std::copy(xv.ptr() + (i * k + idx[static_cast<size_t>(i)]) * w,
              xv.ptr() + (i * k + idx[static_cast<size_t>(i)]) * w + w,
              out.ptr() + i * w);
  int px = x.id;
  auto ic = std::make_shared<std::vector<int64_t>>(idx);
  return x.tape->record("take_index1", std::move(out), {px},
                        [px, ic, a, k, w](Tape<T>& tp, int self) {
                          const Array<T>& g = tp.grad_buffer(self);
                          Array<T> dx(tp.value(px).shape());
                          for (int64_t i = 0; i < a; ++i) {
                            const T* gp = g.ptr() + i * w;
                            T* dp = dx.ptr() +
                                    (i * k + (*ic)[static_cast<size_t>(i)]) * w;
                            for (int64_t j = 0; j < w; ++j) dp[j] += gp[j];
                          }
                          tp.accum(px, dx);
                        });
}

#define TRAJCAST_INSTANTIATE_OPS(T)                                         \
  template Var<T> add<T>(Var<T>, Var<T>);                                   \
  template Var<T> sub<T>(Var<T>, Var<T>);                                   \
  template Var<T> mul<T>(Var<T>, Var<T>);                                   \
  template Var<T> mul_const<T>(Var<T>, Array<T>);                           \
  template Var<T> scale<T>(Var<T>, double);                                 \
  template Var<T> add_scalar<T>(Var<T>, double);                            \
  template Var<T> relu<T>(Var<T>);                                          \
  template Var<T> vexp<T>(Var<T>);                                          \
  template Var<T> clamp<T>(Var<T>, double, double);                         \
  template Var<T> dropout<T>(Var<T>, double, Rng&);                         \
  template Var<T> reshape<T>(Var<T>, Shape);                                \
  template Var<T> transpose<T>(Var<T>, std::vector<int>);                   \
  template Var<T> concat<T>(const std::vector<Var<T>>&, int);               \
  template Var<T> slice<T>(Var<T>, int, int64_t, int64_t);                  \
  template Var<T> broadcast0<T>(Var<T>, int64_t);                           \
  template Var<T> tile_axis1<T>(Var<T>, int64_t);                           \
  template Var<T> matmul<T>(Var<T>, Var<T>);                                \
  template Var<T> bmm<T>(Var<T>, Var<T>);                                   \
  template Var<T> add_bias<T>(Var<T>, Var<T>);                              \
  template Var<T> add_broadcast0<T>(Var<T>, Var<T>);                        \
  template Var<T> softmax_masked<T>(Var<T>, const Mask*);                   \
  template Var<T> log_softmax<T>(Var<T>);                                   \
  template Var<T> layernorm<T>(Var<T>, Var<T>, Var<T>);                     \
  template Var<T> sum_all<T>(Var<T>);                                       \
  template Var<T> mean_all<T>(Var<T>);                                      \
  template Var<T> sum_trailing<T>(Var<T>);                                  \
  template Var<T> masked_mean_axis1<T>(Var<T>, const Mask&);                \
  template Var<T> take_index1<T>(Var<T>, const std::vector<int64_t>&);

TRAJCAST_INSTANTIATE_OPS(float)
TRAJCAST_INSTANTIATE_OPS(double)

#undef TRAJCAST_INSTANTIATE_OPS

}  // namespace trajcast
