// Copyright 2026 The vcafe-avsr Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "avsr/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "avsr/error.hpp"

namespace avsr {

namespace {

Graph& graph_of(Var a, Var b) {
  if (a.graph == nullptr || a.graph != b.graph) {
    throw InvalidArgument("operands belong to different graphs");
  }
  return *a.graph;
}

void require_rank(const Tensor& t, std::size_t rank, const char* op) {
  if (t.rank() != rank) {
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                     shape_str(t.shape()));
  }
}

struct AxisSplit {
  std::size_t outer = 1;
  std::size_t n = 1;
  std::size_t inner = 1;
};

AxisSplit split_axis(const Shape& shape, std::size_t axis, const char* op) {
  if (axis >= shape.size()) {
    throw ShapeError(std::string(op) + ": axis " + std::to_string(axis) + " invalid for " +
                     shape_str(shape));
  }
  AxisSplit s;
  for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
  s.n = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

// C[M,N] += A[M,K] * B[K,N]
void gemm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    const double* arow = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// C[M,K] += A[M,N] * B[K,N]^T
void gemm_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t n,
             std::size_t k) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * n;
    double* crow = c + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double* brow = b + p * n;
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += arow[j] * brow[j];
      crow[p] += s;
    }
  }
}

// C[K,N] += A[M,K]^T * B[M,N]
void gemm_tn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    const double* brow = b + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      double* crow = c + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

struct MatmulPlan {
  std::size_t m = 0, k = 0, n = 0;
  Shape out_shape;
  // Per output batch entry: offsets (in matrices) into a and b.
  std::vector<std::size_t> a_batch, b_batch;
};

MatmulPlan plan_matmul(const Shape& as, const Shape& bs) {
  if (as.size() < 2 || bs.size() < 2) {
    throw ShapeError("matmul: operands need rank >= 2, got " + shape_str(as) + " and " +
                     shape_str(bs));
  }
  MatmulPlan p;
  p.m = as[as.size() - 2];
  p.k = as[as.size() - 1];
  p.n = bs[bs.size() - 1];
  if (bs[bs.size() - 2] != p.k) {
    throw ShapeError("matmul: inner dimensions disagree for " + shape_str(as) + " x " +
                     shape_str(bs));
  }
  const std::size_t ab = as.size() - 2, bb = bs.size() - 2;
  const std::size_t nb = std::max(ab, bb);
  Shape batch(nb, 1);
  for (std::size_t i = 0; i < nb; ++i) {
    const std::size_t da = i + ab >= nb ? as[i + ab - nb] : 1;
    const std::size_t db = i + bb >= nb ? bs[i + bb - nb] : 1;
    if (da != db && da != 1 && db != 1) {
      throw ShapeError("matmul: batch dimensions not broadcastable for " + shape_str(as) +
                       " x " + shape_str(bs));
    }
    batch[i] = std::max(da, db);
  }
  const std::size_t count = shape_numel(batch);
  p.a_batch.resize(count);
  p.b_batch.resize(count);
  std::vector<std::size_t> idx(nb, 0);
  for (std::size_t flat = 0; flat < count; ++flat) {
    std::size_t ao = 0, bo = 0;
    for (std::size_t i = 0; i < nb; ++i) {
      if (i + ab >= nb) {
        const std::size_t d = as[i + ab - nb];
        ao = ao * d + (d == 1 ? 0 : idx[i]);
      }
      if (i + bb >= nb) {
        const std::size_t d = bs[i + bb - nb];
        bo = bo * d + (d == 1 ? 0 : idx[i]);
      }
    }
    p.a_batch[flat] = ao;
    p.b_batch[flat] = bo;
    for (std::size_t i = nb; i-- > 0;) {
      if (++idx[i] < batch[i]) break;
      idx[i] = 0;
    }
  }
  p.out_shape = batch;
  p.out_shape.push_back(p.m);
  p.out_shape.push_back(p.n);
  return p;
}

bool is_scalar(const Tensor& t) { return t.numel() == 1; }

void check_elementwise(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape() && !is_scalar(a) && !is_scalar(b)) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
  }
}

// Applies f(a_i, b_i) with scalar broadcasting on either side.
template <typename F>
Tensor broadcast_binary(const Tensor& a, const Tensor& b, F f) {
  const bool as = is_scalar(a) && !is_scalar(b);
  const bool bs = is_scalar(b) && !is_scalar(a);
  Tensor out(as ? b.shape() : a.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) {
    out[i] = f(as ? a[0] : a[i], bs ? b[0] : b[i]);
  }
  return out;
}

// Accumulates g into the gradient slot of `id`, summing when `id` was a
// broadcast scalar.
void accumulate_broadcast(Graph& g, NodeId id, const Tensor& grad) {
  Tensor* slot = g.accum(id);
  if (!slot) return;
  if (slot->numel() == grad.numel()) {
    slot->add_inplace(grad.reshaped(slot->shape()));
  } else {
    double s = 0.0;
    for (double v : grad.data()) s += v;
    (*slot)[0] += s;
  }
}

double stable_sigmoid(double x) {
  if (x >= 0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void check_row(const Tensor& x, const Tensor& row, const char* op) {
  if (row.rank() != 1 || row.dim(0) != x.shape().back()) {
    throw ShapeError(std::string(op) + ": row " + shape_str(row.shape()) +
                     " does not match last axis of " + shape_str(x.shape()));
  }
}

}  // namespace

Var matmul(Var a, Var b) {
  Graph& g = graph_of(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  MatmulPlan plan = plan_matmul(av.shape(), bv.shape());
  Tensor out(plan.out_shape);
  const std::size_t sa = plan.m * plan.k, sb = plan.k * plan.n, sc = plan.m * plan.n;
  for (std::size_t i = 0; i < plan.a_batch.size(); ++i) {
    gemm_nn(av.raw() + plan.a_batch[i] * sa, bv.raw() + plan.b_batch[i] * sb,
            out.raw() + i * sc, plan.m, plan.k, plan.n);
  }
  const NodeId ia = a.id, ib = b.id;
  return g.record("matmul", std::move(out), {ia, ib},
                  [ia, ib, plan = std::move(plan)](Graph& g, NodeId o) {
                    const Tensor& dc = g.grad(o);
                    const std::size_t sa = plan.m * plan.k, sb = plan.k * plan.n,
                                      sc = plan.m * plan.n;
                    const Tensor& av = g.value(ia);
                    const Tensor& bv = g.value(ib);
                    if (Tensor* da = g.accum(ia)) {
                      for (std::size_t i = 0; i < plan.a_batch.size(); ++i) {
                        gemm_nt(dc.raw() + i * sc, bv.raw() + plan.b_batch[i] * sb,
                                da->raw() + plan.a_batch[i] * sa, plan.m, plan.n, plan.k);
                      }
                    }
                    if (Tensor* db = g.accum(ib)) {
                      for (std::size_t i = 0; i < plan.a_batch.size(); ++i) {
                        gemm_tn(av.raw() + plan.a_batch[i] * sa, dc.raw() + i * sc,
                                db->raw() + plan.b_batch[i] * sb, plan.m, plan.k, plan.n);
                      }
                    }
                  });
}

Var transpose(Var x) {
  const Tensor& xv = x.value();
  if (xv.rank() < 2) throw ShapeError("transpose: rank < 2 for " + shape_str(xv.shape()));
  Shape s = xv.shape();
  const std::size_t r = s[s.size() - 2], c = s[s.size() - 1];
  std::swap(s[s.size() - 2], s[s.size() - 1]);
  const std::size_t batch = xv.numel() / (r * c);
  auto permute = [batch, r, c](const Tensor& in, Tensor& out, bool forward) {
    for (std::size_t b = 0; b < batch; ++b) {
      const std::size_t off = b * r * c;
      for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) {
          if (forward) {
            out[off + j * r + i] += in[off + i * c + j];
          } else {
            out[off + i * c + j] += in[off + j * r + i];
          }
        }
      }
    }
  };
  Tensor out(s);
  permute(xv, out, true);
  const NodeId ix = x.id;
  return x.graph->record("transpose", std::move(out), {ix},
                         [ix, permute](Graph& g, NodeId o) {
                           if (Tensor* dx = g.accum(ix)) permute(g.grad(o), *dx, false);
                         });
}

Var add(Var a, Var b) {
  Graph& g = graph_of(a, b);
  check_elementwise(a.value(), b.value(), "add");
  Tensor out = broadcast_binary(a.value(), b.value(), [](double x, double y) { return x + y; });
  const NodeId ia = a.id, ib = b.id;
  return g.record("add", std::move(out), {ia, ib}, [ia, ib](Graph& g, NodeId o) {
    accumulate_broadcast(g, ia, g.grad(o));
    accumulate_broadcast(g, ib, g.grad(o));
  });
}

Var sub(Var a, Var b) {
  Graph& g = graph_of(a, b);
  check_elementwise(a.value(), b.value(), "sub");
  Tensor out = broadcast_binary(a.value(), b.value(), [](double x, double y) { return x - y; });
  const NodeId ia = a.id, ib = b.id;
  return g.record("sub", std::move(out), {ia, ib}, [ia, ib](Graph& g, NodeId o) {
    accumulate_broadcast(g, ia, g.grad(o));
    Tensor neg = g.grad(o);
    for (auto& v : neg.data()) v = -v;
    accumulate_broadcast(g, ib, neg);
  });
}

Var mul(Var a, Var b) {
  Graph& g = graph_of(a, b);
  check_elementwise(a.value(), b.value(), "mul");
  Tensor out = broadcast_binary(a.value(), b.value(), [](double x, double y) { return x * y; });
  const NodeId ia = a.id, ib = b.id;
  return g.record("mul", std::move(out), {ia, ib}, [ia, ib](Graph& g, NodeId o) {
    const Tensor& d = g.grad(o);
    if (g.requires_grad(ia)) {
      accumulate_broadcast(g, ia, broadcast_binary(d, g.value(ib), [](double x, double y) {
                             return x * y;
                           }));
    }
    if (g.requires_grad(ib)) {
      accumulate_broadcast(g, ib, broadcast_binary(d, g.value(ia), [](double x, double y) {
                             return x * y;
                           }));
    }
  });
}

Var scale(Var x, double factor) {
  Tensor out = x.value();
  for (auto& v : out.data()) v *= factor;
  const NodeId ix = x.id;
  return x.graph->record("scale", std::move(out), {ix}, [ix, factor](Graph& g, NodeId o) {
    if (Tensor* dx = g.accum(ix)) dx->add_inplace(g.grad(o), factor);
  });
}

Var add_row(Var x, Var row) {
  Graph& g = graph_of(x, row);
  const Tensor& xv = x.value();
  const Tensor& rv = row.value();
  check_row(xv, rv, "add_row");
  const std::size_t n = rv.numel();
  Tensor out = xv;
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] += rv[i % n];
  const NodeId ix = x.id, ir = row.id;
  return g.record("add_row", std::move(out), {ix, ir}, [ix, ir, n](Graph& g, NodeId o) {
    const Tensor& d = g.grad(o);
    if (Tensor* dx = g.accum(ix)) dx->add_inplace(d);
    if (Tensor* dr = g.accum(ir)) {
      for (std::size_t i = 0; i < d.numel(); ++i) (*dr)[i % n] += d[i];
    }
  });
}

Var mul_row(Var x, Var row) {
  Graph& g = graph_of(x, row);
  const Tensor& xv = x.value();
  const Tensor& rv = row.value();
  check_row(xv, rv, "mul_row");
  const std::size_t n = rv.numel();
  Tensor out = xv;
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= rv[i % n];
  const NodeId ix = x.id, ir = row.id;
  return g.record("mul_row", std::move(out), {ix, ir}, [ix, ir, n](Graph& g, NodeId o) {
    const Tensor& d = g.grad(o);
    const Tensor& xv = g.value(ix);
    const Tensor& rv = g.value(ir);
    if (Tensor* dx = g.accum(ix)) {
      for (std::size_t i = 0; i < d.numel(); ++i) (*dx)[i] += d[i] * rv[i % n];
    }
    if (Tensor* dr = g.accum(ir)) {
      for (std::size_t i = 0; i < d.numel(); ++i) (*dr)[i % n] += d[i] * xv[i];
    }
  });
}

Var relu(Var x) {
  Tensor out = x.value();
  for (auto& v : out.data()) v = v > 0.0 ? v : 0.0;
  const NodeId ix = x.id;
  return x.graph->record("relu", std::move(out), {ix}, [ix](Graph& g, NodeId o) {
    if (Tensor* dx = g.accum(ix)) {
      const Tensor& d = g.grad(o);
      const Tensor& xv = g.value(ix);
      for (std::size_t i = 0; i < d.numel(); ++i) {
        if (xv[i] > 0.0) (*dx)[i] += d[i];
      }
    }
  });
}

Var sigmoid(Var x) {
  Tensor out = x.value();
  for (auto& v : out.data()) v = stable_sigmoid(v);
  const NodeId ix = x.id;
  return x.graph->record("sigmoid", std::move(out), {ix}, [ix](Graph& g, NodeId o) {
    if (Tensor* dx = g.accum(ix)) {
      const Tensor& d = g.grad(o);
      const Tensor& y = g.value(o);
      for (std::size_t i = 0; i < d.numel(); ++i) (*dx)[i] += d[i] * y[i] * (1.0 - y[i]);
    }
  });
}

Var swish(Var x) {
  Tensor out = x.value();
  for (auto& v : out.data()) v = v * stable_sigmoid(v);
  const NodeId ix = x.id;
  return x.graph->record("swish", std::move(out), {ix}, [ix](Graph& g, NodeId o) {
    if (Tensor* dx = g.accum(ix)) {
      const Tensor& d = g.grad(o);
      const Tensor& xv = g.value(ix);
      for (std::size_t i = 0; i < d.numel(); ++i) {
        const double s = stable_sigmoid(xv[i]);
        (*dx)[i] += d[i] * (s + xv[i] * s * (1.0 - s));
      }
    }
  });
}

Var softmax(Var x, std::size_t axis) {
  const Tensor& xv = x.value();
  const AxisSplit s = split_axis(xv.shape(), axis, "softmax");
  Tensor out(xv.shape());
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t in = 0; in < s.inner; ++in) {
      const std::size_t base = o * s.n * s.inner + in;
      double mx = xv[base];
      for (std::size_t i = 1; i < s.n; ++i) mx = std::max(mx, xv[base + i * s.inner]);
      double z = 0.0;
      for (std::size_t i = 0; i < s.n; ++i) {
        const double e = std::exp(xv[base + i * s.inner] - mx);
        out[base + i * s.inner] = e;
        z += e;
      }
      for (std::size_t i = 0; i < s.n; ++i) out[base + i * s.inner] /= z;
    }
  }
  const NodeId ix = x.id;
  return x.graph->record("softmax", std::move(out), {ix}, [ix, s](Graph& g, NodeId o) {
    Tensor* dx = g.accum(ix);
    if (!dx) return;
    const Tensor& d = g.grad(o);
    const Tensor& y = g.value(o);
    for (std::size_t ou = 0; ou < s.outer; ++ou) {
      for (std::size_t in = 0; in < s.inner; ++in) {
        const std::size_t base = ou * s.n * s.inner + in;
        double dot = 0.0;
        for (std::size_t i = 0; i < s.n; ++i) {
          const std::size_t k = base + i * s.inner;
          dot += d[k] * y[k];
        }
        for (std::size_t i = 0; i < s.n; ++i) {
          const std::size_t k = base + i * s.inner;
          (*dx)[k] += y[k] * (d[k] - dot);
        }
      }
    }
  });
}

Var log_softmax(Var x, std::size_t axis) {
  const Tensor& xv = x.value();
  const AxisSplit s = split_axis(xv.shape(), axis, "log_softmax");
  Tensor out(xv.shape());
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t in = 0; in < s.inner; ++in) {
      const std::size_t base = o * s.n * s.inner + in;
      double mx = xv[base];
      for (std::size_t i = 1; i < s.n; ++i) mx = std::max(mx, xv[base + i * s.inner]);
      double z = 0.0;
      for (std::size_t i = 0; i < s.n; ++i) z += std::exp(xv[base + i * s.inner] - mx);
      const double lse = mx + std::log(z);
      for (std::size_t i = 0; i < s.n; ++i) {
        out[base + i * s.inner] = xv[base + i * s.inner] - lse;
      }
    }
  }
  const NodeId ix = x.id;
  return x.graph->record("log_softmax", std::move(out), {ix}, [ix, s](Graph& g, NodeId o) {
    Tensor* dx = g.accum(ix);
    if (!dx) return;
    const Tensor& d = g.grad(o);
    const Tensor& y = g.value(o);
    for (std::size_t ou = 0; ou < s.outer; ++ou) {
      for (std::size_t in = 0; in < s.inner; ++in) {
        const std::size_t base = ou * s.n * s.inner + in;
        double total = 0.0;
        for (std::size_t i = 0; i < s.n; ++i) total += d[base + i * s.inner];
        for (std::size_t i = 0; i < s.n; ++i) {
          const std::size_t k = base + i * s.inner;
          (*dx)[k] += d[k] - std::exp(y[k]) * total;
        }
      }
    }
  });
}

Var layernorm(Var x, std::size_t axis, double eps) {
  const Tensor& xv = x.value();
  const AxisSplit s = split_axis(xv.shape(), axis, "layernorm");
  if (s.n < 2) throw ShapeError("layernorm: normalized axis needs size >= 2");
  Tensor out(xv.shape());
  std::vector<double> inv_std(s.outer * s.inner);
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t in = 0; in < s.inner; ++in) {
      const std::size_t base = o * s.n * s.inner + in;
      double mu = 0.0;
      for (std::size_t i = 0; i < s.n; ++i) mu += xv[base + i * s.inner];
      mu /= static_cast<double>(s.n);
      double var = 0.0;
      for (std::size_t i = 0; i < s.n; ++i) {
        const double c = xv[base + i * s.inner] - mu;
        var += c * c;
      }
      var /= static_cast<double>(s.n);
      const double r = 1.0 / std::sqrt(var + eps);
      inv_std[o * s.inner + in] = r;
      for (std::size_t i = 0; i < s.n; ++i) {
        out[base + i * s.inner] = (xv[base + i * s.inner] - mu) * r;
      }
    }
  }
  const NodeId ix = x.id;
  return x.graph->record(
      "layernorm", std::move(out), {ix},
      [ix, s, inv_std = std::move(inv_std)](Graph& g, NodeId o) {
        Tensor* dx = g.accum(ix);
        if (!dx) return;
        const Tensor& d = g.grad(o);
        const Tensor& y = g.value(o);
        const double n = static_cast<double>(s.n);
        for (std::size_t ou = 0; ou < s.outer; ++ou) {
          for (std::size_t in = 0; in < s.inner; ++in) {
            const std::size_t base = ou * s.n * s.inner + in;
            double md = 0.0, mdy = 0.0;
            for (std::size_t i = 0; i < s.n; ++i) {
              const std::size_t k = base + i * s.inner;
              md += d[k];
              mdy += d[k] * y[k];
            }
            md /= n;
            mdy /= n;
            const double r = inv_std[ou * s.inner + in];
            for (std::size_t i = 0; i < s.n; ++i) {
              const std::size_t k = base + i * s.inner;
              (*dx)[k] += r * (d[k] - md - y[k] * mdy);
            }
          }
        }
      });
}

std::size_t same_padding(std::size_t kernel_size) {
  if (kernel_size % 2 == 0) {
    throw InvalidArgument("same padding needs an odd kernel size, got " +
                          std::to_string(kernel_size));
  }
  return kernel_size / 2;
}

Var conv1d(Var x, Var kernel, std::size_t stride, std::size_t padding) {
  Graph& g = graph_of(x, kernel);
  const Tensor& xv = x.value();
  const Tensor& kv = kernel.value();
  require_rank(xv, 2, "conv1d input");
  require_rank(kv, 3, "conv1d kernel");
  if (stride == 0) throw InvalidArgument("conv1d: stride must be >= 1");
  const std::size_t t_in = xv.dim(0), c_in = xv.dim(1);
  const std::size_t k = kv.dim(0), c_out = kv.dim(2);
  if (kv.dim(1) != c_in) {
    throw ShapeError("conv1d: kernel " + shape_str(kv.shape()) + " does not match input " +
                     shape_str(xv.shape()));
  }
  if (t_in + 2 * padding < k) {
    throw ShapeError("conv1d: output length < 1 for input " + shape_str(xv.shape()) +
                     " and kernel size " + std::to_string(k));
  }
  const std::size_t t_out = (t_in + 2 * padding - k) / stride + 1;
  Tensor out({t_out, c_out});
  for (std::size_t t = 0; t < t_out; ++t) {
    double* orow = out.raw() + t * c_out;
    for (std::size_t j = 0; j < k; ++j) {
      const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t * stride + j) -
                                 static_cast<std::ptrdiff_t>(padding);
      if (src < 0 || src >= static_cast<std::ptrdiff_t>(t_in)) continue;
      gemm_nn(xv.raw() + static_cast<std::size_t>(src) * c_in, kv.raw() + j * c_in * c_out, orow,
              1, c_in, c_out);
    }
  }
  const NodeId ix = x.id, ik = kernel.id;
  return g.record("conv1d", std::move(out), {ix, ik},
                  [=](Graph& g, NodeId o) {
                    const Tensor& d = g.grad(o);
                    const Tensor& xv = g.value(ix);
                    const Tensor& kv = g.value(ik);
                    Tensor* dx = g.accum(ix);
                    Tensor* dk = g.accum(ik);
                    for (std::size_t t = 0; t < t_out; ++t) {
                      const double* drow = d.raw() + t * c_out;
                      for (std::size_t j = 0; j < k; ++j) {
                        const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t * stride + j) -
                                                   static_cast<std::ptrdiff_t>(padding);
                        if (src < 0 || src >= static_cast<std::ptrdiff_t>(t_in)) continue;
                        const auto s = static_cast<std::size_t>(src);
                        if (dx) {
                          gemm_nt(drow, kv.raw() + j * c_in * c_out, dx->raw() + s * c_in, 1,
                                  c_out, c_in);
                        }
                        if (dk) {
                          gemm_tn(xv.raw() + s * c_in, drow, dk->raw() + j * c_in * c_out, 1,
                                  c_in, c_out);
                        }
                      }
                    }
                  });
}

Var depthwise_conv1d(Var x, Var kernel) {
  Graph& g = graph_of(x, kernel);
  const Tensor& xv = x.value();
  const Tensor& kv = kernel.value();
  require_rank(xv, 2, "depthwise_conv1d input");
  require_rank(kv, 2, "depthwise_conv1d kernel");
  const std::size_t t_len = xv.dim(0), c = xv.dim(1), k = kv.dim(0);
  if (kv.dim(1) != c) {
    throw ShapeError("depthwise_conv1d: kernel " + shape_str(kv.shape()) +
                     " does not match input " + shape_str(xv.shape()));
  }
  const std::size_t pad = same_padding(k);
  Tensor out({t_len, c});
  for (std::size_t t = 0; t < t_len; ++t) {
    for (std::size_t j = 0; j < k; ++j) {
      const std::ptrdiff_t src =
          static_cast<std::ptrdiff_t>(t + j) - static_cast<std::ptrdiff_t>(pad);
      if (src < 0 || src >= static_cast<std::ptrdiff_t>(t_len)) continue;
      const double* xrow = xv.raw() + static_cast<std::size_t>(src) * c;
      const double* krow = kv.raw() + j * c;
      double* orow = out.raw() + t * c;
      for (std::size_t ch = 0; ch < c; ++ch) orow[ch] += xrow[ch] * krow[ch];
    }
  }
  const NodeId ix = x.id, ik = kernel.id;
  return g.record("depthwise_conv1d", std::move(out), {ix, ik}, [=](Graph& g, NodeId o) {
    const Tensor& d = g.grad(o);
    const Tensor& xv = g.value(ix);
    const Tensor& kv = g.value(ik);
    Tensor* dx = g.accum(ix);
    Tensor* dk = g.accum(ik);
    for (std::size_t t = 0; t < t_len; ++t) {
      for (std::size_t j = 0; j < k; ++j) {
        const std::ptrdiff_t src =
            static_cast<std::ptrdiff_t>(t + j) - static_cast<std::ptrdiff_t>(pad);
        if (src < 0 || src >= static_cast<std::ptrdiff_t>(t_len)) continue;
        const auto s = static_cast<std::size_t>(src);
        for (std::size_t ch = 0; ch < c; ++ch) {
          const double dv = d[t * c + ch];
          if (dx) (*dx)[s * c + ch] += dv * kv[j * c + ch];
          if (dk) (*dk)[j * c + ch] += dv * xv[s * c + ch];
        }
      }
    }
  });
}

Var concat(Var a, Var b, std::size_t axis) {
  Graph& g = graph_of(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.rank() != bv.rank()) throw ShapeError("concat: rank mismatch");
  for (std::size_t i = 0; i < av.rank(); ++i) {
    if (i != axis && av.dim(i) != bv.dim(i)) {
      throw ShapeError("concat: shapes " + shape_str(av.shape()) + " and " +
                       shape_str(bv.shape()) + " disagree off axis " + std::to_string(axis));
    }
  }
  const AxisSplit sa = split_axis(av.shape(), axis, "concat");
  const AxisSplit sb = split_axis(bv.shape(), axis, "concat");
  Shape s = av.shape();
  s[axis] += bv.dim(axis);
  Tensor out(s);
  const std::size_t ca = sa.n * sa.inner, cb = sb.n * sb.inner;
  for (std::size_t o = 0; o < sa.outer; ++o) {
    std::copy_n(av.raw() + o * ca, ca, out.raw() + o * (ca + cb));
    std::copy_n(bv.raw() + o * cb, cb, out.raw() + o * (ca + cb) + ca);
  }
  const NodeId ia = a.id, ib = b.id;
  const std::size_t outer = sa.outer;
  return g.record("concat", std::move(out), {ia, ib}, [=](Graph& g, NodeId o) {
    const Tensor& d = g.grad(o);
    Tensor* da = g.accum(ia);
    Tensor* db = g.accum(ib);
    for (std::size_t r = 0; r < outer; ++r) {
      if (da) {
        for (std::size_t i = 0; i < ca; ++i) (*da)[r * ca + i] += d[r * (ca + cb) + i];
      }
      if (db) {
        for (std::size_t i = 0; i < cb; ++i) (*db)[r * cb + i] += d[r * (ca + cb) + ca + i];
      }
    }
  });
}

Var slice(Var x, std::size_t axis, std::size_t begin, std::size_t end) {
  const Tensor& xv = x.value();
  const AxisSplit s = split_axis(xv.shape(), axis, "slice");
  if (begin >= end || end > s.n) {
    throw ShapeError("slice: range [" + std::to_string(begin) + ", " + std::to_string(end) +
                     ") invalid for axis of size " + std::to_string(s.n));
  }
  Shape shape = xv.shape();
  shape[axis] = end - begin;
  Tensor out(shape);
  const std::size_t width = (end - begin) * s.inner;
  for (std::size_t o = 0; o < s.outer; ++o) {
    std::copy_n(xv.raw() + o * s.n * s.inner + begin * s.inner, width, out.raw() + o * width);
  }
  const NodeId ix = x.id;
  return x.graph->record("slice", std::move(out), {ix}, [=](Graph& g, NodeId o) {
    Tensor* dx = g.accum(ix);
    if (!dx) return;
    const Tensor& d = g.grad(o);
    for (std::size_t r = 0; r < s.outer; ++r) {
      for (std::size_t i = 0; i < width; ++i) {
        (*dx)[r * s.n * s.inner + begin * s.inner + i] += d[r * width + i];
      }
    }
  });
}

Var embedding(Var table, std::span<const std::size_t> ids) {
  const Tensor& tv = table.value();
  require_rank(tv, 2, "embedding table");
  const std::size_t v = tv.dim(0), dim = tv.dim(1);
  if (ids.empty()) throw ShapeError("embedding: empty id list");
  std::vector<std::size_t> rows(ids.begin(), ids.end());
  Tensor out({rows.size(), dim});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= v) {
      throw InvalidArgument("embedding: id " + std::to_string(rows[i]) + " out of range " +
                            std::to_string(v));
    }
    std::copy_n(tv.raw() + rows[i] * dim, dim, out.raw() + i * dim);
  }
  const NodeId it = table.id;
  return table.graph->record("embedding", std::move(out), {it},
                             [it, dim, rows = std::move(rows)](Graph& g, NodeId o) {
                               Tensor* dt = g.accum(it);
                               if (!dt) return;
                               const Tensor& d = g.grad(o);
                               for (std::size_t i = 0; i < rows.size(); ++i) {
                                 for (std::size_t j = 0; j < dim; ++j) {
                                   (*dt)[rows[i] * dim + j] += d[i * dim + j];
                                 }
                               }
                             });
}

Var sum(Var x) {
  double s = 0.0;
  for (double v : x.value().data()) s += v;
  const NodeId ix = x.id;
  return x.graph->record("sum", Tensor::scalar(s), {ix}, [ix](Graph& g, NodeId o) {
    Tensor* dx = g.accum(ix);
    if (!dx) return;
    const double d = g.grad(o)[0];
    for (auto& v : dx->data()) v += d;
  });
}

Var mean(Var x) {
  return scale(sum(x), 1.0 / static_cast<double>(x.value().numel()));
}

Var causal_mask(Var scores) {
  const Tensor& sv = scores.value();
  if (sv.rank() < 2) throw ShapeError("causal_mask: rank < 2");
  const std::size_t r = sv.shape()[sv.rank() - 2], c = sv.shape().back();
  Tensor out = sv;
  const std::size_t batch = sv.numel() / (r * c);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = i + 1; j < c; ++j) out[b * r * c + i * c + j] = kMaskedScore;
    }
  }
  const NodeId ix = scores.id;
  return scores.graph->record("causal_mask", std::move(out), {ix},
                              [ix, r, c, batch](Graph& g, NodeId o) {
                                Tensor* dx = g.accum(ix);
                                if (!dx) return;
                                const Tensor& d = g.grad(o);
                                for (std::size_t b = 0; b < batch; ++b) {
                                  for (std::size_t i = 0; i < r; ++i) {
                                    for (std::size_t j = 0; j <= i && j < c; ++j) {
                                      const std::size_t k = b * r * c + i * c + j;
                                      (*dx)[k] += d[k];
                                    }
                                  }
                                }
                              });
}

Var cross_entropy(Var logits, std::span<const std::size_t> targets) {
  const Tensor& lv = logits.value();
  require_rank(lv, 2, "cross_entropy logits");
  const std::size_t rows = lv.dim(0), v = lv.dim(1);
  if (targets.size() != rows) {
    throw ShapeError("cross_entropy: " + std::to_string(targets.size()) + " targets for " +
                     std::to_string(rows) + " rows");
  }
  Tensor probs({rows, v});
  double loss = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (targets[r] >= v) throw InvalidArgument("cross_entropy: target out of range");
    const double* z = lv.raw() + r * v;
    const double mx = *std::max_element(z, z + v);
    double total = 0.0;
    for (std::size_t j = 0; j < v; ++j) {
      probs(r, j) = std::exp(z[j] - mx);
      total += probs(r, j);
    }
    for (std::size_t j = 0; j < v; ++j) probs(r, j) /= total;
    loss += mx + std::log(total) - z[targets[r]];
  }
  const NodeId il = logits.id;
  std::vector<std::size_t> tg(targets.begin(), targets.end());
  return logits.graph->record("cross_entropy", Tensor::scalar(loss), {il},
                              [il, probs = std::move(probs), tg = std::move(tg)](Graph& g,
                                                                                  NodeId o) {
                                Tensor* dl = g.accum(il);
                                if (!dl) return;
                                const double d = g.grad(o)[0];
                                dl->add_inplace(probs, d);
                                const std::size_t v = probs.dim(1);
                                for (std::size_t r = 0; r < tg.size(); ++r) {
                                  (*dl)[r * v + tg[r]] -= d;
                                }
                              });
}

}  // namespace avsr
