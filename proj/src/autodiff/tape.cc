// Copyright 2026 The tppsd Authors. All Rights Reserved.
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

#include "autodiff/tape.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "core/error.h"
#include "core/numerics.h"

namespace tppsd::ad {

namespace {

Tensor zeros_like(const Tensor& t) {
  return Tensor(t.shape(), std::vector<double>(t.size(), 0.0));
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw_usage(std::string(op) + ": shape mismatch (" + std::to_string(a.rows()) + "x" +
                std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                std::to_string(b.cols()) + ")");
  }
}

Tape& tape_of(Var a) {
  if (a.tape == nullptr) throw_usage("variable is not attached to a tape");
  return *a.tape;
}

Tape& tape_of(Var a, Var b) {
  if (a.tape != b.tape) throw_usage("variables belong to different tapes");
  return tape_of(a);
}

// y = f(x) elementwise with dy/dx = df(x, y).
template <typename F, typename DF>
Var unary(Var a, F f, DF df) {
  Tape& tape = tape_of(a);
  const Tensor& x = a.value();
  Tensor y = zeros_like(x);
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = f(x[i]);
  const std::size_t ia = a.id;
  return tape.record(std::move(y), {ia}, [ia, df](Tape& t, std::size_t self) {
    Tensor* ga = t.grad_slot(ia);
    if (ga == nullptr) return;
    const Tensor& x = t.value(ia);
    const Tensor& y = t.value(self);
    const Tensor& g = t.output_grad(self);
    for (std::size_t i = 0; i < x.size(); ++i) (*ga)[i] += g[i] * df(x[i], y[i]);
  });
}

}  // namespace

const Tensor& Var::value() const { return tape_of(*this).value(id); }
const Tensor& Var::grad() const { return tape_of(*this).grad(id); }

Var Tape::variable(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, {}, {}, true});
  return Var{this, nodes_.size() - 1};
}

Var Tape::constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, {}, {}, false});
  return Var{this, nodes_.size() - 1};
}

const Tensor& Tape::grad(std::size_t id) const {
  const Node& n = nodes_[id];
  if (n.grad.size() != n.value.size()) {
    throw_usage("gradient requested before backward() or for a constant");
  }
  return n.grad;
}

Tensor* Tape::grad_slot(std::size_t id) {
  Node& n = nodes_[id];
  return n.requires_grad ? &n.grad : nullptr;
}

Var Tape::record(Tensor value, std::vector<std::size_t> inputs, BackwardFn backward) {
  bool needs = false;
  for (std::size_t in : inputs) needs = needs || nodes_[in].requires_grad;
  Node node{std::move(value), {}, std::move(inputs), {}, needs};
  if (needs) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var{this, nodes_.size() - 1};
}

void Tape::backward(Var output) {
  if (output.tape != this) throw_usage("backward: output belongs to another tape");
  if (nodes_[output.id].value.size() != 1) {
    throw_usage("backward: output must hold a single element");
  }
  for (std::size_t i = 0; i <= output.id; ++i) {
    Node& n = nodes_[i];
    if (n.requires_grad) n.grad = zeros_like(n.value);
  }
  if (!nodes_[output.id].requires_grad) return;
  nodes_[output.id].grad[0] = 1.0;
  for (std::size_t i = output.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.requires_grad && n.backward) n.backward(*this, i);
  }
}

Var add(Var a, Var b) {
  Tape& tape = tape_of(a, b);
  require_same_shape(a.value(), b.value(), "add");
  Tensor y = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += bv[i];
  const std::size_t ia = a.id, ib = b.id;
  return tape.record(std::move(y), {ia, ib}, [ia, ib](Tape& t, std::size_t self) {
    const Tensor& g = t.output_grad(self);
    for (std::size_t in : {ia, ib}) {
      if (Tensor* gi = t.grad_slot(in)) {
        for (std::size_t i = 0; i < g.size(); ++i) (*gi)[i] += g[i];
      }
    }
  });
}

Var sub(Var a, Var b) {
  Tape& tape = tape_of(a, b);
  require_same_shape(a.value(), b.value(), "sub");
  Tensor y = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] -= bv[i];
  const std::size_t ia = a.id, ib = b.id;
  return tape.record(std::move(y), {ia, ib}, [ia, ib](Tape& t, std::size_t self) {
    const Tensor& g = t.output_grad(self);
    if (Tensor* ga = t.grad_slot(ia)) {
      for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i];
    }
    if (Tensor* gb = t.grad_slot(ib)) {
      for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i] -= g[i];
    }
  });
}

Var mul(Var a, Var b) {
  Tape& tape = tape_of(a, b);
  require_same_shape(a.value(), b.value(), "mul");
  Tensor y = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= bv[i];
  const std::size_t ia = a.id, ib = b.id;
  return tape.record(std::move(y), {ia, ib}, [ia, ib](Tape& t, std::size_t self) {
    const Tensor& g = t.output_grad(self);
    if (Tensor* ga = t.grad_slot(ia)) {
      const Tensor& bv = t.value(ib);
      for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] * bv[i];
    }
    if (Tensor* gb = t.grad_slot(ib)) {
      const Tensor& av = t.value(ia);
      for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i] += g[i] * av[i];
    }
  });
}

Var scale(Var a, double c) {
  return unary(a, [c](double x) { return c * x; }, [c](double, double) { return c; });
}

Var add_scalar(Var a, double c) {
  return unary(a, [c](double x) { return x + c; }, [](double, double) { return 1.0; });
}

Var broadcast_rows(Var row, std::size_t m) {
  Tape& tape = tape_of(row);
  const Tensor& r = row.value();
  if (r.rows() != 1) throw_usage("broadcast_rows: input must be a single row");
  const std::size_t n = r.cols();
  Tensor y(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    std::copy(r.values().begin(), r.values().end(), y.values().begin() + i * n);
  }
  const std::size_t ir = row.id;
  return tape.record(std::move(y), {ir}, [ir, m, n](Tape& t, std::size_t self) {
    Tensor* gr = t.grad_slot(ir);
    if (gr == nullptr) return;
    const Tensor& g = t.output_grad(self);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) (*gr)[j] += g(i, j);
    }
  });
}

Var broadcast_cols(Var col, std::size_t n) {
  Tape& tape = tape_of(col);
  const Tensor& c = col.value();
  if (c.cols() != 1) throw_usage("broadcast_cols: input must be a single column");
  const std::size_t m = c.rows();
  Tensor y(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) y(i, j) = c[i];
  }
  const std::size_t ic = col.id;
  return tape.record(std::move(y), {ic}, [ic, m, n](Tape& t, std::size_t self) {
    Tensor* gc = t.grad_slot(ic);
    if (gc == nullptr) return;
    const Tensor& g = t.output_grad(self);
    for (std::size_t i = 0; i < m; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += g(i, j);
      (*gc)[i] += s;
    }
  });
}

namespace {

// out += a * b  (a: m x k, b: k x n)
void gemm_acc(const Tensor& a, const Tensor& b, Tensor& out) {
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  const double* ap = a.values().data();
  const double* bp = b.values().data();
  double* op = out.values().data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double av = ap[i * k + p];
      if (av == 0.0) continue;
      const double* brow = bp + p * n;
      double* orow = op + i * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  }
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& tape = tape_of(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.cols() != bv.rows()) {
    throw_usage("matmul: inner dimensions differ (" + std::to_string(av.cols()) + " vs " +
                std::to_string(bv.rows()) + ")");
  }
  Tensor y(av.rows(), bv.cols());
  gemm_acc(av, bv, y);
  const std::size_t ia = a.id, ib = b.id;
  return tape.record(std::move(y), {ia, ib}, [ia, ib](Tape& t, std::size_t self) {
    const Tensor& g = t.output_grad(self);
    const Tensor& av = t.value(ia);
    const Tensor& bv = t.value(ib);
    const std::size_t m = av.rows(), k = av.cols(), n = bv.cols();
    if (Tensor* ga = t.grad_slot(ia)) {
      // dA = G * B^T
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          double s = 0.0;
          for (std::size_t j = 0; j < n; ++j) s += g(i, j) * bv(p, j);
          (*ga)(i, p) += s;
        }
      }
    }
    if (Tensor* gb = t.grad_slot(ib)) {
      // dB = A^T * G
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          const double aip = av(i, p);
          if (aip == 0.0) continue;
          for (std::size_t j = 0; j < n; ++j) (*gb)(p, j) += aip * g(i, j);
        }
      }
    }
  });
}

Var transpose(Var a) {
  Tape& tape = tape_of(a);
  const Tensor& x = a.value();
  const std::size_t m = x.rows(), n = x.cols();
  Tensor y(n, m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) y(j, i) = x(i, j);
  }
  const std::size_t ia = a.id;
  return tape.record(std::move(y), {ia}, [ia, m, n](Tape& t, std::size_t self) {
    Tensor* ga = t.grad_slot(ia);
    if (ga == nullptr) return;
    const Tensor& g = t.output_grad(self);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) (*ga)(i, j) += g(j, i);
    }
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw_usage("concat_cols: no inputs");
  Tape& tape = tape_of(parts[0]);
  const std::size_t m = parts[0].rows();
  std::size_t n = 0;
  std::vector<std::size_t> ids, offsets;
  for (const Var& p : parts) {
    tape_of(parts[0], p);
    if (p.rows() != m) throw_usage("concat_cols: row counts differ");
    ids.push_back(p.id);
    offsets.push_back(n);
    n += p.cols();
  }
  Tensor y(m, n);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor& x = parts[k].value();
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < x.cols(); ++j) y(i, offsets[k] + j) = x(i, j);
    }
  }
  std::vector<std::size_t> inputs = ids;
  return tape.record(std::move(y), std::move(inputs),
                     [ids, offsets, m](Tape& t, std::size_t self) {
                       const Tensor& g = t.output_grad(self);
                       for (std::size_t k = 0; k < ids.size(); ++k) {
                         Tensor* gk = t.grad_slot(ids[k]);
                         if (gk == nullptr) continue;
                         const std::size_t w = gk->cols();
                         for (std::size_t i = 0; i < m; ++i) {
                           for (std::size_t j = 0; j < w; ++j) {
                             (*gk)(i, j) += g(i, offsets[k] + j);
                           }
                         }
                       }
                     });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw_usage("concat_rows: no inputs");
  Tape& tape = tape_of(parts[0]);
  const std::size_t n = parts[0].cols();
  std::size_t m = 0;
  std::vector<std::size_t> ids, offsets;
  for (const Var& p : parts) {
    tape_of(parts[0], p);
    if (p.cols() != n) throw_usage("concat_rows: column counts differ");
    ids.push_back(p.id);
    offsets.push_back(m);
    m += p.rows();
  }
  Tensor y(m, n);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor& x = parts[k].value();
    std::copy(x.values().begin(), x.values().end(), y.values().begin() + offsets[k] * n);
  }
  std::vector<std::size_t> inputs = ids;
  return tape.record(std::move(y), std::move(inputs),
                     [ids, offsets, n](Tape& t, std::size_t self) {
                       const Tensor& g = t.output_grad(self);
                       for (std::size_t k = 0; k < ids.size(); ++k) {
                         Tensor* gk = t.grad_slot(ids[k]);
                         if (gk == nullptr) continue;
                         for (std::size_t i = 0; i < gk->size(); ++i) {
                           (*gk)[i] += g[offsets[k] * n + i];
                         }
                       }
                     });
}

Var slice_cols(Var a, std::size_t begin, std::size_t end) {
  Tape& tape = tape_of(a);
  const Tensor& x = a.value();
  if (begin > end || end > x.cols()) throw_usage("slice_cols: range out of bounds");
  const std::size_t m = x.rows(), w = end - begin;
  Tensor y(m, w);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < w; ++j) y(i, j) = x(i, begin + j);
  }
  const std::size_t ia = a.id;
  return tape.record(std::move(y), {ia}, [ia, begin, m, w](Tape& t, std::size_t self) {
    Tensor* ga = t.grad_slot(ia);
    if (ga == nullptr) return;
    const Tensor& g = t.output_grad(self);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < w; ++j) (*ga)(i, begin + j) += g(i, j);
    }
  });
}

Var slice_rows(Var a, std::size_t begin, std::size_t end) {
  Tape& tape = tape_of(a);
  const Tensor& x = a.value();
  if (begin > end || end > x.rows()) throw_usage("slice_rows: range out of bounds");
  const std::size_t n = x.cols();
  Tensor y(end - begin, n);
  std::copy(x.values().begin() + begin * n, x.values().begin() + end * n,
            y.values().begin());
  const std::size_t ia = a.id;
  return tape.record(std::move(y), {ia}, [ia, begin, n](Tape& t, std::size_t self) {
    Tensor* ga = t.grad_slot(ia);
    if (ga == nullptr) return;
    const Tensor& g = t.output_grad(self);
    for (std::size_t i = 0; i < g.size(); ++i) (*ga)[begin * n + i] += g[i];
  });
}

Var exp(Var a) {
  return unary(a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var log(Var a) {
  for (double x : a.value().values()) {
    if (!(x > 0.0)) throw_numeric("log of non-positive value");
  }
  return unary(a, [](double x) { return std::log(x); },
               [](double x, double) { return 1.0 / x; });
}

Var tanh(Var a) {
  return unary(a, [](double x) { return std::tanh(x); },
               [](double, double y) { return 1.0 - y * y; });
}

Var sin(Var a) {
  return unary(a, [](double x) { return std::sin(x); },
               [](double x, double) { return std::cos(x); });
}

Var cos(Var a) {
  return unary(a, [](double x) { return std::cos(x); },
               [](double x, double) { return -std::sin(x); });
}

Var square(Var a) {
  return unary(a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Var clamp(Var a, double lo, double hi) {
  return unary(a, [lo, hi](double x) { return std::clamp(x, lo, hi); },
               [lo, hi](double x, double) { return (x >= lo && x <= hi) ? 1.0 : 0.0; });
}

Var normal_cdf(Var a) {
  return unary(a, [](double x) { return tppsd::normal_cdf(x); },
               [](double x, double) { return std::exp(normal_log_pdf(x)); });
}

Var log_normal_cdf(Var a) {
  return unary(a, [](double x) { return tppsd::log_normal_cdf(x); },
               [](double x, double) { return normal_hazard_ratio(x); });
}

namespace {

double row_max(const Tensor& x, std::size_t i) {
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < x.cols(); ++j) hi = std::max(hi, x(i, j));
  return hi;
}

}  // namespace

Var softmax_rows(Var a) {
  Tape& tape = tape_of(a);
  const Tensor& x = a.value();
  Tensor y = zeros_like(x);
  const std::size_t m = x.rows(), n = x.cols();
  for (std::size_t i = 0; i < m; ++i) {
    const double hi = row_max(x, i);
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += (y(i, j) = std::exp(x(i, j) - hi));
    for (std::size_t j = 0; j < n; ++j) y(i, j) /= s;
  }
  const std::size_t ia = a.id;
  return tape.record(std::move(y), {ia}, [ia, m, n](Tape& t, std::size_t self) {
    Tensor* ga = t.grad_slot(ia);
    if (ga == nullptr) return;
    const Tensor& y = t.value(self);
    const Tensor& g = t.output_grad(self);
    for (std::size_t i = 0; i < m; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < n; ++j) dot += g(i, j) * y(i, j);
      for (std::size_t j = 0; j < n; ++j) (*ga)(i, j) += y(i, j) * (g(i, j) - dot);
    }
  });
}

Var log_softmax_rows(Var a) {
  Tape& tape = tape_of(a);
  const Tensor& x = a.value();
  Tensor y = zeros_like(x);
  const std::size_t m = x.rows(), n = x.cols();
  for (std::size_t i = 0; i < m; ++i) {
    const double lse = log_sum_exp(x.row_span(i));
    for (std::size_t j = 0; j < n; ++j) y(i, j) = x(i, j) - lse;
  }
  const std::size_t ia = a.id;
  return tape.record(std::move(y), {ia}, [ia, m, n](Tape& t, std::size_t self) {
    Tensor* ga = t.grad_slot(ia);
    if (ga == nullptr) return;
    const Tensor& y = t.value(self);
    const Tensor& g = t.output_grad(self);
    for (std::size_t i = 0; i < m; ++i) {
      double gs = 0.0;
      for (std::size_t j = 0; j < n; ++j) gs += g(i, j);
      for (std::size_t j = 0; j < n; ++j) (*ga)(i, j) += g(i, j) - std::exp(y(i, j)) * gs;
    }
  });
}

Var logsumexp_rows(Var a) {
  Tape& tape = tape_of(a);
  const Tensor& x = a.value();
  const std::size_t m = x.rows(), n = x.cols();
  Tensor y(m, 1);
  for (std::size_t i = 0; i < m; ++i) y[i] = log_sum_exp(x.row_span(i));
  const std::size_t ia = a.id;
  return tape.record(std::move(y), {ia}, [ia, m, n](Tape& t, std::size_t self) {
    Tensor* ga = t.grad_slot(ia);
    if (ga == nullptr) return;
    const Tensor& x = t.value(ia);
    const Tensor& y = t.value(self);
    const Tensor& g = t.output_grad(self);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) (*ga)(i, j) += g[i] * std::exp(x(i, j) - y[i]);
    }
  });
}

Var sum(Var a) {
  Tape& tape = tape_of(a);
  double s = 0.0;
  for (double v : a.value().values()) s += v;
  const std::size_t ia = a.id;
  return tape.record(Tensor(1, 1, s), {ia}, [ia](Tape& t, std::size_t self) {
    Tensor* ga = t.grad_slot(ia);
    if (ga == nullptr) return;
    const double g = t.output_grad(self)[0];
    for (std::size_t i = 0; i < ga->size(); ++i) (*ga)[i] += g;
  });
}

Var mean(Var a) {
  const std::size_t n = a.value().size();
  if (n == 0) throw_usage("mean of an empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(n));
}

}  // namespace tppsd::ad
