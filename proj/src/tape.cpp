#include "ecrt/tape.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

namespace ecrt {

namespace {

using EMat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CMap = Eigen::Map<const EMat>;
using MMap = Eigen::Map<EMat>;

Tape& tape_of(Var a, const char* op) {
  if (!a.valid()) throw UsageError(std::string(op) + ": invalid operand");
  return *a.tape;
}

void check_same_tape(Var a, Var b, const char* op) {
  if (!a.valid() || !b.valid()) throw UsageError(std::string(op) + ": invalid operand");
  if (a.tape != b.tape) throw UsageError(std::string(op) + ": operands live on different tapes");
}

// Result extents for elementwise binaries: per axis the extents must match
// or one of them must be 1.
std::pair<std::size_t, std::size_t> bshape(const Tensor& a, const Tensor& b, const char* op) {
  auto axis = [&](std::size_t x, std::size_t y) -> std::size_t {
    if (x == y) return x;
    if (x == 1) return y;
    if (y == 1) return x;
    throw ConfigError(std::string(op) + ": incompatible shapes " + shape_pair_str(a, b));
  };
  return {axis(a.rows(), b.rows()), axis(a.cols(), b.cols())};
}

template <class F>
Tensor bmap(const Tensor& a, const Tensor& b, std::size_t R, std::size_t C, F&& f) {
  Tensor out(R, C);
  const std::size_t ars = a.rows() == 1 ? 0 : a.cols();
  const std::size_t acs = a.cols() == 1 ? 0 : 1;
  const std::size_t brs = b.rows() == 1 ? 0 : b.cols();
  const std::size_t bcs = b.cols() == 1 ? 0 : 1;
  const Scalar* pa = a.data();
  const Scalar* pb = b.data();
  Scalar* po = out.mutable_data();
  for (std::size_t i = 0; i < R; ++i)
    for (std::size_t j = 0; j < C; ++j)
      po[i * C + j] = f(pa[i * ars + j * acs], pb[i * brs + j * bcs]);
  return out;
}

template <class F>
Tensor umap(const Tensor& a, F&& f) {
  Tensor out(a.rows(), a.cols());
  const Scalar* pa = a.data();
  Scalar* po = out.mutable_data();
  for (std::size_t i = 0; i < a.size(); ++i) po[i] = f(pa[i]);
  return out;
}

// Sum g down to shape (r, c); used to push broadcast gradients back.
Tensor reduce_to(const Tensor& g, std::size_t r, std::size_t c) {
  if (g.rows() == r && g.cols() == c) return g;
  Tensor out(r, c);
  Scalar* po = out.mutable_data();
  const Scalar* pg = g.data();
  const std::size_t ors = r == 1 ? 0 : c;
  const std::size_t ocs = c == 1 ? 0 : 1;
  for (std::size_t i = 0; i < g.rows(); ++i)
    for (std::size_t j = 0; j < g.cols(); ++j)
      po[(r == 1 ? 0 : i) * ors + (c == 1 ? 0 : j) * ocs] += pg[i * g.cols() + j];
  return out;
}

void add_in_place(Tensor& dst, const Tensor& src) {
  Scalar* pd = dst.mutable_data();
  const Scalar* ps = src.data();
  for (std::size_t i = 0; i < dst.size(); ++i) pd[i] += ps[i];
}

}  // namespace

Var Tape::leaf(Tensor value, bool requires_grad) {
  Node n;
  n.value = std::move(value);
  n.rg = requires_grad;
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size() - 1)};
}

Var Tape::emplace(Tensor value, std::vector<int> parents, BackFn back) {
  Node n;
  n.value = std::move(value);
  for (int p : parents)
    if (nodes_[static_cast<std::size_t>(p)].rg) n.rg = true;
  if (n.rg) {
    n.parents = std::move(parents);
    n.back = std::move(back);
  }
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size() - 1)};
}

const Tape::Node& Tape::node(Var v) const {
  if (v.tape != this || v.id < 0 || static_cast<std::size_t>(v.id) >= nodes_.size())
    throw UsageError("Tape: variable does not belong to this tape");
  return nodes_[static_cast<std::size_t>(v.id)];
}

const Tensor& Tape::value(Var v) const { return node(v).value; }

bool Tape::requires_grad(Var v) const { return node(v).rg; }

void Tape::accumulate(int id, const Tensor& g) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (!n.rg) return;
  if (!n.value.same_shape(g))
    throw NumericError("Tape: gradient shape " + g.shape_str() + " does not match value shape " +
                       n.value.shape_str());
  if (n.grad.empty())
    n.grad = g.clone();
  else
    add_in_place(n.grad, g);
}

void Tape::backward(Var loss) {
  const Node& ln = node(loss);
  if (ln.value.rows() != 1 || ln.value.cols() != 1)
    throw UsageError("Tape::backward: loss must be 1x1, got " + ln.value.shape_str());
  if (backward_done_) throw UsageError("Tape::backward: tape already differentiated");
  backward_done_ = true;
  if (!ln.rg) return;  // constant loss: all gradients stay zero
  accumulate(loss.id, Tensor::ones(1, 1));
  for (int i = loss.id; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (!n.rg || n.grad.empty() || !n.back) continue;
    n.back(*this, n.grad);
  }
}

Tensor Tape::grad(Var v) const {
  const Node& n = node(v);
  if (n.grad.empty()) return Tensor::zeros(n.value.rows(), n.value.cols());
  return n.grad;
}

// ---------------------------------------------------------------- binaries

namespace {

template <class FwdF, class DaF, class DbF>
Var binary_op(Var a, Var b, const char* name, FwdF&& f, DaF&& da, DbF&& db) {
  check_same_tape(a, b, name);
  Tape& t = *a.tape;
  const Tensor av = t.value(a);
  const Tensor bv = t.value(b);
  auto [R, C] = bshape(av, bv, name);
  Tensor out = bmap(av, bv, R, C, f);
  int aid = a.id, bid = b.id;
  return t.emplace(std::move(out), {aid, bid},
                   [av, bv, R, C, aid, bid, da, db](Tape& tp, const Tensor& g) {
                     Tensor ga = bmap(av, bv, R, C, da);
                     Scalar* p = ga.mutable_data();
                     const Scalar* pg = g.data();
                     for (std::size_t i = 0; i < ga.size(); ++i) p[i] *= pg[i];
                     tp.accumulate(aid, reduce_to(ga, av.rows(), av.cols()));
                     Tensor gb = bmap(av, bv, R, C, db);
                     Scalar* q = gb.mutable_data();
                     for (std::size_t i = 0; i < gb.size(); ++i) q[i] *= pg[i];
                     tp.accumulate(bid, reduce_to(gb, bv.rows(), bv.cols()));
                   });
}

}  // namespace

Var add(Var a, Var b) {
  return binary_op(
      a, b, "add", [](Scalar x, Scalar y) { return x + y; },
      [](Scalar, Scalar) { return Scalar(1); }, [](Scalar, Scalar) { return Scalar(1); });
}

Var sub(Var a, Var b) {
  return binary_op(
      a, b, "sub", [](Scalar x, Scalar y) { return x - y; },
      [](Scalar, Scalar) { return Scalar(1); }, [](Scalar, Scalar) { return Scalar(-1); });
}

Var mul(Var a, Var b) {
  return binary_op(
      a, b, "mul", [](Scalar x, Scalar y) { return x * y; },
      [](Scalar, Scalar y) { return y; }, [](Scalar x, Scalar) { return x; });
}

Var divide(Var a, Var b) {
  return binary_op(
      a, b, "divide", [](Scalar x, Scalar y) { return x / y; },
      [](Scalar, Scalar y) { return Scalar(1) / y; },
      [](Scalar x, Scalar y) { return -x / (y * y); });
}

// ------------------------------------------------------------------ matmul

Tensor matmul_plain(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows())
    throw ConfigError("matmul: inner extents disagree, " + shape_pair_str(a, b));
  Tensor out(a.rows(), b.cols());
  CMap ma(a.data(), static_cast<Eigen::Index>(a.rows()), static_cast<Eigen::Index>(a.cols()));
  CMap mb(b.data(), static_cast<Eigen::Index>(b.rows()), static_cast<Eigen::Index>(b.cols()));
  MMap mo(out.mutable_data(), static_cast<Eigen::Index>(out.rows()),
          static_cast<Eigen::Index>(out.cols()));
  mo.noalias() = ma * mb;
  return out;
}

namespace {

Tensor matmul_at_b(const Tensor& a, const Tensor& b) {  // a^T * b
  Tensor out(a.cols(), b.cols());
  CMap ma(a.data(), static_cast<Eigen::Index>(a.rows()), static_cast<Eigen::Index>(a.cols()));
  CMap mb(b.data(), static_cast<Eigen::Index>(b.rows()), static_cast<Eigen::Index>(b.cols()));
  MMap mo(out.mutable_data(), static_cast<Eigen::Index>(out.rows()),
          static_cast<Eigen::Index>(out.cols()));
  mo.noalias() = ma.transpose() * mb;
  return out;
}

Tensor matmul_a_bt(const Tensor& a, const Tensor& b) {  // a * b^T
  Tensor out(a.rows(), b.rows());
  CMap ma(a.data(), static_cast<Eigen::Index>(a.rows()), static_cast<Eigen::Index>(a.cols()));
  CMap mb(b.data(), static_cast<Eigen::Index>(b.rows()), static_cast<Eigen::Index>(b.cols()));
  MMap mo(out.mutable_data(), static_cast<Eigen::Index>(out.rows()),
          static_cast<Eigen::Index>(out.cols()));
  mo.noalias() = ma * mb.transpose();
  return out;
}

}  // namespace

Var matmul(Var a, Var b) {
  check_same_tape(a, b, "matmul");
  Tape& t = *a.tape;
  const Tensor av = t.value(a);
  const Tensor bv = t.value(b);
  Tensor out = matmul_plain(av, bv);
  int aid = a.id, bid = b.id;
  return t.emplace(std::move(out), {aid, bid}, [av, bv, aid, bid](Tape& tp, const Tensor& g) {
    tp.accumulate(aid, matmul_a_bt(g, bv));
    tp.accumulate(bid, matmul_at_b(av, g));
  });
}

// ------------------------------------------------------------------ unaries

namespace {

// Unary op where the local derivative is a function of (input, output).
template <class FwdF, class DF>
Var unary_op(Var a, const char* name, FwdF&& f, DF&& dfun) {
  Tape& t = tape_of(a, name);
  const Tensor av = t.value(a);
  Tensor out = umap(av, f);
  Tensor ov = out;  // shares buffer
  int aid = a.id;
  return t.emplace(std::move(out), {aid}, [av, ov, aid, dfun](Tape& tp, const Tensor& g) {
    Tensor ga(av.rows(), av.cols());
    Scalar* p = ga.mutable_data();
    const Scalar* px = av.data();
    const Scalar* py = ov.data();
    const Scalar* pg = g.data();
    for (std::size_t i = 0; i < ga.size(); ++i) p[i] = pg[i] * dfun(px[i], py[i]);
    tp.accumulate(aid, ga);
  });
}

Scalar stable_softplus(Scalar r) {
  if (r > Scalar(30)) return r;
  return std::log1p(std::exp(r));
}

Scalar stable_sigmoid(Scalar x) {
  if (x >= 0) {
    Scalar e = std::exp(-x);
    return Scalar(1) / (Scalar(1) + e);
  }
  Scalar e = std::exp(x);
  return e / (Scalar(1) + e);
}

}  // namespace

Var neg(Var a) {
  return unary_op(
      a, "neg", [](Scalar x) { return -x; }, [](Scalar, Scalar) { return Scalar(-1); });
}

Var exp_op(Var a) {
  return unary_op(
      a, "exp", [](Scalar x) { return std::exp(x); }, [](Scalar, Scalar y) { return y; });
}

Var log_op(Var a) {
  return unary_op(
      a, "log", [](Scalar x) { return std::log(x); },
      [](Scalar x, Scalar) { return Scalar(1) / x; });
}

Var tanh_op(Var a) {
  return unary_op(
      a, "tanh", [](Scalar x) { return std::tanh(x); },
      [](Scalar, Scalar y) { return Scalar(1) - y * y; });
}

Var relu(Var a) {
  return unary_op(
      a, "relu", [](Scalar x) { return x > 0 ? x : Scalar(0); },
      [](Scalar x, Scalar) { return x > 0 ? Scalar(1) : Scalar(0); });
}

Var sigmoid(Var a) {
  return unary_op(
      a, "sigmoid", [](Scalar x) { return stable_sigmoid(x); },
      [](Scalar, Scalar y) { return y * (Scalar(1) - y); });
}

Var softplus(Var a) {
  return unary_op(
      a, "softplus", [](Scalar x) { return stable_softplus(x); },
      [](Scalar x, Scalar) { return stable_sigmoid(x); });
}

Var sqrt_op(Var a) {
  return unary_op(
      a, "sqrt", [](Scalar x) { return std::sqrt(x); },
      [](Scalar, Scalar y) { return Scalar(0.5) / y; });
}

Var square(Var a) {
  return unary_op(
      a, "square", [](Scalar x) { return x * x; }, [](Scalar x, Scalar) { return Scalar(2) * x; });
}

Var clamp_min(Var a, Scalar lo) {
  return unary_op(
      a, "clamp_min", [lo](Scalar x) { return x > lo ? x : lo; },
      [lo](Scalar x, Scalar) { return x > lo ? Scalar(1) : Scalar(0); });
}

Var add_scalar(Var a, Scalar c) {
  return unary_op(
      a, "add_scalar", [c](Scalar x) { return x + c; }, [](Scalar, Scalar) { return Scalar(1); });
}

Var mul_scalar(Var a, Scalar c) {
  return unary_op(
      a, "mul_scalar", [c](Scalar x) { return x * c; }, [c](Scalar, Scalar) { return c; });
}

// --------------------------------------------------------------- reductions

namespace {

Var reduce_op(Var a, const char* name, bool over_rows, bool over_cols, bool mean) {
  Tape& t = tape_of(a, name);
  const Tensor av = t.value(a);
  if (av.empty()) throw ConfigError(std::string(name) + ": reduction over empty tensor");
  const std::size_t R = over_rows ? 1 : av.rows();
  const std::size_t C = over_cols ? 1 : av.cols();
  Tensor out(R, C);
  const Scalar* pa = av.data();
  Scalar* po = out.mutable_data();
  for (std::size_t i = 0; i < av.rows(); ++i)
    for (std::size_t j = 0; j < av.cols(); ++j)
      po[(over_rows ? 0 : i) * C + (over_cols ? 0 : j)] += pa[i * av.cols() + j];
  Scalar denom = 1;
  if (mean) {
    denom = static_cast<Scalar>((over_rows ? av.rows() : 1) * (over_cols ? av.cols() : 1));
    for (std::size_t i = 0; i < out.size(); ++i) po[i] /= denom;
  }
  int aid = a.id;
  const std::size_t ar = av.rows(), ac = av.cols();
  return t.emplace(std::move(out), {aid},
                   [aid, ar, ac, C, over_rows, over_cols, denom](Tape& tp, const Tensor& g) {
                     Tensor ga(ar, ac);
                     Scalar* p = ga.mutable_data();
                     const Scalar* pg = g.data();
                     for (std::size_t i = 0; i < ar; ++i)
                       for (std::size_t j = 0; j < ac; ++j)
                         p[i * ac + j] =
                             pg[(over_rows ? 0 : i) * C + (over_cols ? 0 : j)] / denom;
                     tp.accumulate(aid, ga);
                   });
}

}  // namespace

Var sum_all(Var a) { return reduce_op(a, "sum_all", true, true, false); }
Var mean_all(Var a) { return reduce_op(a, "mean_all", true, true, true); }
Var row_sum(Var a) { return reduce_op(a, "row_sum", false, true, false); }
Var row_mean(Var a) { return reduce_op(a, "row_mean", false, true, true); }
Var col_sum(Var a) { return reduce_op(a, "col_sum", true, false, false); }
Var col_mean(Var a) { return reduce_op(a, "col_mean", true, false, true); }

Var lse_row(Var a) {
  Tape& t = tape_of(a, "lse_row");
  const Tensor av = t.value(a);
  if (av.cols() == 0) throw ConfigError("lse_row: tensor has no columns");
  Tensor out(av.rows(), 1);
  for (std::size_t i = 0; i < av.rows(); ++i) {
    Scalar m = av(i, 0);
    for (std::size_t j = 1; j < av.cols(); ++j) m = std::max(m, av(i, j));
    Scalar s = 0;
    for (std::size_t j = 0; j < av.cols(); ++j) s += std::exp(av(i, j) - m);
    out.at(i, 0) = m + std::log(s);
  }
  Tensor ov = out;
  int aid = a.id;
  return t.emplace(std::move(out), {aid}, [av, ov, aid](Tape& tp, const Tensor& g) {
    Tensor ga(av.rows(), av.cols());
    for (std::size_t i = 0; i < av.rows(); ++i)
      for (std::size_t j = 0; j < av.cols(); ++j)
        ga.at(i, j) = g(i, 0) * std::exp(av(i, j) - ov(i, 0));
    tp.accumulate(aid, ga);
  });
}

Var log_softmax(Var a) {
  Tape& t = tape_of(a, "log_softmax");
  const Tensor av = t.value(a);
  Tensor out = log_softmax_plain(av);
  Tensor ov = out;
  int aid = a.id;
  return t.emplace(std::move(out), {aid}, [ov, aid](Tape& tp, const Tensor& g) {
    // dx = g - softmax(x) * rowsum(g)
    Tensor ga(ov.rows(), ov.cols());
    for (std::size_t i = 0; i < ov.rows(); ++i) {
      Scalar rs = 0;
      for (std::size_t j = 0; j < ov.cols(); ++j) rs += g(i, j);
      for (std::size_t j = 0; j < ov.cols(); ++j)
        ga.at(i, j) = g(i, j) - std::exp(ov(i, j)) * rs;
    }
    tp.accumulate(aid, ga);
  });
}

// ------------------------------------------------------------ index / shape

Var gather_rows(Var table, const std::vector<int>& idx) {
  Tape& t = tape_of(table, "gather_rows");
  const Tensor tv = t.value(table);
  Tensor out(idx.size(), tv.cols());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (idx[k] < 0 || static_cast<std::size_t>(idx[k]) >= tv.rows())
      throw UsageError("gather_rows: index " + std::to_string(idx[k]) +
                       " out of range for table with " + std::to_string(tv.rows()) + " rows");
    for (std::size_t j = 0; j < tv.cols(); ++j) out.at(k, j) = tv(static_cast<std::size_t>(idx[k]), j);
  }
  int tid = table.id;
  const std::size_t tr = tv.rows(), tc = tv.cols();
  std::vector<int> ix = idx;
  return t.emplace(std::move(out), {tid}, [tid, tr, tc, ix](Tape& tp, const Tensor& g) {
    Tensor gt(tr, tc);
    for (std::size_t k = 0; k < ix.size(); ++k)
      for (std::size_t j = 0; j < tc; ++j)
        gt.at(static_cast<std::size_t>(ix[k]), j) += g(k, j);
    tp.accumulate(tid, gt);
  });
}

Var pick(Var a, const std::vector<int>& idx) {
  Tape& t = tape_of(a, "pick");
  const Tensor av = t.value(a);
  if (idx.size() != av.rows())
    throw UsageError("pick: got " + std::to_string(idx.size()) + " indices for " +
                     std::to_string(av.rows()) + " rows");
  Tensor out(av.rows(), 1);
  for (std::size_t i = 0; i < av.rows(); ++i) {
    if (idx[i] < 0 || static_cast<std::size_t>(idx[i]) >= av.cols())
      throw UsageError("pick: column " + std::to_string(idx[i]) + " out of range for " +
                       av.shape_str());
    out.at(i, 0) = av(i, static_cast<std::size_t>(idx[i]));
  }
  int aid = a.id;
  const std::size_t ar = av.rows(), ac = av.cols();
  std::vector<int> ix = idx;
  return t.emplace(std::move(out), {aid}, [aid, ar, ac, ix](Tape& tp, const Tensor& g) {
    Tensor ga(ar, ac);
    for (std::size_t i = 0; i < ar; ++i) ga.at(i, static_cast<std::size_t>(ix[i])) = g(i, 0);
    tp.accumulate(aid, ga);
  });
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw UsageError("concat_cols: no parts");
  Tape& t = tape_of(parts[0], "concat_cols");
  std::size_t R = t.value(parts[0]).rows();
  std::size_t C = 0;
  std::vector<int> pids;
  std::vector<std::size_t> widths;
  for (Var p : parts) {
    check_same_tape(parts[0], p, "concat_cols");
    const Tensor& pv = t.value(p);
    if (pv.rows() != R)
      throw ConfigError("concat_cols: row extents disagree, " +
                        shape_pair_str(t.value(parts[0]), pv));
    widths.push_back(pv.cols());
    C += pv.cols();
    pids.push_back(p.id);
  }
  Tensor out(R, C);
  std::size_t off = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor& pv = t.value(parts[k]);
    for (std::size_t i = 0; i < R; ++i)
      for (std::size_t j = 0; j < pv.cols(); ++j) out.at(i, off + j) = pv(i, j);
    off += pv.cols();
  }
  return t.emplace(std::move(out), pids, [pids, widths, R](Tape& tp, const Tensor& g) {
    std::size_t o = 0;
    for (std::size_t k = 0; k < pids.size(); ++k) {
      Tensor gp(R, widths[k]);
      for (std::size_t i = 0; i < R; ++i)
        for (std::size_t j = 0; j < widths[k]; ++j) gp.at(i, j) = g(i, o + j);
      tp.accumulate(pids[k], gp);
      o += widths[k];
    }
  });
}

Var slice_cols(Var a, std::size_t c0, std::size_t c1) {
  Tape& t = tape_of(a, "slice_cols");
  const Tensor av = t.value(a);
  if (c0 >= c1 || c1 > av.cols())
    throw UsageError("slice_cols: range [" + std::to_string(c0) + ", " + std::to_string(c1) +
                     ") invalid for " + av.shape_str());
  Tensor out(av.rows(), c1 - c0);
  for (std::size_t i = 0; i < av.rows(); ++i)
    for (std::size_t j = c0; j < c1; ++j) out.at(i, j - c0) = av(i, j);
  int aid = a.id;
  const std::size_t ar = av.rows(), ac = av.cols();
  return t.emplace(std::move(out), {aid}, [aid, ar, ac, c0, c1](Tape& tp, const Tensor& g) {
    Tensor ga(ar, ac);
    for (std::size_t i = 0; i < ar; ++i)
      for (std::size_t j = c0; j < c1; ++j) ga.at(i, j) = g(i, j - c0);
    tp.accumulate(aid, ga);
  });
}

Var permute_cols(Var a, const std::vector<int>& perm) {
  Tape& t = tape_of(a, "permute_cols");
  const Tensor av = t.value(a);
  if (perm.size() != av.cols())
    throw ConfigError("permute_cols: permutation length " + std::to_string(perm.size()) +
                      " does not match " + av.shape_str());
  std::vector<bool> seen(perm.size(), false);
  for (int p : perm) {
    if (p < 0 || static_cast<std::size_t>(p) >= perm.size() || seen[static_cast<std::size_t>(p)])
      throw ConfigError("permute_cols: not a permutation");
    seen[static_cast<std::size_t>(p)] = true;
  }
  Tensor out(av.rows(), av.cols());
  for (std::size_t i = 0; i < av.rows(); ++i)
    for (std::size_t j = 0; j < av.cols(); ++j)
      out.at(i, j) = av(i, static_cast<std::size_t>(perm[j]));
  int aid = a.id;
  const std::size_t ar = av.rows(), ac = av.cols();
  std::vector<int> pm = perm;
  return t.emplace(std::move(out), {aid}, [aid, ar, ac, pm](Tape& tp, const Tensor& g) {
    Tensor ga(ar, ac);
    for (std::size_t i = 0; i < ar; ++i)
      for (std::size_t j = 0; j < ac; ++j) ga.at(i, static_cast<std::size_t>(pm[j])) = g(i, j);
    tp.accumulate(aid, ga);
  });
}

Var detach(Var a) {
  Tape& t = tape_of(a, "detach");
  return t.constant(t.value(a));
}

Var dropout(Var a, double rate, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0)
    throw ConfigError("dropout: rate must be in [0,1), got " + std::to_string(rate));
  if (rate == 0.0) return a;
  Tape& t = tape_of(a, "dropout");
  const Tensor& av = t.value(a);
  Tensor mask(av.rows(), av.cols());
  const Scalar keep = Scalar(1) - static_cast<Scalar>(rate);
  Scalar* pm = mask.mutable_data();
  for (std::size_t i = 0; i < mask.size(); ++i)
    pm[i] = rng.bernoulli(1.0 - rate) ? Scalar(1) / keep : Scalar(0);
  return mul(a, t.constant(std::move(mask)));
}

// ---------------------------------------------------------- plain variants

Tensor log_softmax_plain(const Tensor& a) {
  Tensor out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    Scalar m = a(i, 0);
    for (std::size_t j = 1; j < a.cols(); ++j) m = std::max(m, a(i, j));
    Scalar s = 0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += std::exp(a(i, j) - m);
    const Scalar lse = m + std::log(s);
    for (std::size_t j = 0; j < a.cols(); ++j) out.at(i, j) = a(i, j) - lse;
  }
  return out;
}

Tensor softmax_rows_plain(const Tensor& a) {
  Tensor out = log_softmax_plain(a);
  Scalar* p = out.mutable_data();
  for (std::size_t i = 0; i < out.size(); ++i) p[i] = std::exp(p[i]);
  return out;
}

}  // namespace ecrt
