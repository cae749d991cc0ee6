#pragma once

#include <functional>
#include <vector>

#include "ecrt/tensor.hpp"

namespace ecrt {

class Tape;

// Handle to a node on a tape. Cheap to copy; invalid when tape is null.
struct Var {
  Tape* tape = nullptr;
  int id = -1;
  bool valid() const { return tape != nullptr && id >= 0; }
};

// Reverse-mode autodiff over a linear op tape. Nodes are appended in forward
// order, so reverse creation order is a valid reverse-topological order and
// backward() visits each node exactly once. Ops never mutate their inputs.
// One backward pass per tape; build a fresh tape per optimization step.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var leaf(Tensor value, bool requires_grad);
  Var constant(Tensor value) { return leaf(std::move(value), false); }

  const Tensor& value(Var v) const;
  bool requires_grad(Var v) const;
  std::size_t size() const { return nodes_.size(); }

  // Seeds d(loss)/d(loss) = 1 and propagates. loss must be 1x1 and on this
  // tape; calling twice on one tape is a usage error. Nodes outside the
  // loss's ancestry keep empty gradients.
  void backward(Var loss);

  // Gradient accumulated for v; zeros if v never received one. Call after
  // backward().
  Tensor grad(Var v) const;

  // --- internal, used by op implementations ---
  using BackFn = std::function<void(Tape&, const Tensor&)>;
  Var emplace(Tensor value, std::vector<int> parents, BackFn back);
  void accumulate(int id, const Tensor& g);

 private:
  struct Node {
    Tensor value;
    bool rg = false;
    std::vector<int> parents;
    BackFn back;
    Tensor grad;
  };
  std::vector<Node> nodes_;
  bool backward_done_ = false;
  const Node& node(Var v) const;
};

// ---- primitive ops (all free functions; result lives on the operands' tape)

// Elementwise binaries with row/column/scalar broadcasting: operands must
// have equal extents per axis or extent 1. Gradients are reduce-summed back
// to each operand's shape.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var divide(Var a, Var b);

Var matmul(Var a, Var b);

Var neg(Var a);
Var exp_op(Var a);
Var log_op(Var a);
Var tanh_op(Var a);
Var relu(Var a);
Var sigmoid(Var a);
// softplus(r) = log(1+e^r), computed as r for r > 30 and via log1p otherwise.
Var softplus(Var a);
Var sqrt_op(Var a);
Var square(Var a);
// max(a, lo) elementwise with a constant floor; gradient is 0 where clamped.
Var clamp_min(Var a, Scalar lo);

Var add_scalar(Var a, Scalar c);
Var mul_scalar(Var a, Scalar c);

Var sum_all(Var a);    // 1x1
Var mean_all(Var a);   // 1x1
Var row_sum(Var a);    // rx1
Var row_mean(Var a);   // rx1
Var col_sum(Var a);    // 1xc
Var col_mean(Var a);   // 1xc

// Row-wise log-sum-exp with max-shift stabilization. rxc -> rx1.
Var lse_row(Var a);
// Row-wise log-softmax (fused, stable). rxc -> rxc.
Var log_softmax(Var a);

// out[k, :] = table[idx[k], :]; gradient scatter-adds rows. Index bounds are
// checked (usage error).
Var gather_rows(Var table, const std::vector<int>& idx);
// out[i, 0] = a[i, idx[i]]; one column picked per row.
Var pick(Var a, const std::vector<int>& idx);
Var concat_cols(const std::vector<Var>& parts);
Var slice_cols(Var a, std::size_t c0, std::size_t c1);  // [c0, c1)
// out column j = a column perm[j]; perm must be a permutation of 0..c-1.
Var permute_cols(Var a, const std::vector<int>& perm);

// Value copied onto the tape as a gradient-blocking constant.
Var detach(Var a);
// Inverted-dropout with a fixed per-call mask; identity when rate == 0.
Var dropout(Var a, double rate, Rng& rng);

// Plain-tensor helpers shared with no-tape inference paths.
Tensor matmul_plain(const Tensor& a, const Tensor& b);
Tensor softmax_rows_plain(const Tensor& a);
Tensor log_softmax_plain(const Tensor& a);

}  // namespace ecrt
