#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ecrt/nets.hpp"

namespace ecrt {

// One autoregressive shift-scale block: after a fixed column permutation,
// y_k = a_k(x_{<k}) * x_k + b_k(x_{<k}) with log a clamped to [-7, 7] by a
// smooth squash. Its log|det J| is sum_k log a_k, accumulated per row. The
// inverse solves coordinates in order with one conditioner pass each, and is
// exact because coordinate k's (a, b) only read already-solved coordinates.
class MafBlock {
 public:
  MafBlock() = default;
  MafBlock(std::string name, std::size_t dim, std::size_t hidden, std::size_t n_hidden,
           std::vector<int> perm, Rng& init);

  // (y rxd, per-row log|det| rx1)
  std::pair<Var, Var> forward(Lift& lift, Var x);
  std::pair<Tensor, Tensor> forward_plain(const Tensor& x) const;
  Tensor inverse(const Tensor& y) const;

  std::vector<Param*> params();
  const std::vector<int>& perm() const { return perm_; }

 private:
  std::string name_;
  MadeNet made_;
  std::vector<int> perm_, inv_perm_;
};

struct MafFlowConfig {
  std::size_t dim = 2;
  std::size_t n_blocks = 4;
  std::size_t hidden = 128;
  std::size_t n_hidden = 2;
};

// Stack of MafBlocks; block 0 keeps coordinate order, later blocks reverse
// it. Starts at the identity map (zero-initialized conditioner outputs).
// Forward inputs must be finite; offending row indices are reported.
class MafFlow {
 public:
  MafFlow() = default;
  MafFlow(std::string name, const MafFlowConfig& cfg, Rng& init);

  std::pair<Var, Var> forward(Lift& lift, Var z);  // (s, logdet rx1)
  std::pair<Tensor, Tensor> forward_plain(const Tensor& z) const;
  Tensor inverse(const Tensor& s) const;

  std::vector<Param*> params();
  const MafFlowConfig& config() const { return cfg_; }

 private:
  MafFlowConfig cfg_;
  std::vector<MafBlock> blocks_;
};

enum class PriorMode { shared_standard, per_class };

PriorMode prior_mode_from_string(const std::string& s);
std::string to_string(PriorMode m);

// Source-space density: either a single standard normal shared by all
// classes, or one diagonal Gaussian per class with learnable mean and
// log-variance (initialized to zero mean, unit variance; variances stay
// positive by construction).
class SourcePrior {
 public:
  SourcePrior() = default;
  SourcePrior(std::string name, PriorMode mode, std::size_t n_classes, std::size_t dim);

  // rx1 log density. labels required (and checked) in per-class mode.
  Var log_density(Lift& lift, Var s, const std::vector<int>* labels);
  Tensor log_density_plain(const Tensor& s, const std::vector<int>* labels) const;
  Tensor sample(int cls, std::size_t count, Rng& rng) const;

  std::vector<Param*> params();
  PriorMode mode() const { return mode_; }
  std::size_t dim() const { return dim_; }

 private:
  PriorMode mode_ = PriorMode::shared_standard;
  std::size_t classes_ = 0, dim_ = 0;
  Param mu_, logvar_;
};

// Throws a usage error naming up to 8 offending rows when x has non-finite
// entries.
void require_finite_rows(const Tensor& x, const char* where);

}  // namespace ecrt
