#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ecrt/optim.hpp"

namespace ecrt {

enum class Activation { identity, relu, tanh };

Activation activation_from_string(const std::string& s);
std::string to_string(Activation a);

struct MlpConfig {
  std::vector<std::size_t> widths;  // input, hidden..., output; at least {in, out}
  Activation hidden = Activation::relu;
  Activation output = Activation::identity;
  double dropout = 0.0;  // after each hidden activation, train mode only
};

// Fully connected net. Weights and biases start uniform in
// [-1/sqrt(fan_in), +1/sqrt(fan_in)].
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::string name, MlpConfig cfg, Rng& init);

  Var forward(Lift& lift, Var x, bool training = false, Rng* dropout_rng = nullptr);
  Tensor forward_plain(const Tensor& x) const;

  std::vector<Param*> params();
  std::size_t in_width() const { return cfg_.widths.front(); }
  std::size_t out_width() const { return cfg_.widths.back(); }
  const MlpConfig& config() const { return cfg_; }
  const std::string& name() const { return name_; }

 private:
  std::string name_;
  MlpConfig cfg_;
  std::vector<Param> ws_, bs_;
};

// Connectivity degrees for an autoregressive masked net over d coordinates:
// input j gets degree j+1; hidden units cycle degrees through
// [1, max(1, d-1)] (all 1 when d <= 2); an output for coordinate k only sees
// hidden units of strictly lower degree, so it depends on inputs 0..k-1 and
// the first coordinate's outputs are input-independent constants.
std::vector<int> made_hidden_degrees(std::size_t dim, std::size_t width);
Tensor made_input_mask(const std::vector<int>& in_deg, const std::vector<int>& out_deg);
Tensor made_output_mask(const std::vector<int>& hid_deg, std::size_t dim);

// Masked autoregressive conditioner: d inputs -> per-coordinate (shift,
// raw log-scale) pairs, each depending only on strictly earlier coordinates.
// The final layer starts at zero so the enclosing transform is the identity.
class MadeNet {
 public:
  MadeNet() = default;
  MadeNet(std::string name, std::size_t dim, std::size_t hidden, std::size_t n_hidden, Rng& init);

  // (shift rxd, raw log-scale rxd)
  std::pair<Var, Var> forward(Lift& lift, Var x);
  std::pair<Tensor, Tensor> forward_plain(const Tensor& x) const;

  std::vector<Param*> params();
  std::size_t dim() const { return dim_; }

 private:
  std::string name_;
  std::size_t dim_ = 0;
  std::vector<Param> ws_, bs_;
  std::vector<Tensor> masks_;
};

struct CriticConfig {
  std::size_t n_classes = 0;
  std::size_t dim = 0;           // source dimensionality
  std::size_t embed_width = 16;  // label embedding width
  std::size_t hidden = 64;
  std::size_t n_hidden = 2;
  // When true each per-coordinate part sees (label embedding, coordinate);
  // when false the parts see the coordinate alone, which makes batched
  // all-candidate scoring one forward pass instead of one per class.
  bool label_conditioned_parts = true;
};

// Logistic-pair critic: r(y, s) = sum_a gamma_a(embed(y), s_a), scalar
// output per row. Out-of-range label ids are usage errors.
class GclCritic {
 public:
  GclCritic() = default;
  GclCritic(std::string name, CriticConfig cfg, Rng& init);

  Var score(Lift& lift, const std::vector<int>& labels, Var s);
  std::vector<Param*> params();
  const CriticConfig& config() const { return cfg_; }

 private:
  CriticConfig cfg_;
  Param embed_;
  std::vector<Mlp> parts_;
};

// Energy critic: g(y, s) = cos(embed(y), sum_a gamma_a(...)) / tau with tau
// learnable (stored as the exponent of a free parameter, so always
// positive). Rows whose embedding or summary direction collapses below
// 1e-9 in norm score 0 and emit an "fdv-degenerate" diagnostic.
class FdvCritic {
 public:
  FdvCritic() = default;
  FdvCritic(std::string name, CriticConfig cfg, Rng& init);

  // rx1 scores for aligned (labels[i], s row i) pairs
  Var score(Lift& lift, const std::vector<int>& labels, Var s);
  // rxU matrix scoring every row against every candidate label
  Var score_matrix(Lift& lift, const std::vector<int>& candidate_labels, Var s);

  double tau() const;
  std::vector<Param*> params();
  const CriticConfig& config() const { return cfg_; }

 private:
  CriticConfig cfg_;
  Param embed_;
  std::vector<Mlp> parts_;
  Param log_tau_;

  Var summary(Lift& lift, Var s, Var embed_rows);  // r x embed_width
  Var cosine_score(Lift& lift, Var e, Var c);      // rx1, tau applied
};

void check_labels(const std::vector<int>& labels, std::size_t n_classes, const char* where);

}  // namespace ecrt
