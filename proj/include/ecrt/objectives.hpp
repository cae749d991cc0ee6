#pragma once

#include <optional>
#include <vector>

#include "ecrt/flow.hpp"
#include "ecrt/nets.hpp"

namespace ecrt {

// Class reweighting w_m = n / (M * n_m); classes with no samples get 0.
std::vector<double> importance_weights(const std::vector<long>& class_counts);

// Mean negative log-softmax of the true class, optionally per-class
// weighted (mean of w_{y_i} * ce_i).
Var cross_entropy(Var logits, const std::vector<int>& labels,
                  const std::vector<double>* class_weights = nullptr);
double cross_entropy_plain(const Tensor& logits, const std::vector<int>& labels,
                           const std::vector<double>* class_weights = nullptr);

// Fixed-point-free in-batch pairing for the product-of-marginals term.
struct PairPlan {
  std::vector<int> partner;
  static PairPlan derangement(std::size_t n, Rng& rng);
};

// Logistic pair loss: mean softplus(-r(y_i, s_i)) + mean softplus(r(y_{p(i)}, s_i)).
// A critic that outputs 0 everywhere scores exactly 2*log(2).
Var gcl_pair_loss(Lift& lift, GclCritic& critic, Var s, const std::vector<int>& labels,
                  const PairPlan& plan);

// Energy-based mutual-information surrogate. Per row i with candidate set U
// (the batch's unique labels, weighted by multiplicity):
//   dv_i    = g(y_i, s_i) - logsumexp_u[ w_u * exp(ghat(u, s_i)) ]
//   ratio_i = sum_u w_u exp(g(u, s_i) - g(y_i, s_i))
//             / sum_u w_u exp(ghat(u, s_i) - ghat(y_i, s_i))
//   bound_i = dv_i - ratio_i + 1
// ghat is the critic with gradients blocked, refreshed every step, so
// ratio_i == 1 in value and the bound's value equals the dv estimate while
// the ratio keeps the variance-reducing gradient correction. Loss is
// -mean(bound). A batch with a single unique label still computes but emits
// a degenerate-negatives diagnostic.
struct FdvLoss {
  Var loss;
  double estimate = 0.0;           // current mutual-information lower bound
  std::size_t unique_labels = 0;
};
FdvLoss fdv_loss(Lift& lift, FdvCritic& critic, Var s, const std::vector<int>& labels);

// Mean over rows of -(log|det J| + log prior(s)).
Var flow_nll(Lift& lift, Var s, Var logdet, SourcePrior& prior, const std::vector<int>* labels);

enum class ContrastiveObjective { gcl, fdv };
ContrastiveObjective objective_from_string(const std::string& s);
std::string to_string(ContrastiveObjective o);

// contrastive(flow(z), y) + rho * flow_nll. With rho == 0 the likelihood
// term is never built and `total` is the contrastive node itself.
struct DemixLoss {
  Var total;
  Var sources;  // flow output, reusable by callers on the same tape
  double contrastive_value = 0.0;
  double nll_value = 0.0;  // NaN when rho == 0
  double fdv_estimate = 0.0;
};
DemixLoss demixing_loss(Lift& lift, MafFlow& flow, SourcePrior& prior, GclCritic* gcl,
                        FdvCritic* fdv, ContrastiveObjective objective, double rho, Var z,
                        const std::vector<int>& labels, Rng& pair_rng);

// base + lambda * (aug - real_minority). lambda in [0, 1]; lambda == 0
// returns `base` itself; lambda > 0 requires both extra terms.
Var augmented_refinement_loss(Var base_ce, const std::optional<Var>& aug_ce,
                              const std::optional<Var>& minority_ce, double lambda);

}  // namespace ecrt
