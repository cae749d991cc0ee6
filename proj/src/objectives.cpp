#include "ecrt/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace ecrt {

std::vector<double> importance_weights(const std::vector<long>& class_counts) {
  if (class_counts.empty()) throw ConfigError("importance_weights: no classes");
  long n = 0;
  for (long c : class_counts) {
    if (c < 0) throw ConfigError("importance_weights: negative class count");
    n += c;
  }
  if (n == 0) throw ConfigError("importance_weights: empty dataset");
  const double m = static_cast<double>(class_counts.size());
  std::vector<double> w(class_counts.size(), 0.0);
  for (std::size_t i = 0; i < class_counts.size(); ++i)
    if (class_counts[i] > 0)
      w[i] = static_cast<double>(n) / (m * static_cast<double>(class_counts[i]));
  return w;
}

namespace {

Tensor weight_column(const std::vector<int>& labels, const std::vector<double>& w) {
  Tensor col(labels.size(), 1);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= w.size())
      throw UsageError("cross_entropy: unknown label id " + std::to_string(labels[i]));
    col.at(i, 0) = static_cast<Scalar>(w[static_cast<std::size_t>(labels[i])]);
  }
  return col;
}

}  // namespace

Var cross_entropy(Var logits, const std::vector<int>& labels,
                  const std::vector<double>* class_weights) {
  const Tensor& lv = logits.tape->value(logits);
  if (labels.size() != lv.rows())
    throw UsageError("cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(lv.rows()) + " rows");
  if (lv.rows() == 0) throw UsageError("cross_entropy: empty batch");
  Var picked = pick(log_softmax(logits), labels);
  if (!class_weights) return neg(mean_all(picked));
  Var w = logits.tape->constant(weight_column(labels, *class_weights));
  return neg(mean_all(mul(w, picked)));
}

double cross_entropy_plain(const Tensor& logits, const std::vector<int>& labels,
                           const std::vector<double>* class_weights) {
  if (labels.size() != logits.rows())
    throw UsageError("cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(logits.rows()) + " rows");
  if (logits.rows() == 0) throw UsageError("cross_entropy: empty batch");
  Tensor lsm = log_softmax_plain(logits);
  double acc = 0;
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= logits.cols())
      throw UsageError("cross_entropy: unknown label id " + std::to_string(labels[i]));
    double term = -static_cast<double>(lsm(i, static_cast<std::size_t>(labels[i])));
    if (class_weights) term *= (*class_weights)[static_cast<std::size_t>(labels[i])];
    acc += term;
  }
  return acc / static_cast<double>(logits.rows());
}

PairPlan PairPlan::derangement(std::size_t n, Rng& rng) {
  if (n < 2) throw UsageError("PairPlan: contrastive pairing needs a batch of at least 2");
  PairPlan plan;
  for (;;) {
    auto p = rng.permutation(n);
    bool ok = true;
    for (std::size_t i = 0; i < n; ++i)
      if (p[i] == i) {
        ok = false;
        break;
      }
    if (!ok) continue;
    plan.partner.assign(p.begin(), p.end());
    return plan;
  }
}

Var gcl_pair_loss(Lift& lift, GclCritic& critic, Var s, const std::vector<int>& labels,
                  const PairPlan& plan) {
  const std::size_t r = lift.tape().value(s).rows();
  if (r < 2) throw UsageError("gcl_pair_loss: batch of at least 2 required");
  if (plan.partner.size() != r)
    throw UsageError("gcl_pair_loss: pairing size " + std::to_string(plan.partner.size()) +
                     " does not match batch " + std::to_string(r));
  std::vector<int> shuffled(r);
  for (std::size_t i = 0; i < r; ++i) {
    const int p = plan.partner[i];
    if (p < 0 || static_cast<std::size_t>(p) >= r || static_cast<std::size_t>(p) == i)
      throw UsageError("gcl_pair_loss: pairing is not fixed-point free");
    shuffled[i] = labels[static_cast<std::size_t>(p)];
  }
  Var r_pos = critic.score(lift, labels, s);
  Var r_neg = critic.score(lift, shuffled, s);
  return add(mean_all(softplus(neg(r_pos))), mean_all(softplus(r_neg)));
}

FdvLoss fdv_loss(Lift& lift, FdvCritic& critic, Var s, const std::vector<int>& labels) {
  Tape& tape = lift.tape();
  const std::size_t r = tape.value(s).rows();
  if (r < 2) throw UsageError("fdv_loss: batch of at least 2 required");
  if (labels.size() != r)
    throw UsageError("fdv_loss: " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(r) + " rows");

  // Unique candidate labels with multiplicities; weighting by count makes
  // the column-weighted logsumexp identical to one over the whole batch.
  std::map<int, long> counts;
  for (int y : labels) ++counts[y];
  std::vector<int> uniq;
  Tensor logw(1, counts.size());
  std::size_t u = 0;
  for (const auto& [y, c] : counts) {
    uniq.push_back(y);
    logw.at(0, u++) = static_cast<Scalar>(std::log(static_cast<double>(c)));
  }
  if (uniq.size() == 1)
    diag::warn("fdv-degenerate-negatives", "batch has a single unique label");
  std::vector<int> col_of(r);
  for (std::size_t i = 0; i < r; ++i)
    col_of[i] = static_cast<int>(std::lower_bound(uniq.begin(), uniq.end(), labels[i]) -
                                 uniq.begin());

  Var scores = critic.score_matrix(lift, uniq, s);
  Var pos = pick(scores, col_of);
  Var frozen = detach(scores);
  Var frozen_pos = pick(frozen, col_of);
  Var lw = lift.constant(logw);

  const Scalar log_k = static_cast<Scalar>(std::log(static_cast<double>(r)));
  Var dv = sub(pos, add_scalar(lse_row(add(frozen, lw)), -log_k));
  Var live_centered = lse_row(add(sub(scores, pos), lw));
  Var frozen_centered = lse_row(add(sub(frozen, frozen_pos), lw));
  Var ratio = exp_op(sub(live_centered, frozen_centered));
  Var bound = add_scalar(sub(dv, ratio), Scalar(1));

  FdvLoss out;
  out.loss = neg(mean_all(bound));
  out.estimate = -static_cast<double>(tape.value(out.loss).item());
  out.unique_labels = uniq.size();
  return out;
}

Var flow_nll(Lift& lift, Var s, Var logdet, SourcePrior& prior, const std::vector<int>* labels) {
  Var ll = add(logdet, prior.log_density(lift, s, labels));
  return neg(mean_all(ll));
}

ContrastiveObjective objective_from_string(const std::string& s) {
  if (s == "gcl") return ContrastiveObjective::gcl;
  if (s == "fdv") return ContrastiveObjective::fdv;
  throw ConfigError("unknown contrastive objective '" + s + "'");
}

std::string to_string(ContrastiveObjective o) {
  return o == ContrastiveObjective::gcl ? "gcl" : "fdv";
}

DemixLoss demixing_loss(Lift& lift, MafFlow& flow, SourcePrior& prior, GclCritic* gcl,
                        FdvCritic* fdv, ContrastiveObjective objective, double rho, Var z,
                        const std::vector<int>& labels, Rng& pair_rng) {
  if (rho < 0) throw ConfigError("demixing_loss: rho must be non-negative");
  auto [s, logdet] = flow.forward(lift, z);
  DemixLoss out;
  out.sources = s;
  Var contrastive;
  if (objective == ContrastiveObjective::gcl) {
    if (!gcl) throw UsageError("demixing_loss: gcl objective without a gcl critic");
    PairPlan plan = PairPlan::derangement(labels.size(), pair_rng);
    contrastive = gcl_pair_loss(lift, *gcl, s, labels, plan);
    out.fdv_estimate = std::numeric_limits<double>::quiet_NaN();
  } else {
    if (!fdv) throw UsageError("demixing_loss: fdv objective without an fdv critic");
    FdvLoss f = fdv_loss(lift, *fdv, s, labels);
    contrastive = f.loss;
    out.fdv_estimate = f.estimate;
  }
  out.contrastive_value = static_cast<double>(lift.tape().value(contrastive).item());
  if (rho == 0) {
    out.total = contrastive;
    out.nll_value = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  Var nll = flow_nll(lift, s, logdet, prior, &labels);
  out.nll_value = static_cast<double>(lift.tape().value(nll).item());
  out.total = add(contrastive, mul_scalar(nll, static_cast<Scalar>(rho)));
  return out;
}

Var augmented_refinement_loss(Var base_ce, const std::optional<Var>& aug_ce,
                              const std::optional<Var>& minority_ce, double lambda) {
  if (lambda < 0.0 || lambda > 1.0)
    throw ConfigError("augmented_refinement_loss: lambda must lie in [0, 1], got " +
                      std::to_string(lambda));
  if (lambda == 0.0) return base_ce;
  if (!aug_ce || !minority_ce)
    throw UsageError(
        "augmented_refinement_loss: lambda > 0 needs synthetic and real minority batches");
  return add(base_ce, mul_scalar(sub(*aug_ce, *minority_ce), static_cast<Scalar>(lambda)));
}

}  // namespace ecrt
