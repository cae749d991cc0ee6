#pragma once

#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "ecrt/tape.hpp"

namespace ecrt {

// Named trainable tensor. Modules own their Params; optimizers and
// checkpoints reach them through pointers, so Params must stay put for the
// lifetime of the module (modules keep them in stable storage).
struct Param {
  std::string name;
  Tensor value;
};

// Per-step bridge between persistent Params and the current tape. Lifting a
// Param registers its tensor as a gradient leaf (or a constant in frozen
// mode) and memoizes, so a Param lifted twice in one step shares one node
// and its gradient accumulates.
class Lift {
 public:
  explicit Lift(Tape& tape, bool train = true) : tape_(&tape), train_(train) {}

  Var operator()(Param& p) {
    auto it = vars_.find(&p);
    if (it != vars_.end()) return it->second;
    Var v = tape_->leaf(p.value, train_);
    vars_.emplace(&p, v);
    order_.push_back(&p);
    return v;
  }

  Var constant(Tensor t) { return tape_->constant(std::move(t)); }

  Tape& tape() { return *tape_; }
  bool training() const { return train_; }
  const std::vector<Param*>& lifted() const { return order_; }

  Var var_of(const Param& p) const {
    auto it = vars_.find(&p);
    if (it == vars_.end()) throw UsageError("Lift: parameter '" + p.name + "' was never lifted");
    return it->second;
  }

 private:
  Tape* tape_;
  bool train_;
  std::vector<Param*> order_;
  std::unordered_map<const Param*, Var> vars_;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction. Moment slots are keyed by parameter identity;
// map iteration order never influences the update (steps walk the lift
// order). Updates mutate parameter tensors in place.
class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

  const AdamConfig& config() const { return cfg_; }

  // One update for every lifted parameter using gradients from `tape`
  // (backward must have run). Parameters the loss never touched get a zero
  // gradient and still advance their moments.
  void step(Tape& tape, Lift& lift);

  void step_one(Param& p, const Tensor& grad);

  struct Slot {
    Tensor m, v;
    long t = 0;
  };

  // Name-keyed state for checkpoints. Import matches by name against the
  // given parameter set; unknown names are an integrity error.
  std::map<std::string, Slot> export_state() const;
  void import_state(const std::map<std::string, Slot>& state, const std::vector<Param*>& params);

 private:
  AdamConfig cfg_;
  std::unordered_map<const Param*, Slot> slots_;
};

}  // namespace ecrt
