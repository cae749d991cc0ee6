#include "ecrt/optim.hpp"

#include <cmath>

namespace ecrt {

void Adam::step(Tape& tape, Lift& lift) {
  for (Param* p : lift.lifted()) {
    Tensor g = tape.grad(lift.var_of(*p));
    step_one(*p, g);
  }
}

void Adam::step_one(Param& p, const Tensor& grad) {
  if (!p.value.same_shape(grad))
    throw UsageError("Adam: gradient shape " + grad.shape_str() + " does not match parameter '" +
                     p.name + "' " + p.value.shape_str());
  Slot& s = slots_[&p];
  if (s.t == 0) {
    s.m = Tensor::zeros(p.value.rows(), p.value.cols());
    s.v = Tensor::zeros(p.value.rows(), p.value.cols());
  }
  s.t += 1;
  const Scalar b1 = static_cast<Scalar>(cfg_.beta1);
  const Scalar b2 = static_cast<Scalar>(cfg_.beta2);
  const Scalar c1 = Scalar(1) - static_cast<Scalar>(std::pow(cfg_.beta1, s.t));
  const Scalar c2 = Scalar(1) - static_cast<Scalar>(std::pow(cfg_.beta2, s.t));
  Scalar* pm = s.m.mutable_data();
  Scalar* pv = s.v.mutable_data();
  Scalar* pw = p.value.mutable_data();
  const Scalar* pg = grad.data();
  for (std::size_t i = 0; i < p.value.size(); ++i) {
    pm[i] = b1 * pm[i] + (Scalar(1) - b1) * pg[i];
    pv[i] = b2 * pv[i] + (Scalar(1) - b2) * pg[i] * pg[i];
    const Scalar mhat = pm[i] / c1;
    const Scalar vhat = pv[i] / c2;
    pw[i] -= static_cast<Scalar>(cfg_.lr) * mhat /
             (std::sqrt(vhat) + static_cast<Scalar>(cfg_.eps));
  }
}

std::map<std::string, Adam::Slot> Adam::export_state() const {
  std::map<std::string, Slot> out;
  for (const auto& [p, slot] : slots_) {
    if (out.count(p->name))
      throw IntegrityError("Adam: duplicate parameter name '" + p->name + "' in state export");
    out[p->name] = Slot{slot.m.clone(), slot.v.clone(), slot.t};
  }
  return out;
}

void Adam::import_state(const std::map<std::string, Slot>& state,
                        const std::vector<Param*>& params) {
  std::unordered_map<std::string, Param*> byname;
  for (Param* p : params) byname[p->name] = p;
  slots_.clear();
  for (const auto& [name, slot] : state) {
    auto it = byname.find(name);
    if (it == byname.end())
      throw IntegrityError("Adam: optimizer state refers to unknown parameter '" + name + "'");
    Param* p = it->second;
    if (!p->value.same_shape(slot.m))
      throw IntegrityError("Adam: state shape " + slot.m.shape_str() + " does not match '" + name +
                           "' " + p->value.shape_str());
    slots_[p] = Slot{slot.m.clone(), slot.v.clone(), slot.t};
  }
}

}  // namespace ecrt
