#include "ecrt/flow.hpp"

#include <cmath>

namespace ecrt {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kLogScaleCap = 7.0;  // |log a| <= 7 keeps a in [e^-7, e^7]

Scalar clamp_logscale(Scalar raw) {
  return static_cast<Scalar>(kLogScaleCap * std::tanh(raw / kLogScaleCap));
}

std::vector<int> identity_perm(std::size_t d) {
  std::vector<int> p(d);
  for (std::size_t i = 0; i < d; ++i) p[i] = static_cast<int>(i);
  return p;
}

std::vector<int> reverse_perm(std::size_t d) {
  std::vector<int> p(d);
  for (std::size_t i = 0; i < d; ++i) p[i] = static_cast<int>(d - 1 - i);
  return p;
}

}  // namespace

void require_finite_rows(const Tensor& x, const char* where) {
  std::vector<std::size_t> bad;
  for (std::size_t i = 0; i < x.rows() && bad.size() < 9; ++i)
    for (std::size_t j = 0; j < x.cols(); ++j)
      if (!std::isfinite(x(i, j))) {
        bad.push_back(i);
        break;
      }
  if (bad.empty()) return;
  std::string rows;
  for (std::size_t k = 0; k < bad.size() && k < 8; ++k)
    rows += (k ? ", " : "") + std::to_string(bad[k]);
  if (bad.size() > 8) rows += ", ...";
  throw UsageError(std::string(where) + ": non-finite input at row(s) " + rows);
}

// ----------------------------------------------------------------- MafBlock

MafBlock::MafBlock(std::string name, std::size_t dim, std::size_t hidden, std::size_t n_hidden,
                   std::vector<int> perm, Rng& init)
    : name_(name), made_(name + ".made", dim, hidden, n_hidden, init), perm_(std::move(perm)) {
  if (perm_.size() != dim) throw ConfigError("MafBlock '" + name_ + "': bad permutation length");
  std::vector<bool> seen(dim, false);
  for (int p : perm_) {
    if (p < 0 || static_cast<std::size_t>(p) >= dim || seen[static_cast<std::size_t>(p)])
      throw ConfigError("MafBlock '" + name_ + "': not a permutation");
    seen[static_cast<std::size_t>(p)] = true;
  }
  inv_perm_.resize(dim);
  for (std::size_t j = 0; j < dim; ++j) inv_perm_[static_cast<std::size_t>(perm_[j])] = static_cast<int>(j);
}

std::pair<Var, Var> MafBlock::forward(Lift& lift, Var x) {
  Var xp = permute_cols(x, perm_);
  auto [shift, raw] = made_.forward(lift, xp);
  Var loga = mul_scalar(tanh_op(mul_scalar(raw, Scalar(1.0 / kLogScaleCap))),
                        Scalar(kLogScaleCap));
  Var y = add(mul(exp_op(loga), xp), shift);
  return {y, row_sum(loga)};
}

std::pair<Tensor, Tensor> MafBlock::forward_plain(const Tensor& x) const {
  const std::size_t d = made_.dim();
  Tensor xp(x.rows(), d);
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < d; ++j) xp.at(i, j) = x(i, static_cast<std::size_t>(perm_[j]));
  auto [shift, raw] = made_.forward_plain(xp);
  Tensor y(x.rows(), d), ld(x.rows(), 1);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    Scalar acc = 0;
    for (std::size_t j = 0; j < d; ++j) {
      const Scalar la = clamp_logscale(raw(i, j));
      y.at(i, j) = std::exp(la) * xp(i, j) + shift(i, j);
      acc += la;
    }
    ld.at(i, 0) = acc;
  }
  return {y, ld};
}

Tensor MafBlock::inverse(const Tensor& y) const {
  const std::size_t d = made_.dim();
  if (y.cols() != d)
    throw UsageError("MafBlock '" + name_ + "': inverse input has " + std::to_string(y.cols()) +
                     " columns, expected " + std::to_string(d));
  Tensor xp(y.rows(), d);
  for (std::size_t k = 0; k < d; ++k) {
    auto [shift, raw] = made_.forward_plain(xp);
    for (std::size_t i = 0; i < y.rows(); ++i) {
      const Scalar a = std::exp(clamp_logscale(raw(i, k)));
      const Scalar v = (y(i, k) - shift(i, k)) / a;
      if (!std::isfinite(v))
        throw NumericError("MafBlock '" + name_ + "': inverse diverged at coordinate " +
                           std::to_string(k) + ", row " + std::to_string(i));
      xp.at(i, k) = v;
    }
  }
  Tensor x(y.rows(), d);
  for (std::size_t i = 0; i < y.rows(); ++i)
    for (std::size_t j = 0; j < d; ++j) x.at(i, static_cast<std::size_t>(perm_[j])) = xp(i, j);
  return x;
}

std::vector<Param*> MafBlock::params() { return made_.params(); }

// ------------------------------------------------------------------ MafFlow

MafFlow::MafFlow(std::string name, const MafFlowConfig& cfg, Rng& init) : cfg_(cfg) {
  if (cfg_.dim == 0 || cfg_.n_blocks == 0)
    throw ConfigError("MafFlow '" + name + "': dim and block count must be positive");
  for (std::size_t t = 0; t < cfg_.n_blocks; ++t) {
    std::vector<int> perm = t == 0 ? identity_perm(cfg_.dim) : reverse_perm(cfg_.dim);
    blocks_.emplace_back(name + ".b" + std::to_string(t), cfg_.dim, cfg_.hidden, cfg_.n_hidden,
                         std::move(perm), init);
  }
}

std::pair<Var, Var> MafFlow::forward(Lift& lift, Var z) {
  const Tensor& zv = lift.tape().value(z);
  if (zv.cols() != cfg_.dim)
    throw ConfigError("MafFlow::forward: input has " + std::to_string(zv.cols()) +
                      " columns, expected " + std::to_string(cfg_.dim));
  require_finite_rows(zv, "MafFlow::forward");
  Var h = z, logdet;
  for (std::size_t t = 0; t < blocks_.size(); ++t) {
    auto [y, ld] = blocks_[t].forward(lift, h);
    h = y;
    logdet = t == 0 ? ld : add(logdet, ld);
  }
  return {h, logdet};
}

std::pair<Tensor, Tensor> MafFlow::forward_plain(const Tensor& z) const {
  if (z.cols() != cfg_.dim)
    throw ConfigError("MafFlow::forward: input has " + std::to_string(z.cols()) +
                      " columns, expected " + std::to_string(cfg_.dim));
  require_finite_rows(z, "MafFlow::forward");
  Tensor h = z;
  Tensor logdet(z.rows(), 1);
  for (const auto& b : blocks_) {
    auto [y, ld] = b.forward_plain(h);
    h = y;
    for (std::size_t i = 0; i < logdet.rows(); ++i) logdet.at(i, 0) += ld(i, 0);
  }
  return {h, logdet};
}

Tensor MafFlow::inverse(const Tensor& s) const {
  require_finite_rows(s, "MafFlow::inverse");
  Tensor h = s;
  for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it) h = it->inverse(h);
  return h;
}

std::vector<Param*> MafFlow::params() {
  std::vector<Param*> out;
  for (auto& b : blocks_)
    for (Param* p : b.params()) out.push_back(p);
  return out;
}

// -------------------------------------------------------------- SourcePrior

PriorMode prior_mode_from_string(const std::string& s) {
  if (s == "shared" || s == "shared_standard") return PriorMode::shared_standard;
  if (s == "per_class" || s == "per-class") return PriorMode::per_class;
  throw ConfigError("unknown prior mode '" + s + "'");
}

std::string to_string(PriorMode m) {
  return m == PriorMode::shared_standard ? "shared" : "per_class";
}

SourcePrior::SourcePrior(std::string name, PriorMode mode, std::size_t n_classes, std::size_t dim)
    : mode_(mode), classes_(n_classes), dim_(dim) {
  if (dim_ == 0) throw ConfigError("SourcePrior: zero dimension");
  if (mode_ == PriorMode::per_class) {
    if (classes_ == 0) throw ConfigError("SourcePrior: per-class prior needs a class count");
    mu_ = Param{name + ".mu", Tensor::zeros(classes_, dim_)};
    logvar_ = Param{name + ".logvar", Tensor::zeros(classes_, dim_)};
  }
}

Var SourcePrior::log_density(Lift& lift, Var s, const std::vector<int>* labels) {
  const Tensor& sv = lift.tape().value(s);
  if (sv.cols() != dim_)
    throw ConfigError("SourcePrior::log_density: input has " + std::to_string(sv.cols()) +
                      " columns, expected " + std::to_string(dim_));
  const Scalar base = static_cast<Scalar>(-0.5 * kLog2Pi * static_cast<double>(dim_));
  if (mode_ == PriorMode::shared_standard) {
    Var q = row_sum(square(s));
    return add_scalar(mul_scalar(q, Scalar(-0.5)), base);
  }
  if (!labels) throw UsageError("SourcePrior::log_density: per-class prior needs labels");
  check_labels(*labels, classes_, "SourcePrior::log_density");
  if (labels->size() != sv.rows())
    throw UsageError("SourcePrior::log_density: " + std::to_string(labels->size()) +
                     " labels for " + std::to_string(sv.rows()) + " rows");
  Var mu_k = gather_rows(lift(mu_), *labels);
  Var lv_k = gather_rows(lift(logvar_), *labels);
  Var q = divide(square(sub(s, mu_k)), exp_op(lv_k));
  Var inner = row_sum(add(q, lv_k));
  return add_scalar(mul_scalar(inner, Scalar(-0.5)), base);
}

Tensor SourcePrior::log_density_plain(const Tensor& s, const std::vector<int>* labels) const {
  if (s.cols() != dim_)
    throw ConfigError("SourcePrior::log_density: input has " + std::to_string(s.cols()) +
                      " columns, expected " + std::to_string(dim_));
  const Scalar base = static_cast<Scalar>(-0.5 * kLog2Pi * static_cast<double>(dim_));
  Tensor out(s.rows(), 1);
  if (mode_ == PriorMode::shared_standard) {
    for (std::size_t i = 0; i < s.rows(); ++i) {
      Scalar q = 0;
      for (std::size_t j = 0; j < dim_; ++j) q += s(i, j) * s(i, j);
      out.at(i, 0) = Scalar(-0.5) * q + base;
    }
    return out;
  }
  if (!labels) throw UsageError("SourcePrior::log_density: per-class prior needs labels");
  check_labels(*labels, classes_, "SourcePrior::log_density");
  if (labels->size() != s.rows())
    throw UsageError("SourcePrior::log_density: " + std::to_string(labels->size()) +
                     " labels for " + std::to_string(s.rows()) + " rows");
  for (std::size_t i = 0; i < s.rows(); ++i) {
    const auto y = static_cast<std::size_t>((*labels)[i]);
    Scalar acc = 0;
    for (std::size_t j = 0; j < dim_; ++j) {
      const Scalar lv = logvar_.value(y, j);
      const Scalar d = s(i, j) - mu_.value(y, j);
      acc += d * d / std::exp(lv) + lv;
    }
    out.at(i, 0) = Scalar(-0.5) * acc + base;
  }
  return out;
}

Tensor SourcePrior::sample(int cls, std::size_t count, Rng& rng) const {
  Tensor out(count, dim_);
  if (mode_ == PriorMode::shared_standard) {
    for (std::size_t i = 0; i < count; ++i)
      for (std::size_t j = 0; j < dim_; ++j) out.at(i, j) = static_cast<Scalar>(rng.normal());
    return out;
  }
  if (cls < 0 || static_cast<std::size_t>(cls) >= classes_)
    throw UsageError("SourcePrior::sample: unknown label id " + std::to_string(cls));
  const auto y = static_cast<std::size_t>(cls);
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t j = 0; j < dim_; ++j)
      out.at(i, j) = mu_.value(y, j) +
                     static_cast<Scalar>(rng.normal()) * std::exp(Scalar(0.5) * logvar_.value(y, j));
  return out;
}

std::vector<Param*> SourcePrior::params() {
  if (mode_ == PriorMode::shared_standard) return {};
  return {&mu_, &logvar_};
}

}  // namespace ecrt
