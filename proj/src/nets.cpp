#include "ecrt/nets.hpp"

#include <cmath>

namespace ecrt {

Activation activation_from_string(const std::string& s) {
  if (s == "identity") return Activation::identity;
  if (s == "relu") return Activation::relu;
  if (s == "tanh") return Activation::tanh;
  throw ConfigError("unknown activation '" + s + "'");
}

std::string to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
  }
  return "?";
}

void check_labels(const std::vector<int>& labels, std::size_t n_classes, const char* where) {
  for (int y : labels)
    if (y < 0 || static_cast<std::size_t>(y) >= n_classes)
      throw UsageError(std::string(where) + ": unknown label id " + std::to_string(y) +
                       " (have " + std::to_string(n_classes) + " classes)");
}

namespace {

Var apply_activation(Var h, Activation a) {
  switch (a) {
    case Activation::identity: return h;
    case Activation::relu: return relu(h);
    case Activation::tanh: return tanh_op(h);
  }
  return h;
}

void apply_activation_plain(Tensor& h, Activation a) {
  if (a == Activation::identity) return;
  Scalar* p = h.mutable_data();
  for (std::size_t i = 0; i < h.size(); ++i)
    p[i] = a == Activation::relu ? (p[i] > 0 ? p[i] : Scalar(0)) : std::tanh(p[i]);
}

void add_row_in_place(Tensor& h, const Tensor& bias) {
  Scalar* p = h.mutable_data();
  const Scalar* pb = bias.data();
  for (std::size_t i = 0; i < h.rows(); ++i)
    for (std::size_t j = 0; j < h.cols(); ++j) p[i * h.cols() + j] += pb[j];
}

}  // namespace

// ------------------------------------------------------------------- Mlp

Mlp::Mlp(std::string name, MlpConfig cfg, Rng& init) : name_(std::move(name)), cfg_(std::move(cfg)) {
  if (cfg_.widths.size() < 2)
    throw ConfigError("Mlp '" + name_ + "': needs at least input and output widths");
  for (std::size_t w : cfg_.widths)
    if (w == 0) throw ConfigError("Mlp '" + name_ + "': zero layer width");
  for (std::size_t l = 0; l + 1 < cfg_.widths.size(); ++l) {
    const std::size_t fan_in = cfg_.widths[l];
    const Scalar bound = Scalar(1) / std::sqrt(static_cast<Scalar>(fan_in));
    ws_.push_back(Param{name_ + ".w" + std::to_string(l),
                        Tensor::uniform(fan_in, cfg_.widths[l + 1], -bound, bound, init)});
    bs_.push_back(Param{name_ + ".b" + std::to_string(l),
                        Tensor::uniform(1, cfg_.widths[l + 1], -bound, bound, init)});
  }
}

Var Mlp::forward(Lift& lift, Var x, bool training, Rng* dropout_rng) {
  const Tensor& xv = lift.tape().value(x);
  if (xv.cols() != in_width())
    throw ConfigError("Mlp '" + name_ + "': input has " + std::to_string(xv.cols()) +
                      " columns, expected " + std::to_string(in_width()));
  Var h = x;
  for (std::size_t l = 0; l < ws_.size(); ++l) {
    h = add(matmul(h, lift(ws_[l])), lift(bs_[l]));
    if (l + 1 < ws_.size()) {
      h = apply_activation(h, cfg_.hidden);
      if (training && cfg_.dropout > 0.0) {
        if (!dropout_rng) throw UsageError("Mlp '" + name_ + "': dropout needs an rng");
        h = dropout(h, cfg_.dropout, *dropout_rng);
      }
    } else {
      h = apply_activation(h, cfg_.output);
    }
  }
  return h;
}

Tensor Mlp::forward_plain(const Tensor& x) const {
  if (x.cols() != in_width())
    throw ConfigError("Mlp '" + name_ + "': input has " + std::to_string(x.cols()) +
                      " columns, expected " + std::to_string(in_width()));
  Tensor h = x;
  for (std::size_t l = 0; l < ws_.size(); ++l) {
    h = matmul_plain(h, ws_[l].value);
    add_row_in_place(h, bs_[l].value);
    apply_activation_plain(h, l + 1 < ws_.size() ? cfg_.hidden : cfg_.output);
  }
  return h;
}

std::vector<Param*> Mlp::params() {
  std::vector<Param*> out;
  for (std::size_t l = 0; l < ws_.size(); ++l) {
    out.push_back(&ws_[l]);
    out.push_back(&bs_[l]);
  }
  return out;
}

// ------------------------------------------------------------------- MADE

std::vector<int> made_hidden_degrees(std::size_t dim, std::size_t width) {
  const std::size_t m = dim <= 2 ? 1 : dim - 1;
  std::vector<int> deg(width);
  for (std::size_t i = 0; i < width; ++i) deg[i] = 1 + static_cast<int>(i % m);
  return deg;
}

Tensor made_input_mask(const std::vector<int>& in_deg, const std::vector<int>& out_deg) {
  Tensor mask(in_deg.size(), out_deg.size());
  for (std::size_t j = 0; j < in_deg.size(); ++j)
    for (std::size_t i = 0; i < out_deg.size(); ++i)
      mask.at(j, i) = in_deg[j] <= out_deg[i] ? Scalar(1) : Scalar(0);
  return mask;
}

Tensor made_output_mask(const std::vector<int>& hid_deg, std::size_t dim) {
  Tensor mask(hid_deg.size(), 2 * dim);
  for (std::size_t i = 0; i < hid_deg.size(); ++i)
    for (std::size_t k = 0; k < 2 * dim; ++k) {
      const int coord_deg = static_cast<int>(k % dim) + 1;
      mask.at(i, k) = hid_deg[i] < coord_deg ? Scalar(1) : Scalar(0);
    }
  return mask;
}

MadeNet::MadeNet(std::string name, std::size_t dim, std::size_t hidden, std::size_t n_hidden,
                 Rng& init)
    : name_(std::move(name)), dim_(dim) {
  if (dim == 0) throw ConfigError("MadeNet '" + name_ + "': zero dimension");
  if (hidden == 0 || n_hidden == 0)
    throw ConfigError("MadeNet '" + name_ + "': needs at least one hidden layer");
  std::vector<int> in_deg(dim);
  for (std::size_t j = 0; j < dim; ++j) in_deg[j] = static_cast<int>(j) + 1;
  std::vector<int> hid = made_hidden_degrees(dim, hidden);

  std::vector<std::size_t> widths;
  widths.push_back(dim);
  for (std::size_t l = 0; l < n_hidden; ++l) widths.push_back(hidden);
  widths.push_back(2 * dim);

  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const bool last = l + 2 == widths.size();
    Tensor mask;
    if (l == 0)
      mask = made_input_mask(in_deg, hid);
    else if (last)
      mask = made_output_mask(hid, dim);
    else
      mask = made_input_mask(hid, hid);
    masks_.push_back(mask);

    const Scalar bound = Scalar(1) / std::sqrt(static_cast<Scalar>(widths[l]));
    Tensor w = last ? Tensor::zeros(widths[l], widths[l + 1])
                    : Tensor::uniform(widths[l], widths[l + 1], -bound, bound, init);
    if (!last) {  // zero out masked connections in the stored weights too
      Scalar* pw = w.mutable_data();
      const Scalar* pm = mask.data();
      for (std::size_t i = 0; i < w.size(); ++i) pw[i] *= pm[i];
    }
    ws_.push_back(Param{name_ + ".w" + std::to_string(l), w});
    Tensor b = last ? Tensor::zeros(1, widths[l + 1])
                    : Tensor::uniform(1, widths[l + 1], -bound, bound, init);
    bs_.push_back(Param{name_ + ".b" + std::to_string(l), b});
  }
}

std::pair<Var, Var> MadeNet::forward(Lift& lift, Var x) {
  const Tensor& xv = lift.tape().value(x);
  if (xv.cols() != dim_)
    throw ConfigError("MadeNet '" + name_ + "': input has " + std::to_string(xv.cols()) +
                      " columns, expected " + std::to_string(dim_));
  Var h = x;
  for (std::size_t l = 0; l < ws_.size(); ++l) {
    Var w_eff = mul(lift(ws_[l]), lift.constant(masks_[l]));
    h = add(matmul(h, w_eff), lift(bs_[l]));
    if (l + 1 < ws_.size()) h = relu(h);
  }
  return {slice_cols(h, 0, dim_), slice_cols(h, dim_, 2 * dim_)};
}

std::pair<Tensor, Tensor> MadeNet::forward_plain(const Tensor& x) const {
  Tensor h = x;
  for (std::size_t l = 0; l < ws_.size(); ++l) {
    Tensor w_eff = ws_[l].value.clone();
    Scalar* pw = w_eff.mutable_data();
    const Scalar* pm = masks_[l].data();
    for (std::size_t i = 0; i < w_eff.size(); ++i) pw[i] *= pm[i];
    h = matmul_plain(h, w_eff);
    add_row_in_place(h, bs_[l].value);
    if (l + 1 < ws_.size()) apply_activation_plain(h, Activation::relu);
  }
  Tensor shift(h.rows(), dim_), raw(h.rows(), dim_);
  for (std::size_t i = 0; i < h.rows(); ++i)
    for (std::size_t k = 0; k < dim_; ++k) {
      shift.at(i, k) = h(i, k);
      raw.at(i, k) = h(i, k + dim_);
    }
  return {shift, raw};
}

std::vector<Param*> MadeNet::params() {
  std::vector<Param*> out;
  for (std::size_t l = 0; l < ws_.size(); ++l) {
    out.push_back(&ws_[l]);
    out.push_back(&bs_[l]);
  }
  return out;
}

// ---------------------------------------------------------------- critics

namespace {

MlpConfig part_config(const CriticConfig& cfg, std::size_t out_width) {
  MlpConfig mc;
  mc.widths.push_back((cfg.label_conditioned_parts ? cfg.embed_width : 0) + 1);
  for (std::size_t l = 0; l < cfg.n_hidden; ++l) mc.widths.push_back(cfg.hidden);
  mc.widths.push_back(out_width);
  return mc;
}

Tensor embed_init(const CriticConfig& cfg, Rng& rng) {
  const Scalar bound = Scalar(1) / std::sqrt(static_cast<Scalar>(cfg.embed_width));
  return Tensor::uniform(cfg.n_classes, cfg.embed_width, -bound, bound, rng);
}

void check_critic_cfg(const CriticConfig& cfg, const char* who) {
  if (cfg.n_classes == 0 || cfg.dim == 0 || cfg.embed_width == 0)
    throw ConfigError(std::string(who) + ": classes, dim and embed width must be positive");
}

}  // namespace

GclCritic::GclCritic(std::string name, CriticConfig cfg, Rng& init) : cfg_(cfg) {
  check_critic_cfg(cfg_, "GclCritic");
  embed_ = Param{name + ".embed", embed_init(cfg_, init)};
  for (std::size_t a = 0; a < cfg_.dim; ++a)
    parts_.emplace_back(name + ".g" + std::to_string(a), part_config(cfg_, 1), init);
}

Var GclCritic::score(Lift& lift, const std::vector<int>& labels, Var s) {
  const Tensor& sv = lift.tape().value(s);
  check_labels(labels, cfg_.n_classes, "GclCritic::score");
  if (labels.size() != sv.rows())
    throw UsageError("GclCritic::score: " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(sv.rows()) + " rows");
  if (sv.cols() != cfg_.dim)
    throw ConfigError("GclCritic::score: input has " + std::to_string(sv.cols()) +
                      " coordinates, expected " + std::to_string(cfg_.dim));
  Var e = gather_rows(lift(embed_), labels);
  Var total;
  for (std::size_t a = 0; a < cfg_.dim; ++a) {
    Var inp = cfg_.label_conditioned_parts
                  ? concat_cols({e, slice_cols(s, a, a + 1)})
                  : slice_cols(s, a, a + 1);
    Var part = parts_[a].forward(lift, inp);
    total = a == 0 ? part : add(total, part);
  }
  return total;
}

std::vector<Param*> GclCritic::params() {
  std::vector<Param*> out{&embed_};
  for (auto& p : parts_)
    for (Param* q : p.params()) out.push_back(q);
  return out;
}

FdvCritic::FdvCritic(std::string name, CriticConfig cfg, Rng& init) : cfg_(cfg) {
  check_critic_cfg(cfg_, "FdvCritic");
  embed_ = Param{name + ".embed", embed_init(cfg_, init)};
  for (std::size_t a = 0; a < cfg_.dim; ++a)
    parts_.emplace_back(name + ".g" + std::to_string(a), part_config(cfg_, cfg_.embed_width),
                        init);
  log_tau_ = Param{name + ".log_tau", Tensor::scalar(std::log(Scalar(0.2)))};
}

double FdvCritic::tau() const { return std::exp(static_cast<double>(log_tau_.value.item())); }

Var FdvCritic::summary(Lift& lift, Var s, Var embed_rows) {
  Var total;
  for (std::size_t a = 0; a < cfg_.dim; ++a) {
    Var coord = slice_cols(s, a, a + 1);
    Var inp = cfg_.label_conditioned_parts ? concat_cols({embed_rows, coord}) : coord;
    Var part = parts_[a].forward(lift, inp);
    total = a == 0 ? part : add(total, part);
  }
  return total;
}

Var FdvCritic::cosine_score(Lift& lift, Var e, Var c) {
  Tape& t = lift.tape();
  Var dot = row_sum(mul(e, c));
  Var ne = sqrt_op(clamp_min(row_sum(square(e)), Scalar(1e-24)));
  Var nc = sqrt_op(clamp_min(row_sum(square(c)), Scalar(1e-24)));
  Var denom = clamp_min(mul(ne, nc), Scalar(1e-24));
  Var cos = divide(dot, denom);

  // Collapsed directions give meaningless cosines; zero them out so neither
  // the score nor the gradient blows up.
  const Tensor& nev = t.value(ne);
  const Tensor& ncv = t.value(nc);
  std::size_t degenerate = 0;
  Tensor mask = Tensor::ones(nev.rows(), 1);
  for (std::size_t i = 0; i < nev.rows(); ++i)
    if (nev(i, 0) < Scalar(1e-9) || ncv(i, 0) < Scalar(1e-9)) {
      mask.at(i, 0) = 0;
      ++degenerate;
    }
  if (degenerate > 0) {
    diag::warn("fdv-degenerate",
               std::to_string(degenerate) + " row(s) with near-zero critic direction scored 0");
    cos = mul(cos, lift.constant(mask));
  }
  Var inv_tau = exp_op(neg(lift(log_tau_)));
  return mul(cos, inv_tau);
}

Var FdvCritic::score(Lift& lift, const std::vector<int>& labels, Var s) {
  const Tensor& sv = lift.tape().value(s);
  check_labels(labels, cfg_.n_classes, "FdvCritic::score");
  if (labels.size() != sv.rows())
    throw UsageError("FdvCritic::score: " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(sv.rows()) + " rows");
  if (sv.cols() != cfg_.dim)
    throw ConfigError("FdvCritic::score: input has " + std::to_string(sv.cols()) +
                      " coordinates, expected " + std::to_string(cfg_.dim));
  Var e = gather_rows(lift(embed_), labels);
  Var c = summary(lift, s, e);
  return cosine_score(lift, e, c);
}

Var FdvCritic::score_matrix(Lift& lift, const std::vector<int>& candidate_labels, Var s) {
  const Tensor& sv = lift.tape().value(s);
  check_labels(candidate_labels, cfg_.n_classes, "FdvCritic::score_matrix");
  if (candidate_labels.empty()) throw UsageError("FdvCritic::score_matrix: no candidate labels");
  if (sv.cols() != cfg_.dim)
    throw ConfigError("FdvCritic::score_matrix: input has " + std::to_string(sv.cols()) +
                      " coordinates, expected " + std::to_string(cfg_.dim));
  const std::size_t r = sv.rows();
  std::vector<Var> cols;
  cols.reserve(candidate_labels.size());
  if (cfg_.label_conditioned_parts) {
    for (int u : candidate_labels) {
      std::vector<int> rep(r, u);
      Var e = gather_rows(lift(embed_), rep);
      Var c = summary(lift, s, e);
      cols.push_back(cosine_score(lift, e, c));
    }
  } else {
    Var c = summary(lift, s, Var{});
    for (int u : candidate_labels) {
      std::vector<int> rep(r, u);
      Var e = gather_rows(lift(embed_), rep);
      cols.push_back(cosine_score(lift, e, c));
    }
  }
  return cols.size() == 1 ? cols[0] : concat_cols(cols);
}

std::vector<Param*> FdvCritic::params() {
  std::vector<Param*> out{&embed_};
  for (auto& p : parts_)
    for (Param* q : p.params()) out.push_back(q);
  out.push_back(&log_tau_);
  return out;
}

}  // namespace ecrt
