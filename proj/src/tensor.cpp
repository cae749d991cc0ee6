#include "ecrt/tensor.hpp"

#include <cmath>
#include <sstream>

namespace ecrt {

Tensor::Tensor(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), buf_(std::make_shared<std::vector<Scalar>>(rows * cols, Scalar(0))) {}

Tensor Tensor::full(std::size_t r, std::size_t c, Scalar v) {
  Tensor t(r, c);
  for (auto& x : *t.buf_) x = v;
  return t;
}

Tensor Tensor::from(std::size_t r, std::size_t c, std::initializer_list<Scalar> vals) {
  if (vals.size() != r * c)
    throw ConfigError("Tensor::from: got " + std::to_string(vals.size()) + " values for shape " +
                      std::to_string(r) + "x" + std::to_string(c));
  Tensor t(r, c);
  std::size_t i = 0;
  for (Scalar v : vals) (*t.buf_)[i++] = v;
  return t;
}

Tensor Tensor::from_vec(std::size_t r, std::size_t c, const std::vector<Scalar>& vals) {
  if (vals.size() != r * c)
    throw ConfigError("Tensor::from_vec: got " + std::to_string(vals.size()) + " values for shape " +
                      std::to_string(r) + "x" + std::to_string(c));
  Tensor t(r, c);
  *t.buf_ = vals;
  return t;
}

Tensor Tensor::uniform(std::size_t r, std::size_t c, Scalar lo, Scalar hi, Rng& rng) {
  Tensor t(r, c);
  for (auto& x : *t.buf_) x = static_cast<Scalar>(rng.uniform(lo, hi));
  return t;
}

Tensor Tensor::normal(std::size_t r, std::size_t c, Scalar mean, Scalar stddev, Rng& rng) {
  Tensor t(r, c);
  for (auto& x : *t.buf_) x = static_cast<Scalar>(rng.normal(mean, stddev));
  return t;
}

void Tensor::ensure_buf() const {
  if (!buf_) throw UsageError("Tensor: access to default-constructed (empty) tensor");
}

std::string Tensor::shape_str() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

Scalar Tensor::operator()(std::size_t i, std::size_t j) const {
  ensure_buf();
  return (*buf_)[i * cols_ + j];
}

Scalar& Tensor::at(std::size_t i, std::size_t j) {
  ensure_buf();
  return (*buf_)[i * cols_ + j];
}

const Scalar* Tensor::data() const {
  ensure_buf();
  return buf_->data();
}

Scalar* Tensor::mutable_data() {
  ensure_buf();
  return buf_->data();
}

Scalar Tensor::item() const {
  if (rows_ != 1 || cols_ != 1)
    throw UsageError("Tensor::item: tensor has shape " + shape_str() + ", expected 1x1");
  return (*buf_)[0];
}

Tensor Tensor::clone() const {
  Tensor t(rows_, cols_);
  if (buf_) *t.buf_ = *buf_;
  return t;
}

bool Tensor::all_finite() const {
  if (!buf_) return true;
  for (Scalar v : *buf_)
    if (!std::isfinite(v)) return false;
  return true;
}

Tensor Tensor::take_rows(const std::vector<std::size_t>& idx) const {
  Tensor out(idx.size(), cols_);
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (idx[k] >= rows_)
      throw UsageError("Tensor::take_rows: index " + std::to_string(idx[k]) + " out of range for " +
                       shape_str());
    for (std::size_t j = 0; j < cols_; ++j) out.at(k, j) = (*this)(idx[k], j);
  }
  return out;
}

std::vector<Scalar> Tensor::row_vec(std::size_t i) const {
  std::vector<Scalar> v(cols_);
  for (std::size_t j = 0; j < cols_; ++j) v[j] = (*this)(i, j);
  return v;
}

std::string shape_pair_str(const Tensor& a, const Tensor& b) {
  return a.shape_str() + " vs " + b.shape_str();
}

}  // namespace ecrt
