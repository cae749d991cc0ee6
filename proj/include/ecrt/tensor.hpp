#pragma once

#include <cstddef>
#include <initializer_list>
#include <memory>
#include <string>
#include <vector>

#include "ecrt/common.hpp"
#include "ecrt/rng.hpp"

namespace ecrt {

// Dense rank-2 array, row-major. Scalars are 1x1, row vectors 1xN, column
// vectors Nx1. Copies share the underlying buffer (cheap value handles);
// mutation through at()/mutable_data() is visible to all sharers, so code
// that needs isolation must clone(). Engine rules: tape ops never mutate
// their inputs, the optimizer mutates parameters in place on purpose.
class Tensor {
 public:
  Tensor() : rows_(0), cols_(0) {}
  Tensor(std::size_t rows, std::size_t cols);  // zero-filled

  static Tensor zeros(std::size_t r, std::size_t c) { return Tensor(r, c); }
  static Tensor ones(std::size_t r, std::size_t c) { return full(r, c, Scalar(1)); }
  static Tensor full(std::size_t r, std::size_t c, Scalar v);
  static Tensor scalar(Scalar v) { return full(1, 1, v); }
  static Tensor from(std::size_t r, std::size_t c, std::initializer_list<Scalar> vals);
  static Tensor from_vec(std::size_t r, std::size_t c, const std::vector<Scalar>& vals);
  static Tensor uniform(std::size_t r, std::size_t c, Scalar lo, Scalar hi, Rng& rng);
  static Tensor normal(std::size_t r, std::size_t c, Scalar mean, Scalar stddev, Rng& rng);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return rows_ * cols_; }
  bool empty() const { return size() == 0; }
  std::vector<std::size_t> shape() const { return {rows_, cols_}; }
  std::string shape_str() const;

  Scalar operator()(std::size_t i, std::size_t j) const;
  Scalar& at(std::size_t i, std::size_t j);

  const Scalar* data() const;
  Scalar* mutable_data();

  // Value of a 1x1 tensor; anything else is a usage error.
  Scalar item() const;

  Tensor clone() const;
  bool all_finite() const;
  bool same_shape(const Tensor& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  // Row extraction / assembly helpers used by data plumbing.
  Tensor take_rows(const std::vector<std::size_t>& idx) const;
  std::vector<Scalar> row_vec(std::size_t i) const;

 private:
  std::size_t rows_, cols_;
  std::shared_ptr<std::vector<Scalar>> buf_;
  void ensure_buf() const;
};

std::string shape_pair_str(const Tensor& a, const Tensor& b);

}  // namespace ecrt
