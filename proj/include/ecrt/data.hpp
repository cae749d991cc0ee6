#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ecrt/tensor.hpp"

namespace ecrt {

struct Dataset {
  Tensor x;
  std::vector<int> y;
  std::size_t n_classes = 0;
  std::string split;  // free-form tag: "train", "val", ...
  std::uint64_t seed = 0;

  std::size_t size() const { return x.rows(); }
  std::vector<long> class_counts() const;
  std::vector<std::size_t> rows_of_class(int cls) const;
};

// Quadratic two-coordinate mixing and its exact inverse:
//   z1 = 1 - 1.4 s1^2 + s2,  z2 = 0.3 s1
Tensor henon_mix(const Tensor& s);
Tensor henon_unmix(const Tensor& z);

struct ToySpec {
  std::vector<std::vector<double>> means;    // one entry per class
  std::vector<std::vector<double>> stddevs;  // same shapes as means
  long per_class = 2000;
  bool henon_mixing = true;

  // Seven well-spread 2-D Gaussians; the last class doubles as the default
  // minority in imbalance experiments.
  static ToySpec default7();
  std::size_t dim() const { return means.empty() ? 0 : means[0].size(); }
};

struct ToyData {
  Dataset data;
  Tensor sources;  // ground-truth pre-mixing coordinates, row-aligned with data.x
};

ToyData generate_toy(const ToySpec& spec, std::uint64_t seed);

// Fresh draws from a single class of a toy spec (used for held-out oracle
// pools). Returns sources only; mix with henon_mix if needed.
Tensor sample_toy_class_sources(const std::vector<double>& mean,
                                const std::vector<double>& stddev, long count,
                                std::uint64_t seed);

// Many-class variant: class means uniform in [-4, 4]^2, all stddevs 0.1,
// a small training pool and a fixed-size validation set per class.
struct ExtremeToy {
  ToyData train, val;
  std::vector<std::vector<double>> class_means;
};
ExtremeToy generate_extreme_toy(std::size_t n_classes, long train_per_class, long val_per_class,
                                std::uint64_t seed, bool henon_mixing = true);

// IDX-format image/label ingestion (big-endian headers, magic 0x803 for
// images and 0x801 for labels). Pixels scale to [0, 1]. Malformed files
// raise ingest errors naming the byte offset.
Dataset load_mnist_idx(const std::string& images_path, const std::string& labels_path);

struct SplitResult {
  Dataset train, val;
};
// Stratified split: within each class a seeded shuffle sends round(frac * n)
// rows to val. frac in (0, 1).
SplitResult split_train_val(const Dataset& d, double val_fraction, std::uint64_t seed);

struct ImbalanceSpec {
  std::vector<int> minority_classes;
  long minority_count = 0;
  long majority_count = -1;  // -1 keeps every majority row
};
// Subsample (seeded, without replacement) each class to its target count.
// Requesting more rows than a class has is a configuration error.
Dataset apply_step_imbalance(const Dataset& d, const ImbalanceSpec& spec, std::uint64_t seed);

// Rank-based binning of real targets into `bins` labels (0 = lowest).
// Equal-count bins up to rounding; ties broken by position, deterministic.
std::vector<int> quantile_bin(const std::vector<double>& targets, std::size_t bins);

// On-disk form: <prefix>.json header {rows, cols, classes, split, seed} plus
// <prefix>.x.bin (row-major binary float64) and <prefix>.y.bin (int32).
void save_dataset(const Dataset& d, const std::string& prefix);
Dataset load_dataset(const std::string& prefix);

Dataset take_rows(const Dataset& d, const std::vector<std::size_t>& idx);
Dataset concat_datasets(const Dataset& a, const Dataset& b);

}  // namespace ecrt
