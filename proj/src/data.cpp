#include "ecrt/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "json.hpp"

#include "ecrt/rng.hpp"

namespace ecrt {

std::vector<long> Dataset::class_counts() const {
  std::vector<long> counts(n_classes, 0);
  for (int v : y) {
    if (v < 0 || static_cast<std::size_t>(v) >= n_classes)
      throw UsageError("Dataset: label " + std::to_string(v) + " outside [0, " +
                       std::to_string(n_classes) + ")");
    ++counts[static_cast<std::size_t>(v)];
  }
  return counts;
}

std::vector<std::size_t> Dataset::rows_of_class(int cls) const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < y.size(); ++i)
    if (y[i] == cls) idx.push_back(i);
  return idx;
}

Tensor henon_mix(const Tensor& s) {
  if (s.cols() != 2) throw ConfigError("henon_mix: needs 2 coordinates, got " + s.shape_str());
  Tensor z(s.rows(), 2);
  for (std::size_t i = 0; i < s.rows(); ++i) {
    const Scalar s1 = s(i, 0), s2 = s(i, 1);
    z.at(i, 0) = Scalar(1) - Scalar(1.4) * s1 * s1 + s2;
    z.at(i, 1) = Scalar(0.3) * s1;
  }
  return z;
}

Tensor henon_unmix(const Tensor& z) {
  if (z.cols() != 2) throw ConfigError("henon_unmix: needs 2 coordinates, got " + z.shape_str());
  Tensor s(z.rows(), 2);
  for (std::size_t i = 0; i < z.rows(); ++i) {
    const Scalar s1 = z(i, 1) / Scalar(0.3);
    s.at(i, 0) = s1;
    s.at(i, 1) = z(i, 0) - Scalar(1) + Scalar(1.4) * s1 * s1;
  }
  return s;
}

ToySpec ToySpec::default7() {
  ToySpec spec;
  spec.means = {{-0.5, -1.0}, {2.0, 1.0}, {5.0, 2.0}, {1.0, 3.0},
                {-2.0, 1.0}, {-3.5, 4.0}, {-4.0, -1.0}};
  spec.stddevs = {{0.5, 0.5}, {3.0, 1.0}, {1.0, 2.0}, {0.3, 2.0},
                  {1.0, 0.2}, {1.0, 1.0}, {2.0, 0.3}};
  spec.per_class = 2000;
  spec.henon_mixing = true;
  return spec;
}

namespace {

void check_toy_spec(const ToySpec& spec) {
  if (spec.means.empty()) throw ConfigError("toy spec: no classes");
  if (spec.means.size() != spec.stddevs.size())
    throw ConfigError("toy spec: means/stddevs class counts differ");
  const std::size_t d = spec.means[0].size();
  if (d == 0) throw ConfigError("toy spec: zero-dimensional classes");
  for (std::size_t m = 0; m < spec.means.size(); ++m) {
    if (spec.means[m].size() != d || spec.stddevs[m].size() != d)
      throw ConfigError("toy spec: inconsistent dimensionality at class " + std::to_string(m));
    for (double sd : spec.stddevs[m])
      if (!(sd > 0)) throw ConfigError("toy spec: non-positive stddev at class " + std::to_string(m));
  }
  if (spec.per_class <= 0) throw ConfigError("toy spec: per_class must be positive");
  if (spec.henon_mixing && d != 2)
    throw ConfigError("toy spec: the quadratic mixing is defined for 2 coordinates only");
}

}  // namespace

ToyData generate_toy(const ToySpec& spec, std::uint64_t seed) {
  check_toy_spec(spec);
  const std::size_t d = spec.dim();
  const std::size_t m = spec.means.size();
  const std::size_t n = m * static_cast<std::size_t>(spec.per_class);

  ToyData out;
  out.sources = Tensor(n, d);
  out.data.x = Tensor(n, d);
  out.data.y.resize(n);
  out.data.n_classes = m;
  out.data.seed = seed;
  out.data.split = "all";

  SeedStream root(seed);
  std::size_t row = 0;
  for (std::size_t cls = 0; cls < m; ++cls) {
    Rng rng(root.derive("toy-class", cls));
    for (long k = 0; k < spec.per_class; ++k, ++row) {
      for (std::size_t j = 0; j < d; ++j)
        out.sources.at(row, j) =
            static_cast<Scalar>(rng.normal(spec.means[cls][j], spec.stddevs[cls][j]));
      out.data.y[row] = static_cast<int>(cls);
    }
  }
  out.data.x = spec.henon_mixing ? henon_mix(out.sources) : out.sources.clone();
  return out;
}

Tensor sample_toy_class_sources(const std::vector<double>& mean,
                                const std::vector<double>& stddev, long count,
                                std::uint64_t seed) {
  if (mean.size() != stddev.size() || mean.empty())
    throw ConfigError("sample_toy_class_sources: bad mean/stddev shapes");
  if (count <= 0) throw ConfigError("sample_toy_class_sources: count must be positive");
  Rng rng(seed);
  Tensor s(static_cast<std::size_t>(count), mean.size());
  for (std::size_t i = 0; i < s.rows(); ++i)
    for (std::size_t j = 0; j < mean.size(); ++j)
      s.at(i, j) = static_cast<Scalar>(rng.normal(mean[j], stddev[j]));
  return s;
}

ExtremeToy generate_extreme_toy(std::size_t n_classes, long train_per_class, long val_per_class,
                                std::uint64_t seed, bool henon_mixing) {
  if (n_classes < 2) throw ConfigError("extreme toy: need at least 2 classes");
  if (train_per_class <= 0 || val_per_class <= 0)
    throw ConfigError("extreme toy: per-class counts must be positive");
  SeedStream root(seed);
  Rng mean_rng(root.derive("extreme-means"));

  ToySpec spec;
  spec.per_class = train_per_class;
  spec.henon_mixing = henon_mixing;
  for (std::size_t cls = 0; cls < n_classes; ++cls) {
    spec.means.push_back({mean_rng.uniform(-4.0, 4.0), mean_rng.uniform(-4.0, 4.0)});
    spec.stddevs.push_back({0.1, 0.1});
  }

  ExtremeToy out;
  out.class_means = spec.means;
  out.train = generate_toy(spec, root.derive("extreme-train"));
  out.train.data.split = "train";
  ToySpec val_spec = spec;
  val_spec.per_class = val_per_class;
  out.val = generate_toy(val_spec, root.derive("extreme-val"));
  out.val.data.split = "val";
  return out;
}

// ----------------------------------------------------------------- IDX load

namespace {

std::uint32_t read_be32(std::ifstream& f, const std::string& path, std::size_t offset) {
  unsigned char b[4];
  f.read(reinterpret_cast<char*>(b), 4);
  if (f.gcount() != 4)
    throw IngestError(path + ": truncated at byte " + std::to_string(offset) +
                      " (wanted 4 header bytes)");
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) |
         std::uint32_t(b[3]);
}

}  // namespace

Dataset load_mnist_idx(const std::string& images_path, const std::string& labels_path) {
  std::ifstream fi(images_path, std::ios::binary);
  if (!fi) throw IngestError(images_path + ": cannot open");
  std::uint32_t magic = read_be32(fi, images_path, 0);
  if (magic != 0x803)
    throw IngestError(images_path + ": bad magic " + std::to_string(magic) +
                      " at byte 0 (expected 2051 for images)");
  const std::uint32_t n = read_be32(fi, images_path, 4);
  const std::uint32_t rows = read_be32(fi, images_path, 8);
  const std::uint32_t cols = read_be32(fi, images_path, 12);
  if (rows == 0 || cols == 0 || n == 0)
    throw IngestError(images_path + ": zero extent in header");
  const std::size_t px = static_cast<std::size_t>(rows) * cols;

  Dataset d;
  d.x = Tensor(n, px);
  std::vector<unsigned char> buf(px);
  for (std::uint32_t i = 0; i < n; ++i) {
    fi.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(px));
    if (fi.gcount() != static_cast<std::streamsize>(px))
      throw IngestError(images_path + ": truncated at byte " +
                        std::to_string(16 + static_cast<std::size_t>(i) * px +
                                       static_cast<std::size_t>(std::max<std::streamsize>(fi.gcount(), 0))) +
                        " (image " + std::to_string(i) + ")");
    for (std::size_t j = 0; j < px; ++j)
      d.x.at(i, j) = static_cast<Scalar>(buf[j]) / Scalar(255);
  }
  if (fi.peek() != std::ifstream::traits_type::eof())
    throw IngestError(images_path + ": trailing data after byte " +
                      std::to_string(16 + static_cast<std::size_t>(n) * px));

  std::ifstream fl(labels_path, std::ios::binary);
  if (!fl) throw IngestError(labels_path + ": cannot open");
  magic = read_be32(fl, labels_path, 0);
  if (magic != 0x801)
    throw IngestError(labels_path + ": bad magic " + std::to_string(magic) +
                      " at byte 0 (expected 2049 for labels)");
  const std::uint32_t nl = read_be32(fl, labels_path, 4);
  if (nl != n)
    throw IngestError(labels_path + ": " + std::to_string(nl) + " labels for " +
                      std::to_string(n) + " images");
  d.y.resize(n);
  std::vector<unsigned char> lab(n);
  fl.read(reinterpret_cast<char*>(lab.data()), static_cast<std::streamsize>(n));
  if (fl.gcount() != static_cast<std::streamsize>(n))
    throw IngestError(labels_path + ": truncated at byte " +
                      std::to_string(8 + static_cast<std::size_t>(std::max<std::streamsize>(fl.gcount(), 0))));
  if (fl.peek() != std::ifstream::traits_type::eof())
    throw IngestError(labels_path + ": trailing data after byte " +
                      std::to_string(8 + static_cast<std::size_t>(n)));
  int max_label = 0;
  for (std::uint32_t i = 0; i < n; ++i) {
    d.y[i] = static_cast<int>(lab[i]);
    max_label = std::max(max_label, d.y[i]);
  }
  d.n_classes = static_cast<std::size_t>(std::max(max_label + 1, 10));
  d.split = "all";
  return d;
}

// ------------------------------------------------------------ manipulation

Dataset take_rows(const Dataset& d, const std::vector<std::size_t>& idx) {
  Dataset out;
  out.x = d.x.take_rows(idx);
  out.y.reserve(idx.size());
  for (std::size_t i : idx) {
    if (i >= d.y.size()) throw UsageError("take_rows: index out of range");
    out.y.push_back(d.y[i]);
  }
  out.n_classes = d.n_classes;
  out.split = d.split;
  out.seed = d.seed;
  return out;
}

Dataset concat_datasets(const Dataset& a, const Dataset& b) {
  if (a.x.cols() != b.x.cols()) throw ConfigError("concat_datasets: column extents differ");
  if (a.n_classes != b.n_classes) throw ConfigError("concat_datasets: class counts differ");
  Dataset out;
  out.x = Tensor(a.size() + b.size(), a.x.cols());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.x.cols(); ++j) out.x.at(i, j) = a.x(i, j);
  for (std::size_t i = 0; i < b.size(); ++i)
    for (std::size_t j = 0; j < b.x.cols(); ++j) out.x.at(a.size() + i, j) = b.x(i, j);
  out.y = a.y;
  out.y.insert(out.y.end(), b.y.begin(), b.y.end());
  out.n_classes = a.n_classes;
  out.split = a.split;
  out.seed = a.seed;
  return out;
}

SplitResult split_train_val(const Dataset& d, double val_fraction, std::uint64_t seed) {
  if (!(val_fraction > 0.0 && val_fraction < 1.0))
    throw ConfigError("split_train_val: fraction must lie in (0, 1)");
  SeedStream root(seed);
  std::vector<std::size_t> train_idx, val_idx;
  for (std::size_t cls = 0; cls < d.n_classes; ++cls) {
    auto rows = d.rows_of_class(static_cast<int>(cls));
    if (rows.empty()) continue;
    Rng rng(root.derive("split-class", cls));
    auto perm = rng.permutation(rows.size());
    const auto n_val = static_cast<std::size_t>(
        std::llround(val_fraction * static_cast<double>(rows.size())));
    for (std::size_t k = 0; k < rows.size(); ++k)
      (k < n_val ? val_idx : train_idx).push_back(rows[perm[k]]);
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(val_idx.begin(), val_idx.end());
  SplitResult out{take_rows(d, train_idx), take_rows(d, val_idx)};
  out.train.split = "train";
  out.val.split = "val";
  return out;
}

Dataset apply_step_imbalance(const Dataset& d, const ImbalanceSpec& spec, std::uint64_t seed) {
  if (spec.minority_count <= 0)
    throw ConfigError("step imbalance: minority_count must be positive");
  std::vector<bool> is_minority(d.n_classes, false);
  for (int cls : spec.minority_classes) {
    if (cls < 0 || static_cast<std::size_t>(cls) >= d.n_classes)
      throw ConfigError("step imbalance: minority class " + std::to_string(cls) +
                        " outside [0, " + std::to_string(d.n_classes) + ")");
    is_minority[static_cast<std::size_t>(cls)] = true;
  }
  SeedStream root(seed);
  std::vector<std::size_t> keep;
  for (std::size_t cls = 0; cls < d.n_classes; ++cls) {
    auto rows = d.rows_of_class(static_cast<int>(cls));
    long want = is_minority[cls] ? spec.minority_count : spec.majority_count;
    if (want < 0 || static_cast<std::size_t>(want) == rows.size()) {
      keep.insert(keep.end(), rows.begin(), rows.end());
      continue;
    }
    if (static_cast<std::size_t>(want) > rows.size())
      throw ConfigError("step imbalance: class " + std::to_string(cls) + " has " +
                        std::to_string(rows.size()) + " rows, asked for " + std::to_string(want));
    Rng rng(root.derive("imbalance-class", cls));
    auto perm = rng.permutation(rows.size());
    for (long k = 0; k < want; ++k) keep.push_back(rows[perm[static_cast<std::size_t>(k)]]);
  }
  std::sort(keep.begin(), keep.end());
  return take_rows(d, keep);
}

std::vector<int> quantile_bin(const std::vector<double>& targets, std::size_t bins) {
  if (bins < 2) throw ConfigError("quantile_bin: need at least 2 bins");
  if (targets.size() < bins)
    throw ConfigError("quantile_bin: fewer targets than bins");
  std::vector<std::size_t> order(targets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return targets[a] < targets[b]; });
  std::vector<int> labels(targets.size());
  const std::size_t n = targets.size();
  for (std::size_t rank = 0; rank < n; ++rank) {
    auto bin = static_cast<int>(rank * bins / n);
    labels[order[rank]] = std::min(bin, static_cast<int>(bins) - 1);
  }
  return labels;
}

// ------------------------------------------------------------ persistence

void save_dataset(const Dataset& d, const std::string& prefix) {
  nlohmann::json header{{"rows", d.x.rows()},   {"cols", d.x.cols()},
                        {"classes", d.n_classes}, {"split", d.split},
                        {"seed", d.seed}};
  std::ofstream fj(prefix + ".json");
  if (!fj) throw IngestError(prefix + ".json: cannot write");
  fj << header.dump(2) << "\n";

  std::ofstream fx(prefix + ".x.bin", std::ios::binary);
  if (!fx) throw IngestError(prefix + ".x.bin: cannot write");
  for (std::size_t i = 0; i < d.x.rows(); ++i)
    for (std::size_t j = 0; j < d.x.cols(); ++j) {
      const double v = static_cast<double>(d.x(i, j));
      fx.write(reinterpret_cast<const char*>(&v), sizeof(double));
    }

  std::ofstream fy(prefix + ".y.bin", std::ios::binary);
  if (!fy) throw IngestError(prefix + ".y.bin: cannot write");
  for (int v : d.y) {
    const std::int32_t label = v;
    fy.write(reinterpret_cast<const char*>(&label), sizeof(label));
  }
}

Dataset load_dataset(const std::string& prefix) {
  std::ifstream fj(prefix + ".json");
  if (!fj) throw IngestError(prefix + ".json: cannot open");
  nlohmann::json header;
  try {
    fj >> header;
  } catch (const nlohmann::json::exception& e) {
    throw IngestError(prefix + ".json: " + e.what());
  }
  Dataset d;
  const auto rows = header.at("rows").get<std::size_t>();
  const auto cols = header.at("cols").get<std::size_t>();
  d.n_classes = header.at("classes").get<std::size_t>();
  d.split = header.value("split", "");
  d.seed = header.value("seed", std::uint64_t(0));

  std::ifstream fx(prefix + ".x.bin", std::ios::binary);
  if (!fx) throw IngestError(prefix + ".x.bin: cannot open");
  d.x = Tensor(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) {
      double v;
      fx.read(reinterpret_cast<char*>(&v), sizeof(double));
      if (fx.gcount() != sizeof(double))
        throw IngestError(prefix + ".x.bin: truncated at byte " +
                          std::to_string((i * cols + j) * sizeof(double)));
      d.x.at(i, j) = static_cast<Scalar>(v);
    }

  std::ifstream fy(prefix + ".y.bin", std::ios::binary);
  if (!fy) throw IngestError(prefix + ".y.bin: cannot open");
  d.y.resize(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    std::int32_t v;
    fy.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (fy.gcount() != sizeof(v))
      throw IngestError(prefix + ".y.bin: truncated at byte " + std::to_string(i * sizeof(v)));
    d.y[i] = v;
  }
  return d;
}

}  // namespace ecrt
