#include "ecrt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ecrt/common.hpp"
#include "ecrt/tape.hpp"

namespace ecrt {

ClassificationMetrics classification_metrics(const Tensor& logits, const std::vector<int>& labels,
                                             std::size_t n_classes,
                                             const std::vector<int>& ks) {
  const std::size_t n = logits.rows();
  if (labels.size() != n)
    throw UsageError("classification_metrics: " + std::to_string(labels.size()) +
                     " labels for " + std::to_string(n) + " rows");
  if (n == 0) throw UsageError("classification_metrics: empty evaluation set");
  if (logits.cols() != n_classes)
    throw ConfigError("classification_metrics: logits have " + std::to_string(logits.cols()) +
                      " columns for " + std::to_string(n_classes) + " classes");
  for (int y : labels)
    if (y < 0 || static_cast<std::size_t>(y) >= n_classes)
      throw UsageError("classification_metrics: unknown label id " + std::to_string(y));

  ClassificationMetrics out;

  Tensor lsm = log_softmax_plain(logits);
  double nll = 0;
  for (std::size_t i = 0; i < n; ++i)
    nll -= static_cast<double>(lsm(i, static_cast<std::size_t>(labels[i])));
  out.nll = nll / static_cast<double>(n);

  // Class order sorted by (logit desc, id asc) per row; reused for every k.
  std::vector<int> order(n_classes);
  std::vector<std::vector<int>> row_order(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      const Scalar la = logits(i, static_cast<std::size_t>(a));
      const Scalar lb = logits(i, static_cast<std::size_t>(b));
      if (la != lb) return la > lb;
      return a < b;
    });
    row_order[i] = order;
  }
  for (int k : ks) {
    if (k <= 0) throw ConfigError("classification_metrics: non-positive k");
    const auto kk = std::min<std::size_t>(static_cast<std::size_t>(k), n_classes);
    long hits = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < kk; ++j)
        if (row_order[i][j] == labels[i]) {
          ++hits;
          break;
        }
    out.topk[k] = static_cast<double>(hits) / static_cast<double>(n);
  }

  std::vector<long> tp(n_classes, 0), fp(n_classes, 0), fn(n_classes, 0), truth(n_classes, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const int pred = row_order[i][0];
    const int y = labels[i];
    ++truth[static_cast<std::size_t>(y)];
    if (pred == y) {
      ++tp[static_cast<std::size_t>(y)];
    } else {
      ++fp[static_cast<std::size_t>(pred)];
      ++fn[static_cast<std::size_t>(y)];
    }
  }
  out.f1_per_class.resize(n_classes, 0.0);
  out.recall_per_class.resize(n_classes, 0.0);
  double f1_sum = 0;
  std::size_t f1_count = 0;
  for (std::size_t c = 0; c < n_classes; ++c) {
    const double p_den = static_cast<double>(tp[c] + fp[c]);
    const double r_den = static_cast<double>(tp[c] + fn[c]);
    const double prec = p_den > 0 ? static_cast<double>(tp[c]) / p_den : 0.0;
    const double rec = r_den > 0 ? static_cast<double>(tp[c]) / r_den : 0.0;
    out.recall_per_class[c] = rec;
    out.f1_per_class[c] = prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
    if (truth[c] > 0) {
      f1_sum += out.f1_per_class[c];
      ++f1_count;
    }
  }
  out.macro_f1 = f1_count ? f1_sum / static_cast<double>(f1_count) : 0.0;
  return out;
}

double mmd_rbf(const Tensor& a, const Tensor& b, double sigma) {
  if (a.cols() != b.cols())
    throw ConfigError("mmd_rbf: dimensionality differs, " + shape_pair_str(a, b));
  if (a.rows() == 0 || b.rows() == 0) throw UsageError("mmd_rbf: empty sample");
  if (!(sigma > 0)) throw ConfigError("mmd_rbf: sigma must be positive");
  const double inv = 1.0 / (2.0 * sigma * sigma);
  const std::size_t d = a.cols();
  auto ksum = [&](const Tensor& u, const Tensor& v) {
    double s = 0;
    for (std::size_t i = 0; i < u.rows(); ++i)
      for (std::size_t j = 0; j < v.rows(); ++j) {
        double q = 0;
        for (std::size_t k = 0; k < d; ++k) {
          const double dk = static_cast<double>(u(i, k)) - static_cast<double>(v(j, k));
          q += dk * dk;
        }
        s += std::exp(-q * inv);
      }
    return s;
  };
  const double n = static_cast<double>(a.rows());
  const double m = static_cast<double>(b.rows());
  const double mmd2 = ksum(a, a) / (n * n) + ksum(b, b) / (m * m) - 2.0 * ksum(a, b) / (n * m);
  return std::sqrt(std::max(0.0, mmd2));
}

double class_conditional_decorrelation(const Tensor& s, const std::vector<int>& labels,
                                       std::size_t n_classes) {
  if (labels.size() != s.rows())
    throw UsageError("decorrelation: " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(s.rows()) + " rows");
  const std::size_t d = s.cols();
  if (d < 2) throw ConfigError("decorrelation: needs at least 2 coordinates");

  double total = 0;
  std::size_t measured = 0;
  for (std::size_t cls = 0; cls < n_classes; ++cls) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == static_cast<int>(cls)) rows.push_back(i);
    if (rows.size() < 2) continue;

    const double n = static_cast<double>(rows.size());
    std::vector<double> mean(d, 0.0), var(d, 0.0);
    for (std::size_t i : rows)
      for (std::size_t j = 0; j < d; ++j) mean[j] += static_cast<double>(s(i, j));
    for (std::size_t j = 0; j < d; ++j) mean[j] /= n;
    for (std::size_t i : rows)
      for (std::size_t j = 0; j < d; ++j) {
        const double c = static_cast<double>(s(i, j)) - mean[j];
        var[j] += c * c;
      }
    bool warned = false;
    double acc = 0;
    std::size_t pairs = 0;
    for (std::size_t j = 0; j < d; ++j)
      for (std::size_t k = j + 1; k < d; ++k) {
        ++pairs;
        if (var[j] <= 0 || var[k] <= 0) {
          if (!warned) {
            diag::warn("decorrelation-zero-variance",
                       "class " + std::to_string(cls) + " has a constant coordinate");
            warned = true;
          }
          continue;  // counts as 0 correlation
        }
        double cov = 0;
        for (std::size_t i : rows)
          cov += (static_cast<double>(s(i, j)) - mean[j]) *
                 (static_cast<double>(s(i, k)) - mean[k]);
        acc += std::abs(cov / std::sqrt(var[j] * var[k]));
      }
    total += acc / static_cast<double>(pairs);
    ++measured;
  }
  if (measured == 0)
    throw UsageError("decorrelation: no class has the 2+ samples needed");
  return total / static_cast<double>(measured);
}

}  // namespace ecrt
