#pragma once

#include <map>
#include <vector>

#include "ecrt/tensor.hpp"

namespace ecrt {

struct ClassificationMetrics {
  double nll = 0.0;
  std::map<int, double> topk;            // k -> fraction of rows with the true
                                         // label among the k best logits
  std::vector<double> f1_per_class;      // one-vs-rest on argmax predictions
  std::vector<double> recall_per_class;  // within-class accuracy
  double macro_f1 = 0.0;                 // mean F1 over classes that appear in labels
};

// Argmax and top-k ties resolve toward the smaller class id. F1 terms with
// empty denominators count as 0.
ClassificationMetrics classification_metrics(const Tensor& logits, const std::vector<int>& labels,
                                             std::size_t n_classes,
                                             const std::vector<int>& ks = {1, 5});

// Kernel two-sample statistic with k(x, y) = exp(-|x - y|^2 / (2 sigma^2)),
// mean embeddings normalized by 1/n (diagonal included), clamped at zero
// before the square root. Identical samples yield exactly 0.
double mmd_rbf(const Tensor& a, const Tensor& b, double sigma = 0.5);

// Mean absolute off-diagonal Pearson correlation between coordinates,
// computed within each class (>= 2 samples) and averaged over the measured
// classes. Zero-variance coordinates contribute 0 and emit a diagnostic.
double class_conditional_decorrelation(const Tensor& s, const std::vector<int>& labels,
                                       std::size_t n_classes);

}  // namespace ecrt
