#include "ecrt/augment.hpp"

#include <cmath>

#include "ecrt/rng.hpp"

namespace ecrt {

AugmentMode augment_mode_from_string(const std::string& s) {
  if (s == "none") return AugmentMode::none;
  if (s == "nonparametric" || s == "permute") return AugmentMode::nonparametric;
  if (s == "parametric") return AugmentMode::parametric;
  if (s == "oracle") return AugmentMode::oracle;
  if (s == "feature_space" || s == "feature-space") return AugmentMode::feature_space;
  throw ConfigError("unknown augmentation mode '" + s + "'");
}

std::string to_string(AugmentMode m) {
  switch (m) {
    case AugmentMode::none: return "none";
    case AugmentMode::nonparametric: return "nonparametric";
    case AugmentMode::parametric: return "parametric";
    case AugmentMode::oracle: return "oracle";
    case AugmentMode::feature_space: return "feature_space";
  }
  return "?";
}

namespace {

void check_pool(const SourceSet& pool, long count, const char* who) {
  if (pool.rows.rows() == 0 || pool.rows.cols() == 0)
    throw UsageError(std::string(who) + ": empty pool");
  if (count <= 0) throw ConfigError(std::string(who) + ": count must be positive");
}

}  // namespace

SourceSet permute_augment(const SourceSet& pool, long count, std::uint64_t seed,
                          bool without_replacement) {
  check_pool(pool, count, "permute_augment");
  const std::size_t n = pool.rows.rows(), d = pool.rows.cols();
  const auto c = static_cast<std::size_t>(count);
  if (without_replacement && c > n)
    throw ConfigError("permute_augment: cannot draw " + std::to_string(count) +
                      " without replacement from a pool of " + std::to_string(n));
  SourceSet out{pool.label, Tensor(c, d), pool.checkpoint_id};
  Rng rng(seed);
  if (without_replacement) {
    for (std::size_t j = 0; j < d; ++j) {
      auto perm = rng.permutation(n);
      for (std::size_t i = 0; i < c; ++i) out.rows.at(i, j) = pool.rows(perm[i], j);
    }
  } else {
    for (std::size_t j = 0; j < d; ++j)
      for (std::size_t i = 0; i < c; ++i) out.rows.at(i, j) = pool.rows(rng.below(n), j);
  }
  return out;
}

SourceSet parametric_augment(const SourceSet& pool, long count, std::uint64_t seed,
                             double sigma_floor) {
  check_pool(pool, count, "parametric_augment");
  if (!(sigma_floor > 0)) throw ConfigError("parametric_augment: sigma floor must be positive");
  const std::size_t n = pool.rows.rows(), d = pool.rows.cols();
  std::vector<double> mean(d, 0.0), sd(d, sigma_floor);
  for (std::size_t j = 0; j < d; ++j) {
    double m = 0;
    for (std::size_t i = 0; i < n; ++i) m += static_cast<double>(pool.rows(i, j));
    m /= static_cast<double>(n);
    mean[j] = m;
    if (n >= 2) {
      double ss = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const double dlt = static_cast<double>(pool.rows(i, j)) - m;
        ss += dlt * dlt;
      }
      sd[j] = std::max(sigma_floor, std::sqrt(ss / static_cast<double>(n - 1)));
    }
  }
  SourceSet out{pool.label, Tensor(static_cast<std::size_t>(count), d), pool.checkpoint_id};
  Rng rng(seed);
  for (std::size_t i = 0; i < out.rows.rows(); ++i)
    for (std::size_t j = 0; j < d; ++j)
      out.rows.at(i, j) = static_cast<Scalar>(rng.normal(mean[j], sd[j]));
  return out;
}

SourceSet oracle_augment(const SourceSet& holdout, long count, std::uint64_t seed) {
  check_pool(holdout, count, "oracle_augment");
  const std::size_t n = holdout.rows.rows(), d = holdout.rows.cols();
  SourceSet out{holdout.label, Tensor(static_cast<std::size_t>(count), d),
                holdout.checkpoint_id};
  Rng rng(seed);
  for (std::size_t i = 0; i < out.rows.rows(); ++i) {
    const std::size_t src = rng.below(n);
    for (std::size_t j = 0; j < d; ++j) out.rows.at(i, j) = holdout.rows(src, j);
  }
  return out;
}

SourceSet feature_space_augment(const MafFlow& flow, const SourceSet& feature_pool, long count,
                                std::uint64_t seed) {
  SourceSet synth_features = permute_augment(feature_pool, count, seed);
  auto [s, logdet] = flow.forward_plain(synth_features.rows);
  (void)logdet;
  return SourceSet{feature_pool.label, s, feature_pool.checkpoint_id};
}

}  // namespace ecrt
