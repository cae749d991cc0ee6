#pragma once

#include <cstdint>
#include <string>

#include "ecrt/flow.hpp"
#include "ecrt/tensor.hpp"

namespace ecrt {

// A per-class pool of de-mixed coordinates plus the fingerprint of the
// model state that produced it; refinement refuses pools whose fingerprint
// does not match the checkpoint it runs against.
struct SourceSet {
  int label = -1;
  Tensor rows;
  std::string checkpoint_id;
};

enum class AugmentMode { none, nonparametric, parametric, oracle, feature_space };
AugmentMode augment_mode_from_string(const std::string& s);
std::string to_string(AugmentMode m);

// Coordinate-wise resampling: every synthetic coordinate is drawn from that
// coordinate's empirical pool values independently (with replacement by
// default), deliberately severing any residual cross-coordinate structure.
// With a pool of p distinct values per coordinate the output lives on a
// p^d grid. without_replacement requires count <= pool size.
SourceSet permute_augment(const SourceSet& pool, long count, std::uint64_t seed,
                          bool without_replacement = false);

// Coordinate-wise Gaussian fit (mean, stddev floored at sigma_floor; the
// n-1 denominator when the pool has >= 2 rows) and i.i.d. sampling from it.
SourceSet parametric_augment(const SourceSet& pool, long count, std::uint64_t seed,
                             double sigma_floor = 1e-4);

// Joint rows drawn (with replacement) from a held-out pool of genuine
// coordinates; the upper-bound reference for the other strategies.
SourceSet oracle_augment(const SourceSet& holdout, long count, std::uint64_t seed);

// Ablation: resample coordinate-wise in the observed space, then de-mix the
// synthetic rows. Returns de-mixed coordinates aligned with the others.
SourceSet feature_space_augment(const MafFlow& flow, const SourceSet& feature_pool, long count,
                                std::uint64_t seed);

}  // namespace ecrt
