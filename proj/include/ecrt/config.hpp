#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "ecrt/augment.hpp"
#include "ecrt/flow.hpp"
#include "ecrt/objectives.hpp"

namespace ecrt {

enum class Variant { erm, iw, ecrt, ecrt_multi };
Variant variant_from_string(const std::string& s);
std::string to_string(Variant v);

struct StageHyper {
  long epochs = 200;
  long patience = 20;
  std::size_t batch = 256;
  double lr = 1e-3;
};

// Flat, JSON-round-trippable description of one experiment. Defaults depend
// on the dataset (defaults(dataset)); a config file overrides defaults and
// CLI flags override the file. Unknown keys are rejected.
struct ExperimentConfig {
  std::uint64_t seed = 1;
  std::string out_dir = "runs/out";

  // data
  std::string dataset = "toy";  // toy | extreme | mnist | file
  double val_fraction = 0.2;
  bool toy_henon = true;
  long toy_per_class = 2000;
  std::size_t extreme_classes = 1000;
  long extreme_per_class = 20;
  long extreme_val_per_class = 20;
  bool extreme_henon = true;
  std::string mnist_dir = "data/mnist";
  std::string train_prefix, val_prefix;  // dataset == file

  bool imbalance = false;
  std::vector<int> minority_classes;
  long minority_count = 0;
  long majority_count = -1;

  // variant / stages
  Variant variant = Variant::ecrt;
  int stage_from = 1, stage_to = 4;
  std::string init_checkpoint;

  // architecture
  std::vector<std::size_t> encoder_hidden;  // empty: identity encoder
  std::size_t latent_dim = 2;
  std::vector<std::size_t> predictor_hidden = {32, 32};
  std::size_t flow_blocks = 4, flow_hidden = 64, flow_layers = 2;
  std::size_t critic_embed = 16, critic_hidden = 64, critic_layers = 2;
  bool critic_label_parts = true;
  double dropout = 0.0;

  // objectives
  ContrastiveObjective objective = ContrastiveObjective::gcl;
  double rho = 1e-2;
  double lambda = 1e-3;
  bool pretrain_majority_only = true;
  bool pretrain_importance_weight = false;
  bool refine_importance_weight = false;
  std::string demix_classes = "all";  // all | majority | minority

  // augmentation
  AugmentMode aug_mode = AugmentMode::nonparametric;
  long aug_count = -1;  // -1: one majority-sized set per augmented class
  double sigma_floor = 1e-4;
  bool aug_without_replacement = false;

  StageHyper stage1, stage2, stage4;

  static ExperimentConfig defaults(const std::string& dataset);
  // Starts from defaults(j["dataset"]) and applies every key in j.
  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  void validate() const;
  std::string hash() const;  // stable fingerprint of the canonical JSON form
};

}  // namespace ecrt
