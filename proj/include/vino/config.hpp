#pragma once

#include "vino/damage_gen.hpp"
#include "vino/dataset_io.hpp"
#include "vino/neural_core.hpp"
#include "vino/trainer.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>

namespace vino {

/// Every tunable of the pipeline in one document. Sections: bridge (with a
/// nested damping block), vehicle, road, solver, grf, dataset, fno, train,
/// finetune. Missing keys keep their defaults; unknown keys are rejected.
struct RunConfig {
  PhysicsConfig physics;
  GrfConfig grf;
  DatasetConfig dataset;
  FnoConfig fno;
  int grid = 256;
  std::uint64_t init_seed = 1;
  TrainConfig train = default_train();
  ProblemSpec problem;
  TrainConfig finetune = default_finetune();
  FreezeSpec freeze;

  static TrainConfig default_train();
  static TrainConfig default_finetune();
  /// Problem spec and network shape for one direction.
  ProblemSpec problem_for(Direction d) const;
  FnoConfig fno_for(const ProblemSpec& spec) const;
  GrfConfig grf_for_sample() const;
};

/// Strict parse; errors carry ErrorCode::kConfig and name the offending key.
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& cfg);

/// Applies VINO_SEED, when set, to dataset.root_seed.
void apply_seed_override(RunConfig& cfg);

}  // namespace vino
