#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wamim/config.hpp"
#include "wamim/image.hpp"
#include "wamim/loss.hpp"
#include "wamim/masking.hpp"
#include "wamim/model.hpp"
#include "wamim/optim.hpp"
#include "wamim/targets.hpp"

namespace wamim {

// Everything one training example needs.
struct Sample {
  ImageTensor image;
  PatchMask mask;
  TargetSet targets;
};

// Targets (normalized when configured) and a block mask for one image.
Sample make_sample(const RunConfig& cfg, ImageTensor image, std::uint64_t mask_seed);

struct TrainState {
  ModelParams params;
  AdamWState opt;
  std::uint64_t step = 0;  // optimizer steps completed
};

struct StepRecord {
  std::uint64_t step = 0;  // 1-based
  double lr = 0.0;
  LossReport report;       // batch-averaged
};

// step \t lr \t mean_1 ... mean_K \t total
std::string format_log_line(const StepRecord& r);

// Deterministic trainer: step s draws global samples (s-1)*B .. s*B-1;
// sample q is dataset[perm_e[q mod N]] with perm_e an Rng shuffle for
// epoch e = q / N, augmented with its own stream, masked with
// derive_seed(seed, q). The trajectory is a function of (config, data,
// step) only, which is what makes checkpoint resume exact.
class Trainer {
 public:
  Trainer(RunConfig cfg, std::vector<ImageTensor> data);

  const RunConfig& config() const { return cfg_; }
  const ModelConfig& model_config() const { return model_; }

  TrainState init() const;
  Sample sample(std::uint64_t global_index) const;
  StepRecord step(TrainState& state) const;

 private:
  const std::vector<std::size_t>& epoch_order(std::uint64_t epoch) const;

  RunConfig cfg_;
  ModelConfig model_;
  std::vector<ImageTensor> data_;
  LrSchedule schedule_;
  mutable std::uint64_t cached_epoch_ = UINT64_MAX;
  mutable std::vector<std::size_t> cached_order_;
};

void save_checkpoint(const std::filesystem::path& dir, const TrainState& state,
                     const RunConfig& cfg);
// Throws ConfigError when the checkpoint was written under another config.
TrainState load_checkpoint(const std::filesystem::path& dir, const RunConfig& cfg);
std::filesystem::path checkpoint_dir(const std::filesystem::path& out, std::uint64_t step);

struct PretrainOptions {
  std::optional<std::filesystem::path> resume;  // checkpoint directory
  std::optional<std::uint64_t> stop_at;         // stop early (checkpointed)
  std::function<void(const StepRecord&)> on_step;
};

struct PretrainResult {
  std::vector<StepRecord> records;
  TrainState final_state;
};

std::vector<ImageTensor> load_training_data(const RunConfig& cfg);

// Writes <out>/config.ini, <out>/train.log and <out>/checkpoints/step_NNNNNN/.
PretrainResult run_pretrain(const RunConfig& cfg, const std::filesystem::path& out,
                            const PretrainOptions& opts = {});

}  // namespace wamim
