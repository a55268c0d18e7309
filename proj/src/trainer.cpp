#include "wamim/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "wamim/container.hpp"
#include "wamim/data.hpp"
#include "wamim/dwt.hpp"
#include "wamim/errors.hpp"
#include "wamim/random.hpp"

namespace wamim {

namespace {

// Independent streams for data order and augmentation; masks use the seed
// directly.
constexpr std::uint64_t kOrderStream = 0x6f72646572000000ULL;
constexpr std::uint64_t kAugmentStream = 0x6175676d656e7400ULL;

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::vector<std::uint32_t> dims32(const std::vector<std::size_t>& shape) {
  return {shape.begin(), shape.end()};
}

void load_records(ParamSet& ps, const TensorContainer& tc, const std::string& prefix) {
  for (std::size_t i = 0; i < ps.size(); ++i) {
    auto& e = ps.entry(i);
    const Record& r = tc.get(prefix + e.name);
    if (r.dtype != DType::F64 || dims32(e.value.shape) != r.dims) {
      throw FormatError("checkpoint record '" + r.name + "' has the wrong dtype or shape");
    }
    e.value.data = r.as_f64();
  }
}

}  // namespace

Sample make_sample(const RunConfig& cfg, ImageTensor image, std::uint64_t mask_seed) {
  const WaveletPyramid pyr = dwt2_multi(image, cfg.levels);
  TargetSet ts = build_targets(pyr, cfg.level_selection());
  if (cfg.normalize) ts = normalize_targets(ts, cfg.norm_epsilon);
  PatchMask pm = gen_block_mask(cfg.grid(), cfg.mask_ratio, cfg.mask_block, mask_seed);
  return {std::move(image), std::move(pm), std::move(ts)};
}

std::string format_log_line(const StepRecord& r) {
  char buf[64];
  std::string line = std::to_string(r.step);
  std::snprintf(buf, sizeof buf, "\t%.9e", r.lr);
  line += buf;
  for (const auto& lv : r.report.levels) {
    std::snprintf(buf, sizeof buf, "\t%.9e", lv.mean);
    line += buf;
  }
  std::snprintf(buf, sizeof buf, "\t%.9e", r.report.total);
  line += buf;
  return line;
}

Trainer::Trainer(RunConfig cfg, std::vector<ImageTensor> data)
    : cfg_(std::move(cfg)), data_(std::move(data)) {
  cfg_.validate();
  model_ = cfg_.model_config();
  if (data_.empty()) throw ConfigError("data.source: no training images");
  for (const auto& img : data_) {
    if (img.channels != cfg_.channels || img.rows != cfg_.image_side ||
        img.cols != cfg_.image_side) {
      throw DimensionError("training image shape does not match data.image_side/channels");
    }
  }
  schedule_ = {cfg_.peak_lr(), cfg_.warmup_steps, cfg_.steps};
}

TrainState Trainer::init() const {
  TrainState s;
  s.params = init_params(model_, cfg_.seed);
  s.opt = AdamWState::zeros_like(s.params);
  return s;
}

const std::vector<std::size_t>& Trainer::epoch_order(std::uint64_t epoch) const {
  if (epoch != cached_epoch_) {
    cached_order_.resize(data_.size());
    std::iota(cached_order_.begin(), cached_order_.end(), std::size_t{0});
    Rng rng(derive_seed(cfg_.seed ^ kOrderStream, epoch));
    rng.shuffle(cached_order_.begin(), cached_order_.end());
    cached_epoch_ = epoch;
  }
  return cached_order_;
}

Sample Trainer::sample(std::uint64_t q) const {
  const std::uint64_t n = data_.size();
  const std::size_t idx = epoch_order(q / n)[q % n];
  ImageTensor img = data_[idx];
  if (cfg_.augment) {
    Rng rng(derive_seed(cfg_.seed ^ kAugmentStream, q));
    img = augment(img, cfg_.crop_min_scale, rng);
  }
  return make_sample(cfg_, std::move(img), derive_seed(cfg_.seed, q));
}

StepRecord Trainer::step(TrainState& state) const {
  const std::uint64_t s = state.step;
  const std::size_t b = cfg_.batch_size;
  const std::size_t levels = model_.levels.size();

  std::vector<Sample> batch;
  std::vector<std::size_t> pooled(levels, 0);
  for (std::size_t i = 0; i < b; ++i) {
    batch.push_back(sample(s * b + i));
    for (std::size_t k = 0; k < levels; ++k) {
      pooled[k] += rescale_mask(batch.back().mask, model_.levels[k].side).masked_count();
    }
  }

  // Each level's batch loss is the mean over all of the batch's masked
  // cells, so item i enters with weight w_k * B * count_ik / count_k.
  ParamSet total = state.params.zeros_like();
  std::vector<LevelDistance> sums(levels);
  for (std::size_t i = 0; i < b; ++i) {
    const Sample& smp = batch[i];
    std::vector<double> item_weights(levels, 0.0);
    for (std::size_t k = 0; k < levels; ++k) {
      const std::size_t count =
          rescale_mask(smp.mask, model_.levels[k].side).masked_count();
      if (pooled[k] > 0) {
        item_weights[k] = cfg_.weights[k] * static_cast<double>(b * count) /
                          static_cast<double>(pooled[k]);
      }
    }
    LossAndGrad lg;
    try {
      lg = grad(state.params, model_, smp.image, smp.mask, smp.targets, cfg_.metric, item_weights);
    } catch (const GradientError& e) {
      throw GradientError("step " + std::to_string(s + 1) + ", batch item " + std::to_string(i) +
                          ": " + e.what());
    }
    for (std::size_t p = 0; p < total.size(); ++p) {
      auto& dst = total.entry(p).value.data;
      const auto& src = lg.grads.entry(p).value.data;
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
    }
    for (std::size_t k = 0; k < levels; ++k) {
      const auto& lv = lg.report.levels[k];
      sums[k].mean += lv.mean * static_cast<double>(lv.masked);
      sums[k].masked += lv.masked;
    }
  }
  const double inv_b = 1.0 / static_cast<double>(b);
  for (std::size_t p = 0; p < total.size(); ++p) {
    for (double& g : total.entry(p).value.data) g *= inv_b;
  }
  for (auto& lv : sums) {
    lv.mean = lv.masked > 0 ? lv.mean / static_cast<double>(lv.masked) : 0.0;
  }

  StepRecord rec;
  rec.step = s + 1;
  rec.lr = schedule_.at(s);
  rec.report = make_report(std::move(sums), cfg_.weights);
  if (!std::isfinite(rec.report.total)) {
    throw GradientError("non-finite loss at step " + std::to_string(rec.step));
  }

  AdamWHyper h{cfg_.beta1, cfg_.beta2, cfg_.eps, cfg_.weight_decay};
  state.opt.step(state.params, total, rec.lr, h);
  state.step = s + 1;
  return rec;
}

std::filesystem::path checkpoint_dir(const std::filesystem::path& out, std::uint64_t step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "step_%06llu", static_cast<unsigned long long>(step));
  return out / "checkpoints" / buf;
}

void save_checkpoint(const std::filesystem::path& dir, const TrainState& state,
                     const RunConfig& cfg) {
  std::filesystem::create_directories(dir);
  TensorContainer params, opt;
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : state.params.entries()) {
    params.add_f64(e.name, dims32(e.value.shape), e.value.data);
    entries.push_back({{"name", e.name}, {"shape", e.value.shape}, {"trainable", e.trainable}});
  }
  for (const auto& e : state.opt.m.entries()) opt.add_f64("m/" + e.name, dims32(e.value.shape), e.value.data);
  for (const auto& e : state.opt.v.entries()) opt.add_f64("v/" + e.name, dims32(e.value.shape), e.value.data);
  params.write(dir / "params.wtns");
  opt.write(dir / "optimizer.wtns");

  nlohmann::json manifest = {
      {"format", "wamim-checkpoint"},
      {"version", 1},
      {"step", state.step},
      {"adam_t", state.opt.t},
      {"seed", cfg.seed},
      {"config_hash", hex64(cfg.hash())},
      {"params", entries},
  };
  std::ofstream out(dir / "manifest.json", std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint manifest in " + dir.string());
  out << manifest.dump(2) << "\n";
}

TrainState load_checkpoint(const std::filesystem::path& dir, const RunConfig& cfg) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw IoError("no checkpoint manifest in " + dir.string());
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad checkpoint manifest: ") + e.what());
  }
  if (manifest.value("format", "") != "wamim-checkpoint" || manifest.value("version", 0) != 1) {
    throw FormatError("not a wamim checkpoint: " + dir.string());
  }
  if (manifest.value("config_hash", "") != hex64(cfg.hash())) {
    throw ConfigError("checkpoint " + dir.string() + " was written under a different config");
  }
  TrainState s;
  s.params = make_param_layout(cfg.model_config());
  s.opt = AdamWState::zeros_like(s.params);
  load_records(s.params, TensorContainer::read(dir / "params.wtns"), "");
  const TensorContainer opt = TensorContainer::read(dir / "optimizer.wtns");
  load_records(s.opt.m, opt, "m/");
  load_records(s.opt.v, opt, "v/");
  s.step = manifest.at("step").get<std::uint64_t>();
  s.opt.t = manifest.at("adam_t").get<std::uint64_t>();
  return s;
}

std::vector<ImageTensor> load_training_data(const RunConfig& cfg) {
  if (cfg.source == "synthetic") {
    return synth_corpus(cfg.synthetic_count, cfg.image_side, cfg.channels, cfg.seed);
  }
  return load_image_dir(cfg.source, cfg.image_side, cfg.channels);
}

PretrainResult run_pretrain(const RunConfig& cfg, const std::filesystem::path& out,
                            const PretrainOptions& opts) {
  Trainer trainer(cfg, load_training_data(cfg));
  std::filesystem::create_directories(out);
  {
    std::ofstream c(out / "config.ini", std::ios::trunc);
    if (!c) throw IoError("cannot write " + (out / "config.ini").string());
    c << cfg.to_ini();
  }

  TrainState state = opts.resume ? load_checkpoint(*opts.resume, cfg) : trainer.init();

  // Keep log lines up to the resume point, drop anything after it.
  const auto log_path = out / "train.log";
  std::vector<std::string> kept;
  if (opts.resume) {
    std::ifstream old(log_path);
    std::string line;
    while (std::getline(old, line)) {
      if (!line.empty() && std::stoull(line.substr(0, line.find('\t'))) <= state.step) {
        kept.push_back(line);
      }
    }
  }
  std::ofstream log(log_path, std::ios::trunc);
  if (!log) throw IoError("cannot write " + log_path.string());
  for (const auto& l : kept) log << l << "\n";

  const std::uint64_t last = opts.stop_at ? std::min<std::uint64_t>(*opts.stop_at, cfg.steps)
                                          : cfg.steps;
  PretrainResult result;
  if (state.step == 0 && last == 0) save_checkpoint(checkpoint_dir(out, 0), state, cfg);
  while (state.step < last) {
    StepRecord rec = trainer.step(state);
    log << format_log_line(rec) << "\n";
    if (opts.on_step) opts.on_step(rec);
    const bool periodic = cfg.checkpoint_every > 0 && state.step % cfg.checkpoint_every == 0;
    if (periodic || state.step == last) save_checkpoint(checkpoint_dir(out, state.step), state, cfg);
    result.records.push_back(std::move(rec));
  }
  log.flush();
  result.final_state = std::move(state);
  return result;
}

}  // namespace wamim
