#include "wamim/commands.hpp"

#include <cstdio>

#include "wamim/container.hpp"
#include "wamim/data.hpp"
#include "wamim/dwt.hpp"
#include "wamim/errors.hpp"
#include "wamim/netpbm.hpp"
#include "wamim/serialize.hpp"
#include "wamim/trainer.hpp"
#include "wamim/verify.hpp"
#include "wamim/viz.hpp"

namespace wamim {

namespace fs = std::filesystem;

namespace {

const char* image_extension(std::size_t channels) { return channels == 1 ? ".pgm" : ".ppm"; }

void write_viz(const WaveletPyramid& p, const fs::path& dir) {
  auto emit = [&](const std::string& record, const ImageTensor& band, bool detail) {
    for (std::size_t c = 0; c < band.channels; ++c) {
      const auto plane = band.channel(c);
      const auto gray = detail ? detail_to_gray(plane) : approx_to_gray(plane);
      write_pgm_bytes(dir / (record + "_c" + std::to_string(c) + ".pgm"), band.rows, band.cols, gray);
    }
  };
  for (std::size_t l = 1; l <= p.depth(); ++l) {
    for (Orientation o : kOrientations) emit(plane_record_name(l, o), p.level(l).band(o), true);
  }
  emit(kApproxRecordName, p.approx, false);
}

}  // namespace

RunConfig resolve_config(const std::optional<fs::path>& path, std::optional<std::uint64_t> seed) {
  RunConfig cfg = path ? load_config(*path) : RunConfig{};
  if (seed) cfg.seed = *seed;
  cfg.validate();
  return cfg;
}

int cmd_dwt(const DwtCommand& c, const RunConfig& cfg, std::ostream& log) {
  if (c.inverse) {
    const fs::path src = fs::is_directory(c.input) ? c.input / "pyramid.wtns" : c.input;
    const ImageTensor img = idwt2_multi(read_pyramid(TensorContainer::read(src)));
    const fs::path dst = c.out / ("reconstructed" + std::string(image_extension(img.channels)));
    fs::create_directories(c.out);
    write_netpbm(dst, img);
    log << "wrote " << dst.string() << "\n";
    return 0;
  }
  const ImageTensor img = read_netpbm(c.input);
  const std::size_t depth = c.levels.value_or(cfg.levels);
  const WaveletPyramid p = dwt2_multi(img, depth);
  TensorContainer tc;
  add_pyramid(tc, p);
  fs::create_directories(c.out);
  tc.write(c.out / "pyramid.wtns");
  log << "wrote " << (c.out / "pyramid.wtns").string() << " (" << tc.records().size()
      << " records, J=" << depth << ")\n";
  if (c.viz) {
    write_viz(p, c.out / "viz");
    log << "wrote visualizations to " << (c.out / "viz").string() << "\n";
  }
  return 0;
}

int cmd_targets(const std::optional<fs::path>& input, const RunConfig& cfg, const fs::path& out,
                std::ostream& log) {
  ImageTensor img = input ? read_netpbm(*input)
                          : synth_image(cfg.image_side, cfg.channels, cfg.seed, 0);
  if (img.channels != cfg.channels || img.rows != cfg.image_side || img.cols != cfg.image_side) {
    throw DimensionError("input image is " + std::to_string(img.channels) + "x" +
                         std::to_string(img.rows) + "x" + std::to_string(img.cols) +
                         " but the config expects " + std::to_string(cfg.channels) + "x" +
                         std::to_string(cfg.image_side) + "x" + std::to_string(cfg.image_side));
  }
  const Sample s = make_sample(cfg, std::move(img), cfg.seed);

  TensorContainer tc;
  add_targets(tc, s.targets);
  add_patch_mask(tc, s.mask);
  for (const auto& e : s.targets.entries) {
    const std::string name = scale_mask_record_name(e.values.rows);
    if (!tc.find(name)) add_scale_mask(tc, rescale_mask(s.mask, e.values.rows));
  }
  fs::create_directories(out);
  tc.write(out / "targets.wtns");

  log << "wrote " << (out / "targets.wtns").string() << "\n";
  for (std::size_t k = 0; k < s.targets.size(); ++k) {
    const auto& v = s.targets.entries[k].values;
    log << "  " << target_record_name(k + 1) << " (" << v.channels << "," << v.rows << ","
        << v.cols << ")\n";
  }
  log << "  " << patch_mask_record_name(s.mask.grid) << " masked " << s.mask.masked_count()
      << " of " << s.mask.grid * s.mask.grid << "\n";
  return 0;
}

int cmd_synth(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
  fs::create_directories(out);
  const auto corpus = synth_corpus(cfg.synthetic_count, cfg.image_side, cfg.channels, cfg.seed);
  char name[32];
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    std::snprintf(name, sizeof name, "synth_%04zu%s", i, image_extension(cfg.channels));
    write_netpbm(out / name, corpus[i]);
  }
  log << "wrote " << corpus.size() << " images to " << out.string() << "\n";
  return 0;
}

int cmd_verify(const std::string& suite, std::uint64_t seed, std::ostream& log) {
  bool ok = true;
  for (const auto& r : run_verify(suite, seed)) {
    print_report(log, r);
    ok = ok && r.passed();
  }
  log << (ok ? "verify: all checks passed\n" : "verify: FAILED\n");
  return ok ? 0 : 1;
}

int cmd_pretrain(const PretrainCommand& c, const RunConfig& cfg, std::ostream& log) {
  PretrainOptions opts;
  opts.resume = c.resume;
  opts.stop_at = c.stop_at;
  if (!c.quiet) {
    opts.on_step = [&log](const StepRecord& r) { log << format_log_line(r) << "\n"; };
  }
  const PretrainResult res = run_pretrain(cfg, c.out, opts);
  log << "pretrain: step " << res.final_state.step << " of " << cfg.steps << ", log "
      << (c.out / "train.log").string() << "\n";
  return 0;
}

}  // namespace wamim
