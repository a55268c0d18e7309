#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "wamim/commands.hpp"
#include "wamim/errors.hpp"

namespace fs = std::filesystem;

namespace {

struct Common {
  std::optional<fs::path> config;
  std::optional<std::uint64_t> seed;
  fs::path out = "out";
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "INI run configuration")->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "Override train.seed");
  app->add_option("--out", c.out, "Output directory")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wamim: wavelet-target masked image modeling at desk scale"};
  app.require_subcommand(1);

  Common common;
  int code = 0;

  auto* dwt = app.add_subcommand("dwt", "Multi-level Haar transform of a PPM/PGM image");
  wamim::DwtCommand dwt_cmd;
  add_common(dwt, common);
  dwt->add_option("input", dwt_cmd.input, "Image (or pyramid.wtns / its directory with --inverse)")
      ->required();
  dwt->add_option("-J,--levels", dwt_cmd.levels, "Decomposition depth (default: wavelet.levels)");
  dwt->add_flag("--viz", dwt_cmd.viz, "Also write per-plane grayscale PGMs");
  dwt->add_flag("--inverse", dwt_cmd.inverse, "Reconstruct an image from a pyramid container");

  auto* targets = app.add_subcommand("targets", "Build normalized targets and masks for one image");
  std::optional<fs::path> targets_input;
  add_common(targets, common);
  targets->add_option("input", targets_input, "Image (default: synthetic image 0)")
      ->check(CLI::ExistingFile);

  auto* pretrain = app.add_subcommand("pretrain", "Run the pre-training loop");
  wamim::PretrainCommand pre_cmd;
  add_common(pretrain, common);
  pretrain->add_option("--resume", pre_cmd.resume, "Checkpoint directory to resume from")
      ->check(CLI::ExistingDirectory);
  pretrain->add_option("--stop-at", pre_cmd.stop_at, "Stop after this step (checkpointed)");
  pretrain->add_flag("-q,--quiet", pre_cmd.quiet, "Do not echo log lines");

  auto* verify = app.add_subcommand("verify", "Run the property suites");
  std::string suite = "all";
  add_common(verify, common);
  verify->add_option("suite", suite, "dwt | oracle | grad | mask | loss | all")
      ->check(CLI::IsMember({"dwt", "oracle", "grad", "mask", "loss", "all"}))
      ->capture_default_str();

  auto* synth = app.add_subcommand("synth", "Write the synthetic corpus as PPM/PGM files");
  add_common(synth, common);

  CLI11_PARSE(app, argc, argv);

  try {
    const wamim::RunConfig cfg = wamim::resolve_config(common.config, common.seed);
    if (dwt->parsed()) {
      dwt_cmd.out = common.out;
      code = wamim::cmd_dwt(dwt_cmd, cfg, std::cout);
    } else if (targets->parsed()) {
      code = wamim::cmd_targets(targets_input, cfg, common.out, std::cout);
    } else if (pretrain->parsed()) {
      pre_cmd.out = common.out;
      code = wamim::cmd_pretrain(pre_cmd, cfg, std::cout);
    } else if (verify->parsed()) {
      code = wamim::cmd_verify(suite, cfg.seed, std::cout);
    } else if (synth->parsed()) {
      code = wamim::cmd_synth(cfg, common.out, std::cout);
    }
  } catch (const wamim::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return code;
}
