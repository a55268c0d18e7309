#pragma once

// Subcommand bodies shared by the CLI and the Python bindings. Each returns a
// process exit code and writes human-readable progress to `log`.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "wamim/config.hpp"

namespace wamim {

// Defaults, then the file (if any), then a --seed override.
RunConfig resolve_config(const std::optional<std::filesystem::path>& path,
                         std::optional<std::uint64_t> seed);

struct DwtCommand {
  std::filesystem::path input;   // image, or a pyramid container when inverse
  std::optional<std::size_t> levels;
  std::filesystem::path out;
  bool viz = false;
  bool inverse = false;
};

// Forward: out/pyramid.wtns plus, with viz, out/viz/<record>_c<channel>.pgm.
// Inverse: out/reconstructed.{ppm,pgm}.
int cmd_dwt(const DwtCommand& c, const RunConfig& cfg, std::ostream& log);

// out/targets.wtns holding the target records, the patch mask and one
// rescaled mask per target side. Without an input image, synthetic image 0
// of the configured corpus is used. The mask seed is cfg.seed.
int cmd_targets(const std::optional<std::filesystem::path>& input, const RunConfig& cfg,
                const std::filesystem::path& out, std::ostream& log);

// Writes cfg.synthetic_count images as out/synth_NNNN.{ppm,pgm}.
int cmd_synth(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log);

int cmd_verify(const std::string& suite, std::uint64_t seed, std::ostream& log);

struct PretrainCommand {
  std::filesystem::path out;
  std::optional<std::filesystem::path> resume;
  std::optional<std::uint64_t> stop_at;
  bool quiet = false;
};

int cmd_pretrain(const PretrainCommand& c, const RunConfig& cfg, std::ostream& log);

}  // namespace wamim
