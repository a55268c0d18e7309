#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "wamim/commands.hpp"
#include "wamim/container.hpp"
#include "wamim/errors.hpp"
#include "wamim/netpbm.hpp"

using namespace wamim;
namespace fs = std::filesystem;

TEST_CASE("dwt command: record count, visualization and inverse") {
  const auto dir = testing::scratch("cmd_dwt");
  const ImageTensor img = testing::random_image(3, 224, 224, 3, 0.0, 1.0);
  write_netpbm(dir / "in.ppm", img);
  std::ostringstream log;
  DwtCommand c{dir / "in.ppm", 5, dir / "out", false, false};
  CHECK(cmd_dwt(c, RunConfig{}, log) == 0);
  CHECK(TensorContainer::read(dir / "out" / "pyramid.wtns").records().size() == 16);

  DwtCommand inv{dir / "out", std::nullopt, dir / "back", false, true};
  CHECK(cmd_dwt(inv, RunConfig{}, log) == 0);
  const auto a = encode_netpbm(read_netpbm(dir / "in.ppm"));
  const auto b = encode_netpbm(read_netpbm(dir / "back" / "reconstructed.ppm"));
  REQUIRE(a.size() == b.size());
  int worst = 0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(int(a[i]) - int(b[i])));
  CHECK(worst <= 1);

  write_netpbm(dir / "flat.pgm", ImageTensor(1, 16, 16, 0.4));
  DwtCommand v{dir / "flat.pgm", 2, dir / "viz", true, false};
  CHECK(cmd_dwt(v, RunConfig{}, log) == 0);
  const auto h = read_file_bytes(dir / "viz" / "viz" / "L2_H_c0.pgm");
  for (std::size_t i = h.size() - 16; i < h.size(); ++i) CHECK(h[i] == 128);
  CHECK(fs::exists(dir / "viz" / "viz" / "approx_c0.pgm"));

  write_netpbm(dir / "odd.pgm", ImageTensor(1, 12, 12, 0.4));
  DwtCommand bad{dir / "odd.pgm", 3, dir / "bad", false, false};
  CHECK_THROWS_AS(cmd_dwt(bad, RunConfig{}, log), DimensionError);
}

TEST_CASE("targets command is deterministic and checks shapes") {
  const auto dir = testing::scratch("cmd_targets");
  std::ostringstream log;
  const RunConfig cfg;
  CHECK(cmd_targets(std::nullopt, cfg, dir / "a", log) == 0);
  CHECK(cmd_targets(std::nullopt, cfg, dir / "b", log) == 0);
  CHECK(read_file_bytes(dir / "a" / "targets.wtns") == read_file_bytes(dir / "b" / "targets.wtns"));
  const TensorContainer tc = TensorContainer::read(dir / "a" / "targets.wtns");
  CHECK(tc.find("target_k4"));
  CHECK(tc.find("mask_g8"));
  CHECK(tc.find("mask_s16"));
  CHECK(tc.find("mask_s2"));

  write_netpbm(dir / "small.ppm", ImageTensor(3, 16, 16, 0.5));
  CHECK_THROWS_AS(cmd_targets(dir / "small.ppm", cfg, dir / "c", log), DimensionError);
}

TEST_CASE("synth, verify and config resolution") {
  const auto dir = testing::scratch("cmd_synth");
  std::ostringstream log;
  RunConfig cfg;
  cfg.synthetic_count = 3;
  CHECK(cmd_synth(cfg, dir, log) == 0);
  CHECK(fs::exists(dir / "synth_0002.ppm"));
  CHECK(read_netpbm(dir / "synth_0000.ppm").rows == 32);

  std::ostringstream report;
  CHECK(cmd_verify("dwt", 0, report) == 0);
  CHECK(report.str().find("round-trip") != std::string::npos);
  CHECK(report.str().find("Parseval") != std::string::npos);
  CHECK_THROWS_AS(cmd_verify("bogus", 0, report), ConfigError);

  CHECK(resolve_config(std::nullopt, 12).seed == 12);
  CHECK(resolve_config(std::nullopt, std::nullopt).seed == 0);
}
