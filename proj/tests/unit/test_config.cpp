#include "doctest.h"
#include "wamim/config.hpp"
#include "wamim/errors.hpp"

#ifndef WAMIM_SOURCE_DIR
#define WAMIM_SOURCE_DIR "."
#endif

using namespace wamim;

TEST_CASE("defaults are the desk reference run") {
  const RunConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.grid() == 8);
  CHECK(c.peak_lr() == doctest::Approx(1e-3 * 8 / 256));
  const ModelConfig m = c.model_config();
  CHECK(m.levels.size() == 4);
  CHECK(m.levels[0] == LevelGeometry{16, 9});
  CHECK(m.levels[3] == LevelGeometry{2, 12});
  CHECK(m.taps == std::vector<std::size_t>{2, 4, 6, 8});
}

TEST_CASE("parse overrides, comments and canonical text") {
  const RunConfig c = parse_config_text(
      "; leading comment\n"
      "[mask]\nratio = 0.6\nblock = 1\n"
      "[loss]\nmetric = l1\nweights = 1, 1, 1, 1\n"
      "[train]\nseed = 99\n");
  CHECK(c.mask_ratio == 0.6);
  CHECK(c.mask_block == 1);
  CHECK(c.metric == Metric::L1);
  CHECK(c.seed == 99);
  CHECK(c.weights == std::vector<double>{1, 1, 1, 1});
  const RunConfig again = parse_config_text(c.to_ini());
  CHECK(again.to_ini() == c.to_ini());
  CHECK(again.hash() == c.hash());
  CHECK(c.hash() != RunConfig{}.hash());
}

TEST_CASE("shipped configs load") {
  const RunConfig desk = load_config(WAMIM_SOURCE_DIR "/configs/desk_reference.ini");
  CHECK(desk.to_ini() == RunConfig{}.to_ini());
  const RunConfig vit = load_config(WAMIM_SOURCE_DIR "/configs/vit_base.ini");
  CHECK(vit.grid() == 14);
  CHECK(vit.selected_levels == std::vector<std::size_t>{2, 3, 4, 5});
  CHECK(vit.taps == std::vector<std::size_t>{3, 6, 9, 12});
  CHECK(vit.model_config().levels[3] == LevelGeometry{7, 12});
  CHECK(vit.peak_lr() == doctest::Approx(2e-4 * 2048 / 256));
}

TEST_CASE("every rejection names its key") {
  auto rejects = [](const std::string& text, const char* key) {
    CHECK_THROWS_WITH_AS(parse_config_text(text), doctest::Contains(key), ConfigError);
  };
  rejects("[mask]\nratio = 1.5\n", "mask.ratio");
  rejects("[mask]\nratio = 0.001\n", "mask.ratio");
  rejects("[mask]\nblock = 9\n", "mask.block");
  rejects("[model]\npatch = 5\n", "model.patch");
  rejects("[model]\nheads = 3\n", "model.heads");
  rejects("[model]\ntaps = 2, 4, 6\n", "model.taps");
  rejects("[model]\ntaps = 4, 2, 6, 8\n", "model.taps");
  rejects("[wavelet]\nlevels = 6\n", "wavelet.levels");
  rejects("[wavelet]\nselected_levels = 1, 2, 3\n", "wavelet.selected_levels");
  rejects("[loss]\nweights = 1, 1, 1, -1\n", "loss.weights");
  rejects("[loss]\nmetric = huber\n", "metric");
  rejects("[optim]\nbeta2 = 1.0\n", "optim.beta2");
  rejects("[optim]\nwarmup_steps = 1000\n", "optim.warmup_steps");
  rejects("[train]\nbatch_size = 0\n", "train.batch_size");
  rejects("[data]\nimage_side = 30\n", "wavelet.levels");
  rejects("[data]\nchannels = 0\n", "data.channels");
  rejects("[data]\ncrop_min_scale = 0\n", "data.crop_min_scale");
  rejects("[data]\ncolour = red\n", "colour");
  rejects("[train]\nsteps = many\n", "steps");
  CHECK_THROWS_AS(load_config("/nonexistent/wamim.ini"), Error);
}
