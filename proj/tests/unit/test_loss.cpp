#include <cmath>

#include "doctest.h"
#include "support.hpp"
#include "wamim/errors.hpp"
#include "wamim/loss.hpp"
#include "wamim/masking.hpp"

using namespace wamim;

namespace {

ScaleMask single_masked_cell() {
  return rescale_mask(PatchMask::from_flags(1, {1}), 1);
}

double loop_mean(const ImageTensor& p, const ImageTensor& t, const ScaleMask& m, Metric metric) {
  double acc = 0.0;
  int n = 0;
  for (std::size_t c = 0; c < p.channels; ++c) {
    for (std::size_t y = 0; y < m.side; ++y) {
      for (std::size_t x = 0; x < m.side; ++x) {
        if (!m.masked(y, x)) continue;
        const double d = p.at(c, y, x) - t.at(c, y, x);
        acc += metric == Metric::L1 ? std::fabs(d) : d * d;
        ++n;
      }
    }
  }
  return acc / n;
}

}  // namespace

TEST_CASE("1x1 masked cell") {
  ImageTensor p(1, 1, 1, 3.0), t(1, 1, 1, 1.0);
  CHECK(masked_distance(p, t, single_masked_cell(), Metric::L2).mean == 4.0);
  CHECK(masked_distance(p, t, single_masked_cell(), Metric::L1).mean == 2.0);
  CHECK(masked_distance(p, t, single_masked_cell(), Metric::L1).masked == 1);
}

TEST_CASE("equality on masked cells gives zero") {
  const PatchMask pm = gen_block_mask(8, 0.5, 2, 4);
  const ScaleMask sm = rescale_mask(pm, 8);
  const ImageTensor t = testing::random_image(3, 8, 8, 1);
  ImageTensor p = testing::random_image(3, 8, 8, 2);
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < 64; ++i) {
      if (sm.flags[i]) p.channel(c)[i] = t.channel(c)[i];
    }
  }
  CHECK(masked_distance(p, t, sm, Metric::L2).mean == 0.0);
  CHECK(masked_distance(p, t, sm, Metric::L1).mean == 0.0);
}

TEST_CASE("random 8x8 against a loop reference") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const ScaleMask sm = rescale_mask(gen_block_mask(8, 0.6, 2, s), 8);
    const ImageTensor p = testing::random_image(3, 8, 8, 100 + s), t = testing::random_image(3, 8, 8, 200 + s);
    for (Metric m : {Metric::L1, Metric::L2}) {
      CHECK(std::abs(masked_distance(p, t, sm, m).mean - loop_mean(p, t, sm, m)) < 1e-12);
    }
  }
}

TEST_CASE("gradient of the masked mean") {
  const ScaleMask sm = rescale_mask(gen_block_mask(4, 0.5, 1, 3), 4);
  const ImageTensor p = testing::random_image(2, 4, 4, 5), t = testing::random_image(2, 4, 4, 6);
  for (Metric m : {Metric::L1, Metric::L2}) {
    const ImageTensor g = masked_distance_grad(p, t, sm, m, 2.0);
    for (std::size_t i = 0; i < p.data.size(); ++i) {
      ImageTensor up = p, down = p;
      up.data[i] += 1e-6;
      down.data[i] -= 1e-6;
      const double fd = 2.0 * (masked_distance(up, t, sm, m).mean - masked_distance(down, t, sm, m).mean) / 2e-6;
      CHECK(g.data[i] == doctest::Approx(fd).epsilon(1e-6));
      if (!sm.flags[i % 16]) CHECK(g.data[i] == 0.0);
    }
  }
  ImageTensor same(1, 1, 1, 1.0);
  CHECK(masked_distance_grad(same, same, single_masked_cell(), Metric::L1, 1.0).data[0] == 0.0);
}

TEST_CASE("loss errors") {
  const ScaleMask none = rescale_mask(PatchMask::all_visible(4), 4);
  const ImageTensor a(1, 4, 4);
  CHECK_THROWS_AS(masked_distance(a, a, none, Metric::L2), DegenerateError);
  CHECK_THROWS_AS(masked_distance(a, ImageTensor(2, 4, 4), none, Metric::L2), DimensionError);
  CHECK_THROWS_AS(masked_distance(a, a, single_masked_cell(), Metric::L2), DimensionError);
  const std::vector<LevelDistance> two(2, LevelDistance{1.0, 1});
  const std::vector<double> three{1, 1, 1};
  CHECK_THROWS_AS(total_loss(two, three), ConfigError);
  CHECK_THROWS_AS(parse_metric("l3"), ConfigError);
  CHECK(parse_metric("l1") == Metric::L1);
  CHECK(std::string(metric_name(Metric::L2)) == "l2");
}

TEST_CASE("weighted totals") {
  const std::vector<LevelDistance> ones(4, LevelDistance{1.0, 3});
  const std::vector<double> ramp{0.8, 0.9, 1.1, 1.2}, uniform{1, 1, 1, 1}, zeros{0, 0, 0, 0};
  CHECK(total_loss(ones, ramp) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(total_loss(ones, uniform) == 4.0);
  CHECK(total_loss(ones, zeros) == 0.0);
  const std::vector<LevelDistance> single{LevelDistance{0.37, 5}};
  const std::vector<double> w1{1.0};
  CHECK(total_loss(single, w1) == 0.37);
  const LossReport r = make_report(ones, ramp);
  CHECK(r.total == total_loss(ones, ramp));
  CHECK(r.levels.size() == 4);
}
