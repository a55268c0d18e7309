#include "doctest.h"
#include "support.hpp"
#include "wamim/data.hpp"
#include "wamim/dwt.hpp"
#include "wamim/errors.hpp"
#include "wamim/netpbm.hpp"

using namespace wamim;

TEST_CASE("synthetic images are deterministic, bounded and band-rich") {
  const ImageTensor a = synth_image(32, 3, 0, 5), b = synth_image(32, 3, 0, 5);
  CHECK(a.data == b.data);
  CHECK(synth_image(32, 3, 0, 6).data != a.data);
  CHECK(synth_image(32, 3, 1, 5).data != a.data);
  for (double v : a.data) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  // Across a small corpus every detail level carries energy.
  const auto corpus = synth_corpus(16, 32, 3, 0);
  CHECK(corpus.size() == 16);
  CHECK(corpus[5].data == a.data);
  std::vector<double> level_energy(4, 0.0);
  for (const auto& img : corpus) {
    const WaveletPyramid p = dwt2_multi(img, 4);
    for (std::size_t l = 1; l <= 4; ++l) {
      for (Orientation o : kOrientations) level_energy[l - 1] += energy(p.level(l).band(o));
    }
  }
  for (double e : level_energy) CHECK(e > 1e-3);
}

TEST_CASE("flip and resize") {
  const ImageTensor x = testing::random_image(3, 6, 5, 2);
  const ImageTensor f = hflip(x);
  CHECK(f.at(1, 2, 0) == x.at(1, 2, 4));
  CHECK(hflip(f).data == x.data);
  CHECK(max_abs_diff(resize_bilinear(x, 6, 5), x) < 1e-15);
  const ImageTensor up = resize_bilinear(ImageTensor(1, 2, 2, 0.25), 7, 3);
  CHECK(up.rows == 7);
  for (double v : up.data) CHECK(v == doctest::Approx(0.25));
}

TEST_CASE("augmentation keeps the shape and is seed-driven") {
  const ImageTensor x = synth_image(32, 3, 0, 1);
  Rng r1(4), r2(4);
  const ImageTensor a = augment(x, 0.5, r1), b = augment(x, 0.5, r2);
  CHECK(a.same_shape(x));
  CHECK(a.data == b.data);
  Rng r3(5);
  CHECK(augment(x, 0.5, r3).data != a.data);
  Rng r4(6);
  const ImageTensor full = augment(x, 1.0, r4);
  // min_scale 1 leaves only the optional flip.
  CHECK((max_abs_diff(full, x) < 1e-12 || max_abs_diff(full, hflip(x)) < 1e-12));
}

TEST_CASE("image directory ingestion") {
  const auto dir = testing::scratch("data");
  const ImageTensor a(3, 8, 8, 0.2), b(3, 8, 8, 0.6);
  write_netpbm(dir / "b.ppm", b);
  write_netpbm(dir / "a.ppm", a);
  const auto imgs = load_image_dir(dir, 8, 3);
  REQUIRE(imgs.size() == 2);
  CHECK(imgs[0].data == decode_netpbm(encode_netpbm(a)).data);
  CHECK_THROWS_AS(load_image_dir(dir, 16, 3), DimensionError);
  CHECK_THROWS_AS(load_image_dir(dir / "missing", 8, 3), IoError);
  const auto empty = testing::scratch("data_empty");
  CHECK_THROWS_AS(load_image_dir(empty, 8, 3), IoError);
}
