#include <string>

#include "doctest.h"
#include "support.hpp"
#include "wamim/errors.hpp"
#include "wamim/netpbm.hpp"
#include "wamim/viz.hpp"

using namespace wamim;

namespace {

std::vector<std::uint8_t> bytes_of(const std::string& header, std::vector<std::uint8_t> raster) {
  std::vector<std::uint8_t> b(header.begin(), header.end());
  b.insert(b.end(), raster.begin(), raster.end());
  return b;
}

}  // namespace

TEST_CASE("decode P5 and P6 with comments") {
  const ImageTensor g = decode_netpbm(bytes_of("P5\n# comment\n2 1\n255\n", {0, 255}));
  CHECK(g.channels == 1);
  CHECK(g.cols == 2);
  CHECK(g.data == std::vector<double>{0.0, 1.0});

  const ImageTensor c = decode_netpbm(bytes_of("P6 1 2 255\n", {255, 0, 51, 0, 102, 0}));
  CHECK(c.channels == 3);
  CHECK(c.rows == 2);
  CHECK(c.at(0, 0, 0) == 1.0);
  CHECK(c.at(2, 0, 0) == 0.2);
  CHECK(c.at(1, 1, 0) == 0.4);
}

TEST_CASE("encode then decode is lossless on 8-bit values") {
  ImageTensor img(3, 4, 5);
  for (std::size_t i = 0; i < img.data.size(); ++i) img.data[i] = static_cast<double>(i % 256) / 255.0;
  CHECK(decode_netpbm(encode_netpbm(img)).data == img.data);
  ImageTensor gray(1, 3, 3, 0.5);
  const auto enc = encode_netpbm(gray);
  CHECK(enc[0] == 'P');
  CHECK(enc[1] == '5');
  CHECK(quantize_unit(0.5) == 128);
  CHECK(quantize_unit(-1.0) == 0);
  CHECK(quantize_unit(2.0) == 255);

  const auto dir = testing::scratch("netpbm");
  write_netpbm(dir / "a.ppm", img);
  CHECK(read_netpbm(dir / "a.ppm").data == img.data);
}

TEST_CASE("netpbm errors") {
  CHECK_THROWS_AS(decode_netpbm(bytes_of("P3\n1 1\n255\n", {1, 2, 3})), FormatError);
  CHECK_THROWS_AS(decode_netpbm(bytes_of("P2\n1 1\n255\n", {1})), FormatError);
  CHECK_THROWS_AS(decode_netpbm(bytes_of("P5\n1 1\n65535\n", {1, 2})), FormatError);
  CHECK_THROWS_AS(decode_netpbm(bytes_of("P5\n2 2\n255\n", {1, 2, 3})), FormatError);
  CHECK_THROWS_AS(decode_netpbm(bytes_of("P5\n", {})), FormatError);
  CHECK_THROWS_AS(encode_netpbm(ImageTensor(2, 2, 2)), DimensionError);
  CHECK_THROWS_AS(read_netpbm("/nonexistent/wamim.ppm"), IoError);
}

TEST_CASE("visualization mapping") {
  const std::vector<double> zero(9, 0.0);
  for (auto v : detail_to_gray(zero)) CHECK(v == 128);
  const std::vector<double> signed_vals{-2.0, 0.0, 1.0, 2.0};
  const auto d = detail_to_gray(signed_vals);
  CHECK(d[0] == 1);
  CHECK(d[1] == 128);
  CHECK(d[3] == 255);
  CHECK(d[2] == 192);  // 128 + 63.5 rounds half up
  const std::vector<double> ramp{3.0, 4.0, 5.0};
  const auto a = approx_to_gray(ramp);
  CHECK(a[0] == 0);
  CHECK(a[1] == 128);
  CHECK(a[2] == 255);
  const std::vector<double> flat(4, 7.0);
  for (auto v : approx_to_gray(flat)) CHECK(v == 0);
}
