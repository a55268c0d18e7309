#include "wamim/netpbm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "wamim/container.hpp"
#include "wamim/errors.hpp"

namespace wamim {

namespace {

class HeaderParser {
 public:
  explicit HeaderParser(std::span<const std::uint8_t> b) : bytes_(b) {}

  std::size_t number() {
    skip_space_and_comments();
    std::size_t v = 0;
    bool any = false;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_++] - '0');
      any = true;
      if (v > (1u << 24)) throw FormatError("netpbm header value too large");
    }
    if (!any) throw FormatError("malformed netpbm header");
    return v;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_start() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw FormatError("malformed netpbm header");
    }
    return pos_ + 1;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 2;
};

}  // namespace

std::uint8_t quantize_unit(double v) {
  const double scaled = std::round(std::clamp(v, 0.0, 1.0) * 255.0);
  return static_cast<std::uint8_t>(scaled);
}

ImageTensor decode_netpbm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    throw FormatError("unsupported image format (expected binary P5 or P6)");
  }
  const std::size_t channels = bytes[1] == '6' ? 3 : 1;
  HeaderParser hp(bytes);
  const std::size_t cols = hp.number();
  const std::size_t rows = hp.number();
  const std::size_t maxval = hp.number();
  if (maxval != 255) throw FormatError("only 8-bit netpbm (maxval 255) is supported");
  if (rows == 0 || cols == 0) throw FormatError("netpbm image has zero size");
  const std::size_t start = hp.raster_start();
  if (bytes.size() - start < rows * cols * channels) throw FormatError("netpbm raster truncated");

  ImageTensor img(channels, rows, cols);
  const std::uint8_t* px = bytes.data() + start;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      for (std::size_t ch = 0; ch < channels; ++ch) {
        img.at(ch, r, c) = static_cast<double>(*px++) / 255.0;
      }
    }
  }
  return img;
}

ImageTensor read_netpbm(const std::filesystem::path& path) {
  return decode_netpbm(read_file_bytes(path));
}

std::vector<std::uint8_t> encode_netpbm(const ImageTensor& image) {
  if (image.channels != 1 && image.channels != 3) {
    throw DimensionError("netpbm output needs 1 or 3 channels, got " +
                         std::to_string(image.channels));
  }
  const std::string header = std::string(image.channels == 3 ? "P6" : "P5") + "\n" +
                             std::to_string(image.cols) + " " + std::to_string(image.rows) +
                             "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  for (std::size_t r = 0; r < image.rows; ++r) {
    for (std::size_t c = 0; c < image.cols; ++c) {
      for (std::size_t ch = 0; ch < image.channels; ++ch) {
        out.push_back(quantize_unit(image.at(ch, r, c)));
      }
    }
  }
  return out;
}

void write_netpbm(const std::filesystem::path& path, const ImageTensor& image) {
  write_file_bytes(path, encode_netpbm(image));
}

void write_pgm_bytes(const std::filesystem::path& path, std::size_t rows, std::size_t cols,
                     std::span<const std::uint8_t> gray) {
  if (gray.size() != rows * cols) throw DimensionError("pgm byte count does not match dims");
  const std::string header =
      "P5\n" + std::to_string(cols) + " " + std::to_string(rows) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), gray.begin(), gray.end());
  write_file_bytes(path, out);
}

}  // namespace wamim
