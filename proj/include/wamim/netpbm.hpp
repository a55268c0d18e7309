#pragma once

// Binary PGM (P5) / PPM (P6) with maxval 255. Pixels map to [0, 1] on read
// (value / 255) and back with clamping and round-to-nearest on write.

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "wamim/image.hpp"

namespace wamim {

ImageTensor read_netpbm(const std::filesystem::path& path);
ImageTensor decode_netpbm(std::span<const std::uint8_t> bytes);

// 1 channel -> P5, 3 channels -> P6.
void write_netpbm(const std::filesystem::path& path, const ImageTensor& image);
std::vector<std::uint8_t> encode_netpbm(const ImageTensor& image);

void write_pgm_bytes(const std::filesystem::path& path, std::size_t rows, std::size_t cols,
                     std::span<const std::uint8_t> gray);

std::uint8_t quantize_unit(double v);

}  // namespace wamim
