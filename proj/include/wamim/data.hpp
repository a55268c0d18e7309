#pragma once

// Training data: the procedural corpus, directory ingestion and the two
// augmentations (random square crop resized back bilinearly, horizontal
// flip).

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "wamim/image.hpp"
#include "wamim/random.hpp"

namespace wamim {

// side x side image: per-channel affine gradient plus two sinusoidal
// gratings with random frequency (1 .. side/4 cycles), orientation, phase
// and per-channel gain, clamped to [0, 1]. Draws come from
// Rng(derive_seed(seed, index)) in a fixed order.
ImageTensor synth_image(std::size_t side, std::size_t channels, std::uint64_t seed,
                        std::uint64_t index);
std::vector<ImageTensor> synth_corpus(std::size_t count, std::size_t side, std::size_t channels,
                                      std::uint64_t seed);

// Every .ppm/.pgm in the directory, sorted by filename. All images must
// share the given shape.
std::vector<ImageTensor> load_image_dir(const std::filesystem::path& dir, std::size_t side,
                                        std::size_t channels);

ImageTensor resize_bilinear(const ImageTensor& src, std::size_t rows, std::size_t cols);
ImageTensor hflip(const ImageTensor& src);

// Crop area fraction uniform in [min_scale, 1], offset uniform, then flip
// with probability 1/2. Output keeps the input shape.
ImageTensor augment(const ImageTensor& src, double min_scale, Rng& rng);

}  // namespace wamim
