#pragma once

#include <cstdlib>
#include <filesystem>
#include <string>

#include "wamim/image.hpp"
#include "wamim/random.hpp"

namespace testing {

inline wamim::ImageTensor random_image(std::size_t c, std::size_t r, std::size_t w,
                                       std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  wamim::Rng rng(seed);
  wamim::ImageTensor img(c, r, w);
  for (double& v : img.data) v = rng.uniform(lo, hi);
  return img;
}

// Fresh scratch directory under WAMIM_TEST_TMP (or the system temp dir).
inline std::filesystem::path scratch(const std::string& name) {
  const char* env = std::getenv("WAMIM_TEST_TMP");
  const std::filesystem::path root =
      env ? std::filesystem::path(env) : std::filesystem::temp_directory_path() / "wamim-tests";
  const auto dir = root / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing
