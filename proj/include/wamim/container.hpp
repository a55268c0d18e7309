#pragma once

// Binary tensor container.
//
//   header : "WTNS" (4 bytes), version byte = 1
//   record : name length (u32 LE), name bytes (UTF-8),
//            dtype byte (0 = f32, 1 = f64, 2 = bool byte),
//            rank byte, dims (rank x u32 LE),
//            payload (row-major, little-endian, prod(dims) elements)
//
// Records follow the header back to back until end of file.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace wamim {

enum class DType : std::uint8_t { F32 = 0, F64 = 1, Bool = 2 };

std::size_t dtype_size(DType t);

struct Record {
  std::string name;
  DType dtype = DType::F64;
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> payload;  // little-endian bytes

  std::size_t elements() const;

  std::vector<double> as_f64() const;  // widens f32 and bool
  std::vector<float> as_f32() const;
  std::vector<std::uint8_t> as_bool() const;
};

class TensorContainer {
 public:
  static constexpr std::uint8_t kVersion = 1;

  void add_f64(std::string name, std::vector<std::uint32_t> dims, std::span<const double> values);
  void add_f32(std::string name, std::vector<std::uint32_t> dims, std::span<const float> values);
  void add_bool(std::string name, std::vector<std::uint32_t> dims,
                std::span<const std::uint8_t> flags);

  const std::vector<Record>& records() const { return records_; }
  const Record* find(const std::string& name) const;
  const Record& get(const std::string& name) const;  // throws FormatError

  std::vector<std::uint8_t> serialize() const;
  static TensorContainer parse(std::span<const std::uint8_t> bytes);

  void write(const std::filesystem::path& path) const;
  static TensorContainer read(const std::filesystem::path& path);

 private:
  void add(Record r);
  std::vector<Record> records_;
};

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace wamim
