#include "wamim/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "wamim/errors.hpp"

namespace wamim {

namespace {

constexpr char kMagic[4] = {'W', 'T', 'N', 'S'};

template <typename U>
void put_le(std::vector<std::uint8_t>& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

template <typename U>
U get_le(const std::uint8_t* p) {
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(p[i]) << (8 * i);
  return v;
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : bytes_(b) {}
  bool done() const { return pos_ == bytes_.size(); }
  const std::uint8_t* take(std::size_t n) {
    if (bytes_.size() - pos_ < n) throw FormatError("tensor container truncated");
    const std::uint8_t* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }
  std::uint8_t u8() { return *take(1); }
  std::uint32_t u32() { return get_le<std::uint32_t>(take(4)); }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::size_t product(const std::vector<std::uint32_t>& dims) {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

}  // namespace

std::size_t dtype_size(DType t) {
  switch (t) {
    case DType::F32: return 4;
    case DType::F64: return 8;
    case DType::Bool: return 1;
  }
  throw FormatError("unknown dtype");
}

std::size_t Record::elements() const { return product(dims); }

std::vector<double> Record::as_f64() const {
  std::vector<double> out(elements());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::uint8_t* p = payload.data() + i * dtype_size(dtype);
    switch (dtype) {
      case DType::F64: out[i] = std::bit_cast<double>(get_le<std::uint64_t>(p)); break;
      case DType::F32: out[i] = std::bit_cast<float>(get_le<std::uint32_t>(p)); break;
      case DType::Bool: out[i] = *p ? 1.0 : 0.0; break;
    }
  }
  return out;
}

std::vector<float> Record::as_f32() const {
  if (dtype != DType::F32) throw FormatError("record '" + name + "' is not f32");
  std::vector<float> out(elements());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::bit_cast<float>(get_le<std::uint32_t>(payload.data() + 4 * i));
  }
  return out;
}

std::vector<std::uint8_t> Record::as_bool() const {
  if (dtype != DType::Bool) throw FormatError("record '" + name + "' is not bool");
  return payload;
}

void TensorContainer::add(Record r) {
  if (r.dims.size() > 255) throw FormatError("record rank exceeds 255");
  if (find(r.name)) throw FormatError("duplicate record '" + r.name + "'");
  records_.push_back(std::move(r));
}

void TensorContainer::add_f64(std::string name, std::vector<std::uint32_t> dims,
                              std::span<const double> values) {
  if (values.size() != product(dims)) throw FormatError("record '" + name + "' size mismatch");
  Record r{std::move(name), DType::F64, std::move(dims), {}};
  r.payload.reserve(values.size() * 8);
  for (double v : values) put_le(r.payload, std::bit_cast<std::uint64_t>(v));
  add(std::move(r));
}

void TensorContainer::add_f32(std::string name, std::vector<std::uint32_t> dims,
                              std::span<const float> values) {
  if (values.size() != product(dims)) throw FormatError("record '" + name + "' size mismatch");
  Record r{std::move(name), DType::F32, std::move(dims), {}};
  r.payload.reserve(values.size() * 4);
  for (float v : values) put_le(r.payload, std::bit_cast<std::uint32_t>(v));
  add(std::move(r));
}

void TensorContainer::add_bool(std::string name, std::vector<std::uint32_t> dims,
                               std::span<const std::uint8_t> flags) {
  if (flags.size() != product(dims)) throw FormatError("record '" + name + "' size mismatch");
  Record r{std::move(name), DType::Bool, std::move(dims), {}};
  for (auto f : flags) r.payload.push_back(f ? 1 : 0);
  add(std::move(r));
}

const Record* TensorContainer::find(const std::string& name) const {
  for (const auto& r : records_) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

const Record& TensorContainer::get(const std::string& name) const {
  const Record* r = find(name);
  if (!r) throw FormatError("container has no record '" + name + "'");
  return *r;
}

std::vector<std::uint8_t> TensorContainer::serialize() const {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  out.push_back(kVersion);
  for (const auto& r : records_) {
    put_le(out, static_cast<std::uint32_t>(r.name.size()));
    out.insert(out.end(), r.name.begin(), r.name.end());
    out.push_back(static_cast<std::uint8_t>(r.dtype));
    out.push_back(static_cast<std::uint8_t>(r.dims.size()));
    for (auto d : r.dims) put_le(out, d);
    out.insert(out.end(), r.payload.begin(), r.payload.end());
  }
  return out;
}

TensorContainer TensorContainer::parse(std::span<const std::uint8_t> bytes) {
  Reader in(bytes);
  const std::uint8_t* magic = in.take(4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw FormatError("not a tensor container (bad magic)");
  const std::uint8_t version = in.u8();
  if (version != kVersion) {
    throw FormatError("unsupported tensor container version " + std::to_string(version));
  }
  TensorContainer tc;
  while (!in.done()) {
    Record r;
    const std::uint32_t len = in.u32();
    const std::uint8_t* name = in.take(len);
    r.name.assign(reinterpret_cast<const char*>(name), len);
    const std::uint8_t dtype = in.u8();
    if (dtype > 2) throw FormatError("record '" + r.name + "' has unknown dtype");
    r.dtype = static_cast<DType>(dtype);
    const std::uint8_t rank = in.u8();
    for (std::uint8_t i = 0; i < rank; ++i) r.dims.push_back(in.u32());
    const std::size_t n = r.elements() * dtype_size(r.dtype);
    const std::uint8_t* payload = in.take(n);
    r.payload.assign(payload, payload + n);
    tc.add(std::move(r));
  }
  return tc;
}

void TensorContainer::write(const std::filesystem::path& path) const {
  write_file_bytes(path, serialize());
}

TensorContainer TensorContainer::read(const std::filesystem::path& path) {
  return parse(read_file_bytes(path));
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

}  // namespace wamim
