#include "wamim/params.hpp"

#include "wamim/errors.hpp"

namespace wamim {

Tensor::Tensor(std::vector<std::size_t> dims, double fill) : shape(std::move(dims)) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  data.assign(n, fill);
}

std::size_t ParamSet::add(std::string name, std::vector<std::size_t> shape, bool trainable,
                          bool decay) {
  if (index_.count(name)) throw StructureError("duplicate parameter '" + name + "'");
  const std::size_t i = entries_.size();
  index_.emplace(name, i);
  entries_.push_back({std::move(name), Tensor(std::move(shape)), trainable, decay});
  return i;
}

std::size_t ParamSet::index(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw StructureError("unknown parameter '" + name + "'");
  return it->second;
}

ParamSet ParamSet::zeros_like() const {
  ParamSet out = *this;
  for (auto& e : out.entries_) std::fill(e.value.data.begin(), e.value.data.end(), 0.0);
  return out;
}

std::size_t ParamSet::total_values() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.value.numel();
  return n;
}

bool ParamSet::same_layout(const ParamSet& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name != other.entries_[i].name ||
        entries_[i].value.shape != other.entries_[i].value.shape) {
      return false;
    }
  }
  return true;
}

bool ParamSet::operator==(const ParamSet& other) const {
  if (!same_layout(other)) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].value.data != other.entries_[i].value.data) return false;
  }
  return true;
}

}  // namespace wamim
