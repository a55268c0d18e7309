#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

namespace wamim {

struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> dims, double fill = 0.0);

  std::size_t numel() const { return data.size(); }
  bool operator==(const Tensor&) const = default;
};

// Ordered, named parameter tensors. Order is part of the contract: it fixes
// initialization draw order, checkpoint record order and optimizer traversal.
class ParamSet {
 public:
  struct Entry {
    std::string name;
    Tensor value;
    bool trainable = true;
    bool decay = false;  // weight decay applies (matrices only)
  };

  std::size_t add(std::string name, std::vector<std::size_t> shape, bool trainable, bool decay);

  std::size_t size() const { return entries_.size(); }
  const Entry& entry(std::size_t i) const { return entries_[i]; }
  Entry& entry(std::size_t i) { return entries_[i]; }
  const std::vector<Entry>& entries() const { return entries_; }

  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  std::size_t index(const std::string& name) const;  // throws StructureError
  const Tensor& at(const std::string& name) const { return entries_[index(name)].value; }
  Tensor& at(const std::string& name) { return entries_[index(name)].value; }

  // Same names, shapes and flags, all values zero.
  ParamSet zeros_like() const;

  std::size_t total_values() const;
  bool same_layout(const ParamSet& other) const;
  bool operator==(const ParamSet& other) const;

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace wamim
