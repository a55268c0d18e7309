#pragma once

// Double-precision property suites behind `wamim verify`.

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "wamim/model.hpp"

namespace wamim {

struct Check {
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct SuiteReport {
  std::string suite;
  std::vector<Check> checks;
  double seconds = 0.0;

  bool passed() const;
};

const std::vector<std::string>& verify_suite_names();  // dwt oracle grad mask loss

// name is one of verify_suite_names() or "all". Throws ConfigError on an
// unknown suite.
std::vector<SuiteReport> run_verify(const std::string& name, std::uint64_t seed);

void print_report(std::ostream& out, const SuiteReport& r);

struct GradCheckResult {
  std::size_t coordinates = 0;
  double max_rel_error = 0.0;
  std::string worst;  // "<param>[<index>]"
  double forward_rel_diff = 0.0;  // forward_loss vs reference_loss at the base point
};

// Central differences on randomly drawn trainable coordinates of a model
// built from cfg, evaluated with reference_loss so the difference quotient
// is not limited by the rounding of a double-valued loss.
// rel = |a - n| / max(|a|, |n|, 1e-8).
GradCheckResult finite_difference_check(const ModelConfig& cfg, std::size_t coordinates,
                                        double step, std::uint64_t seed);

}  // namespace wamim
