#pragma once

// Randomized property suite behind `walign validate`.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace walign {

struct PropertyResult {
  std::string module;
  std::string name;
  bool pass = false;
  std::string detail;
  double ms = 0.0;
};

// Runs every property on instances drawn from `seed`. The callback, when
// set, sees each result as soon as it is known.
std::vector<PropertyResult> run_validation_suite(std::uint64_t seed,
                                                 const std::function<void(const PropertyResult&)>& on_result = {});

}  // namespace walign
