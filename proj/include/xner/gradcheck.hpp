#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xner/autodiff.hpp"

namespace xner {

struct GradcheckCase {
  std::string name;
  ad::GradCheckResult result;
  double tolerance = 0.0;

  bool passed() const { return result.max_relative_error < tolerance; }
};

/// Every autodiff primitive (plus the CRF loss) on random small tensors,
/// tolerance 1e-6.
std::vector<GradcheckCase> primitive_gradchecks(std::uint64_t seed);

/// Full tagger NLL on a 3-token, 3-label sentence, dropout off, tolerance 1e-4.
GradcheckCase tagger_gradcheck(std::uint64_t seed, bool self_attention = true);

}  // namespace xner
