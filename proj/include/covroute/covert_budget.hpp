#pragma once

#include <cstdint>

namespace covroute {

/// End-to-end KL budget epsilon over a blocklength of n symbols.
struct CovertBudget {
  double epsilon = 0.01;
  std::int64_t n = 500;
  double delta = 0.01 / 500;  // epsilon / n, per symbol

  /// Throws NonPositiveBudget on epsilon <= 0 or n < 1.
  static CovertBudget make(double epsilon, std::int64_t n);
};

}  // namespace covroute
