#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "oradius/harness.hpp"
#include "oradius/matrix.hpp"

namespace testing {

using oradius::ComplexMatrix;

inline ComplexMatrix rand_matrix(std::uint64_t seed, int n, const std::string& ensemble = "ginibre") {
  return oradius::gen_matrix(ensemble, n, seed).first;
}

inline int rand_dim(std::uint64_t seed) { return 2 + static_cast<int>(oradius::mix64(seed) % 7); }

inline double diff_norm(const ComplexMatrix& a, const ComplexMatrix& b) {
  return (a.data() - b.data()).norm();
}

inline double scale_of(double a, double b) { return std::max({1.0, std::abs(a), std::abs(b)}); }

}  // namespace testing
