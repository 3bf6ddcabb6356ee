#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace testing {

/// max over theta_k = 2 pi k / m of lambda_max(cos(theta) H - sin(theta) K), with
/// H, K the Hermitian and skew parts of A. Exactly the m-point grid maximum, but
/// blocks of the grid are skipped when the Lipschitz bound
/// h(theta) <= h(endpoint) + |A| |theta - endpoint| shows they cannot beat the
/// best point already seen.
inline double grid_oracle(const Eigen::MatrixXcd& a, long m = 1000000, long block = 1000) {
  const long n = a.rows();
  const Eigen::MatrixXcd h = 0.5 * (a + a.adjoint());
  const Eigen::MatrixXcd k = (a - a.adjoint()) / std::complex<double>(0.0, 2.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(n);
  auto at = [&](long j) {
    const double t = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(m);
    es.compute(std::cos(t) * h - std::sin(t) * k, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(n - 1);
  };
  const double lip = Eigen::JacobiSVD<Eigen::MatrixXcd>(a).singularValues()(0) * (1.0 + 1e-9) + 1e-300;
  const double step = 2.0 * std::numbers::pi / static_cast<double>(m);
  const long blocks = (m + block - 1) / block;
  std::vector<double> ends(blocks + 1);
  for (long b = 0; b <= blocks; ++b) ends[b] = at(std::min(b * block, m) % m);
  double best = *std::max_element(ends.begin(), ends.end());

  std::vector<std::pair<double, long>> order;
  for (long b = 0; b < blocks; ++b) {
    const long len = std::min(block, m - b * block);
    const double bound = 0.5 * (ends[b] + ends[b + 1]) + 0.5 * lip * step * static_cast<double>(len) +
                         1e-12 * lip;
    order.emplace_back(bound, b);
  }
  std::sort(order.begin(), order.end(), [](auto& x, auto& y) { return x.first > y.first; });
  for (const auto& [bound, b] : order) {
    if (bound <= best) break;
    const long lo = b * block, hi = std::min(lo + block, m);
    for (long j = lo + 1; j < hi; ++j) best = std::max(best, at(j));
  }
  return best;
}

}  // namespace testing
