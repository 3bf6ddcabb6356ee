#pragma once

#include <vector>

#include "oradius/matrix.hpp"

namespace oradius {

/// A scalar known to lie in [lower, upper].
struct CertifiedValue {
  double lower = 0.0;
  double upper = 0.0;
  double width() const { return upper - lower; }
  double mid() const { return 0.5 * (lower + upper); }
  bool contains(double x) const { return lower <= x && x <= upper; }
};

struct RadiusOptions {
  int initial_grid = 257;
  int max_rounds = 60;
  /// Absorbed eigensolver error per lambda_max evaluation, relative to |A|.
  double eig_allowance = 1e-12;
};

/// Largest eigenvalue of the Hermitian part of e^{i theta} A.
double lambda_max_rotated(const ComplexMatrix& a, double theta);

/// 1e-9 * max(1, |A|).
double default_radius_tolerance(const ComplexMatrix& a);

/// Certified enclosure of the numerical radius w(A).
///
/// lambda_max(Re(e^{i theta} A)) is the support function h(theta) of the
/// numerical range, and w(A) = max_theta h(theta). The angle circle is cut
/// into cones; a cone [a, b] is bounded above by
///   min( sublinearity bound from h(a), h(b),  (h(a) + h(b))/2 + |A| (b - a)/2 )
/// and cones whose bound cannot beat the best sampled value are pruned.
/// Survivors are bisected until upper - lower <= tol. The result always
/// satisfies lower <= w(A) <= upper (up to the eigensolver allowance folded
/// into both ends). Throws ToleranceUnreachable after max_rounds.
CertifiedValue numerical_radius(const ComplexMatrix& a, double tol, const RadiusOptions& opts = {});
CertifiedValue numerical_radius(const ComplexMatrix& a);

/// Exact-spectrum shortcut for Hermitian input: w(H) = |H|. The enclosure
/// absorbs the symmetry residual (|w(A) - w(Re A)| <= |Im A|).
CertifiedValue hermitian_radius(const ComplexMatrix& h);

/// Boundary points <A x_k, x_k> for top eigenvectors x_k of Re(e^{i theta_k} A),
/// theta_k = 2 pi k / m.
std::vector<cplx> range_boundary_samples(const ComplexMatrix& a, int m);

}  // namespace oradius
