#include "oradius/radius.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "oradius/error.hpp"

namespace oradius {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

/// theta -> lambda_max(cos(theta) Re A - sin(theta) Im A).
class SupportFunction {
 public:
  explicit SupportFunction(const ComplexMatrix& a)
      : re_(0.5 * (a.data() + a.data().adjoint())),
        im_((a.data() - a.data().adjoint()) / cplx(0.0, 2.0)),
        h_(a.dim(), a.dim()),
        es_(a.dim()) {}

  double operator()(double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    const auto n = re_.rows();
    if (n == 1) return c * re_(0, 0).real() - s * im_(0, 0).real();
    if (n == 2) {
      const double p = c * re_(0, 0).real() - s * im_(0, 0).real();
      const double q = c * re_(1, 1).real() - s * im_(1, 1).real();
      const cplx off = c * re_(0, 1) - s * im_(0, 1);
      return 0.5 * (p + q) + std::hypot(0.5 * (p - q), std::abs(off));
    }
    h_.noalias() = c * re_ - s * im_;
    es_.compute(h_, Eigen::EigenvaluesOnly);
    return es_.eigenvalues()(n - 1);
  }

 private:
  Eigen::MatrixXcd re_, im_, h_;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es_;
};

struct Cone {
  double a, b;    // angles, b - a < pi
  double fa, fb;  // support values at a and b
};

/// Upper bound of the support function over unit directions between the two
/// normals, given (inflated) support values at the ends.
double cone_bound(const Cone& c, double inflate, double lipschitz) {
  const double ha = c.fa + inflate, hb = c.fb + inflate;
  const double h = c.b - c.a;
  const double sh = std::sin(h), ch = std::cos(h);
  // Frame with the first normal on the x axis: the apex v = (ha, tau).
  const double tau = (hb - ha * ch) / sh;
  const double t = tau / sh;
  const double s = ha - t * ch;
  const double sublinear = (s >= 0.0 && t >= 0.0) ? std::hypot(ha, tau) : std::max(ha, hb);
  const double lipschitz_bound = 0.5 * (ha + hb) + 0.5 * lipschitz * h;
  return std::min(sublinear, lipschitz_bound);
}

}  // namespace

double lambda_max_rotated(const ComplexMatrix& a, double theta) {
  SupportFunction f(a);
  return f(theta);
}

double default_radius_tolerance(const ComplexMatrix& a) {
  return 1e-9 * std::max(1.0, operator_norm(a));
}

CertifiedValue numerical_radius(const ComplexMatrix& a) {
  return numerical_radius(a, default_radius_tolerance(a));
}

CertifiedValue numerical_radius(const ComplexMatrix& a, double tol, const RadiusOptions& opts) {
  if (!(tol > 0.0)) throw Error(ErrorKind::DomainError, "numerical_radius: tol must be > 0");
  if (opts.initial_grid < 3) throw Error(ErrorKind::DomainError, "initial grid too coarse");
  const double norm = operator_norm(a);
  if (norm == 0.0) return {0.0, 0.0};
  const double eps = opts.eig_allowance * norm;

  // |A|/2 <= w(A) <= (|A| + |A^2|^(1/2))/2 settles near square-zero matrices,
  // whose numerical range is a disk and defeats cone pruning.
  const double sq = std::sqrt(operator_norm(a * a));
  if (0.5 * sq + 2.0 * eps <= tol) return {std::max(0.0, 0.5 * norm - eps), 0.5 * (norm + sq) + eps};

  SupportFunction f(a);
  const int m = opts.initial_grid;
  std::vector<double> vals(m);
  for (int k = 0; k < m; ++k) vals[k] = f(kTwoPi * k / m);

  std::vector<Cone> cones;
  cones.reserve(m);
  for (int k = 0; k < m; ++k)
    cones.push_back({kTwoPi * k / m, kTwoPi * (k + 1) / m, vals[k], vals[(k + 1) % m]});
  double best = *std::max_element(vals.begin(), vals.end());

  std::vector<Cone> next;
  std::vector<double> bounds;
  for (int round = 0; round <= opts.max_rounds; ++round) {
    const double lower = std::max(0.0, best - eps);
    bounds.resize(cones.size());
    double upper = lower;
    for (std::size_t i = 0; i < cones.size(); ++i) {
      bounds[i] = cone_bound(cones[i], eps, norm);
      upper = std::max(upper, bounds[i]);
    }
    upper += 4.0 * std::numeric_limits<double>::epsilon() * upper;
    if (upper - lower <= tol) return {lower, upper};
    if (round == opts.max_rounds) break;

    next.clear();
    for (std::size_t i = 0; i < cones.size(); ++i) {
      if (bounds[i] <= lower) continue;
      const Cone& c = cones[i];
      const double mid = 0.5 * (c.a + c.b);
      const double fm = f(mid);
      best = std::max(best, fm);
      next.push_back({c.a, mid, c.fa, fm});
      next.push_back({mid, c.b, fm, c.fb});
    }
    cones.swap(next);
  }
  throw Error(ErrorKind::ToleranceUnreachable,
              "numerical_radius: no enclosure of width " + std::to_string(tol) + " after " +
                  std::to_string(opts.max_rounds) + " rounds");
}

CertifiedValue hermitian_radius(const ComplexMatrix& h) {
  auto [re, im] = cartesian_parts(h);
  const auto ev = hermitian_eigenvalues(re);
  const double w = std::max(std::abs(ev.front()), std::abs(ev.back()));
  const double eps = 1e-12 * w + im.frobenius();
  return {std::max(0.0, w - eps), w + eps};
}

std::vector<cplx> range_boundary_samples(const ComplexMatrix& a, int m) {
  if (m < 1) throw Error(ErrorKind::DomainError, "range_boundary_samples: m must be >= 1");
  auto [re, im] = cartesian_parts(a);
  std::vector<cplx> out;
  out.reserve(m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a.dim());
  const int n = a.dim();
  for (int k = 0; k < m; ++k) {
    const double theta = kTwoPi * k / m;
    Eigen::MatrixXcd h = std::cos(theta) * re.data() - std::sin(theta) * im.data();
    es.compute(h);
    const Eigen::VectorXcd x = es.eigenvectors().col(n - 1);
    out.push_back(x.dot(a.data() * x));
  }
  return out;
}

}  // namespace oradius
