#pragma once

#include <complex>
#include <functional>
#include <initializer_list>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace oradius {

using cplx = std::complex<double>;

/// Relative symmetry residual accepted by the Hermitian-only operations.
inline constexpr double kHermitianTol = 1e-12;
/// Eigenvalues in [-kClampTol * |H|, 0) are treated as roundoff and clamped to 0.
inline constexpr double kClampTol = 1e-12;

/// Dense square complex matrix with finite entries, n >= 1.
///
/// Thin value wrapper around Eigen::MatrixXcd; every constructor enforces the
/// square / non-empty / finite invariants, so a ComplexMatrix in hand is
/// always a valid operator.
class ComplexMatrix {
 public:
  explicit ComplexMatrix(Eigen::MatrixXcd m);
  ComplexMatrix(std::initializer_list<std::initializer_list<cplx>> rows);

  static ComplexMatrix identity(int n);
  static ComplexMatrix zero(int n);
  static ComplexMatrix diagonal(const std::vector<cplx>& d);
  static ComplexMatrix diagonal(const std::vector<double>& d);

  int dim() const noexcept { return static_cast<int>(m_.rows()); }
  const Eigen::MatrixXcd& data() const noexcept { return m_; }
  cplx operator()(int i, int j) const { return m_(i, j); }

  /// Frobenius norm (overflow-safe).
  double frobenius() const { return m_.stableNorm(); }

  friend ComplexMatrix operator+(const ComplexMatrix& a, const ComplexMatrix& b);
  friend ComplexMatrix operator-(const ComplexMatrix& a, const ComplexMatrix& b);
  friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);
  friend ComplexMatrix operator*(cplx s, const ComplexMatrix& a);
  friend ComplexMatrix operator*(double s, const ComplexMatrix& a);
  friend ComplexMatrix operator-(const ComplexMatrix& a);

  bool operator==(const ComplexMatrix& o) const { return m_ == o.m_; }

 private:
  Eigen::MatrixXcd m_;
};

/// Eigendata of a Hermitian matrix: ascending eigenvalues and an orthonormal basis.
struct HermitianEig {
  std::vector<double> eigenvalues;
  ComplexMatrix basis;
};

ComplexMatrix adjoint(const ComplexMatrix& a);

/// ||H - H*||_F relative to max(1, ||H||_F).
double symmetry_residual(const ComplexMatrix& h);
bool is_hermitian(const ComplexMatrix& h, double rel_tol = kHermitianTol);

/// Throws NotHermitian when the symmetry residual exceeds kHermitianTol.
HermitianEig hermitian_eig(const ComplexMatrix& h);
std::vector<double> hermitian_eigenvalues(const ComplexMatrix& h);

/// Largest singular value.
double operator_norm(const ComplexMatrix& a);

/// max |eigenvalue| of a Hermitian matrix; equals operator_norm for such input.
double hermitian_norm(const ComplexMatrix& h);

/// Positive square root of A*A.
ComplexMatrix abs_value(const ComplexMatrix& a);

/// |A| and |A*| from one singular value decomposition.
struct AbsPair {
  ComplexMatrix abs;      // |A|  = (A*A)^{1/2}
  ComplexMatrix abs_adj;  // |A*| = (AA*)^{1/2}
};
AbsPair abs_pair(const ComplexMatrix& a);

using ScalarFn = std::function<double(double)>;

/// phi(H) for Hermitian positive semidefinite H via its eigendecomposition.
/// Slightly negative eigenvalues are clamped to zero; anything below
/// -kClampTol * |H| raises DomainError. A non-finite phi value raises Overflow.
ComplexMatrix func_calc(const ScalarFn& phi, const ComplexMatrix& h);

/// f(H) for any Hermitian H, no clamping (f must be defined on the whole spectrum).
ComplexMatrix hermitian_apply(const ScalarFn& f, const ComplexMatrix& h);

/// (Re A, Im A) with Re A = (A + A*)/2 and Im A = (A - A*)/(2i).
std::pair<ComplexMatrix, ComplexMatrix> cartesian_parts(const ComplexMatrix& a);

/// [[0, P], [Q, 0]].
ComplexMatrix block_compose(const ComplexMatrix& p, const ComplexMatrix& q);

/// A^k for integer k >= 0.
ComplexMatrix matrix_power(const ComplexMatrix& a, int k);

/// Smallest eigenvalue of a Hermitian matrix.
double min_eigenvalue(const ComplexMatrix& h);

/// True when H is Hermitian and its smallest eigenvalue is >= -kClampTol * |H|.
bool is_psd(const ComplexMatrix& h);

}  // namespace oradius
