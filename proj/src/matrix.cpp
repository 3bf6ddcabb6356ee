#include "oradius/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "oradius/error.hpp"

namespace oradius {

namespace {

bool all_finite(const Eigen::MatrixXcd& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) return false;
  return true;
}

Eigen::MatrixXcd symmetrized(const Eigen::MatrixXcd& h) { return 0.5 * (h + h.adjoint()); }

void require_hermitian(const ComplexMatrix& h, const char* where) {
  const double res = symmetry_residual(h);
  if (!(res <= kHermitianTol))
    throw Error(ErrorKind::NotHermitian,
                std::string(where) + ": relative symmetry residual " + std::to_string(res));
}

ComplexMatrix spectral_map(const Eigen::VectorXd& values, const Eigen::MatrixXcd& basis,
                           const ScalarFn& f) {
  Eigen::VectorXd mapped(values.size());
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    mapped(i) = f(values(i));
    if (!std::isfinite(mapped(i)))
      throw Error(ErrorKind::Overflow, "function value not finite at eigenvalue " +
                                           std::to_string(values(i)));
  }
  Eigen::MatrixXcd out = basis * mapped.asDiagonal() * basis.adjoint();
  return ComplexMatrix(symmetrized(out));
}

}  // namespace

ComplexMatrix::ComplexMatrix(Eigen::MatrixXcd m) : m_(std::move(m)) {
  if (m_.rows() < 1 || m_.rows() != m_.cols())
    throw Error(ErrorKind::DimensionMismatch,
                "matrix must be square and non-empty, got " + std::to_string(m_.rows()) + "x" +
                    std::to_string(m_.cols()));
  if (!all_finite(m_)) throw Error(ErrorKind::NonFinite, "matrix has non-finite entries");
}

ComplexMatrix::ComplexMatrix(std::initializer_list<std::initializer_list<cplx>> rows)
    : ComplexMatrix([&] {
        const auto n = static_cast<Eigen::Index>(rows.size());
        Eigen::MatrixXcd m(n, n);
        Eigen::Index i = 0;
        for (const auto& row : rows) {
          if (static_cast<Eigen::Index>(row.size()) != n)
            throw Error(ErrorKind::DimensionMismatch, "ragged initializer");
          Eigen::Index j = 0;
          for (const auto& v : row) m(i, j++) = v;
          ++i;
        }
        return m;
      }()) {}

ComplexMatrix ComplexMatrix::identity(int n) {
  return ComplexMatrix(Eigen::MatrixXcd::Identity(n, n));
}

ComplexMatrix ComplexMatrix::zero(int n) { return ComplexMatrix(Eigen::MatrixXcd::Zero(n, n)); }

ComplexMatrix ComplexMatrix::diagonal(const std::vector<cplx>& d) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return ComplexMatrix(std::move(m));
}

ComplexMatrix ComplexMatrix::diagonal(const std::vector<double>& d) {
  return diagonal(std::vector<cplx>(d.begin(), d.end()));
}

ComplexMatrix operator+(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.dim() != b.dim()) throw Error(ErrorKind::DimensionMismatch, "operator+");
  return ComplexMatrix(a.m_ + b.m_);
}

ComplexMatrix operator-(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.dim() != b.dim()) throw Error(ErrorKind::DimensionMismatch, "operator-");
  return ComplexMatrix(a.m_ - b.m_);
}

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.dim() != b.dim()) throw Error(ErrorKind::DimensionMismatch, "operator*");
  return ComplexMatrix(a.m_ * b.m_);
}

ComplexMatrix operator*(cplx s, const ComplexMatrix& a) { return ComplexMatrix(s * a.m_); }
ComplexMatrix operator*(double s, const ComplexMatrix& a) { return ComplexMatrix(s * a.m_); }
ComplexMatrix operator-(const ComplexMatrix& a) { return ComplexMatrix(-a.m_); }

ComplexMatrix adjoint(const ComplexMatrix& a) { return ComplexMatrix(a.data().adjoint()); }

double symmetry_residual(const ComplexMatrix& h) {
  const double scale = std::max(1.0, h.frobenius());
  return (h.data() - h.data().adjoint()).stableNorm() / scale;
}

bool is_hermitian(const ComplexMatrix& h, double rel_tol) {
  return symmetry_residual(h) <= rel_tol;
}

HermitianEig hermitian_eig(const ComplexMatrix& h) {
  require_hermitian(h, "hermitian_eig");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(symmetrized(h.data()));
  const Eigen::VectorXd& ev = es.eigenvalues();
  return HermitianEig{std::vector<double>(ev.data(), ev.data() + ev.size()),
                      ComplexMatrix(es.eigenvectors())};
}

std::vector<double> hermitian_eigenvalues(const ComplexMatrix& h) {
  require_hermitian(h, "hermitian_eigenvalues");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(symmetrized(h.data()),
                                                     Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& ev = es.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

double operator_norm(const ComplexMatrix& a) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a.data());
  return svd.singularValues()(0);
}

double hermitian_norm(const ComplexMatrix& h) {
  const auto ev = hermitian_eigenvalues(h);
  return std::max(std::abs(ev.front()), std::abs(ev.back()));
}

AbsPair abs_pair(const ComplexMatrix& a) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a.data(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd& s = svd.singularValues();
  const Eigen::MatrixXcd& u = svd.matrixU();
  const Eigen::MatrixXcd& v = svd.matrixV();
  Eigen::MatrixXcd abs = v * s.asDiagonal() * v.adjoint();
  Eigen::MatrixXcd abs_adj = u * s.asDiagonal() * u.adjoint();
  return AbsPair{ComplexMatrix(symmetrized(abs)), ComplexMatrix(symmetrized(abs_adj))};
}

ComplexMatrix abs_value(const ComplexMatrix& a) { return abs_pair(a).abs; }

ComplexMatrix func_calc(const ScalarFn& phi, const ComplexMatrix& h) {
  require_hermitian(h, "func_calc");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(symmetrized(h.data()));
  Eigen::VectorXd ev = es.eigenvalues();
  const double scale = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < 0.0) {
      if (ev(i) < -kClampTol * scale)
        throw Error(ErrorKind::DomainError,
                    "func_calc: eigenvalue " + std::to_string(ev(i)) + " is negative");
      ev(i) = 0.0;
    }
  }
  return spectral_map(ev, es.eigenvectors(), phi);
}

ComplexMatrix hermitian_apply(const ScalarFn& f, const ComplexMatrix& h) {
  require_hermitian(h, "hermitian_apply");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(symmetrized(h.data()));
  return spectral_map(es.eigenvalues(), es.eigenvectors(), f);
}

std::pair<ComplexMatrix, ComplexMatrix> cartesian_parts(const ComplexMatrix& a) {
  const Eigen::MatrixXcd& m = a.data();
  Eigen::MatrixXcd re = 0.5 * (m + m.adjoint());
  Eigen::MatrixXcd im = (m - m.adjoint()) / cplx(0.0, 2.0);
  return {ComplexMatrix(std::move(re)), ComplexMatrix(std::move(im))};
}

ComplexMatrix block_compose(const ComplexMatrix& p, const ComplexMatrix& q) {
  if (p.dim() != q.dim())
    throw Error(ErrorKind::DimensionMismatch, "block_compose: P is " + std::to_string(p.dim()) +
                                                  ", Q is " + std::to_string(q.dim()));
  const int n = p.dim();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
  m.topRightCorner(n, n) = p.data();
  m.bottomLeftCorner(n, n) = q.data();
  return ComplexMatrix(std::move(m));
}

ComplexMatrix matrix_power(const ComplexMatrix& a, int k) {
  if (k < 0) throw Error(ErrorKind::DomainError, "matrix_power: negative exponent");
  Eigen::MatrixXcd result = Eigen::MatrixXcd::Identity(a.dim(), a.dim());
  for (int i = 0; i < k; ++i) result = result * a.data();
  return ComplexMatrix(std::move(result));
}

double min_eigenvalue(const ComplexMatrix& h) { return hermitian_eigenvalues(h).front(); }

bool is_psd(const ComplexMatrix& h) {
  if (!is_hermitian(h)) return false;
  const auto ev = hermitian_eigenvalues(h);
  const double scale = std::max(std::abs(ev.front()), std::abs(ev.back()));
  return ev.front() >= -kClampTol * scale;
}

}  // namespace oradius
