#include <doctest.h>

#include <cmath>

#include "oradius/error.hpp"
#include "oradius/matrix.hpp"
#include "support.hpp"

using namespace oradius;
using testing::diff_norm;
using testing::rand_dim;
using testing::rand_matrix;

namespace {
const cplx I{0.0, 1.0};

ComplexMatrix nilpotent() { return ComplexMatrix{{0, 1}, {0, 0}}; }

ComplexMatrix rand_unitary(std::uint64_t seed, int n) {
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(rand_matrix(seed, n).data());
  return ComplexMatrix(qr.householderQ() * Eigen::MatrixXcd::Identity(n, n));
}
}  // namespace

TEST_CASE("construction enforces square, non-empty, finite") {
  CHECK_THROWS_AS(ComplexMatrix(Eigen::MatrixXcd(2, 3)), Error);
  CHECK_THROWS_AS(ComplexMatrix(Eigen::MatrixXcd(0, 0)), Error);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2, 2);
  m(1, 0) = cplx(std::nan(""), 0.0);
  try {
    ComplexMatrix bad(m);
    FAIL("accepted NaN");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonFinite);
  }
}

TEST_CASE("adjoint") {
  CHECK(adjoint(nilpotent()) == ComplexMatrix{{0, 0}, {1, 0}});
  const ComplexMatrix h = rand_matrix(3, 4, "hermitian");
  CHECK(diff_norm(adjoint(h), h) < 1e-15);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto a = rand_matrix(s, rand_dim(s));
    CHECK(adjoint(adjoint(a)) == a);
    CHECK(adjoint(a)(0, 1) == std::conj(a(1, 0)));
  }
}

TEST_CASE("hermitian_eig") {
  auto e = hermitian_eig(ComplexMatrix::diagonal(std::vector<double>{3, -1}));
  CHECK(e.eigenvalues[0] == doctest::Approx(-1));
  CHECK(e.eigenvalues[1] == doctest::Approx(3));
  e = hermitian_eig(ComplexMatrix{{0, 1}, {1, 0}});
  CHECK(e.eigenvalues[0] == doctest::Approx(-1));
  CHECK(e.eigenvalues[1] == doctest::Approx(1));

  try {
    hermitian_eig(nilpotent());
    FAIL("accepted non-Hermitian");
  } catch (const Error& err) {
    CHECK(err.kind() == ErrorKind::NotHermitian);
  }

  for (std::uint64_t s = 0; s < 50; ++s) {
    const int n = rand_dim(s);
    const auto h = rand_matrix(s, n, "hermitian");
    const auto eig = hermitian_eig(h);
    CHECK(std::is_sorted(eig.eigenvalues.begin(), eig.eigenvalues.end()));
    const Eigen::MatrixXcd& v = eig.basis.data();
    Eigen::VectorXcd d(n);
    for (int i = 0; i < n; ++i) d(i) = eig.eigenvalues[i];
    const Eigen::MatrixXcd rec = v * d.asDiagonal() * v.adjoint();
    CHECK((rec - h.data()).norm() <= 1e-12 * std::max(1.0, operator_norm(h)) * n);
    CHECK((v.adjoint() * v - Eigen::MatrixXcd::Identity(n, n)).norm() <= 1e-12 * n);
  }
}

TEST_CASE("operator_norm") {
  CHECK(operator_norm(ComplexMatrix::diagonal(std::vector<double>{2, -5})) == doctest::Approx(5));
  CHECK(operator_norm(ComplexMatrix{{0, 3}, {0, 0}}) == doctest::Approx(3));
  // A*A = [[1,1],[1,2]] has largest eigenvalue (3 + sqrt 5)/2.
  CHECK(operator_norm(ComplexMatrix{{1, 1}, {0, 1}}) ==
        doctest::Approx(std::sqrt((3 + std::sqrt(5.0)) / 2)).epsilon(1e-14));
  CHECK(operator_norm(ComplexMatrix{{1, 1}, {0, 1}}) == doctest::Approx(1.618034).epsilon(1e-6));
}

TEST_CASE("abs_value") {
  const auto n = nilpotent();
  CHECK(diff_norm(abs_value(n), ComplexMatrix::diagonal(std::vector<double>{0, 1})) < 1e-15);
  CHECK(diff_norm(abs_value(adjoint(n)), ComplexMatrix::diagonal(std::vector<double>{1, 0})) < 1e-15);
  const auto p = rand_matrix(9, 5, "psd");
  CHECK(diff_norm(abs_value(p), p) <= 1e-12 * operator_norm(p));
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto a = rand_matrix(s, rand_dim(s));
    const auto m = abs_value(a);
    const double na = operator_norm(a);
    CHECK(diff_norm(m * m, adjoint(a) * a) <= 1e-10 * na * na);
    CHECK(is_hermitian(m));
    CHECK(min_eigenvalue(m) >= 0.0);
    const auto pr = abs_pair(a);
    CHECK(diff_norm(pr.abs_adj * pr.abs_adj, a * adjoint(a)) <= 1e-10 * na * na);
  }
}

TEST_CASE("func_calc") {
  const auto sq = [](double t) { return t * t; };
  CHECK(diff_norm(func_calc(sq, ComplexMatrix::diagonal(std::vector<double>{1, 2})),
                  ComplexMatrix::diagonal(std::vector<double>{1, 4})) < 1e-14);
  for (std::uint64_t s = 0; s < 30; ++s) {
    const auto h = rand_matrix(s, rand_dim(s), "psd");
    const double nh = operator_norm(h);
    CHECK(diff_norm(func_calc([](double t) { return t; }, h), h) <= 1e-12 * nh * h.dim());
    CHECK(diff_norm(func_calc(sq, h), h * h) <= 1e-10 * nh * nh);
  }
  // Roundoff-negative eigenvalues clamp; genuinely negative ones do not.
  const auto tiny = ComplexMatrix::diagonal(std::vector<double>{1.0, -1e-14});
  CHECK(func_calc([](double t) { return std::sqrt(t); }, tiny)(1, 1) == cplx(0.0));
  try {
    func_calc(sq, ComplexMatrix::diagonal(std::vector<double>{1.0, -0.5}));
    FAIL("accepted negative spectrum");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DomainError);
  }
  CHECK_THROWS_AS(func_calc(sq, nilpotent()), Error);
}

TEST_CASE("func_calc is unitarily covariant") {
  const auto cube = [](double t) { return t * t * t + std::sqrt(t); };
  for (std::uint64_t s = 0; s < 20; ++s) {
    const int n = rand_dim(s);
    const auto h = rand_matrix(s, n, "psd");
    const auto u = rand_unitary(s + 100, n);
    const ComplexMatrix rotated(0.5 * ((u * h * adjoint(u)).data() + (u * h * adjoint(u)).data().adjoint()));
    const auto lhs = func_calc(cube, rotated);
    const auto rhs = u * func_calc(cube, h) * adjoint(u);
    const double scale = std::max(1.0, operator_norm(rhs));
    CHECK(diff_norm(lhs, rhs) <= 1e-9 * scale);
  }
}

TEST_CASE("cartesian_parts") {
  const auto [re, im] = cartesian_parts(nilpotent());
  CHECK(diff_norm(re, ComplexMatrix{{0, 0.5}, {0.5, 0}}) < 1e-16);
  CHECK(diff_norm(im, ComplexMatrix{{0, -0.5 * I}, {0.5 * I, 0}}) < 1e-16);
  const auto h = rand_matrix(4, 3, "hermitian");
  const auto [hr, hi] = cartesian_parts(h);
  CHECK(diff_norm(hr, h) < 1e-15);
  CHECK(hi.frobenius() < 1e-15);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto a = rand_matrix(s, rand_dim(s));
    const auto [r, i] = cartesian_parts(a);
    CHECK(is_hermitian(r));
    CHECK(is_hermitian(i));
    CHECK(diff_norm(r + I * i, a) <= 1e-15 * a.frobenius());
  }
}

TEST_CASE("block_compose") {
  CHECK(block_compose(ComplexMatrix{{1}}, ComplexMatrix{{1}}) == ComplexMatrix{{0, 1}, {1, 0}});
  CHECK(block_compose(ComplexMatrix{{1}}, ComplexMatrix{{0}}) == ComplexMatrix{{0, 1}, {0, 0}});
  try {
    block_compose(ComplexMatrix::identity(2), ComplexMatrix::identity(3));
    FAIL("accepted mismatched blocks");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DimensionMismatch);
  }
  for (std::uint64_t s = 0; s < 20; ++s) {
    const int n = rand_dim(s);
    const auto p = rand_matrix(s, n), q = rand_matrix(s + 1000, n);
    Eigen::MatrixXcd expect = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
    expect.topLeftCorner(n, n) = abs_value(q).data();
    expect.bottomRightCorner(n, n) = abs_value(p).data();
    CHECK((abs_value(block_compose(p, q)).data() - expect).norm() <= 1e-10 * std::max(1.0, operator_norm(p) + operator_norm(q)));
  }
}

TEST_CASE("norm properties on samples") {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const int n = rand_dim(s);
    const auto a = rand_matrix(s, n), b = rand_matrix(s + 7777, n);
    const double na = operator_norm(a), nb = operator_norm(b);
    CHECK(std::abs(operator_norm(adjoint(a)) - na) <= 1e-10 * na);
    CHECK(operator_norm(a + b) <= na + nb + 1e-10 * (na + nb));
    CHECK(operator_norm(a * b) <= na * nb * (1 + 1e-10));
    auto ea = hermitian_eigenvalues(abs_value(a));
    auto eb = hermitian_eigenvalues(abs_value(adjoint(a)));
    for (int i = 0; i < n; ++i) CHECK(std::abs(ea[i] - eb[i]) <= 1e-10 * std::max(1.0, na));
    CHECK(hermitian_norm(rand_matrix(s, n, "hermitian")) ==
          doctest::Approx(operator_norm(rand_matrix(s, n, "hermitian"))).epsilon(1e-12));
  }
}

TEST_CASE("matrix_power") {
  const auto a = rand_matrix(5, 4);
  CHECK(matrix_power(a, 0) == ComplexMatrix::identity(4));
  CHECK(diff_norm(matrix_power(a, 3), a * a * a) <= 1e-13 * std::pow(operator_norm(a), 3));
  CHECK_THROWS_AS(matrix_power(a, -1), Error);
}
