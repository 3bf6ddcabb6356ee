#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "oradius/error.hpp"
#include "oradius/orlicz.hpp"

using namespace oradius;

namespace {
std::vector<OrliczFunction> catalog() {
  return {OrliczFunction::power(1), OrliczFunction::power(2), OrliczFunction::power(3.5),
          OrliczFunction::power_normalized(1.5), OrliczFunction::power_normalized(2),
          OrliczFunction::power_normalized(3), OrliczFunction::exp_power(2), OrliczFunction::exp_power(1.5),
          OrliczFunction::log_tempered(2), OrliczFunction::log_tempered(3)};
}

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no exception");
  return ErrorKind::IoError;
}
}  // namespace

TEST_CASE("evaluate") {
  CHECK(evaluate(OrliczFunction::power(2), 3) == doctest::Approx(9));
  CHECK(evaluate(OrliczFunction::exp_power(2), 0) == 0.0);
  CHECK(evaluate(OrliczFunction::log_tempered(2), 1) == doctest::Approx(1 / std::log(std::exp(1.0) + 1)).epsilon(1e-14));
  CHECK(evaluate(OrliczFunction::log_tempered(2), 1) == doctest::Approx(0.761).epsilon(1e-3));
  CHECK(evaluate(OrliczFunction::power_normalized(3), 2) == doctest::Approx(8.0 / 3));
  CHECK(std::isinf(evaluate(OrliczFunction::exp_power(2), 40)));
  CHECK(kind_of([] { evaluate(OrliczFunction::power(2), -1); }) == ErrorKind::NegativeArgument);
}

TEST_CASE("parse_phi grammar") {
  CHECK(parse_phi("pnorm:2.0").id() == parse_phi("pnorm:2").id());
  CHECK(parse_phi("power:3").family() == OrliczFamily::Power);
  CHECK(parse_phi("exppow:2").family() == OrliczFamily::ExpPower);
  CHECK(parse_phi("logtemp:2.5").param() == 2.5);
  CHECK(kind_of([] { parse_phi("pnorm"); }) == ErrorKind::ParseError);
  CHECK(kind_of([] { parse_phi("cubic:2"); }) == ErrorKind::ParseError);
  CHECK(kind_of([] { parse_phi("pnorm:x"); }) == ErrorKind::ParseError);
  CHECK(kind_of([] { parse_phi("pnorm:1"); }) == ErrorKind::ParamOutOfRange);
  CHECK(kind_of([] { parse_phi("power:0.5"); }) == ErrorKind::ParamOutOfRange);
  CHECK(kind_of([] { parse_phi("logtemp:1.5"); }) == ErrorKind::ParamOutOfRange);
}

TEST_CASE("catalog invariants") {
  std::vector<double> grid;
  for (int i = 0; i <= 500; ++i) grid.push_back(0.1 * i);
  for (const auto& phi : catalog()) {
    CAPTURE(phi.id());
    const auto v = validate(phi, default_probe_grid());
    CHECK_MESSAGE(v.ok, v.failure);
    CHECK(validate(phi, grid).ok);
    CHECK(evaluate(phi, 0) == 0.0);
  }
  CHECK(default_probe_grid().size() == 64);
  CHECK(default_probe_grid().front() == doctest::Approx(1e-3));
  CHECK(default_probe_grid().back() == doctest::Approx(50));
}

TEST_CASE("monotone and convex on random pairs") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> U(0.0, 6.0);
  for (const auto& phi : catalog()) {
    for (int k = 0; k < 2000; ++k) {
      double u = U(rng), v = U(rng);
      if (u > v) std::swap(u, v);
      const double fu = evaluate(phi, u), fv = evaluate(phi, v), fm = evaluate(phi, 0.5 * (u + v));
      if (std::isinf(fv)) continue;
      CHECK(fu <= fv);
      CHECK(fm <= 0.5 * (fu + fv) + 1e-12 * std::max(1.0, fv));
    }
  }
}

TEST_CASE("complement") {
  CHECK(complement(OrliczFunction::power_normalized(2)).id() == "pnorm:2");
  const auto c3 = complement(OrliczFunction::power_normalized(3));
  CHECK(c3.family() == OrliczFamily::PowerNormalized);
  CHECK(c3.param() == doctest::Approx(1.5));
  CHECK(kind_of([] { complement(OrliczFunction::power(1)); }) == ErrorKind::MaximizerUnbounded);

  const auto numeric = numeric_complement(OrliczFunction::power_normalized(3));
  for (double u = 0.0; u <= 10.0; u += 0.05) {
    const double exact = std::pow(u, 1.5) / 1.5;
    CHECK(std::abs(numeric(u) - exact) <= 1e-8 * std::max(exact, 1e-300) + 1e-300);
  }
}

TEST_CASE("double numeric complement returns the original") {
  for (double p : {1.5, 3.0}) {
    const auto phi = OrliczFunction::power_normalized(p);
    const auto back = numeric_complement(numeric_complement(phi));
    for (double u = 0.1; u <= 10.0; u += 0.3) CHECK(std::abs(back(u) - phi(u)) <= 1e-6 * phi(u));
  }
}

TEST_CASE("young_gap") {
  const auto p2 = OrliczFunction::power_normalized(2);
  CHECK(std::abs(young_gap(p2, 1, 1)) < 1e-15);
  CHECK(young_gap(p2, 1, 2) == doctest::Approx(0.5));
  const auto p3 = OrliczFunction::power_normalized(3);
  CHECK(p3.kernel(2) == doctest::Approx(4));
  CHECK(std::abs(young_gap(p3, 2, 4)) <= 1e-8 * 8);
  CHECK(kind_of([&] { young_gap(p2, -1, 1); }) == ErrorKind::NegativeArgument);

  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> U(0.0, 4.0);
  const auto cat = catalog();
  for (int k = 0; k < 10000; ++k) {
    const auto& phi = cat[1 + k % (cat.size() - 1)];  // power:1 has no finite complement
    const double u = U(rng), v = U(rng);
    const double g = young_gap(phi, u, v);
    if (std::isinf(g)) continue;
    const double scale = std::max({1.0, u * v, std::abs(evaluate(phi, u))});
    CHECK(g >= -1e-9 * scale);
  }
}

TEST_CASE("bohr_check") {
  const auto sq = OrliczFunction::power(2);
  CHECK(bohr_check(sq, std::vector<double>{1, 1}));
  CHECK(bohr_check(sq, std::vector<double>{0, 2}));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0.0, 2.0);
  const auto e2 = OrliczFunction::exp_power(2);
  for (int k = 0; k < 1000; ++k) {
    std::vector<double> a(1 + k % 6);
    for (auto& x : a) x = U(rng);
    CHECK(bohr_check(e2, a));
  }
}

TEST_CASE("scaling_check") {
  const auto c = OrliczFunction::power(3);
  CHECK(scaling_check(c, 1.0, 2.0));
  CHECK(scaling_check(c, 0.0, 2.0));
  CHECK(scaling_check(c, 0.5, 2.0));
  for (const auto& phi : catalog())
    for (double a = 0; a <= 1.0; a += 0.1)
      for (double u = 0; u <= 5; u += 0.25) CHECK(scaling_check(phi, a, u));
}

TEST_CASE("submultiplicative_probe") {
  std::vector<double> grid;
  for (int i = 0; i <= 30; ++i) grid.push_back(0.1 * i);
  CHECK(submultiplicative_probe(OrliczFunction::power(2), grid));
  CHECK_FALSE(submultiplicative_probe(OrliczFunction::power_normalized(2), std::vector<double>{2.0}));
  CHECK(OrliczFunction::power(2).submultiplicative());
  CHECK_FALSE(OrliczFunction::power_normalized(2).submultiplicative());
  MESSAGE("exppow:2 submultiplicative on [0,3]: " << submultiplicative_probe(OrliczFunction::exp_power(2), grid));
}

TEST_CASE("kernel integrates to phi") {
  for (const auto& phi : catalog()) {
    if (!phi.has_kernel()) continue;
    CAPTURE(phi.id());
    // Trapezoid on a fine grid against the closed form.
    const double u = 1.7;
    const int m = 20000;
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += 0.5 * (phi.kernel(u * i / m) + phi.kernel(u * (i + 1) / m)) * (u / m);
    CHECK(s == doctest::Approx(phi(u)).epsilon(1e-6));
  }
}
