#include <doctest.h>

#include <cmath>
#include <set>

#include "oradius/bounds.hpp"
#include "oradius/error.hpp"
#include "oradius/harness.hpp"
#include "support.hpp"

using namespace oradius;
using testing::rand_dim;
using testing::rand_matrix;

namespace {
const ComplexMatrix kNil{{0, 1}, {0, 0}};
const ComplexMatrix kInv{{0, 1}, {1, 0}};

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no exception");
  return ErrorKind::IoError;
}

BoundParams with_phi(const char* spec, double alpha = 0.5, double r = 1.0) {
  BoundParams p;
  p.phi = parse_phi(spec);
  p.alpha = alpha;
  p.r = r;
  return p;
}

void check_tight(const BoundReport& r, double lhs, double rhs) {
  CAPTURE(r.bound_id);
  CHECK(r.lhs == doctest::Approx(lhs).epsilon(1e-9));
  CHECK(r.rhs == doctest::Approx(rhs).epsilon(1e-9));
  CHECK(std::abs(r.slack) <= 1e-9);
  CHECK(r.verdict == Verdict::Tight);
}

// Independent evaluation with matrix-core pieces and the radius solver.
double w_hi(const ComplexMatrix& m) { return numerical_radius(m, 1e-11 * std::max(1.0, operator_norm(m))).upper; }
double w_lo(const ComplexMatrix& m) { return numerical_radius(m, 1e-11 * std::max(1.0, operator_norm(m))).lower; }
ComplexMatrix gram(const ComplexMatrix& a) { return adjoint(a) * a; }
ComplexMatrix gram_adj(const ComplexMatrix& a) { return a * adjoint(a); }
ComplexMatrix herm(const ComplexMatrix& a) { return 0.5 * (a + adjoint(a)); }

BoundInputs identities(int n) {
  const auto id = ComplexMatrix::identity(n);
  return {{"A", id}, {"B", id}, {"C", id}, {"D", id}, {"S", id}, {"T", id}};
}
}  // namespace

TEST_CASE("catalog shape") {
  const auto& all = list_bounds();
  CHECK(all.size() == 34);
  std::set<std::string> ids;
  for (const auto& d : all) {
    CHECK_FALSE(d.roles.empty());
    CHECK_FALSE(d.statement.empty());
    ids.insert(d.id);
  }
  CHECK(ids.size() == 34);
  CHECK(find_bound("T31").needs_psi);
  CHECK(find_bound("T33i").needs_psi);
  CHECK(find_bound("T31").needs_phi);
  CHECK(find_bound("T314").input_roles(2) == std::vector<std::string>{"A1", "B1", "X1", "A2", "B2", "X2"});
  CHECK(kind_of([] { find_bound("T99"); }) == ErrorKind::UnknownBound);
}

TEST_CASE("equality witnesses") {
  BoundParams p;
  check_tight(evaluate_bound("KITT03", {{"A", kNil}}, p), 0.5, 0.5);
  check_tight(evaluate_bound("KITT05L", {{"A", kNil}}, p), 0.25, 0.25);
  check_tight(evaluate_bound("AOK", {{"A", kInv}}, p), 1.0, 1.0);
  check_tight(evaluate_bound("AOK", {{"A", kNil}}, p), 0.25, 0.25);

  for (double a : {0.0, 0.25, 0.5, 0.75, 1.0})
    check_tight(evaluate_bound("T319", {{"A", kNil}}, with_phi("power:1", a)), 0.25, 0.25);

  check_tight(evaluate_bound("T38", {{"A", kInv}}, with_phi("power:1")), 1.0, 1.0);

  auto t31 = with_phi("pnorm:2");
  t31.psi = parse_phi("pnorm:2");
  check_tight(evaluate_bound("T31", {{"A", kInv}}, t31), 1.0, 1.0);
  const auto r31 = evaluate_bound("T31", {{"A", kNil}}, t31);
  CHECK(r31.lhs == doctest::Approx(0.25));
  CHECK(r31.rhs == doctest::Approx(0.5));
  CHECK(r31.verdict == Verdict::Holds);

  auto t317 = with_phi("power:1");
  t317.fg = parse_fg("sqrt");
  check_tight(evaluate_bound("T317", identities(2), t317), 2.0, 2.0);

  const ComplexMatrix one{{1}};
  for (double a : {0.0, 1.0}) check_tight(evaluate_bound("T41", {{"P", one}, {"Q", one}}, with_phi("power:1", a)), 1.0, 1.0);
}

TEST_CASE("T317 convexity step fails for nonlinear phi") {
  // All-identity inputs with phi = t^2 and f = g = sqrt: lhs = phi(2) = 4, printed rhs = 2.
  auto p = with_phi("power:2");
  p.fg = parse_fg("sqrt");
  const auto r = evaluate_bound("T317", identities(2), p);
  CHECK(r.lhs == doctest::Approx(4.0));
  CHECK(r.rhs == doctest::Approx(2.0));
  CHECK(r.verdict == Verdict::Violated);
}

TEST_CASE("T33ii uses |X*| on the A side") {
  // A = diag(1, 0), B = cI, X = E12, alpha = 0, phi = psi = t^2/2: lhs c/2, rhs c^2/2 + 1/2.
  const double c = 0.5;
  auto p = with_phi("pnorm:2", 0.0);
  p.psi = parse_phi("pnorm:2");
  const BoundInputs in{{"A", ComplexMatrix::diagonal(std::vector<double>{1, 0})},
                       {"B", c * ComplexMatrix::identity(2)},
                       {"X", kNil}};
  const auto r = evaluate_bound("T33ii", in, p);
  CHECK(r.lhs == doctest::Approx(c / 2));
  CHECK(r.rhs == doctest::Approx(c * c / 2 + 0.5));
  CHECK(r.verdict == Verdict::Holds);
}

TEST_CASE("rhs matches direct evaluation") {
  for (std::uint64_t s = 0; s < 15; ++s) {
    const int n = rand_dim(s);
    const auto a = rand_matrix(s, n);
    const BoundInputs in{{"A", a}};
    const auto ab = abs_pair(a);
    const double na = operator_norm(a);
    const double tol = 1e-9 * std::max(1.0, na * na);

    CHECK(evaluate_bound("KITT03", in, {}).rhs == doctest::Approx(0.5 * (na + std::sqrt(operator_norm(a * a)))).epsilon(1e-10));
    CHECK(std::abs(evaluate_bound("KITT05U", in, {}).rhs - 0.5 * operator_norm(gram(a) + gram_adj(a))) <= tol);
    CHECK(std::abs(evaluate_bound("AOK", in, {}).rhs -
                   (0.25 * operator_norm(gram(a) + gram_adj(a)) + 0.5 * w_hi(a * a))) <= tol);

    const auto sq = [](double t) { return t * t; };
    const double t38 = 0.25 * operator_norm(func_calc(sq, herm(gram(a))) + func_calc(sq, herm(gram_adj(a)))) +
                       0.5 * std::pow(w_hi(a * a), 2);
    const auto r38 = evaluate_bound("T38", in, with_phi("power:2"));
    CHECK(std::abs(r38.rhs - t38) <= 1e-9 * std::max(1.0, t38));
    CHECK(std::abs(r38.lhs - std::pow(w_lo(a), 4)) <= 1e-9 * std::max(1.0, t38));
    CHECK(r38.verdict != Verdict::Violated);

    const double alpha = 0.3, r = 2.0;
    const auto pw = [](double e) { return [e](double t) { return std::pow(t, e); }; };
    const double hk2 = operator_norm(alpha * func_calc(pw(2 * r), ab.abs) + (1 - alpha) * func_calc(pw(2 * r), ab.abs_adj));
    BoundParams p;
    p.alpha = alpha;
    p.r = r;
    CHECK(std::abs(evaluate_bound("HK2", in, p).rhs - hk2) <= 1e-9 * std::max(1.0, hk2));

    const auto b = rand_matrix(s + 500, n);
    const BoundInputs ab_in{{"A", a}, {"B", b}};
    CHECK(evaluate_bound("HOLB4", ab_in, {}).rhs == doctest::Approx(4 * w_hi(a) * w_hi(b)).epsilon(1e-9));
    CHECK(evaluate_bound("FH", ab_in, {}).lhs == doctest::Approx(w_lo(a * b + b * a)).epsilon(1e-9));
  }
}

TEST_CASE("soundness on random inputs") {
  const std::vector<const char*> phis{"power:1", "power:2", "pnorm:2", "pnorm:3", "exppow:2", "logtemp:2"};
  int evaluated = 0;
  for (const auto& d : list_bounds()) {
    for (std::uint64_t s = 0; s < 6; ++s) {
      const int n = 2 + static_cast<int>(s % 3);
      BoundParams p;
      p.alpha = d.id == "T312i" ? 0.25 : 0.25 + 0.25 * static_cast<double>(s % 3);
      p.r = d.id == "T33i" ? 2.0 : 1.0 + static_cast<double>(s % 3);
      p.n = d.family ? 1 + static_cast<int>(s % 3) : 1;
      // The printed T317 only survives the convexity step for linear phi.
      const char* spec = d.id == "T317" ? "power:1" : phis[s % phis.size()];
      if (d.needs_phi) p.phi = parse_phi(spec);
      if (d.id == "T321") p.phi = parse_phi("power:2");
      if (d.needs_phi && (d.id == "T31" || d.id == "T33i" || d.id == "T33ii") && std::string(spec) == "power:1")
        p.phi = parse_phi("pnorm:2");

      BoundInputs in;
      for (const auto& role : d.input_roles(p.n)) {
        std::string ens = "ginibre";
        if ((d.id == "T312i" || d.id == "T312ii") && (role == "A" || role == "B")) ens = "psd";
        if (d.id == "T310C" && role == "X") ens = "contraction";
        in.emplace(role, rand_matrix(oradius::derive_seed(s, role.size() * 31 + role[0]), n, ens));
      }
      if (d.id == "HOLB2C") {
        const auto g = gen_matrix("commuting-pair", n, s);
        in = {{"A", g.first}, {"B", *g.second}};
      }
      CAPTURE(d.id);
      CAPTURE(s);
      const auto r = evaluate_bound(d.id, in, p);
      CHECK(r.verdict != Verdict::Violated);
      CHECK((r.verdict == Verdict::Violated) == (r.slack < -r.error_budget));
      if (r.verdict != Verdict::Overflow) {
        CHECK((r.verdict == Verdict::Tight) == (std::abs(r.slack) <= r.error_budget));
        CHECK(r.slack == doctest::Approx(r.rhs - r.lhs));
      }
      ++evaluated;
    }
  }
  CHECK(evaluated == 34 * 6);
}

TEST_CASE("precondition errors") {
  const auto a = rand_matrix(1, 3);
  const auto psd = rand_matrix(2, 3, "psd");
  CHECK(kind_of([&] { evaluate_bound("T34i", {{"A", a}}, {}); }) == ErrorKind::MissingInput);
  CHECK(kind_of([&] { evaluate_bound("AOK", {}, {}); }) == ErrorKind::MissingInput);
  CHECK(kind_of([&] { evaluate_bound("T312i", {{"A", psd}, {"B", psd}, {"X", a}}, with_phi("power:1", 0.6)); }) ==
        ErrorKind::ParamOutOfRange);
  CHECK(kind_of([&] { evaluate_bound("T312i", {{"A", a}, {"B", psd}, {"X", a}}, with_phi("power:1", 0.3)); }) ==
        ErrorKind::NotPSD);
  CHECK(kind_of([&] {
          evaluate_bound("T310C", {{"A", a}, {"B", a}, {"X", 2.0 * ComplexMatrix::identity(3)}}, with_phi("power:1"));
        }) == ErrorKind::NotContraction);
  CHECK(kind_of([&] { evaluate_bound("HOLB2C", {{"A", a}, {"B", rand_matrix(3, 3)}}, {}); }) ==
        ErrorKind::NotCommuting);
  CHECK(kind_of([&] { evaluate_bound("HOLB4", {{"A", a}, {"B", rand_matrix(3, 2)}}, {}); }) ==
        ErrorKind::DimensionMismatch);
  CHECK(kind_of([&] { evaluate_bound("T321", {{"A", a}}, with_phi("pnorm:2")); }) ==
        ErrorKind::NotSubmultiplicative);
  BoundParams k;
  k.alpha = 1.5;
  CHECK(kind_of([&] { evaluate_bound("HK1", {{"A", a}}, k); }) == ErrorKind::ParamOutOfRange);
  k.alpha = 0.5;
  k.r = 2.5;
  CHECK(kind_of([&] { evaluate_bound("POWK", {{"A", a}}, k); }) == ErrorKind::ParamOutOfRange);
  auto bad_psi = with_phi("pnorm:2");
  bad_psi.psi = parse_phi("power:1");
  CHECK(kind_of([&] { evaluate_bound("T31", {{"A", a}}, bad_psi); }) == ErrorKind::ParamOutOfRange);
  CHECK(kind_of([] { parse_fg("power:2"); }) == ErrorKind::ParamOutOfRange);
  CHECK(kind_of([] { parse_fg("cubic"); }) == ErrorKind::ParseError);
}

TEST_CASE("T36i clamps alpha") {
  const auto a = rand_matrix(4, 3);
  const auto r = evaluate_bound("T36i", {{"A", a}}, with_phi("power:1", 1e-6));
  REQUIRE(r.alpha);
  CHECK(*r.alpha == doctest::Approx(1e-3));
}

TEST_CASE("factor pairs") {
  for (const char* spec : {"sqrt", "power:0.3", "exp:0.7"}) {
    const auto fg = parse_fg(spec);
    CHECK(validate_fg(fg, default_probe_grid()));
    for (double t : {0.0, 0.5, 3.0}) CHECK(fg.f(t) * fg.g(t) == doctest::Approx(t));
  }
}

TEST_CASE("power phi scales homogeneously") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto a = rand_matrix(s, rand_dim(s));
    for (double r : {1.0, 2.0, 3.0}) {
      const auto p = with_phi(r == 1.0 ? "power:1" : r == 2.0 ? "power:2" : "power:3");
      const double c = 1.7;
      const auto r1 = evaluate_bound("T34i", {{"A", a}}, p);
      const auto r2 = evaluate_bound("T34i", {{"A", c * a}}, p);
      const double f = std::pow(c, r);
      CHECK(std::abs(r2.rhs - f * r1.rhs) <= 1e-9 * std::max(1.0, r2.rhs));
      CHECK(std::abs(r2.lhs - f * r1.lhs) <= 1e-9 * std::max(1.0, r2.rhs));
    }
  }
}

TEST_CASE("T34ii rhs is finite across alpha") {
  const auto a = rand_matrix(8, 4);
  for (const char* spec : {"power:2", "pnorm:3", "logtemp:2"}) {
    double prev = NAN;
    for (int k = 0; k <= 40; ++k) {
      const auto r = evaluate_bound("T34ii", {{"A", a}}, with_phi(spec, k / 40.0));
      CHECK(std::isfinite(r.rhs));
      if (!std::isnan(prev)) CHECK(std::abs(r.rhs - prev) <= 0.5 * std::max(1.0, prev));
      prev = r.rhs;
    }
  }
}

TEST_CASE("overflow is flagged, not saturated") {
  const auto a = 30.0 * rand_matrix(3, 3);
  const auto r = evaluate_bound("T34i", {{"A", a}}, with_phi("exppow:2"));
  CHECK(r.verdict == Verdict::Overflow);
}

TEST_CASE("KITT05L orientation") {
  const auto a = rand_matrix(6, 4);
  const auto r = evaluate_bound("KITT05L", {{"A", a}}, {});
  CHECK(r.lhs == doctest::Approx(0.25 * operator_norm(gram(a) + gram_adj(a))).epsilon(1e-10));
  CHECK(r.rhs == doctest::Approx(std::pow(w_hi(a), 2)).epsilon(1e-9));
  CHECK(r.slack >= -r.error_budget);
}

TEST_CASE("lhs_functional") {
  BoundParams p;
  CHECK(lhs_functional("KITT05U", p) == lhs_functional("AOK", p));
  CHECK(lhs_functional("T38", with_phi("power:1")) == lhs_functional("AOK", p));
  CHECK(lhs_functional("T38", with_phi("power:2")) != lhs_functional("AOK", p));
  CHECK(lhs_functional("T38", with_phi("pnorm:2")) == lhs_functional("T319", with_phi("pnorm:2")));
}

TEST_CASE("tightness_rank") {
  BoundParams p;
  p.r = 1.0;
  const std::vector<std::string> two{"KITT05U", "AOK"};
  auto rank = tightness_rank(kNil, two, p);
  CHECK(rank[0].first == "AOK");
  CHECK(rank[0].second == doctest::Approx(0.25));
  CHECK(rank[1].second == doctest::Approx(0.5));

  const std::vector<std::string> three{"KITT05U", "AOK", "BP"};
  rank = tightness_rank(kInv, three, p);
  REQUIRE(rank.size() == 3);
  CHECK(rank[0].first == "AOK");
  CHECK(rank[1].first == "BP");
  CHECK(rank[2].first == "KITT05U");
  for (const auto& [id, v] : rank) CHECK(v == doctest::Approx(1.0));

  const std::vector<std::string> mixed{"KITT05U", "EQV"};
  CHECK(kind_of([&] { tightness_rank(kNil, mixed, p); }) == ErrorKind::IncomparableBounds);

  for (std::uint64_t s = 0; s < 30; ++s) {
    const auto a = rand_matrix(s, rand_dim(s));
    const auto rk = tightness_rank(a, two, p);
    const double aok = rk[0].first == "AOK" ? rk[0].second : rk[1].second;
    const double k5 = rk[0].first == "KITT05U" ? rk[0].second : rk[1].second;
    CHECK(aok <= k5 * (1 + 1e-9));
  }
}

TEST_CASE("shared cache does not change results") {
  EvalCache cache;
  EvalOptions opts;
  opts.cache = &cache;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto a = rand_matrix(s, 4);
    for (const char* id : {"AOK", "KITT05U", "BP"}) {
      const auto x = evaluate_bound(id, {{"A", a}}, {});
      const auto y = evaluate_bound(id, {{"A", a}}, {}, opts);
      const auto z = evaluate_bound(id, {{"A", a}}, {}, opts);
      CHECK(x.rhs == y.rhs);
      CHECK(y.lhs == z.lhs);
    }
  }
}
