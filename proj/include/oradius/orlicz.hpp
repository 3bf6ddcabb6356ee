#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace oradius {

enum class OrliczFamily {
  Power,            // t^r, r >= 1
  PowerNormalized,  // t^p / p, p > 1
  ExpPower,         // exp(t^r) - 1, r > 1
  LogTempered,      // t^p / ln(e + t), p >= 2
  NumericConjugate  // sup_u (u v - phi(u)) of another function
};

/// A non-degenerate Orlicz function: convex, nondecreasing, phi(0) = 0,
/// phi(u) > 0 for u > 0.
///
/// Values are immutable and cheap to copy (shared implementation). Evaluation
/// past the double range yields +infinity, which callers treat as an overflow
/// sentinel.
class OrliczFunction {
 public:
  struct Impl;

  static OrliczFunction power(double r);
  static OrliczFunction power_normalized(double p);
  static OrliczFunction exp_power(double r);
  static OrliczFunction log_tempered(double p);

  /// Catalog name, e.g. "pnorm:3" or "conj(power:2)".
  const std::string& id() const;
  OrliczFamily family() const;
  /// Family parameter (r or p); NaN for numeric conjugates.
  double param() const;

  /// Unchecked evaluation; u must be >= 0.
  double operator()(double u) const;

  bool has_kernel() const;
  /// The density p with phi(u) = integral of p over [0, u].
  double kernel(double u) const;

  std::optional<OrliczFunction> closed_form_complement() const;

  /// Sub-multiplicativity on the default probe grid (computed once, lazily).
  bool submultiplicative() const;

  explicit OrliczFunction(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  const std::shared_ptr<const Impl>& impl() const { return impl_; }

 private:
  std::shared_ptr<const Impl> impl_;
};

/// Parses "power:R", "pnorm:P", "exppow:R" or "logtemp:P".
/// Throws ParseError on bad grammar and ParamOutOfRange on an inadmissible parameter.
OrliczFunction parse_phi(std::string_view spec);

/// 64 logarithmically spaced points on [1e-3, 50].
const std::vector<double>& default_probe_grid();

/// Throws NegativeArgument for u < 0; +inf marks overflow.
double evaluate(const OrliczFunction& phi, double u);

/// Closed form when known, otherwise the numeric convex conjugate.
/// Throws NotConvex if phi fails the midpoint test on the probe grid and
/// MaximizerUnbounded if the conjugate is infinite somewhere on the grid
/// (phi grows no faster than linearly).
OrliczFunction complement(const OrliczFunction& phi);

/// The numeric conjugate, even when a closed form exists.
OrliczFunction numeric_complement(const OrliczFunction& phi);

/// phi(u) + psi(v) - u v with psi = complement(phi).
double young_gap(const OrliczFunction& phi, double u, double v);

/// phi(mean(a)) <= mean(phi(a)) + 1e-10 * scale.
bool bohr_check(const OrliczFunction& phi, std::span<const double> a);

/// phi(alpha u) <= alpha phi(u) + 1e-12 * scale.
bool scaling_check(const OrliczFunction& phi, double alpha, double u);

/// phi(u v) <= phi(u) phi(v) + 1e-10 * scale over all grid pairs.
bool submultiplicative_probe(const OrliczFunction& phi, std::span<const double> grid);

struct OrliczValidation {
  bool ok = true;
  std::string failure;  // first failed invariant, empty when ok
};

/// Checks phi(0) = 0, positivity, monotonicity, midpoint convexity and, when a
/// kernel is present, agreement with the kernel integral (relative 1e-8).
OrliczValidation validate(const OrliczFunction& phi, std::span<const double> grid);

}  // namespace oradius
