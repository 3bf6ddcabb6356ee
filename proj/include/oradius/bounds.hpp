#pragma once

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "oradius/matrix.hpp"
#include "oradius/orlicz.hpp"
#include "oradius/radius.hpp"

namespace oradius {

/// Continuous factor pair with f(t) g(t) = t on [0, inf).
struct FactorPair {
  std::string id;
  ScalarFn f;
  ScalarFn g;

  /// f = t^alpha, g = t^(1 - alpha).
  static FactorPair power(double alpha);
  /// f = t exp(-c t), g = exp(c t).
  static FactorPair exponential(double c);
};

/// "power:A", "sqrt" (= power:0.5) or "exp:C". Validates the product identity.
FactorPair parse_fg(std::string_view spec);

/// |f(t) g(t) - t| <= 1e-10 max(1, t) on the grid.
bool validate_fg(const FactorPair& fg, std::span<const double> grid);

struct BoundParams {
  double alpha = 0.5;
  double r = 1.0;
  std::optional<OrliczFunction> phi;
  std::optional<OrliczFunction> psi;
  std::optional<FactorPair> fg;  // defaults to FactorPair::power(alpha)
  int n = 1;                     // summand count for the sum families
};

enum class Verdict { Holds, Tight, Violated, Overflow };
std::string_view verdict_name(Verdict v);

struct BoundReport {
  std::string bound_id;
  int n = 1;
  std::optional<double> alpha;  // as used (after clamping), when the bound uses it
  std::optional<double> r;
  std::string phi;  // phi id, empty when unused
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  // rhs - lhs
  double error_budget = 0.0;
  Verdict verdict = Verdict::Holds;
};

struct BoundDescriptor {
  std::string id;
  std::string statement;
  /// Fixed input roles, or the per-summand roles for a family bound.
  std::vector<std::string> roles;
  bool family = false;
  bool needs_phi = false;
  bool needs_psi = false;
  bool uses_alpha = false;
  bool uses_r = false;
  bool uses_fg = false;
  double alpha_lo = 0.0, alpha_hi = 1.0;
  bool alpha_lo_open = false, alpha_hi_open = false;
  double r_min = 1.0;
  bool r_integer = false;

  /// Concrete role names in positional order ("A1", "B1", "X1", "A2", ... for families).
  std::vector<std::string> input_roles(int n) const;
};

const std::vector<BoundDescriptor>& list_bounds();
/// Throws UnknownBound.
const BoundDescriptor& find_bound(std::string_view id);

/// Throws ParamOutOfRange (or NotSubmultiplicative / MissingInput for phi) when
/// params are not admissible for the bound. Matrix preconditions are checked
/// by evaluate_bound.
void check_params(const BoundDescriptor& d, const BoundParams& p);

using BoundInputs = std::map<std::string, ComplexMatrix, std::less<>>;

/// Per-thread memo of pure matrix results (radii, absolute values, norms)
/// keyed by exact matrix contents. Sharing it never changes a result.
class EvalCache {
 public:
  EvalCache();
  ~EvalCache();
  EvalCache(const EvalCache&) = delete;
  EvalCache& operator=(const EvalCache&) = delete;

  std::optional<CertifiedValue> radius(const ComplexMatrix& m, double tol) const;
  void store_radius(const ComplexMatrix& m, double tol, CertifiedValue v);
  const AbsPair& abs(const ComplexMatrix& m);
  double norm(const ComplexMatrix& m);
  void clear();

 private:
  struct Store;
  std::unique_ptr<Store> store_;
};

struct EvalOptions {
  /// Slack tolerance relative to max(1, |lhs|, |rhs|), folded into error_budget.
  double slack_tolerance = 1e-7;
  /// Radius enclosure tolerance relative to max(1, |M|).
  double radius_rel_tol = 1e-10;
  EvalCache* cache = nullptr;
};

/// Evaluates one inequality. Overflow anywhere yields verdict Overflow with
/// non-finite lhs/rhs; precondition failures throw.
BoundReport evaluate_bound(std::string_view id, const BoundInputs& inputs,
                           const BoundParams& params, const EvalOptions& opts = {});

/// Canonical name of the quantity a bound's lhs measures, e.g. "w(A)^2" or
/// "phi[pnorm:2](w(A)^2)". power:r is folded into the exponent.
std::string lhs_functional(std::string_view id, const BoundParams& params);

/// Bounds of one shared lhs functional evaluated on A, sorted by rhs ascending,
/// ties broken by id. Throws IncomparableBounds.
std::vector<std::pair<std::string, double>> tightness_rank(const ComplexMatrix& a,
                                                           std::span<const std::string> ids,
                                                           const BoundParams& params,
                                                           const EvalOptions& opts = {});

}  // namespace oradius
