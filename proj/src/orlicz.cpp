#include "oradius/orlicz.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <mutex>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "oradius/error.hpp"

namespace oradius {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kBracketLimit = 1e12;
constexpr double kGoldenRelTol = 1e-10;

std::string format_param(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

}  // namespace

struct OrliczFunction::Impl {
  virtual ~Impl() = default;
  virtual double eval(double u) const = 0;
  virtual bool has_kernel() const { return true; }
  virtual double kernel(double u) const = 0;
  virtual std::optional<OrliczFunction> closed_form() const { return std::nullopt; }

  std::string id;
  OrliczFamily family{};
  double param = std::numeric_limits<double>::quiet_NaN();

  mutable std::once_flag submult_once;
  mutable bool submult = false;
};

namespace {

struct PowerImpl final : OrliczFunction::Impl {
  double eval(double u) const override { return std::pow(u, param); }
  double kernel(double u) const override {
    return param == 1.0 ? 1.0 : param * std::pow(u, param - 1.0);
  }
};

struct PowerNormalizedImpl final : OrliczFunction::Impl {
  double eval(double u) const override { return std::pow(u, param) / param; }
  double kernel(double u) const override { return std::pow(u, param - 1.0); }
  std::optional<OrliczFunction> closed_form() const override {
    return OrliczFunction::power_normalized(param / (param - 1.0));
  }
};

struct ExpPowerImpl final : OrliczFunction::Impl {
  double eval(double u) const override { return std::expm1(std::pow(u, param)); }
  double kernel(double u) const override {
    const double t = std::pow(u, param);
    return param * std::pow(u, param - 1.0) * std::exp(t);
  }
};

struct LogTemperedImpl final : OrliczFunction::Impl {
  double eval(double u) const override { return std::pow(u, param) / std::log(M_E + u); }
  double kernel(double u) const override {
    const double l = std::log(M_E + u);
    return param * std::pow(u, param - 1.0) / l - std::pow(u, param) / ((M_E + u) * l * l);
  }
};

/// psi(v) = sup_{u >= 0} (u v - phi(u)); the maximizer is the kernel q(v).
struct ConjugateImpl final : OrliczFunction::Impl {
  std::shared_ptr<const OrliczFunction::Impl> base;

  struct Argmax {
    double u;
    double value;
  };

  Argmax maximize(double v) const {
    if (v <= 0.0) return {0.0, 0.0};
    auto g = [&](double u) { return u * v - base->eval(u); };
    double b = 1.0;
    while (g(2.0 * b) > g(b)) {
      b *= 2.0;
      if (b > kBracketLimit)
        throw Error(ErrorKind::MaximizerUnbounded,
                    "conjugate of " + base->id + " unbounded at v=" + format_param(v));
    }
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = 0.0, hi = 2.0 * b;
    double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
    double g1 = g(x1), g2 = g(x2);
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (hi - lo <= kGoldenRelTol * std::max(mid, 1e-300)) break;
      if (g1 < g2) {
        lo = x1;
        x1 = x2;
        g1 = g2;
        x2 = lo + inv_phi * (hi - lo);
        g2 = g(x2);
      } else {
        hi = x2;
        x2 = x1;
        g2 = g1;
        x1 = hi - inv_phi * (hi - lo);
        g1 = g(x1);
      }
    }
    Argmax best = g1 > g2 ? Argmax{x1, g1} : Argmax{x2, g2};
    if (best.value < 0.0) best = {0.0, 0.0};
    return best;
  }

  double eval(double v) const override { return maximize(v).value; }
  double kernel(double v) const override { return maximize(v).u; }
};

template <class T>
OrliczFunction make(OrliczFamily family, const char* prefix, double param) {
  auto impl = std::make_shared<T>();
  impl->family = family;
  impl->param = param;
  impl->id = std::string(prefix) + ":" + format_param(param);
  return OrliczFunction(std::move(impl));
}

void require_param(bool ok, const char* family, double value, const char* domain) {
  if (!ok || !std::isfinite(value))
    throw Error(ErrorKind::ParamOutOfRange,
                std::string(family) + " parameter " + format_param(value) + " not in " + domain);
}

std::vector<double> log_grid(double lo, double hi, int count) {
  std::vector<double> g(count);
  const double step = std::log(hi / lo) / (count - 1);
  for (int i = 0; i < count; ++i) g[i] = lo * std::exp(step * i);
  g.back() = hi;
  return g;
}

}  // namespace

OrliczFunction OrliczFunction::power(double r) {
  require_param(r >= 1.0, "power", r, "[1, inf)");
  return make<PowerImpl>(OrliczFamily::Power, "power", r);
}

OrliczFunction OrliczFunction::power_normalized(double p) {
  require_param(p > 1.0, "pnorm", p, "(1, inf)");
  return make<PowerNormalizedImpl>(OrliczFamily::PowerNormalized, "pnorm", p);
}

OrliczFunction OrliczFunction::exp_power(double r) {
  require_param(r > 1.0, "exppow", r, "(1, inf)");
  return make<ExpPowerImpl>(OrliczFamily::ExpPower, "exppow", r);
}

OrliczFunction OrliczFunction::log_tempered(double p) {
  require_param(p >= 2.0, "logtemp", p, "[2, inf)");
  return make<LogTemperedImpl>(OrliczFamily::LogTempered, "logtemp", p);
}

const std::string& OrliczFunction::id() const { return impl_->id; }
OrliczFamily OrliczFunction::family() const { return impl_->family; }
double OrliczFunction::param() const { return impl_->param; }
double OrliczFunction::operator()(double u) const { return impl_->eval(u); }
bool OrliczFunction::has_kernel() const { return impl_->has_kernel(); }
double OrliczFunction::kernel(double u) const { return impl_->kernel(u); }

std::optional<OrliczFunction> OrliczFunction::closed_form_complement() const {
  return impl_->closed_form();
}

bool OrliczFunction::submultiplicative() const {
  std::call_once(impl_->submult_once,
                 [&] { impl_->submult = submultiplicative_probe(*this, default_probe_grid()); });
  return impl_->submult;
}

OrliczFunction parse_phi(std::string_view spec) {
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos)
    throw Error(ErrorKind::ParseError, "phi spec '" + std::string(spec) + "' lacks ':'");
  const std::string_view name = spec.substr(0, colon);
  const std::string_view num = spec.substr(colon + 1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), value);
  if (num.empty() || ec != std::errc() || ptr != num.data() + num.size())
    throw Error(ErrorKind::ParseError, "bad parameter in phi spec '" + std::string(spec) + "'");
  if (name == "power") return OrliczFunction::power(value);
  if (name == "pnorm") return OrliczFunction::power_normalized(value);
  if (name == "exppow") return OrliczFunction::exp_power(value);
  if (name == "logtemp") return OrliczFunction::log_tempered(value);
  throw Error(ErrorKind::ParseError, "unknown phi family '" + std::string(name) + "'");
}

const std::vector<double>& default_probe_grid() {
  static const std::vector<double> grid = log_grid(1e-3, 50.0, 64);
  return grid;
}

double evaluate(const OrliczFunction& phi, double u) {
  if (!(u >= 0.0)) throw Error(ErrorKind::NegativeArgument, "evaluate at " + format_param(u));
  return phi(u);
}

OrliczFunction numeric_complement(const OrliczFunction& phi) {
  const auto& grid = default_probe_grid();
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double a = grid[i], b = grid[i + 1];
    const double fa = phi(a), fb = phi(b), fm = phi(0.5 * (a + b));
    if (std::isfinite(fa) && std::isfinite(fb)) {
      const double scale = std::max({1.0, std::abs(fa), std::abs(fb)});
      if (fm > 0.5 * (fa + fb) + 1e-12 * scale)
        throw Error(ErrorKind::NotConvex, phi.id() + " fails the midpoint test near " +
                                              format_param(a));
    }
  }
  auto impl = std::make_shared<ConjugateImpl>();
  impl->base = phi.impl();
  impl->family = OrliczFamily::NumericConjugate;
  impl->id = "conj(" + phi.id() + ")";
  // Probing the grid surfaces MaximizerUnbounded here rather than mid-evaluation.
  for (double v : grid) impl->maximize(v);
  return OrliczFunction(std::move(impl));
}

OrliczFunction complement(const OrliczFunction& phi) {
  if (auto closed = phi.closed_form_complement()) return *closed;
  return numeric_complement(phi);
}

double young_gap(const OrliczFunction& phi, double u, double v) {
  if (!(u >= 0.0) || !(v >= 0.0))
    throw Error(ErrorKind::NegativeArgument, "young_gap arguments must be >= 0");
  const OrliczFunction psi = complement(phi);
  return phi(u) + psi(v) - u * v;
}

bool bohr_check(const OrliczFunction& phi, std::span<const double> a) {
  if (a.empty()) return true;
  double sum = 0.0, phi_sum = 0.0;
  for (double x : a) {
    sum += x;
    phi_sum += phi(x);
  }
  const double n = static_cast<double>(a.size());
  const double lhs = phi(sum / n), rhs = phi_sum / n;
  const double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
  return lhs <= rhs + 1e-10 * scale;
}

bool scaling_check(const OrliczFunction& phi, double alpha, double u) {
  const double lhs = phi(alpha * u), rhs = alpha * phi(u);
  const double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
  return lhs <= rhs + 1e-12 * scale;
}

bool submultiplicative_probe(const OrliczFunction& phi, std::span<const double> grid) {
  for (double u : grid) {
    for (double v : grid) {
      const double lhs = phi(u * v), rhs = phi(u) * phi(v);
      if (std::isinf(rhs)) continue;
      const double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
      if (!(lhs <= rhs + 1e-10 * scale)) return false;
    }
  }
  return true;
}

OrliczValidation validate(const OrliczFunction& phi, std::span<const double> grid) {
  auto fail = [](std::string msg) { return OrliczValidation{false, std::move(msg)}; };
  if (phi(0.0) != 0.0) return fail("phi(0) != 0");
  double prev_u = 0.0, prev = 0.0;
  for (double u : grid) {
    const double val = phi(u);
    if (u > 0.0 && !(val > 0.0)) return fail("degenerate: phi(" + format_param(u) + ") = 0");
    if (val < prev) return fail("not nondecreasing at " + format_param(u));
    if (std::isfinite(val) && std::isfinite(prev)) {
      const double mid = phi(0.5 * (u + prev_u));
      const double scale = std::max({1.0, val, prev});
      if (mid > 0.5 * (val + prev) + 1e-12 * scale)
        return fail("midpoint convexity fails on [" + format_param(prev_u) + ", " +
                    format_param(u) + "]");
    }
    if (phi.has_kernel() && std::isfinite(val) && val < 1e300) {
      const double integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
          [&](double t) { return phi.kernel(t); }, 0.0, u, 15, 1e-13);
      if (std::abs(integral - val) > 1e-8 * std::max(std::abs(val), 1e-300))
        return fail("kernel integral mismatch at " + format_param(u));
    }
    prev_u = u;
    prev = val;
  }
  return {};
}

}  // namespace oradius
