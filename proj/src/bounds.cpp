#include "oradius/bounds.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <deque>
#include <limits>
#include <unordered_map>

#include "oradius/error.hpp"

namespace oradius {

namespace {

using Mat = ComplexMatrix;
constexpr double kArith = 1e-12;

std::string fmt(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double parse_number(std::string_view s, std::string_view what) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw Error(ErrorKind::ParseError, "bad number '" + std::string(s) + "' in " + std::string(what));
  return v;
}

}  // namespace

FactorPair FactorPair::power(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw Error(ErrorKind::ParamOutOfRange, "fg power exponent " + fmt(alpha) + " not in [0, 1]");
  return {"power:" + fmt(alpha), [alpha](double t) { return std::pow(t, alpha); },
          [alpha](double t) { return std::pow(t, 1.0 - alpha); }};
}

FactorPair FactorPair::exponential(double c) {
  if (!(c >= 0.0) || !std::isfinite(c))
    throw Error(ErrorKind::ParamOutOfRange, "fg exp constant " + fmt(c) + " must be >= 0");
  return {"exp:" + fmt(c), [c](double t) { return t * std::exp(-c * t); },
          [c](double t) { return std::exp(c * t); }};
}

bool validate_fg(const FactorPair& fg, std::span<const double> grid) {
  for (double t : grid) {
    const double f = fg.f(t), g = fg.g(t);
    if (!(f >= 0.0) || !(g >= 0.0)) return false;
    if (!(std::abs(f * g - t) <= 1e-10 * std::max(1.0, t))) return false;
  }
  return true;
}

FactorPair parse_fg(std::string_view spec) {
  FactorPair fg;
  if (spec == "sqrt") {
    fg = FactorPair::power(0.5);
  } else if (spec.starts_with("power:")) {
    fg = FactorPair::power(parse_number(spec.substr(6), "fg spec"));
  } else if (spec.starts_with("exp:")) {
    fg = FactorPair::exponential(parse_number(spec.substr(4), "fg spec"));
  } else {
    throw Error(ErrorKind::ParseError, "unknown fg spec '" + std::string(spec) + "'");
  }
  std::vector<double> grid = default_probe_grid();
  grid.insert(grid.begin(), 0.0);
  if (!validate_fg(fg, grid))
    throw Error(ErrorKind::ParamOutOfRange, "fg '" + fg.id + "' fails f(t)g(t) = t");
  return fg;
}

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Holds: return "holds";
    case Verdict::Tight: return "tight";
    case Verdict::Violated: return "violated";
    case Verdict::Overflow: return "overflow";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Catalog

std::vector<std::string> BoundDescriptor::input_roles(int n) const {
  if (!family) return roles;
  std::vector<std::string> out;
  for (int k = 1; k <= n; ++k)
    for (const auto& r : roles) out.push_back(r + std::to_string(k));
  return out;
}

namespace {

struct Builder {
  BoundDescriptor d;
  Builder(std::string id, std::vector<std::string> roles, std::string statement) {
    d.id = std::move(id);
    d.roles = std::move(roles);
    d.statement = std::move(statement);
  }
  Builder& phi() { d.needs_phi = true; return *this; }
  Builder& psi() { d.needs_psi = true; return *this; }
  Builder& family() { d.family = true; return *this; }
  Builder& fg() { d.uses_fg = true; return alpha(); }
  Builder& alpha(double lo = 0.0, double hi = 1.0, bool lo_open = false, bool hi_open = false) {
    d.uses_alpha = true;
    d.alpha_lo = lo;
    d.alpha_hi = hi;
    d.alpha_lo_open = lo_open;
    d.alpha_hi_open = hi_open;
    return *this;
  }
  Builder& r(double min = 1.0, bool integer = false) {
    d.uses_r = true;
    d.r_min = min;
    d.r_integer = integer;
    return *this;
  }
  operator BoundDescriptor() const { return d; }
};

std::vector<BoundDescriptor> build_catalog() {
  const std::vector<std::string> A{"A"}, AB{"A", "B"}, ABX{"A", "B", "X"},
      six{"A", "B", "C", "D", "S", "T"};
  return {
      Builder("EQV", A, "w(A) <= |A|"),
      Builder("KITT03", A, "w(A) <= (|A| + |A^2|^(1/2)) / 2"),
      Builder("KITT05L", A, "|A*A + AA*| / 4 <= w(A)^2"),
      Builder("KITT05U", A, "w(A)^2 <= |A*A + AA*| / 2"),
      Builder("HK1", A, "w(A)^r <= |(|A|^(2r alpha) + |A*|^(2r(1-alpha)))| / 2").alpha().r(),
      Builder("HK2", A, "w(A)^(2r) <= |alpha |A|^(2r) + (1-alpha) |A*|^(2r)|").alpha().r(),
      Builder("AOK", A, "w(A)^2 <= |A*A + AA*| / 4 + w(A^2) / 2"),
      Builder("BP", A, "w(A)^(2r) <= |(|A|^(2r) + |A*|^(2r))| / 4 + w(|A|^r |A*|^r) / 2").r(),
      Builder("HOLB4", AB, "w(AB) <= 4 w(A) w(B)"),
      Builder("HOLB2C", AB, "w(AB) <= 2 w(A) w(B) for commuting A, B"),
      Builder("FH", AB, "w(AB + BA) <= 2 sqrt(2) w(A) |B|"),
      Builder("POWK", A, "w(A^k) <= w(A)^k, k = r").r(1.0, true),
      Builder("KITT-ATBCSD", six,
              "w(ATB + CSD) <= |A|T*|^(2(1-alpha))A* + B*|T|^(2alpha)B + C|S*|^(2(1-alpha))C* + "
              "D*|S|^(2alpha)D| / 2")
          .alpha(),
      Builder("T31", A, "w(A)^2 <= |phi(|A|) + psi(|A*|)|").phi().psi(),
      Builder("T33i", ABX, "w(A*XB)^r <= |X|^r w(phi(|A|^r) + psi(|B|^r)), r >= 2").phi().psi().r(2.0),
      Builder("T33ii", ABX,
              "w(A*XB) <= phi(sqrt(w(B*|X|^(2alpha)B))) + psi(sqrt(w(A*|X*|^(2(1-alpha))A)))")
          .phi()
          .psi()
          .alpha(),
      Builder("T34i", A, "phi(w(A)) <= |phi(|A|) + phi(|A*|)| / 2").phi(),
      Builder("T34ii", A, "phi(w(A)) <= |phi(|A|^(2alpha)) + phi(|A*|^(2(1-alpha)))| / 2").phi().alpha(),
      Builder("T36i", A,
              "phi(w(A)^2) <= |alpha phi(|A|^(1/alpha)) + (1-alpha) phi(|A*|^(1/(1-alpha)))|")
          .phi()
          .alpha(0.0, 1.0, true, true),
      Builder("T36ii", A, "phi(w(A)^2) <= |alpha phi(|A|^2) + (1-alpha) phi(|A*|^2)|")
          .phi()
          .alpha(0.0, 1.0, true, true),
      Builder("T38", A, "phi(w(A)^2) <= |phi(|A|^2) + phi(|A*|^2)| / 4 + phi(w(A^2)) / 2").phi(),
      Builder("T310", ABX, "phi(w(A*XB)) <= w(phi(|X| |A|^2) + phi(|X| |B|^2)) / 2").phi(),
      Builder("T310C", ABX, "phi(w(A*XB)) <= |X| w(phi(|A|^2) + phi(|B|^2)) / 2, |X| <= 1").phi(),
      Builder("T312i", ABX,
              "phi(w(A^alpha X B^(1-alpha))) <= w(alpha phi(|X|A) + (1-alpha) phi(|X|B)), A, B >= 0")
          .phi()
          .alpha(0.0, 0.5, true, false),
      Builder("T312ii", ABX,
              "phi(w(A^alpha X B^(1-alpha))) <= w(phi(|X|A^(2alpha)) + phi(|X|B^(2(1-alpha)))) / 2, "
              "A, B >= 0")
          .phi()
          .alpha(),
      Builder("T314", ABX,
              "phi(w(sum A_k*X_kB_k)) <= sum |phi(n B_k*f^2(|X_k|)B_k) + phi(n A_k*g^2(|X_k*|)A_k)| "
              "/ (2n)")
          .phi()
          .family()
          .fg(),
      Builder("T316", ABX,
              "phi(w(sum A_k*X_kB_k)) <= w(sum phi(n B_k*f^2(|X_k|)B_k) + i phi(n A_k*g^2(|X_k*|)A_k)) "
              "/ (sqrt(2) n)")
          .phi()
          .family()
          .fg(),
      Builder("T317", six,
              "phi(w(ATB + CSD)) <= |phi(A g^2(|T*|)A*) + phi(B*f^2(|T|)B) + phi(C g^2(|S*|)C*) + "
              "phi(D*f^2(|S|)D)| / 2")
          .phi()
          .fg(),
      Builder("T319", A,
              "phi(w(A)^2) <= |phi(|A|^2) + phi(|A*|^2)| / 4 + alpha |phi(|Re(|A||A*|)|)| / 2 + "
              "(1-alpha) phi(w(A^2)) / 2")
          .phi()
          .alpha(),
      Builder("T321", A,
              "phi(w(A)^2) <= |phi(|A|^2) + phi(|A*|^2)| / 4 + alpha |phi(|A|)| |phi(|A*|)| / 2 + "
              "(1-alpha) phi(w(A^2)) / 2, phi submultiplicative")
          .phi()
          .alpha(),
      Builder("T322", A,
              "phi(w(sum A_i)^2) <= |sum phi(n^2|A_i|^2) + phi(n^2|A_i*|^2)| / (4n) + alpha |sum "
              "phi(n^2|Re(|A_i||A_i*|)|)| / (2n) + (1-alpha) sum phi(n^2 w(A_i^2)) / (2n)")
          .phi()
          .family()
          .alpha(),
      Builder("T323", A,
              "phi(w(A)^2) <= |phi(|A|^2) + phi(|A*|^2)| / 4 + phi(w(|A||A*|)) / 2")
          .phi(),
      Builder("T324", A,
              "phi(w(sum A_i)^2) <= |sum phi(n^2|A_i|^2) + phi(n^2|A_i*|^2)| / (4n) + sum "
              "phi(w(n^2|A_i||A_i*|)) / (2n)")
          .phi()
          .family(),
      Builder("T41", {"P", "Q"},
              "phi(w([[0,P],[Q,0]])^2) <= max(|phi(|Q|^2)+phi(|P*|^2)|, |phi(|P|^2)+phi(|Q*|^2)|) / 4 "
              "+ alpha max(|phi(|Re(|Q||P*|)|)|, |phi(|Re(|P||Q*|)|)|) / 2 + (1-alpha) "
              "phi(max(w(PQ), w(QP))) / 2")
          .phi()
          .alpha(),
  };
}

}  // namespace

const std::vector<BoundDescriptor>& list_bounds() {
  static const std::vector<BoundDescriptor> catalog = build_catalog();
  return catalog;
}

const BoundDescriptor& find_bound(std::string_view id) {
  for (const auto& d : list_bounds())
    if (d.id == id) return d;
  throw Error(ErrorKind::UnknownBound, "no bound '" + std::string(id) + "'");
}

void check_params(const BoundDescriptor& d, const BoundParams& p) {
  auto out = [&](const std::string& what) {
    throw Error(ErrorKind::ParamOutOfRange, d.id + ": " + what);
  };
  if (d.uses_alpha && !(d.uses_fg && p.fg)) {
    const double a = p.alpha;
    const bool lo_ok = d.alpha_lo_open ? a > d.alpha_lo : a >= d.alpha_lo;
    const bool hi_ok = d.alpha_hi_open ? a < d.alpha_hi : a <= d.alpha_hi;
    if (!std::isfinite(a) || !lo_ok || !hi_ok)
      out("alpha " + fmt(a) + " not in " + (d.alpha_lo_open ? "(" : "[") + fmt(d.alpha_lo) + ", " +
          fmt(d.alpha_hi) + (d.alpha_hi_open ? ")" : "]"));
  }
  if (d.uses_r) {
    if (!std::isfinite(p.r) || p.r < d.r_min) out("r " + fmt(p.r) + " must be >= " + fmt(d.r_min));
    if (d.r_integer && (p.r != std::floor(p.r) || p.r > 64)) out("r must be an integer in [1, 64]");
  }
  if (d.family && p.n < 1) out("n must be >= 1");
  if (d.needs_phi && !p.phi) throw Error(ErrorKind::MissingInput, d.id + ": phi required");
  if (d.id == "T321" && !p.phi->submultiplicative())
    throw Error(ErrorKind::NotSubmultiplicative, d.id + ": " + p.phi->id() + " is not submultiplicative");
}

// ---------------------------------------------------------------------------
// Cache

namespace {

std::size_t hash_matrix(const Eigen::MatrixXcd& m) {
  std::uint64_t h = 1469598103934665603ull ^ static_cast<std::uint64_t>(m.rows());
  const auto* bytes = reinterpret_cast<const unsigned char*>(m.data());
  const std::size_t len = sizeof(cplx) * static_cast<std::size_t>(m.size());
  for (std::size_t i = 0; i < len; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ull;
  }
  return static_cast<std::size_t>(h);
}

bool same(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  return a.rows() == b.rows() &&
         std::memcmp(a.data(), b.data(), sizeof(cplx) * static_cast<std::size_t>(a.size())) == 0;
}

template <class T>
struct Memo {
  struct Entry {
    Eigen::MatrixXcd key;
    double tag;
    T value;
  };
  std::unordered_map<std::size_t, std::vector<std::size_t>> index;
  std::deque<Entry> entries;  // stable references

  const T* find(const Eigen::MatrixXcd& m, double tag = 0.0) const {
    auto it = index.find(hash_matrix(m));
    if (it == index.end()) return nullptr;
    for (std::size_t i : it->second)
      if (entries[i].tag == tag && same(entries[i].key, m)) return &entries[i].value;
    return nullptr;
  }
  const T& put(const Eigen::MatrixXcd& m, T v, double tag = 0.0) {
    entries.push_back({m, tag, std::move(v)});
    index[hash_matrix(m)].push_back(entries.size() - 1);
    return entries.back().value;
  }
  void clear() {
    index.clear();
    entries.clear();
  }
};

}  // namespace

struct EvalCache::Store {
  Memo<CertifiedValue> radius;
  Memo<AbsPair> abs;
  Memo<double> norm;
};

EvalCache::EvalCache() : store_(std::make_unique<Store>()) {}
EvalCache::~EvalCache() = default;

std::optional<CertifiedValue> EvalCache::radius(const ComplexMatrix& m, double tol) const {
  if (const auto* v = store_->radius.find(m.data(), tol)) return *v;
  return std::nullopt;
}

void EvalCache::store_radius(const ComplexMatrix& m, double tol, CertifiedValue v) {
  if (!store_->radius.find(m.data(), tol)) store_->radius.put(m.data(), v, tol);
}

const AbsPair& EvalCache::abs(const ComplexMatrix& m) {
  if (const auto* v = store_->abs.find(m.data())) return *v;
  return store_->abs.put(m.data(), abs_pair(m));
}

double EvalCache::norm(const ComplexMatrix& m) {
  if (const auto* v = store_->norm.find(m.data())) return *v;
  return store_->norm.put(m.data(), operator_norm(m));
}

void EvalCache::clear() {
  store_->radius.clear();
  store_->abs.clear();
  store_->norm.clear();
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

/// Enclosure of a nonnegative scalar.
struct Iv {
  double lo = 0.0, hi = 0.0;
};

Iv operator+(Iv a, Iv b) { return {a.lo + b.lo, a.hi + b.hi}; }
Iv operator*(double c, Iv a) { return {c * a.lo, c * a.hi}; }
Iv operator*(Iv a, Iv b) { return {a.lo * b.lo, a.hi * b.hi}; }
Iv max(Iv a, Iv b) { return {std::max(a.lo, b.lo), std::max(a.hi, b.hi)}; }

/// Image under a nondecreasing function.
template <class F>
Iv map(const F& f, Iv a) {
  return {f(a.lo), f(a.hi)};
}

Iv pow(Iv a, double s) {
  return map([s](double t) { return std::pow(t, s); }, a);
}

Iv sqrt(Iv a) {
  return map([](double t) { return std::sqrt(t); }, a);
}

ScalarFn power_fn(double s) {
  return [s](double t) { return std::pow(t, s); };
}

ScalarFn as_fn(const OrliczFunction& phi) {
  return [phi](double t) { return phi(t); };
}

class Context {
 public:
  Context(const BoundInputs& in, const EvalOptions& opts)
      : in_(in), opts_(opts), cache_(opts.cache ? *opts.cache : local_) {}

  const Mat& get(const std::string& role) const {
    auto it = in_.find(role);
    if (it == in_.end()) throw Error(ErrorKind::MissingInput, "input '" + role + "' is required");
    return it->second;
  }

  Iv w(const Mat& m, bool hermitian_shortcut = true) {
    if (hermitian_shortcut && symmetry_residual(m) <= kHermitianTol) {
      const CertifiedValue v = hermitian_radius(m);
      return {v.lower, v.upper};
    }
    const double tol = opts_.radius_rel_tol * std::max(1.0, cache_.norm(m));
    if (auto v = cache_.radius(m, tol)) return {v->lower, v->upper};
    const CertifiedValue v = numerical_radius(m, tol);
    cache_.store_radius(m, tol, v);
    return {v.lower, v.upper};
  }

  /// Operator norm of any matrix, widened by the arithmetic allowance.
  Iv norm(const Mat& m) { return widen(cache_.norm(m)); }

  /// Norm of a Hermitian matrix built by functional calculus.
  Iv hnorm(const Mat& h) { return widen(hermitian_norm(h)); }

  const AbsPair& abs(const Mat& m) { return cache_.abs(m); }

 private:
  static Iv widen(double v) { return {v * (1.0 - kArith), v * (1.0 + kArith)}; }

  const BoundInputs& in_;
  const EvalOptions& opts_;
  EvalCache local_;
  EvalCache& cache_;
};

Mat hermitian_part(const Mat& m) { return 0.5 * (m + adjoint(m)); }

/// |Re(M)| for arbitrary M.
Mat abs_real_part(const Mat& m) {
  return hermitian_apply([](double t) { return std::abs(t); }, hermitian_part(m));
}

/// h^s for PSD h.
Mat mpow(const Mat& h, double s) {
  if (s == 1.0) return h;
  return func_calc(power_fn(s), h);
}

struct Sides {
  Iv lhs, rhs;
};

class Evaluator {
 public:
  Evaluator(const BoundDescriptor& d, const BoundInputs& in, const BoundParams& p,
            const EvalOptions& opts)
      : d_(d), p_(p), ctx_(in, opts) {
    if (d.needs_phi) phi_ = *p.phi;
    alpha_ = p.alpha;
    if (d.id == "T36i") alpha_ = std::clamp(alpha_, 1e-3, 1.0 - 1e-3);
    if (d.uses_fg) fg_ = p.fg ? *p.fg : FactorPair::power(p.alpha);
    check_dims(in);
  }

  double alpha() const { return alpha_; }

  Sides run() {
    const std::string& id = d_.id;
    if (id == "EQV") return eqv();
    if (id == "KITT03") return kitt03();
    if (id == "KITT05L") return kitt05l();
    if (id == "KITT05U") return kitt05u();
    if (id == "HK1") return hk1();
    if (id == "HK2") return hk2();
    if (id == "AOK") return aok();
    if (id == "BP") return bp();
    if (id == "HOLB4") return holb(4.0);
    if (id == "HOLB2C") return holb2c();
    if (id == "FH") return fh();
    if (id == "POWK") return powk();
    if (id == "KITT-ATBCSD") return kitt_atbcsd();
    if (id == "T31") return t31();
    if (id == "T33i") return t33i();
    if (id == "T33ii") return t33ii();
    if (id == "T34i") return t34(false);
    if (id == "T34ii") return t34(true);
    if (id == "T36i") return t36i();
    if (id == "T36ii") return t36ii();
    if (id == "T38") return t38();
    if (id == "T310") return t310();
    if (id == "T310C") return t310c();
    if (id == "T312i") return t312(false);
    if (id == "T312ii") return t312(true);
    if (id == "T314") return t314();
    if (id == "T316") return t316();
    if (id == "T317") return t317();
    if (id == "T319") return t319_family(false);
    if (id == "T321") return t319_family(true);
    if (id == "T322") return t322();
    if (id == "T323") return t323();
    if (id == "T324") return t324();
    if (id == "T41") return t41();
    throw Error(ErrorKind::UnknownBound, id);
  }

 private:
  const Mat& in(const std::string& role) const { return ctx_.get(role); }
  const Mat& A() const { return in("A"); }

  void check_dims(const BoundInputs& inputs) {
    int n = -1;
    for (const auto& role : d_.input_roles(p_.n)) {
      const Mat& m = ctx_.get(role);
      if (n < 0) n = m.dim();
      if (m.dim() != n)
        throw Error(ErrorKind::DimensionMismatch, d_.id + ": input '" + role + "' is " +
                                                      std::to_string(m.dim()) + "x" +
                                                      std::to_string(m.dim()) + ", expected " +
                                                      std::to_string(n));
    }
    (void)inputs;
  }

  Mat phi_m(const Mat& h) const { return func_calc(as_fn(phi_), h); }
  Mat psi_m(const Mat& h) const { return func_calc(as_fn(*psi_), h); }
  Iv phi_s(Iv x) const { return map(phi_, x); }

  void resolve_psi() {
    if (p_.psi) {
      const auto& grid = default_probe_grid();
      const OrliczFunction& psi = *p_.psi;
      for (double u : grid)
        for (double v : grid) {
          const double rhs = phi_(u) + psi(v);
          if (std::isfinite(rhs) && u * v > rhs + 1e-10 * std::max(1.0, rhs))
            throw Error(ErrorKind::ParamOutOfRange,
                        d_.id + ": psi " + psi.id() + " is not complementary to " + phi_.id());
        }
      psi_ = psi;
      return;
    }
    try {
      psi_ = complement(phi_);
    } catch (const Error& e) {
      throw Error(ErrorKind::ParamOutOfRange,
                  d_.id + ": no complementary function for " + phi_.id() + " (" + e.what() + ")");
    }
  }

  // |A|^2 and |A*|^2 as Gram matrices.
  static Mat gram(const Mat& a) { return hermitian_part(adjoint(a) * a); }
  static Mat gram_adj(const Mat& a) { return hermitian_part(a * adjoint(a)); }

  Sides eqv() { return {ctx_.w(A()), ctx_.norm(A())}; }

  Sides kitt03() {
    const Mat& a = A();
    return {ctx_.w(a), 0.5 * (ctx_.norm(a) + sqrt(ctx_.norm(a * a)))};
  }

  Sides kitt05l() {
    const Mat& a = A();
    return {0.25 * ctx_.hnorm(gram(a) + gram_adj(a)), pow(ctx_.w(a), 2.0)};
  }

  Sides kitt05u() {
    const Mat& a = A();
    return {pow(ctx_.w(a), 2.0), 0.5 * ctx_.hnorm(gram(a) + gram_adj(a))};
  }

  Sides hk1() {
    const Mat& a = A();
    const double r = p_.r;
    const AbsPair& ab = ctx_.abs(a);
    const Mat sum = mpow(ab.abs, 2.0 * r * alpha_) + mpow(ab.abs_adj, 2.0 * r * (1.0 - alpha_));
    return {pow(ctx_.w(a), r), 0.5 * ctx_.hnorm(sum)};
  }

  Sides hk2() {
    const Mat& a = A();
    const double r = p_.r;
    const AbsPair& ab = ctx_.abs(a);
    const Mat sum = alpha_ * mpow(ab.abs, 2.0 * r) + (1.0 - alpha_) * mpow(ab.abs_adj, 2.0 * r);
    return {pow(ctx_.w(a), 2.0 * r), ctx_.hnorm(sum)};
  }

  Sides aok() {
    const Mat& a = A();
    return {pow(ctx_.w(a), 2.0),
            0.25 * ctx_.hnorm(gram(a) + gram_adj(a)) + 0.5 * ctx_.w(a * a)};
  }

  Sides bp() {
    const Mat& a = A();
    const double r = p_.r;
    const AbsPair& ab = ctx_.abs(a);
    const Mat sum = mpow(ab.abs, 2.0 * r) + mpow(ab.abs_adj, 2.0 * r);
    const Mat prod = mpow(ab.abs, r) * mpow(ab.abs_adj, r);
    return {pow(ctx_.w(a), 2.0 * r), 0.25 * ctx_.hnorm(sum) + 0.5 * ctx_.w(prod)};
  }

  Sides holb(double c) {
    const Mat &a = in("A"), &b = in("B");
    return {ctx_.w(a * b), c * (ctx_.w(a) * ctx_.w(b))};
  }

  Sides holb2c() {
    const Mat &a = in("A"), &b = in("B");
    const double comm = operator_norm(a * b - b * a);
    const double tol = 1e-10 * std::max(1.0, operator_norm(a) * operator_norm(b));
    if (comm > tol)
      throw Error(ErrorKind::NotCommuting, "HOLB2C: |AB - BA| = " + fmt(comm) + " > " + fmt(tol));
    return holb(2.0);
  }

  Sides fh() {
    const Mat &a = in("A"), &b = in("B");
    return {ctx_.w(a * b + b * a), 2.0 * std::sqrt(2.0) * (ctx_.w(a) * ctx_.norm(b))};
  }

  Sides powk() {
    const int k = static_cast<int>(p_.r);
    const Mat& a = A();
    return {ctx_.w(matrix_power(a, k)), pow(ctx_.w(a), k)};
  }

  Sides kitt_atbcsd() {
    const Mat &a = in("A"), &b = in("B"), &c = in("C"), &dd = in("D"), &s = in("S"), &t = in("T");
    const AbsPair& tp = ctx_.abs(t);
    const AbsPair& sp = ctx_.abs(s);
    const double ea = 2.0 * alpha_, eb = 2.0 * (1.0 - alpha_);
    const Mat sum = a * mpow(tp.abs_adj, eb) * adjoint(a) + adjoint(b) * mpow(tp.abs, ea) * b +
                    c * mpow(sp.abs_adj, eb) * adjoint(c) + adjoint(dd) * mpow(sp.abs, ea) * dd;
    return {ctx_.w(a * t * b + c * s * dd), 0.5 * ctx_.hnorm(hermitian_part(sum))};
  }

  Sides t31() {
    resolve_psi();
    const Mat& a = A();
    const AbsPair& ab = ctx_.abs(a);
    return {pow(ctx_.w(a), 2.0), ctx_.hnorm(phi_m(ab.abs) + psi_m(ab.abs_adj))};
  }

  Sides t33i() {
    resolve_psi();
    const Mat &a = in("A"), &b = in("B"), &x = in("X");
    const double r = p_.r;
    const Mat sum = phi_m(mpow(ctx_.abs(a).abs, r)) + psi_m(mpow(ctx_.abs(b).abs, r));
    return {pow(ctx_.w(adjoint(a) * x * b), r), pow(ctx_.norm(x), r) * ctx_.w(sum)};
  }

  Sides t33ii() {
    resolve_psi();
    const Mat &a = in("A"), &b = in("B"), &x = in("X");
    const AbsPair& xp = ctx_.abs(x);
    const Mat mb = hermitian_part(adjoint(b) * mpow(xp.abs, 2.0 * alpha_) * b);
    const Mat ma = hermitian_part(adjoint(a) * mpow(xp.abs_adj, 2.0 * (1.0 - alpha_)) * a);
    const Iv rhs = map(phi_, sqrt(ctx_.w(mb))) + map(*psi_, sqrt(ctx_.w(ma)));
    return {ctx_.w(adjoint(a) * x * b), rhs};
  }

  Sides t34(bool weighted) {
    const Mat& a = A();
    const AbsPair& ab = ctx_.abs(a);
    const double ea = weighted ? 2.0 * alpha_ : 1.0, eb = weighted ? 2.0 * (1.0 - alpha_) : 1.0;
    const Mat sum = phi_m(mpow(ab.abs, ea)) + phi_m(mpow(ab.abs_adj, eb));
    return {phi_s(ctx_.w(a)), 0.5 * ctx_.hnorm(sum)};
  }

  Sides t36i() {
    const Mat& a = A();
    const AbsPair& ab = ctx_.abs(a);
    const Mat sum = alpha_ * phi_m(mpow(ab.abs, 1.0 / alpha_)) +
                    (1.0 - alpha_) * phi_m(mpow(ab.abs_adj, 1.0 / (1.0 - alpha_)));
    return {phi_s(pow(ctx_.w(a), 2.0)), ctx_.hnorm(sum)};
  }

  Sides t36ii() {
    const Mat& a = A();
    const Mat sum = alpha_ * phi_m(gram(a)) + (1.0 - alpha_) * phi_m(gram_adj(a));
    return {phi_s(pow(ctx_.w(a), 2.0)), ctx_.hnorm(sum)};
  }

  Iv quarter_gram_term(const Mat& a) {
    return 0.25 * ctx_.hnorm(phi_m(gram(a)) + phi_m(gram_adj(a)));
  }

  Sides t38() {
    const Mat& a = A();
    return {phi_s(pow(ctx_.w(a), 2.0)), quarter_gram_term(a) + 0.5 * phi_s(ctx_.w(a * a))};
  }

  Sides t310() {
    const Mat &a = in("A"), &b = in("B"), &x = in("X");
    const double nx = ctx_.norm(x).hi;
    const Mat sum = phi_m(nx * gram(a)) + phi_m(nx * gram(b));
    return {phi_s(ctx_.w(adjoint(a) * x * b)), 0.5 * ctx_.w(sum)};
  }

  Sides t310c() {
    const Mat &a = in("A"), &b = in("B"), &x = in("X");
    const double nx = operator_norm(x);
    if (nx > 1.0 + 1e-12)
      throw Error(ErrorKind::NotContraction, "T310C: |X| = " + fmt(nx) + " > 1");
    const Mat sum = phi_m(gram(a)) + phi_m(gram(b));
    return {phi_s(ctx_.w(adjoint(a) * x * b)), 0.5 * (ctx_.norm(x) * ctx_.w(sum))};
  }

  Sides t312(bool second) {
    const Mat &a = in("A"), &b = in("B"), &x = in("X");
    for (const char* role : {"A", "B"})
      if (!is_psd(in(role)))
        throw Error(ErrorKind::NotPSD, d_.id + ": input '" + std::string(role) +
                                           "' is not positive semidefinite");
    const Mat op = mpow(a, alpha_) * x * mpow(b, 1.0 - alpha_);
    const double nx = ctx_.norm(x).hi;
    Iv rhs;
    if (!second) {
      rhs = ctx_.w(alpha_ * phi_m(nx * a) + (1.0 - alpha_) * phi_m(nx * b));
    } else {
      rhs = 0.5 * ctx_.w(phi_m(nx * mpow(a, 2.0 * alpha_)) + phi_m(nx * mpow(b, 2.0 * (1.0 - alpha_))));
    }
    return {phi_s(ctx_.w(op)), rhs};
  }

  struct SumTerms {
    Mat total;
    std::vector<std::pair<Mat, Mat>> mn;  // phi(n B*f^2B), phi(n A*g^2A)
  };

  SumTerms sum_terms() {
    const int n = p_.n;
    const auto sq = [](const ScalarFn& f) -> ScalarFn {
      return [f](double t) {
        const double v = f(t);
        return v * v;
      };
    };
    const ScalarFn f2 = sq(fg_->f), g2 = sq(fg_->g);
    std::optional<Mat> total;
    std::vector<std::pair<Mat, Mat>> mn;
    for (int k = 1; k <= n; ++k) {
      const std::string s = std::to_string(k);
      const Mat &a = in("A" + s), &b = in("B" + s), &x = in("X" + s);
      const AbsPair& xp = ctx_.abs(x);
      const Mat m = hermitian_part(adjoint(b) * func_calc(f2, xp.abs) * b);
      const Mat q = hermitian_part(adjoint(a) * func_calc(g2, xp.abs_adj) * a);
      mn.emplace_back(phi_m(double(n) * m), phi_m(double(n) * q));
      const Mat term = adjoint(a) * x * b;
      total = total ? *total + term : term;
    }
    return {*total, std::move(mn)};
  }

  Sides t314() {
    SumTerms st = sum_terms();
    Iv rhs{};
    for (const auto& [m, q] : st.mn) rhs = rhs + ctx_.hnorm(m + q);
    return {phi_s(ctx_.w(st.total)), (1.0 / (2.0 * p_.n)) * rhs};
  }

  Sides t316() {
    SumTerms st = sum_terms();
    std::optional<Mat> z;
    for (const auto& [m, q] : st.mn) {
      const Mat term = m + cplx(0.0, 1.0) * q;
      z = z ? *z + term : term;
    }
    return {phi_s(ctx_.w(st.total)), (1.0 / (std::sqrt(2.0) * p_.n)) * ctx_.w(*z, false)};
  }

  Sides t317() {
    const Mat &a = in("A"), &b = in("B"), &c = in("C"), &dd = in("D"), &s = in("S"), &t = in("T");
    const auto sq = [](const ScalarFn& f) -> ScalarFn {
      return [f](double u) {
        const double v = f(u);
        return v * v;
      };
    };
    const ScalarFn f2 = sq(fg_->f), g2 = sq(fg_->g);
    const AbsPair& tp = ctx_.abs(t);
    const AbsPair& sp = ctx_.abs(s);
    const Mat sum =
        phi_m(hermitian_part(a * func_calc(g2, tp.abs_adj) * adjoint(a))) +
        phi_m(hermitian_part(adjoint(b) * func_calc(f2, tp.abs) * b)) +
        phi_m(hermitian_part(c * func_calc(g2, sp.abs_adj) * adjoint(c))) +
        phi_m(hermitian_part(adjoint(dd) * func_calc(f2, sp.abs) * dd));
    return {phi_s(ctx_.w(a * t * b + c * s * dd)), 0.5 * ctx_.hnorm(sum)};
  }

  Sides t319_family(bool submult) {
    const Mat& a = A();
    const AbsPair& ab = ctx_.abs(a);
    Iv middle;
    if (submult) {
      middle = ctx_.hnorm(phi_m(ab.abs)) * ctx_.hnorm(phi_m(ab.abs_adj));
    } else {
      middle = ctx_.hnorm(phi_m(abs_real_part(ab.abs * ab.abs_adj)));
    }
    const Iv rhs = quarter_gram_term(a) + (0.5 * alpha_) * middle +
                   (0.5 * (1.0 - alpha_)) * phi_s(ctx_.w(a * a));
    return {phi_s(pow(ctx_.w(a), 2.0)), rhs};
  }

  Sides t323() {
    const Mat& a = A();
    const AbsPair& ab = ctx_.abs(a);
    return {phi_s(pow(ctx_.w(a), 2.0)),
            quarter_gram_term(a) + 0.5 * phi_s(ctx_.w(ab.abs * ab.abs_adj))};
  }

  // Shared pieces of T322 / T324.
  struct FamilyParts {
    Mat total;
    Iv gram_term;
  };

  FamilyParts family_parts() {
    const int n = p_.n;
    const double n2 = double(n) * n;
    std::optional<Mat> total, grams;
    for (int k = 1; k <= n; ++k) {
      const Mat& a = in("A" + std::to_string(k));
      const Mat g = phi_m(n2 * gram(a)) + phi_m(n2 * gram_adj(a));
      total = total ? *total + a : a;
      grams = grams ? *grams + g : g;
    }
    return {*total, (1.0 / (4.0 * n)) * ctx_.hnorm(*grams)};
  }

  Sides t322() {
    const int n = p_.n;
    const double n2 = double(n) * n;
    FamilyParts fp = family_parts();
    std::optional<Mat> mids;
    Iv last{};
    for (int k = 1; k <= n; ++k) {
      const Mat& a = in("A" + std::to_string(k));
      const AbsPair& ab = ctx_.abs(a);
      const Mat m = phi_m(n2 * abs_real_part(ab.abs * ab.abs_adj));
      mids = mids ? *mids + m : m;
      last = last + phi_s(n2 * ctx_.w(a * a));
    }
    const Iv rhs = fp.gram_term + (alpha_ / (2.0 * n)) * ctx_.hnorm(*mids) +
                   ((1.0 - alpha_) / (2.0 * n)) * last;
    return {phi_s(pow(ctx_.w(fp.total), 2.0)), rhs};
  }

  Sides t324() {
    const int n = p_.n;
    const double n2 = double(n) * n;
    FamilyParts fp = family_parts();
    Iv last{};
    for (int k = 1; k <= n; ++k) {
      const Mat& a = in("A" + std::to_string(k));
      const AbsPair& ab = ctx_.abs(a);
      last = last + phi_s(n2 * ctx_.w(ab.abs * ab.abs_adj));
    }
    return {phi_s(pow(ctx_.w(fp.total), 2.0)), fp.gram_term + (1.0 / (2.0 * n)) * last};
  }

  Sides t41() {
    const Mat &p = in("P"), &q = in("Q");
    const AbsPair& pp = ctx_.abs(p);
    const AbsPair& qp = ctx_.abs(q);
    const Iv first = max(ctx_.hnorm(phi_m(gram(q)) + phi_m(gram_adj(p))),
                         ctx_.hnorm(phi_m(gram(p)) + phi_m(gram_adj(q))));
    const Iv second = max(ctx_.hnorm(phi_m(abs_real_part(qp.abs * pp.abs_adj))),
                          ctx_.hnorm(phi_m(abs_real_part(pp.abs * qp.abs_adj))));
    const Iv third = phi_s(max(ctx_.w(p * q), ctx_.w(q * p)));
    const Iv rhs = 0.25 * first + (0.5 * alpha_) * second + (0.5 * (1.0 - alpha_)) * third;
    return {phi_s(pow(ctx_.w(block_compose(p, q)), 2.0)), rhs};
  }

  const BoundDescriptor& d_;
  const BoundParams& p_;
  Context ctx_;
  OrliczFunction phi_ = OrliczFunction::power(1.0);
  std::optional<OrliczFunction> psi_;
  std::optional<FactorPair> fg_;
  double alpha_ = 0.5;
};

}  // namespace

BoundReport evaluate_bound(std::string_view id, const BoundInputs& inputs, const BoundParams& params,
                           const EvalOptions& opts) {
  const BoundDescriptor& d = find_bound(id);
  check_params(d, params);

  BoundReport rep;
  rep.bound_id = d.id;
  rep.n = d.family ? params.n : 1;
  if (d.uses_r) rep.r = params.r;
  if (d.needs_phi) rep.phi = params.phi->id();

  Evaluator ev(d, inputs, params, opts);
  if (d.uses_alpha) rep.alpha = ev.alpha();

  Sides s;
  try {
    s = ev.run();
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Overflow && e.kind() != ErrorKind::NonFinite) throw;
    rep.lhs = rep.rhs = rep.slack = std::numeric_limits<double>::infinity();
    rep.error_budget = 0.0;
    rep.verdict = Verdict::Overflow;
    return rep;
  }

  // Conservative orientation: lhs at its lower end, rhs at its upper end.
  rep.lhs = s.lhs.lo;
  rep.rhs = s.rhs.hi;
  rep.slack = rep.rhs - rep.lhs;
  const bool finite = std::isfinite(s.lhs.lo) && std::isfinite(s.lhs.hi) && std::isfinite(s.rhs.lo) &&
                      std::isfinite(s.rhs.hi);
  if (!finite || std::isnan(rep.slack)) {
    rep.verdict = Verdict::Overflow;
    return rep;
  }
  const double scale = std::max({1.0, std::abs(s.lhs.hi), std::abs(s.rhs.hi)});
  rep.error_budget = (s.lhs.hi - s.lhs.lo) + (s.rhs.hi - s.rhs.lo) + kArith * scale +
                     opts.slack_tolerance * scale;
  if (rep.slack < -rep.error_budget)
    rep.verdict = Verdict::Violated;
  else if (std::abs(rep.slack) <= rep.error_budget)
    rep.verdict = Verdict::Tight;
  else
    rep.verdict = Verdict::Holds;
  return rep;
}

// ---------------------------------------------------------------------------
// Functionals and ranking

std::string lhs_functional(std::string_view id, const BoundParams& params) {
  const BoundDescriptor& d = find_bound(id);
  std::string operand;
  double exponent = 1.0;
  const double r = params.r;
  const std::string n = std::to_string(params.n);
  if (d.id == "KITT05L") return "|A*A+AA*|/4";
  if (d.id == "EQV" || d.id == "KITT03" || d.id == "T34i" || d.id == "T34ii") operand = "w(A)";
  else if (d.id == "KITT05U" || d.id == "AOK" || d.id == "T31" || d.id == "T36i" || d.id == "T36ii" ||
           d.id == "T38" || d.id == "T319" || d.id == "T321" || d.id == "T323")
    operand = "w(A)", exponent = 2.0;
  else if (d.id == "HK1") operand = "w(A)", exponent = r;
  else if (d.id == "HK2" || d.id == "BP") operand = "w(A)", exponent = 2.0 * r;
  else if (d.id == "HOLB4" || d.id == "HOLB2C") operand = "w(AB)";
  else if (d.id == "FH") operand = "w(AB+BA)";
  else if (d.id == "POWK") operand = "w(A^" + fmt(r) + ")";
  else if (d.id == "KITT-ATBCSD" || d.id == "T317") operand = "w(ATB+CSD)";
  else if (d.id == "T33i") operand = "w(A*XB)", exponent = r;
  else if (d.id == "T33ii" || d.id == "T310" || d.id == "T310C") operand = "w(A*XB)";
  else if (d.id == "T312i" || d.id == "T312ii")
    operand = "w(A^" + fmt(params.alpha) + "XB^" + fmt(1.0 - params.alpha) + ")";
  else if (d.id == "T314" || d.id == "T316") operand = "w(sum" + n + " A*XB)";
  else if (d.id == "T322" || d.id == "T324") operand = "w(sum" + n + " A)", exponent = 2.0;
  else if (d.id == "T41") operand = "w([[0,P],[Q,0]])", exponent = 2.0;

  std::optional<std::string> outer;
  if (d.needs_phi && params.phi) {
    const OrliczFunction& phi = *params.phi;
    if (phi.family() == OrliczFamily::Power)
      exponent *= phi.param();
    else
      outer = phi.id();
  }
  std::string s = exponent == 1.0 ? operand : operand + "^" + fmt(exponent);
  if (outer) s = "phi[" + *outer + "](" + s + ")";
  return s;
}

std::vector<std::pair<std::string, double>> tightness_rank(const ComplexMatrix& a,
                                                           std::span<const std::string> ids,
                                                           const BoundParams& params,
                                                           const EvalOptions& opts) {
  std::vector<std::pair<std::string, double>> out;
  if (ids.empty()) return out;
  const std::string first = lhs_functional(ids.front(), params);
  for (const auto& id : ids) {
    const std::string f = lhs_functional(id, params);
    if (f != first)
      throw Error(ErrorKind::IncomparableBounds,
                  ids.front() + " bounds " + first + " but " + id + " bounds " + f);
  }
  BoundInputs inputs{{"A", a}};
  EvalCache local;
  EvalOptions o = opts;
  if (!o.cache) o.cache = &local;
  for (const auto& id : ids) out.emplace_back(id, evaluate_bound(id, inputs, params, o).rhs);
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    return x.second != y.second ? x.second < y.second : x.first < y.first;
  });
  // Values equal up to roundoff count as ties and are ordered by id.
  for (std::size_t i = 0; i < out.size();) {
    std::size_t j = i + 1;
    while (j < out.size() &&
           out[j].second - out[j - 1].second <= 1e-9 * std::max(1.0, std::abs(out[j].second)))
      ++j;
    std::sort(out.begin() + i, out.begin() + j,
              [](const auto& x, const auto& y) { return x.first < y.first; });
    i = j;
  }
  return out;
}

}  // namespace oradius
