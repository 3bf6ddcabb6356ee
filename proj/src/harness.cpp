#include "oradius/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

#include "oradius/error.hpp"

namespace oradius {

namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;
constexpr double kLemmaTol = 1e-9;
constexpr double kCoherenceTol = 1e-9;
constexpr double kOrderTol = 1e-9;

using Rng = std::mt19937_64;

std::string fmt(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::uint64_t fnv(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

cplx cgauss(Rng& rng) {
  std::normal_distribution<double> nd;
  const double re = nd(rng);
  const double im = nd(rng);
  return cplx(re, im) / std::sqrt(2.0);
}

Eigen::MatrixXcd ginibre(int n, Rng& rng) {
  Eigen::MatrixXcd g(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) g(i, j) = cgauss(rng);
  return g;
}

Eigen::MatrixXcd herm(const Eigen::MatrixXcd& m) { return 0.5 * (m + m.adjoint()); }

/// Q factor of a QR decomposition with R's diagonal made positive.
Eigen::MatrixXcd haar_from(const Eigen::MatrixXcd& g) {
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
  Eigen::MatrixXcd q = qr.householderQ();
  const Eigen::MatrixXcd r = qr.matrixQR();
  for (int j = 0; j < g.cols(); ++j) {
    const double a = std::abs(r(j, j));
    if (a > 0.0) q.col(j) *= r(j, j) / a;
  }
  return q;
}

Eigen::MatrixXcd normal_from(const Eigen::MatrixXcd& g, const Eigen::VectorXcd& d) {
  const Eigen::MatrixXcd q = haar_from(g);
  return q * d.asDiagonal() * q.adjoint();
}

Eigen::MatrixXcd strict_upper(const Eigen::MatrixXcd& g) {
  Eigen::MatrixXcd u = g.triangularView<Eigen::StrictlyUpper>();
  return u;
}

Eigen::MatrixXcd contraction_from(const Eigen::MatrixXcd& g) {
  return g / (operator_norm(ComplexMatrix(g)) + 1e-6);
}

Eigen::MatrixXcd poly(const Eigen::MatrixXcd& m, const cplx c[4]) {
  Eigen::MatrixXcd out = c[3] * m;
  out.diagonal().array() += c[2];
  out = out * m;
  out.diagonal().array() += c[1];
  out = out * m;
  out.diagonal().array() += c[0];
  return out;
}

}  // namespace

const std::vector<std::string>& ensemble_names() {
  static const std::vector<std::string> names{"ginibre",     "hermitian",      "normal",
                                              "nilpotent",   "psd",            "contraction",
                                              "commuting-pair", "block-pair"};
  return names;
}

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ull;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBull;
  x ^= x >> 31;
  return x;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(master + (index + 1) * kGamma);
}

Generated gen_matrix(std::string_view ensemble, int n, std::uint64_t seed) {
  if (n < 1 || n > 64) throw Error(ErrorKind::DomainError, "dimension must be in [1, 64]");
  Rng rng(seed);
  if (ensemble == "ginibre") return {ComplexMatrix(ginibre(n, rng)), std::nullopt};
  if (ensemble == "hermitian") return {ComplexMatrix(herm(ginibre(n, rng))), std::nullopt};
  if (ensemble == "normal") {
    const Eigen::MatrixXcd g = ginibre(n, rng);
    Eigen::VectorXcd d(n);
    for (int i = 0; i < n; ++i) d(i) = cgauss(rng);
    return {ComplexMatrix(normal_from(g, d)), std::nullopt};
  }
  if (ensemble == "nilpotent") return {ComplexMatrix(strict_upper(ginibre(n, rng))), std::nullopt};
  if (ensemble == "psd") {
    const Eigen::MatrixXcd g = ginibre(n, rng);
    return {ComplexMatrix(herm(g.adjoint() * g)), std::nullopt};
  }
  if (ensemble == "contraction") return {ComplexMatrix(contraction_from(ginibre(n, rng))), std::nullopt};
  if (ensemble == "commuting-pair") {
    const Eigen::MatrixXcd m = ginibre(n, rng);
    cplx c1[4], c2[4];
    for (auto& c : c1) c = cgauss(rng);
    for (auto& c : c2) c = cgauss(rng);
    return {ComplexMatrix(poly(m, c1)), ComplexMatrix(poly(m, c2))};
  }
  if (ensemble == "block-pair") {
    Eigen::MatrixXcd p = ginibre(n, rng);
    Eigen::MatrixXcd q = ginibre(n, rng);
    return {ComplexMatrix(std::move(p)), ComplexMatrix(std::move(q))};
  }
  throw Error(ErrorKind::UnknownEnsemble, "unknown ensemble '" + std::string(ensemble) + "'");
}

// ---------------------------------------------------------------------------
// Lemma probes

namespace {

Eigen::VectorXcd random_vector(int n, Rng& rng) {
  Eigen::VectorXcd v(n);
  for (int i = 0; i < n; ++i) v(i) = cgauss(rng);
  return v;
}

Eigen::VectorXcd unit_vector(int n, Rng& rng) {
  Eigen::VectorXcd v = random_vector(n, rng);
  return v / v.norm();
}

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

/// PSD matrix with norm drawn from [0, max_norm].
ComplexMatrix random_psd(int n, Rng& rng, double max_norm) {
  const Eigen::MatrixXcd g = ginibre(n, rng);
  ComplexMatrix p(herm(g.adjoint() * g));
  const double nrm = operator_norm(p);
  return (uniform(rng, 0.0, max_norm) / nrm) * p;
}

const std::vector<OrliczFunction>& lemma_phis() {
  static const std::vector<OrliczFunction> phis{
      OrliczFunction::power(1.0),           OrliczFunction::power(2.0),
      OrliczFunction::power(3.5),           OrliczFunction::power_normalized(1.5),
      OrliczFunction::power_normalized(3.0), OrliczFunction::exp_power(2.0),
      OrliczFunction::log_tempered(2.0),    OrliczFunction::log_tempered(3.0)};
  return phis;
}

double quad(const ComplexMatrix& m, const Eigen::VectorXcd& x) { return x.dot(m.data() * x).real(); }

struct ProbeState {
  LemmaReport rep;
  void check(double lhs, double rhs, const std::string& what) {
    ++rep.samples;
    const double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
    const double excess = (lhs - rhs) / scale;
    rep.worst_excess = std::max(rep.worst_excess, excess);
    if (!(lhs <= rhs + kLemmaTol * scale)) {
      if (rep.failures == 0) rep.first_failure = what + ": " + fmt(lhs) + " > " + fmt(rhs);
      ++rep.failures;
    }
  }
};

}  // namespace

LemmaReport lemma_probe(std::string_view lemma_id, std::uint64_t seed, int samples) {
  static const std::vector<std::string> ids{"L21", "L22", "L23", "L24", "L25", "L26", "L27"};
  if (std::find(ids.begin(), ids.end(), lemma_id) == ids.end())
    throw Error(ErrorKind::ParamOutOfRange, "unknown lemma '" + std::string(lemma_id) + "'");
  Rng rng(seed);
  ProbeState st;
  st.rep.lemma_id = std::string(lemma_id);
  const auto& phis = lemma_phis();

  // Complements are computed once; power:1 has none.
  std::vector<std::optional<OrliczFunction>> psis;
  if (lemma_id == "L26")
    for (const auto& phi : phis)
      psis.push_back(phi.family() == OrliczFamily::Power && phi.param() == 1.0
                         ? std::nullopt
                         : std::optional<OrliczFunction>(complement(phi)));

  for (int s = 0; s < samples; ++s) {
    const int n = uniform_int(rng, 2, 6);
    if (lemma_id == "L21") {
      const OrliczFunction& phi = phis[uniform_int(rng, 0, int(phis.size()) - 1)];
      const ComplexMatrix a = random_psd(n, rng, 3.0);
      const Eigen::VectorXcd x = unit_vector(n, rng);
      const ComplexMatrix pa = func_calc([&](double t) { return phi(t); }, a);
      st.check(phi(std::max(0.0, quad(a, x))), quad(pa, x), phi.id());
    } else if (lemma_id == "L22") {
      const double r = uniform(rng, 1.0, 4.0);
      const ComplexMatrix a = random_psd(n, rng, 3.0);
      const Eigen::VectorXcd x = unit_vector(n, rng);
      const ComplexMatrix ar = func_calc([r](double t) { return std::pow(t, r); }, a);
      st.check(std::pow(std::max(0.0, quad(a, x)), r), quad(ar, x), "r=" + fmt(r));
    } else if (lemma_id == "L23" || lemma_id == "L24") {
      const ComplexMatrix a(ginibre(n, rng));
      const Eigen::VectorXcd x = random_vector(n, rng), y = random_vector(n, rng);
      const double alpha = uniform(rng, 0.0, 1.0);
      const AbsPair ab = abs_pair(a);
      const double inner = std::abs(y.dot(a.data() * x));
      if (lemma_id == "L23") {
        // f(t) = t^alpha or t exp(-c t); g(t) = t / f(t).
        const bool expo = uniform_int(rng, 0, 1) == 1;
        const double c = uniform(rng, 0.0, 1.0);
        const FactorPair fg = expo ? FactorPair::exponential(c) : FactorPair::power(alpha);
        const ComplexMatrix fa = func_calc(fg.f, ab.abs), ga = func_calc(fg.g, ab.abs_adj);
        st.check(inner, (fa.data() * x).norm() * (ga.data() * y).norm(), fg.id);
      } else {
        const auto p = [](double e) { return [e](double t) { return std::pow(t, e); }; };
        const ComplexMatrix l = func_calc(p(2.0 * alpha), ab.abs);
        const ComplexMatrix r = func_calc(p(2.0 * (1.0 - alpha)), ab.abs_adj);
        st.check(inner * inner, quad(l, x) * quad(r, y), "alpha=" + fmt(alpha));
      }
    } else if (lemma_id == "L25") {
      const Eigen::VectorXcd x = random_vector(n, rng), y = random_vector(n, rng), e = unit_vector(n, rng);
      const double lhs = std::abs(e.dot(x) * y.dot(e));
      st.check(lhs, 0.5 * (x.norm() * y.norm() + std::abs(y.dot(x))), "buzano");
    } else if (lemma_id == "L26") {
      int k = uniform_int(rng, 0, int(phis.size()) - 1);
      while (!psis[k]) k = uniform_int(rng, 0, int(phis.size()) - 1);
      const OrliczFunction &phi = phis[k], &psi = *psis[k];
      const double u = uniform(rng, 0.0, 3.0), v = uniform(rng, 0.0, 3.0);
      st.check(u * v, phi(u) + psi(v), phi.id() + " young");
      // Equality at v = p(u), checked in both directions.
      const double pu = phi.kernel(u);
      const double lhs = u * pu, rhs = phi(u) + psi(pu);
      st.check(rhs, lhs, phi.id() + " equality at u=" + fmt(u));
    } else {
      const int len = uniform_int(rng, 1, 8);
      std::vector<double> a(len);
      for (double& x : a) x = uniform(rng, 0.0, 3.0);
      const OrliczFunction& phi = phis[uniform_int(rng, 0, int(phis.size()) - 1)];
      double sum = 0.0, phi_sum = 0.0;
      for (double x : a) sum += x, phi_sum += phi(x);
      st.check(phi(sum / len), phi_sum / len, phi.id() + " bohr");
      if (!bohr_check(phi, a)) st.check(1.0, 0.0, phi.id() + " bohr_check");
      const double t = uniform(rng, 0.0, 1.0), u = uniform(rng, 0.0, 3.0);
      st.check(phi(t * u), t * phi(u), phi.id() + " scaling");
    }
  }
  st.rep.samples = samples;
  return st.rep;
}

// ---------------------------------------------------------------------------
// Manifest

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto piece = trim(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start));
    if (!piece.empty()) out.push_back(piece);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <class T>
T parse_num(std::string_view s, std::string_view key) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw Error(ErrorKind::ParseError, "manifest key '" + std::string(key) + "': bad number '" +
                                           std::string(s) + "'");
  return v;
}

}  // namespace

void validate_config(const CampaignConfig& c) {
  auto bad = [](const std::string& m) { throw Error(ErrorKind::ParamOutOfRange, m); };
  if (c.trials < 1) bad("trials must be >= 1");
  if (c.dim_lo < 1 || c.dim_hi > 64 || c.dim_lo > c.dim_hi) bad("dims must lie within [1, 64]");
  if (c.ensembles.empty()) bad("no ensembles");
  for (const auto& e : c.ensembles)
    if (std::find(ensemble_names().begin(), ensemble_names().end(), e) == ensemble_names().end())
      throw Error(ErrorKind::UnknownEnsemble, "unknown ensemble '" + e + "'");
  for (const auto& b : c.bound_ids) find_bound(b);
  for (const auto& p : c.phis) parse_phi(p);
  for (double a : c.alphas)
    if (!(a >= 0.0 && a <= 1.0)) bad("alpha " + fmt(a) + " not in [0, 1]");
  for (double r : c.rs)
    if (!(r >= 1.0) || !std::isfinite(r)) bad("r " + fmt(r) + " must be >= 1");
  if (c.max_family < 1) bad("family must be >= 1");
  if (c.threads < 1) bad("threads must be >= 1");
}

CampaignConfig parse_manifest(std::string_view text) {
  CampaignConfig c;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string l = trim(line);
    if (l.empty()) continue;
    const auto eq = l.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::ParseError, "manifest line " + std::to_string(line_no) + " lacks '='");
    const std::string key = trim(std::string_view(l).substr(0, eq));
    const std::string val = trim(std::string_view(l).substr(eq + 1));
    if (key == "seed") {
      c.master_seed = parse_num<std::uint64_t>(val, key);
    } else if (key == "trials") {
      c.trials = parse_num<int>(val, key);
    } else if (key == "dims") {
      const auto dash = val.find('-');
      if (dash == std::string::npos) {
        c.dim_lo = c.dim_hi = parse_num<int>(val, key);
      } else {
        c.dim_lo = parse_num<int>(trim(std::string_view(val).substr(0, dash)), key);
        c.dim_hi = parse_num<int>(trim(std::string_view(val).substr(dash + 1)), key);
      }
    } else if (key == "ensembles") {
      c.ensembles = split_list(val);
    } else if (key == "bounds") {
      c.bound_ids = val == "all" ? std::vector<std::string>{} : split_list(val);
    } else if (key == "phi") {
      c.phis = split_list(val);
    } else if (key == "alpha") {
      c.alphas.clear();
      for (const auto& s : split_list(val)) c.alphas.push_back(parse_num<double>(s, key));
    } else if (key == "r") {
      c.rs.clear();
      for (const auto& s : split_list(val)) c.rs.push_back(parse_num<double>(s, key));
    } else if (key == "family") {
      c.max_family = parse_num<int>(val, key);
    } else if (key == "threads") {
      c.threads = parse_num<int>(val, key);
    } else if (key == "checks") {
      if (val != "true" && val != "false")
        throw Error(ErrorKind::ParseError, "manifest key 'checks' must be true or false");
      c.checks = val == "true";
    } else {
      throw Error(ErrorKind::ParseError, "unknown manifest key '" + key + "'");
    }
  }
  validate_config(c);
  return c;
}

// ---------------------------------------------------------------------------
// Coherence

std::vector<CoherenceResult> coherence_checks(const BoundInputs& pool, double alpha, double r, int n,
                                              EvalCache* cache) {
  EvalCache local;
  EvalOptions opts;
  opts.cache = cache ? cache : &local;
  std::vector<CoherenceResult> out;
  auto add = [&](std::string name, double x, double y) {
    const double scale = std::max({1.0, std::abs(x), std::abs(y)});
    out.push_back({std::move(name), x, y, std::abs(x - y) <= kCoherenceTol * scale});
  };
  auto rhs = [&](const char* id, const BoundParams& p) { return evaluate_bound(id, pool, p, opts).rhs; };
  auto at = [&](const std::string& role) -> const ComplexMatrix& {
    auto it = pool.find(role);
    if (it == pool.end()) throw Error(ErrorKind::MissingInput, "coherence pool lacks '" + role + "'");
    return it->second;
  };
  const ComplexMatrix& a = at("A");
  const AbsPair ab = abs_pair(a);
  const double rad_tol = 1e-10;
  auto w_up = [&](const ComplexMatrix& m) {
    return numerical_radius(m, rad_tol * std::max(1.0, operator_norm(m))).upper;
  };

  BoundParams p;
  p.alpha = alpha;
  p.r = r;
  p.n = n;

  p.phi = OrliczFunction::power(1.0);
  add("T34i(power:1)~|(|A|+|A*|)|/2", rhs("T34i", p), 0.5 * hermitian_norm(ab.abs + ab.abs_adj));

  p.phi = OrliczFunction::power(2.0);
  add("T34i(power:2)~KITT05U", rhs("T34i", p), rhs("KITT05U", p));

  p.phi = OrliczFunction::power(r);
  if (alpha > 0.0 && alpha < 1.0) add("T36ii(power:r)~HK2", rhs("T36ii", p), rhs("HK2", p));

  p.phi = OrliczFunction::power(1.0);
  add("T38(power:1)~AOK", rhs("T38", p), rhs("AOK", p));

  {
    // n^(r-1)/sqrt(2) w(sum (B*|X|^(2a)B)^r + i (A*|X*|^(2(1-a))A)^r)
    p.phi = OrliczFunction::power(r);
    const auto pw = [](double e) { return [e](double t) { return std::pow(t, e); }; };
    std::optional<ComplexMatrix> z;
    for (int k = 1; k <= n; ++k) {
      const std::string s = std::to_string(k);
      const ComplexMatrix &ak = at("A" + s), &bk = at("B" + s), &xk = at("X" + s);
      const AbsPair xp = abs_pair(xk);
      const ComplexMatrix m(herm((adjoint(bk) * func_calc(pw(2.0 * alpha), xp.abs) * bk).data()));
      const ComplexMatrix q(herm((adjoint(ak) * func_calc(pw(2.0 * (1.0 - alpha)), xp.abs_adj) * ak).data()));
      const ComplexMatrix term = func_calc(pw(r), m) + cplx(0.0, 1.0) * func_calc(pw(r), q);
      z = z ? *z + term : term;
    }
    add("T316(power:r)~sum form", rhs("T316", p), std::pow(n, r - 1.0) / std::sqrt(2.0) * w_up(*z));
  }

  {
    p.phi = OrliczFunction::power(1.0);
    p.alpha = 1.0;
    const ComplexMatrix &pm = at("P"), &qm = at("Q");
    const AbsPair pp = abs_pair(pm), qp = abs_pair(qm);
    const auto gram = [](const ComplexMatrix& x) { return ComplexMatrix(herm((adjoint(x) * x).data())); };
    const auto gram_adj = [](const ComplexMatrix& x) { return ComplexMatrix(herm((x * adjoint(x)).data())); };
    const auto re = [](const ComplexMatrix& x) { return ComplexMatrix(herm(x.data())); };
    const double first =
        std::max(hermitian_norm(gram(qm) + gram_adj(pm)), hermitian_norm(gram(pm) + gram_adj(qm)));
    const double second =
        std::max(hermitian_norm(re(qp.abs * pp.abs_adj)), hermitian_norm(re(pp.abs * qp.abs_adj)));
    add("T41(power:1,alpha=1)~max form", rhs("T41", p), 0.25 * first + 0.5 * second);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Campaign

namespace {

struct TrialSetup {
  int trial = 0;
  std::uint64_t seed = 0;
  std::string ensemble;
  int dim = 0;
  int family = 1;
};

class TrialPool {
 public:
  explicit TrialPool(const TrialSetup& t) : t_(t) {}

  /// Matrix for `role` drawn from `ensemble` (trial ensemble when empty).
  const ComplexMatrix& get(const std::string& role, const std::string& ensemble = {}) {
    const std::string& ens = ensemble.empty() ? t_.ensemble : ensemble;
    const std::string key = ens + "/" + role;
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    const bool pair = ens == "commuting-pair" || ens == "block-pair";
    // Pair ensembles pair A with B and P with Q.
    std::string base = role, partner_of;
    if (pair && (role == "B" || role == "Q")) partner_of = role == "B" ? "A" : "P";
    if (!partner_of.empty()) {
      Generated g = gen_matrix(ens, t_.dim, derive_seed(t_.seed, fnv(partner_of)));
      cache_.emplace(ens + "/" + partner_of, g.first);
      return cache_.insert_or_assign(key, *g.second).first->second;
    }
    Generated g = gen_matrix(ens, t_.dim, derive_seed(t_.seed, fnv(role)));
    if (pair) cache_.emplace(ens + "/" + (role == "A" ? "B" : role == "P" ? "Q" : role + "'"), *g.second);
    return cache_.insert_or_assign(key, g.first).first->second;
  }

  BoundInputs inputs_for(const BoundDescriptor& d, int n) {
    BoundInputs in;
    for (const auto& role : d.input_roles(n)) {
      std::string ens;
      if ((d.id == "T312i" || d.id == "T312ii") && (role == "A" || role == "B")) ens = "psd";
      if (d.id == "T310C" && role == "X") ens = "contraction";
      if (d.id == "HOLB2C") ens = "commuting-pair";
      in.emplace(role, get(role, ens));
    }
    return in;
  }

  BoundInputs coherence_pool(int n) {
    BoundInputs in;
    for (const std::string role : {"A", "P", "Q"}) in.emplace(role, get(role));
    for (int k = 1; k <= n; ++k)
      for (const std::string r : {"A", "B", "X"}) {
        const std::string role = r + std::to_string(k);
        in.emplace(role, get(role));
      }
    return in;
  }

 private:
  const TrialSetup& t_;
  std::map<std::string, ComplexMatrix> cache_;
};

struct Event {
  enum Kind { Report, Skipped, Failed } kind = Report;
  std::string bound;
  BoundReport report;
  std::string message;
};

struct CheckEvent {
  std::string name;
  double gap = 0.0;  // relative excess; > 0 means failure
  bool failed = false;
};

struct TrialResult {
  TrialSetup setup;
  std::vector<Event> events;
  std::vector<CheckEvent> checks;
};

std::string params_ref(const TrialSetup& t, const BoundReport& r) {
  std::string s = "trial=" + std::to_string(t.trial) + " ensemble=" + t.ensemble +
                  " dim=" + std::to_string(t.dim) + " n=" + std::to_string(r.n);
  if (!r.phi.empty()) s += " phi=" + r.phi;
  if (r.alpha) s += " alpha=" + fmt(*r.alpha);
  if (r.r) s += " r=" + fmt(*r.r);
  return s;
}

TrialResult run_trial(const CampaignConfig& c, const std::vector<const BoundDescriptor*>& bounds,
                      const std::vector<OrliczFunction>& phis, int trial) {
  TrialResult res;
  TrialSetup& t = res.setup;
  t.trial = trial;
  t.seed = derive_seed(c.master_seed, static_cast<std::uint64_t>(trial));
  t.ensemble = c.ensembles[static_cast<std::size_t>(trial) % c.ensembles.size()];
  Rng rng(t.seed);
  t.dim = std::uniform_int_distribution<int>(c.dim_lo, c.dim_hi)(rng);
  t.family = std::uniform_int_distribution<int>(1, c.max_family)(rng);

  TrialPool pool(t);
  EvalCache cache;
  EvalOptions opts;
  opts.cache = &cache;

  const std::vector<std::optional<OrliczFunction>> no_phi{std::nullopt};
  std::vector<std::optional<OrliczFunction>> all_phi(phis.begin(), phis.end());
  const std::vector<std::optional<double>> none{std::nullopt};
  std::vector<std::optional<double>> alphas(c.alphas.begin(), c.alphas.end());
  std::vector<std::optional<double>> rs(c.rs.begin(), c.rs.end());

  for (const BoundDescriptor* d : bounds) {
    const int n = d->family ? t.family : 1;
    std::optional<BoundInputs> inputs;
    for (const auto& phi : d->needs_phi ? all_phi : no_phi)
      for (const auto& alpha : d->uses_alpha ? alphas : none)
        for (const auto& r : d->uses_r ? rs : none) {
          BoundParams p;
          p.phi = phi;
          if (alpha) p.alpha = *alpha;
          if (r) p.r = *r;
          p.n = n;
          Event ev;
          ev.bound = d->id;
          try {
            check_params(*d, p);
            if (!inputs) inputs = pool.inputs_for(*d, n);
            ev.report = evaluate_bound(d->id, *inputs, p, opts);
          } catch (const Error& e) {
            const bool inadmissible = e.kind() == ErrorKind::ParamOutOfRange ||
                                      e.kind() == ErrorKind::NotSubmultiplicative;
            ev.kind = inadmissible ? Event::Skipped : Event::Failed;
            ev.message = e.what();
          }
          res.events.push_back(std::move(ev));
        }
  }

  if (c.checks) {
    BoundInputs a{{"A", pool.get("A")}};
    BoundParams p;
    p.r = 1.0;
    auto order = [&](const char* name, const char* lo_id) {
      CheckEvent ce;
      ce.name = name;
      try {
        const double lo = evaluate_bound(lo_id, a, p, opts).rhs;
        const double hi = evaluate_bound("KITT05U", a, p, opts).rhs;
        const double scale = std::max({1.0, std::abs(lo), std::abs(hi)});
        ce.gap = (lo - hi) / scale;
        ce.failed = !(lo <= hi + kOrderTol * scale);
      } catch (const Error&) {
        ce.failed = true;
        ce.gap = std::numeric_limits<double>::infinity();
      }
      res.checks.push_back(ce);
    };
    order("order:AOK<=KITT05U", "AOK");
    order("order:BP(r=1)<=KITT05U", "BP");

    const double alpha = c.alphas.empty() ? 0.5 : c.alphas[trial % c.alphas.size()];
    const double r = c.rs.empty() ? 1.0 : c.rs[trial % c.rs.size()];
    try {
      for (const auto& cr : coherence_checks(pool.coherence_pool(t.family), alpha, r, t.family, &cache)) {
        const double scale = std::max({1.0, std::abs(cr.rhs_a), std::abs(cr.rhs_b)});
        const double gap = std::abs(cr.rhs_a - cr.rhs_b) / scale;
        // Overflowing pairs (both sides infinite) carry no information.
        if (!std::isfinite(cr.rhs_a) && !std::isfinite(cr.rhs_b)) continue;
        res.checks.push_back({"coherence:" + cr.name, gap, !cr.agree});
      }
    } catch (const Error&) {
      res.checks.push_back({"coherence:error", std::numeric_limits<double>::infinity(), true});
    }
  }
  return res;
}

}  // namespace

long CampaignReport::total_violations() const {
  long v = 0;
  for (const auto& [id, agg] : bounds) v += agg.violation_count;
  return v;
}

long CampaignReport::check_failures() const {
  long v = 0;
  for (const auto& [id, agg] : checks) v += agg.failures;
  return v;
}

CampaignReport run_campaign(const CampaignConfig& config) {
  validate_config(config);
  std::vector<const BoundDescriptor*> bounds;
  if (config.bound_ids.empty()) {
    for (const auto& d : list_bounds()) bounds.push_back(&d);
  } else {
    for (const auto& id : config.bound_ids) bounds.push_back(&find_bound(id));
  }
  std::vector<OrliczFunction> phis;
  for (const auto& s : config.phis) phis.push_back(parse_phi(s));
  for (const auto& phi : phis) phi.submultiplicative();  // warm the lazy flag before threading

  std::vector<TrialResult> results(static_cast<std::size_t>(config.trials));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int t = next++; t < config.trials; t = next++) results[t] = run_trial(config, bounds, phis, t);
  };
  const int nthreads = std::min(config.threads, config.trials);
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  // Deterministic reduction in trial order.
  CampaignReport rep;
  rep.master_seed = config.master_seed;
  for (const auto* d : bounds) rep.bounds[d->id];
  for (const auto& tr : results) {
    for (const auto& ev : tr.events) {
      BoundAggregate& agg = rep.bounds[ev.bound];
      if (ev.kind == Event::Skipped) {
        ++agg.skipped_count;
        continue;
      }
      if (ev.kind == Event::Failed) {
        ++agg.error_count;
        rep.errors.push_back("trial " + std::to_string(tr.setup.trial) + " bound " + ev.bound + ": " +
                             ev.message);
        continue;
      }
      const BoundReport& r = ev.report;
      rep.rows.push_back({tr.setup.trial, r});
      if (r.verdict == Verdict::Overflow) {
        ++agg.overflow_count;
        continue;
      }
      if (agg.evaluations == 0 || r.slack < agg.min_slack) {
        agg.min_slack = r.slack;
        agg.worst_input_ref = params_ref(tr.setup, r);
      }
      ++agg.evaluations;
      agg.sum_slack += r.slack;
      if (r.verdict == Verdict::Tight) ++agg.tight_count;
      if (r.verdict == Verdict::Violated) ++agg.violation_count;
    }
    for (const auto& ce : tr.checks) {
      CheckAggregate& agg = rep.checks[ce.name];
      ++agg.checks;
      if (ce.failed) ++agg.failures;
      if (agg.checks == 1 || ce.gap > agg.worst_gap) {
        agg.worst_gap = ce.gap;
        agg.worst_ref = "trial=" + std::to_string(tr.setup.trial) + " ensemble=" + tr.setup.ensemble +
                        " dim=" + std::to_string(tr.setup.dim);
      }
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Witness search

namespace {

enum class RoleKind { Ensemble, Psd, Contraction, CommutingFirst, CommutingSecond };

ComplexMatrix realize(RoleKind kind, std::string_view ensemble, const Eigen::MatrixXcd& raw,
                      const Eigen::MatrixXcd* partner) {
  switch (kind) {
    case RoleKind::Psd: return ComplexMatrix(herm(raw.adjoint() * raw));
    case RoleKind::Contraction: return ComplexMatrix(contraction_from(raw));
    case RoleKind::CommutingFirst: return ComplexMatrix(raw);
    case RoleKind::CommutingSecond: {
      cplx c[4]{};
      for (int i = 0; i < 4 && i < raw.size(); ++i) c[i] = raw.data()[i];
      return ComplexMatrix(poly(*partner, c));
    }
    case RoleKind::Ensemble: break;
  }
  if (ensemble == "hermitian") return ComplexMatrix(herm(raw));
  if (ensemble == "nilpotent") return ComplexMatrix(strict_upper(raw));
  if (ensemble == "psd") return ComplexMatrix(herm(raw.adjoint() * raw));
  if (ensemble == "contraction") return ComplexMatrix(contraction_from(raw));
  if (ensemble == "normal") return ComplexMatrix(normal_from(raw, raw.diagonal()));
  return ComplexMatrix(raw);
}

}  // namespace

WitnessResult witness_search(std::string_view bound_id, const BoundParams& params, int budget,
                             std::uint64_t seed, int dim, std::string_view ensemble) {
  const BoundDescriptor& d = find_bound(bound_id);
  check_params(d, params);
  if (std::find(ensemble_names().begin(), ensemble_names().end(), ensemble) == ensemble_names().end())
    throw Error(ErrorKind::UnknownEnsemble, "unknown ensemble '" + std::string(ensemble) + "'");
  const std::vector<std::string> roles = d.input_roles(params.n);
  std::vector<RoleKind> kinds;
  for (const auto& role : roles) {
    RoleKind k = RoleKind::Ensemble;
    if ((d.id == "T312i" || d.id == "T312ii") && (role == "A" || role == "B")) k = RoleKind::Psd;
    if (d.id == "T310C" && role == "X") k = RoleKind::Contraction;
    if (d.id == "HOLB2C") k = role == "A" ? RoleKind::CommutingFirst : RoleKind::CommutingSecond;
    kinds.push_back(k);
  }

  Rng rng(seed);
  using Raws = std::vector<Eigen::MatrixXcd>;
  auto normalize = [](Raws& r) {
    for (auto& m : r) {
      const double f = m.norm();
      if (f > 0.0) m /= f;
    }
  };
  auto build = [&](const Raws& raws) {
    BoundInputs in;
    for (std::size_t i = 0; i < roles.size(); ++i)
      in.emplace(roles[i], realize(kinds[i], ensemble, raws[i], i > 0 ? &raws[0] : nullptr));
    return in;
  };

  WitnessResult best;
  double best_obj = std::numeric_limits<double>::infinity();
  bool have_best = false;
  EvalOptions opts;
  auto objective = [&](const Raws& raws, BoundInputs& in, BoundReport& rep) {
    ++best.evaluations;
    try {
      in = build(raws);
      rep = evaluate_bound(d.id, in, params, opts);
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
    if (rep.verdict == Verdict::Overflow) return std::numeric_limits<double>::infinity();
    return rep.slack / std::max({1.0, std::abs(rep.lhs), std::abs(rep.rhs)});
  };

  while (best.evaluations < budget) {
    Raws cur(roles.size());
    for (auto& m : cur) m = ginibre(dim, rng);
    normalize(cur);
    BoundInputs cur_in;
    BoundReport cur_rep;
    double cur_obj = objective(cur, cur_in, cur_rep);
    double sigma = 0.3;
    int fails = 0;
    while (best.evaluations < budget && sigma > 1e-12) {
      Raws cand = cur;
      for (auto& m : cand) m += sigma * ginibre(dim, rng);
      normalize(cand);
      BoundInputs in;
      BoundReport rep;
      const double obj = objective(cand, in, rep);
      if (obj < cur_obj) {
        cur = std::move(cand);
        cur_obj = obj;
        cur_in = std::move(in);
        cur_rep = rep;
        sigma = std::min(1.0, sigma * 1.5);
        fails = 0;
      } else if (++fails >= 4) {
        sigma *= 0.5;
        fails = 0;
      }
    }
    if (std::isfinite(cur_obj) && (!have_best || cur_obj < best_obj)) {
      best_obj = cur_obj;
      best.inputs = std::move(cur_in);
      best.report = cur_rep;
      have_best = true;
    }
  }
  if (!have_best) throw Error(ErrorKind::Overflow, "witness_search: no finite evaluation");
  best.violation = best.report.verdict == Verdict::Violated;
  return best;
}

}  // namespace oradius
