#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "oradius/bounds.hpp"
#include "oradius/error.hpp"
#include "oradius/harness.hpp"
#include "oradius/io.hpp"
#include "oradius/orlicz.hpp"
#include "oradius/radius.hpp"

using namespace oradius;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitViolated = 1;
constexpr int kExitInput = 2;

constexpr std::uint64_t kDefaultSeed = 20240601;

struct ParamFlags {
  std::string phi, psi, fg;
  std::optional<double> alpha, r;
  std::optional<int> n;

  void attach(CLI::App* app) {
    app->add_option("--phi", phi, "Orlicz function (power:R, pnorm:P, exppow:R, logtemp:P)");
    app->add_option("--psi", psi, "complement of phi (default: computed)");
    app->add_option("--alpha", alpha, "weight parameter");
    app->add_option("--r", r, "exponent parameter");
    app->add_option("--fg", fg, "factor pair with f(t)g(t) = t (power:A, sqrt, exp:C)");
    app->add_option("--n", n, "summand count for sum families");
  }

  BoundParams build() const {
    BoundParams p;
    if (alpha) p.alpha = *alpha;
    if (r) p.r = *r;
    if (!phi.empty()) p.phi = parse_phi(phi);
    if (!psi.empty()) p.psi = parse_phi(psi);
    if (!fg.empty()) p.fg = parse_fg(fg);
    if (n) p.n = *n;
    return p;
  }
};

// Precedence: built-in default or manifest, then ORADIUS_SEED, then --seed.
std::uint64_t resolve_seed(std::uint64_t base, const std::optional<std::uint64_t>& flag) {
  std::uint64_t seed = base;
  if (const char* env = std::getenv("ORADIUS_SEED"); env && *env) {
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (errno || *end != '\0' || env[0] == '-')
      throw Error(ErrorKind::ParseError, std::string("ORADIUS_SEED is not an unsigned integer: '") + env + "'");
    seed = v;
  }
  if (flag) seed = *flag;
  std::cerr << "seed: " << seed << "\n";
  return seed;
}

int verdict_exit(Verdict v) { return v == Verdict::Violated ? kExitViolated : kExitOk; }

BoundInputs bind_files(const BoundDescriptor& d, const std::vector<std::string>& files, BoundParams& p,
                       bool n_given) {
  if (d.family && !n_given) {
    if (files.size() % d.roles.size() != 0)
      throw Error(ErrorKind::MissingInput, d.id + " takes " + std::to_string(d.roles.size()) +
                                               " files per summand, got " + std::to_string(files.size()));
    p.n = std::max<int>(1, static_cast<int>(files.size() / d.roles.size()));
  }
  const auto roles = d.input_roles(p.n);
  if (files.size() != roles.size()) {
    std::string names;
    for (const auto& r : roles) names += (names.empty() ? "" : " ") + r;
    throw Error(ErrorKind::MissingInput, d.id + " expects " + std::to_string(roles.size()) + " files (" + names +
                                             "), got " + std::to_string(files.size()));
  }
  BoundInputs in;
  for (std::size_t i = 0; i < roles.size(); ++i) in.emplace(roles[i], read_matrix_file(files[i]));
  return in;
}

int cmd_eval(const std::vector<std::string>& files, const std::string& bound, const ParamFlags& pf, bool header) {
  resolve_seed(kDefaultSeed, std::nullopt);
  const auto& d = find_bound(bound);
  BoundParams p = pf.build();
  const BoundInputs in = bind_files(d, files, p, pf.n.has_value());
  const BoundReport rep = evaluate_bound(bound, in, p);
  if (header) std::cout << csv_header();
  std::cout << csv_row(rep);
  if (rep.verdict == Verdict::Overflow) std::cerr << "note: overflow in " << bound << "\n";
  return verdict_exit(rep.verdict);
}

struct VerifyFlags {
  std::string manifest, out = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> trials, family, threads;
  std::string dims, ensembles, bounds, phi, alpha, r;
  bool no_checks = false;
};

int cmd_verify(const VerifyFlags& f) {
  std::string text;
  if (!f.manifest.empty()) text = read_text_file(f.manifest) + "\n";
  auto line = [&text](const char* key, const std::string& v) {
    if (!v.empty()) text += std::string(key) + "=" + v + "\n";
  };
  if (f.trials) line("trials", std::to_string(*f.trials));
  if (f.family) line("family", std::to_string(*f.family));
  if (f.threads) line("threads", std::to_string(*f.threads));
  line("dims", f.dims);
  line("ensembles", f.ensembles);
  line("bounds", f.bounds);
  line("phi", f.phi);
  line("alpha", f.alpha);
  line("r", f.r);
  if (f.no_checks) line("checks", "false");
  CampaignConfig cfg = parse_manifest(text);
  cfg.master_seed = resolve_seed(cfg.master_seed, f.seed);

  const CampaignReport rep = run_campaign(cfg);

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(f.out, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create '" + f.out + "'");
  const std::string csv = campaign_csv(rep);
  const std::string summary = summary_json(rep);
  write_file_atomic((fs::path(f.out) / "report.csv").string(), csv);
  write_file_atomic((fs::path(f.out) / "summary.json").string(), summary);

  const long violations = rep.total_violations();
  std::cerr << "trials: " << cfg.trials << ", rows: " << rep.rows.size() << ", violations: " << violations
            << ", check failures: " << rep.check_failures() << ", errors: " << rep.errors.size() << "\n";
  for (const auto& [id, a] : rep.bounds)
    if (a.violation_count) std::cerr << "  " << id << ": " << a.violation_count << " violations, worst at " << a.worst_input_ref << "\n";
  return violations == 0 ? kExitOk : kExitViolated;
}

std::vector<double> parse_range(const std::string& spec) {
  const auto c1 = spec.find(':');
  const auto c2 = c1 == std::string::npos ? std::string::npos : spec.find(':', c1 + 1);
  if (c2 == std::string::npos) throw Error(ErrorKind::ParseError, "range must be A:B:STEP, got '" + spec + "'");
  double a, b, step;
  try {
    std::size_t used = 0;
    a = std::stod(spec.substr(0, c1), &used);
    if (used != c1) throw std::invalid_argument("a");
    b = std::stod(spec.substr(c1 + 1, c2 - c1 - 1), &used);
    if (used != c2 - c1 - 1) throw std::invalid_argument("b");
    step = std::stod(spec.substr(c2 + 1), &used);
    if (used != spec.size() - c2 - 1) throw std::invalid_argument("step");
  } catch (const std::logic_error&) {
    throw Error(ErrorKind::ParseError, "range must be A:B:STEP, got '" + spec + "'");
  }
  if (!(step > 0) || !(b >= a) || !std::isfinite(a) || !std::isfinite(b))
    throw Error(ErrorKind::ParamOutOfRange, "range needs A <= B and STEP > 0");
  const long count = static_cast<long>(std::floor((b - a) / step + 1e-9)) + 1;
  if (count > 100000) throw Error(ErrorKind::ParamOutOfRange, "range has more than 100000 points");
  std::vector<double> grid;
  for (long k = 0; k < count; ++k) grid.push_back(std::min(b, a + static_cast<double>(k) * step));
  return grid;
}

int cmd_sweep(const std::vector<std::string>& files, const std::string& bound, const std::string& param,
              const std::string& range, const ParamFlags& pf) {
  resolve_seed(kDefaultSeed, std::nullopt);
  const auto& d = find_bound(bound);
  if (param != "alpha" && param != "r")
    throw Error(ErrorKind::ParseError, "--param must be alpha or r, got '" + param + "'");
  if ((param == "alpha" && !d.uses_alpha && !d.uses_fg) || (param == "r" && !d.uses_r))
    throw Error(ErrorKind::ParamOutOfRange, bound + " has no parameter '" + param + "'");
  const auto grid = parse_range(range);
  BoundParams base = pf.build();
  const BoundInputs in = bind_files(d, files, base, pf.n.has_value());

  // Admissibility of the whole grid is settled before anything is printed.
  std::vector<BoundParams> points;
  for (double v : grid) {
    BoundParams p = base;
    (param == "alpha" ? p.alpha : p.r) = v;
    if (param == "alpha" && !pf.fg.empty()) p.fg.reset();
    check_params(d, p);
    points.push_back(std::move(p));
  }
  std::vector<BoundReport> reps;
  EvalCache cache;
  EvalOptions opts;
  opts.cache = &cache;
  for (const auto& p : points) reps.push_back(evaluate_bound(bound, in, p, opts));

  std::string out = param + ",lhs,rhs,slack\n";
  int code = kExitOk;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& r = reps[i];
    out += format_double(grid[i]) + "," + format_double(r.lhs) + "," + format_double(r.rhs) + "," +
           format_double(r.slack) + "\n";
    if (r.verdict == Verdict::Violated) code = kExitViolated;
  }
  std::cout << out;
  return code;
}

struct WitnessFlags {
  std::string bound, ensemble = "ginibre", out;
  int budget = 2000, dim = 2;
  std::optional<std::uint64_t> seed;
  bool header = false;
};

int cmd_witness(const WitnessFlags& f, const ParamFlags& pf) {
  const std::uint64_t seed = resolve_seed(kDefaultSeed, f.seed);
  if (f.budget < 1) throw Error(ErrorKind::ParamOutOfRange, "--budget must be positive");
  const BoundParams p = pf.build();
  const WitnessResult res = witness_search(f.bound, p, f.budget, seed, f.dim, f.ensemble);
  if (!f.out.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(f.out, ec);
    if (ec) throw Error(ErrorKind::IoError, "cannot create '" + f.out + "'");
    for (const auto& [role, m] : res.inputs)
      write_file_atomic((std::filesystem::path(f.out) / (role + ".json")).string(), matrix_to_json(m));
  }
  if (f.header) std::cout << csv_header();
  std::cout << csv_row(res.report);
  std::cerr << "evaluations: " << res.evaluations << (res.violation ? ", violation found" : "") << "\n";
  return res.violation ? kExitViolated : kExitOk;
}

int cmd_range(const std::string& file, int samples) {
  resolve_seed(kDefaultSeed, std::nullopt);
  if (samples < 1) throw Error(ErrorKind::ParamOutOfRange, "--samples must be at least 1");
  const ComplexMatrix a = read_matrix_file(file);
  const auto pts = range_boundary_samples(a, samples);
  const CertifiedValue w = numerical_radius(a);
  std::string out = "theta,re,im\n";
  for (int k = 0; k < samples; ++k) {
    const double theta = 2.0 * std::numbers::pi * k / samples;
    out += format_double(theta) + "," + format_double(pts[k].real()) + "," + format_double(pts[k].imag()) + "\n";
  }
  out += "# w in [" + format_double(w.lower) + ", " + format_double(w.upper) + "]\n";
  std::cout << out;
  return kExitOk;
}

int cmd_list() {
  resolve_seed(kDefaultSeed, std::nullopt);
  for (const auto& d : list_bounds()) {
    std::string roles;
    for (const auto& r : d.roles) roles += (roles.empty() ? "" : ",") + r;
    if (d.family) roles += " (per summand)";
    std::string params;
    auto add = [&params](const char* s) { params += (params.empty() ? "" : ",") + std::string(s); };
    if (d.needs_phi) add("phi");
    if (d.needs_psi) add("psi");
    if (d.uses_alpha) add("alpha");
    if (d.uses_r) add("r");
    if (d.uses_fg) add("fg");
    if (d.family) add("n");
    std::cout << d.id << "\t" << roles << "\t" << (params.empty() ? "-" : params) << "\t" << d.statement << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certified numerical radii and numerical-radius inequality checks"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  std::vector<std::string> files;
  std::string bound;
  ParamFlags pf;
  bool header = false;

  auto* eval = app.add_subcommand("eval", "evaluate one bound on matrix files");
  eval->add_option("files", files, "matrix JSON files, in role order")->required();
  eval->add_option("--bound", bound, "bound id")->required();
  eval->add_flag("--header", header, "print the CSV header first");
  pf.attach(eval);

  VerifyFlags vf;
  auto* verify = app.add_subcommand("verify", "run a soundness campaign");
  verify->add_option("--manifest", vf.manifest, "key=value manifest file");
  verify->add_option("--out", vf.out, "output directory for report.csv and summary.json");
  verify->add_option("--seed", vf.seed, "master seed");
  verify->add_option("--trials", vf.trials, "trial count");
  verify->add_option("--dims", vf.dims, "dimension range LO-HI or N");
  verify->add_option("--ensembles", vf.ensembles, "comma-separated ensembles");
  verify->add_option("--bounds", vf.bounds, "comma-separated bound ids or 'all'");
  verify->add_option("--phi", vf.phi, "comma-separated phi specifiers");
  verify->add_option("--alpha", vf.alpha, "comma-separated alpha values");
  verify->add_option("--r", vf.r, "comma-separated r values");
  verify->add_option("--family", vf.family, "largest summand count for sum families");
  verify->add_option("--threads", vf.threads, "worker threads");
  verify->add_flag("--no-checks", vf.no_checks, "skip ordering and coherence checks");

  std::string param, range;
  ParamFlags sf;
  std::vector<std::string> sweep_files;
  std::string sweep_bound;
  auto* sweep = app.add_subcommand("sweep", "evaluate a bound over a parameter grid");
  sweep->add_option("files", sweep_files, "matrix JSON files, in role order")->required();
  sweep->add_option("--bound", sweep_bound, "bound id")->required();
  sweep->add_option("--param", param, "alpha or r")->required();
  sweep->add_option("--range", range, "A:B:STEP")->required();
  sf.attach(sweep);

  WitnessFlags wf;
  ParamFlags wpf;
  auto* witness = app.add_subcommand("witness", "search for inputs minimizing slack");
  witness->add_option("--bound", wf.bound, "bound id")->required();
  witness->add_option("--budget", wf.budget, "evaluation budget");
  witness->add_option("--seed", wf.seed, "search seed");
  witness->add_option("--dim", wf.dim, "matrix dimension");
  witness->add_option("--ensemble", wf.ensemble, "starting ensemble");
  witness->add_option("--out", wf.out, "directory for the best inputs as ROLE.json");
  witness->add_flag("--header", wf.header, "print the CSV header first");
  wpf.attach(witness);

  std::string range_file;
  int samples = 64;
  auto* rng = app.add_subcommand("range", "sample the numerical range boundary");
  rng->add_option("file", range_file, "matrix JSON file")->required();
  rng->add_option("--samples", samples, "number of boundary samples");

  auto* list = app.add_subcommand("list", "list the bound catalog");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*eval) return cmd_eval(files, bound, pf, header);
    if (*verify) return cmd_verify(vf);
    if (*sweep) return cmd_sweep(sweep_files, sweep_bound, param, range, sf);
    if (*witness) return cmd_witness(wf, wpf);
    if (*rng) return cmd_range(range_file, samples);
    if (*list) return cmd_list();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
