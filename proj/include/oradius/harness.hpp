#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "oradius/bounds.hpp"

namespace oradius {

inline constexpr std::string_view kVersion = "1.0.0";

/// Names accepted by gen_matrix.
const std::vector<std::string>& ensemble_names();

struct Generated {
  ComplexMatrix first;
  std::optional<ComplexMatrix> second;  // set for commuting-pair and block-pair
};

/// Deterministic in (ensemble, n, seed). Throws UnknownEnsemble.
Generated gen_matrix(std::string_view ensemble, int n, std::uint64_t seed);

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);
/// Seed of trial `index` under `master`: mix64(master + (index + 1) * golden gamma).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

struct LemmaReport {
  std::string lemma_id;
  int samples = 0;
  int failures = 0;
  double worst_excess = 0.0;  // largest (lhs - rhs) / scale seen
  std::string first_failure;
};

/// Checks one of L21..L27 on `samples` random draws at tolerance 1e-9 * scale.
LemmaReport lemma_probe(std::string_view lemma_id, std::uint64_t seed, int samples);

struct CampaignConfig {
  std::uint64_t master_seed = 20240601;
  int trials = 1000;
  int dim_lo = 2, dim_hi = 8;
  std::vector<std::string> ensembles{"ginibre", "hermitian", "normal", "nilpotent", "psd", "contraction"};
  std::vector<std::string> bound_ids;  // empty = whole catalog
  std::vector<std::string> phis{"power:1", "power:2", "pnorm:2", "pnorm:3", "exppow:2", "logtemp:2"};
  std::vector<double> alphas{0.25, 0.5, 0.75};
  std::vector<double> rs{1, 2, 3};
  int max_family = 3;  // family length drawn from 1..max_family per trial
  int threads = 1;
  bool checks = true;  // ordering and coherence checks on every trial
};

/// Throws ParseError / ParamOutOfRange / UnknownBound / UnknownEnsemble.
void validate_config(const CampaignConfig& c);

/// key=value lines; '#' starts a comment; lists are comma separated.
/// Keys: seed, trials, dims (LO-HI or N), ensembles, bounds (or "all"),
/// phi, alpha, r, family, threads, checks.
CampaignConfig parse_manifest(std::string_view text);

struct BoundAggregate {
  double min_slack = 0.0;  // finite evaluations only
  double sum_slack = 0.0;
  long evaluations = 0;  // finite evaluations
  long tight_count = 0;
  long overflow_count = 0;
  long violation_count = 0;
  long skipped_count = 0;  // inadmissible parameter combinations
  long error_count = 0;
  std::string worst_input_ref;  // trial and parameters of min_slack
  double mean_slack() const { return evaluations ? sum_slack / evaluations : 0.0; }
};

struct CheckAggregate {
  long checks = 0;
  long failures = 0;
  double worst_gap = 0.0;  // largest relative excess (or disagreement for coherence)
  std::string worst_ref;
};

struct CampaignRow {
  int trial = 0;
  BoundReport report;
};

struct CampaignReport {
  std::uint64_t master_seed = 0;
  std::string version{kVersion};
  std::map<std::string, BoundAggregate> bounds;
  std::map<std::string, CheckAggregate> checks;  // "order:..." and "coherence:..."
  std::vector<CampaignRow> rows;                 // trial order, then catalog order
  std::vector<std::string> errors;               // "trial T bound B: message"
  long total_violations() const;
  long check_failures() const;
};

CampaignReport run_campaign(const CampaignConfig& config);

/// The six specialization pairs evaluated on one input pool (roles A, P, Q and
/// A1, B1, X1, ...). Returns (name, rhs_a, rhs_b) triples.
struct CoherenceResult {
  std::string name;
  double rhs_a = 0.0, rhs_b = 0.0;
  bool agree = true;  // |rhs_a - rhs_b| <= 1e-9 * scale
};
std::vector<CoherenceResult> coherence_checks(const BoundInputs& pool, double alpha, double r, int n,
                                              EvalCache* cache = nullptr);

struct WitnessResult {
  BoundInputs inputs;
  BoundReport report;
  int evaluations = 0;
  bool violation = false;
};

/// Random-restart hill climb over inputs with unit Frobenius norm, minimizing
/// slack / max(1, |lhs|, |rhs|). Roles follow the campaign's structural
/// overrides (psd for T312, contraction for T310C, commuting for HOLB2C);
/// other roles are drawn from `ensemble`.
WitnessResult witness_search(std::string_view bound_id, const BoundParams& params, int budget,
                             std::uint64_t seed, int dim = 2, std::string_view ensemble = "ginibre");

}  // namespace oradius
