#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "semiprox/baselines.hpp"
#include "semiprox/cmp.hpp"
#include "semiprox/problems.hpp"

namespace semiprox {

// --- synthetic data -----------------------------------------------------------

struct SyntheticSpec {
  std::size_t m{64};
  std::size_t n{64};
  std::size_t rank{4};
  double obs_fraction{0.3};
  double noise{0.0};
};

struct SyntheticData {
  ObservedMatrix obs;
  DenseMatrix truth;  // ground-truth matrix, nuclear norm scaled to 1
};

/// Low-rank product scaled to unit nuclear norm, masked uniformly at random.
/// Deterministic per seed.
SyntheticData generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

// --- data ingestion --------------------------------------------------------------

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tab/whitespace-separated "user item rating [timestamp]" rows. Indices in
/// the file are `index_base`-based (MovieLens files are 1-based) and come out
/// 0-based. Duplicate (user, item) pairs are an error. Dimensions come from
/// the max indices unless overridden.
ObservedMatrix load_ratings(const std::string& path, int index_base = 1,
                            std::optional<std::size_t> rows = std::nullopt,
                            std::optional<std::size_t> cols = std::nullopt);

/// Whitespace-separated "src dst" edges, '#' comment lines skipped. Node ids
/// are compacted to dense indices; top_k > 0 keeps only the top-k nodes by
/// degree (ties toward smaller ids). Listed edges get b = 1.
ObservedMatrix load_edge_list(const std::string& path, std::size_t top_k = 0);

struct SplitResult {
  ObservedMatrix train;
  ObservedMatrix test;
};

/// Seeded shuffle partition; train gets round(fraction * count) triples.
SplitResult split_train_test(const ObservedMatrix& obs, double train_fraction,
                             std::uint64_t seed);

// --- experiment configuration -----------------------------------------------------

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::string model{"mc-l2"};  // mc-l2 | robust-cf | link-pred
  std::optional<SyntheticSpec> synthetic;
  std::optional<std::string> ratings_path;
  std::optional<std::string> edges_path;
  std::size_t top_k{0};
  int ratings_index_base{1};

  double lambda{0.0};   // 0 -> 1/sqrt(max(m, n))
  double lambda2{0.0};  // link-pred second penalty; 0 -> same default
  double rho_initial{1.0};
  bool rho_adaptive{true};
  std::optional<double> vcap;
  std::optional<double> vcap_l1;
  double train_fraction{0.8};
  double rating_lo{1.0};
  double rating_hi{5.0};

  std::vector<std::string> solvers{"semi-mp"};
  std::string step_mode{"inverse-l"};  // inverse-l | fixed | line-search
  double step_gamma{0.0};
  double step_safety{1.0};
  std::string inexact_mode{"decaying"};  // decaying | fixed-inner-steps
  double inexact_c{0.0};                 // 0 -> Theta[X]
  int inexact_k{5};
  double smoothing_gamma{0.01};
  bool smoothing_grid{false};  // sweep {1e-3,1e-2,1e-1,1e0} for smooth-cg

  int max_iters{1000};
  long max_lmo{50000};
  std::uint64_t seed{42};
  std::string output_dir{"out"};
  bool record_time{true};
  int gap_stride{1};

  std::string raw_json;  // single-line echo for trace headers
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

// --- trace files ------------------------------------------------------------------

struct TraceFileData {
  std::vector<std::string> header;  // '#'-prefixed lines, verbatim
  std::vector<TraceRow> rows;
};

TraceFileData make_trace_file(const RunTrace& trace, const ExperimentConfig& cfg);
std::string serialize_trace_file(const TraceFileData& data);
TraceFileData read_trace_file(std::istream& in);
void write_trace_file(const std::string& path, const TraceFileData& data);

// --- orchestration ------------------------------------------------------------------

struct SolverSummary {
  std::string solver;
  std::string status{"ok"};
  int iters{0};
  long lmo_calls{0};
  double final_objective{0.0};
  double final_objective_true{0.0};
  double final_gap_est{0.0};
  double nmae_test{0.0};
  double wall_seconds{0.0};
  double vcap{0.0};
  double v_final{0.0};
};

std::string summary_csv(const std::vector<SolverSummary>& rows);

/// Builds the problem, runs every requested solver under the shared budget,
/// writes one trace CSV per solver plus summary.csv into the output dir.
/// A solver error is captured in its summary row; the others still run.
std::vector<SolverSummary> run_experiment(const ExperimentConfig& cfg);

/// Validation report for a trace file: structural checks plus the step
/// condition and bound checks that the logged columns support.
struct ValidationReport {
  bool ok{true};
  std::vector<std::string> findings;
};

ValidationReport validate_trace_file(const std::string& path);

}  // namespace semiprox
