#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "semiprox/ccg.hpp"
#include "semiprox/vi.hpp"

namespace semiprox {

enum class StepMode { kFixed, kInverseL, kLineSearch };

struct StepPolicy {
  StepMode mode{StepMode::kInverseL};
  double gamma{0.0};   // fixed mode only
  double safety{1.0};  // scales the 1/L (or 1/(sqrt(2) L)) step
  bool allow_unsafe{false};

  static StepPolicy fixed(double gamma, bool allow_unsafe = false);
  static StepPolicy inverse_l(double safety = 1.0);
  static StepPolicy line_search(double safety = 1.0);

  /// Largest step the convergence theorem admits for the given constants.
  static double gamma_bound(double l, double m);
};

enum class InexactnessMode { kFixedInnerSteps, kDecaying };

/// Inner-accuracy policy for the CCG-realized prox-mappings: either a fixed
/// number of inner steps per subproblem or the decaying eps_t = c / t.
struct InexactnessSchedule {
  InexactnessMode mode{InexactnessMode::kDecaying};
  double c{1.0};
  int k{5};

  static InexactnessSchedule decaying(double c);
  static InexactnessSchedule fixed_inner_steps(int k);

  double eps_at(int t) const {
    return mode == InexactnessMode::kDecaying ? c / static_cast<double>(t) : 0.0;
  }
};

struct TraceRow {
  int iter{0};
  double elapsed_s{0.0};
  long lmo_calls{0};  // cumulative
  double objective{0.0};
  double gap_est{0.0};
  double gamma{0.0};
  double eps_requested{0.0};
  double delta_y{0.0};
  double delta_x{0.0};
  double sigma{0.0};
};

/// One inexact prox-mapping event: center x, offsets xi = [eta; zeta], the
/// returned point and its certified inexactness.
struct ProxAuditRecord {
  Point center;
  Vec eta_u;
  Vec eta_v;
  Point result;
  double delta{0.0};
};

struct RunTrace {
  std::string solver;
  std::vector<TraceRow> rows;
  Point x_bar;
  double sum_gamma{0.0};
  long lmo_total{0};
  double theta{0.0};
  double lipschitz_l{0.0};
  double lipschitz_m{0.0};
  bool aborted{false};
  std::string abort_reason;
  bool rho_adapted{false};
  bool inner_exhausted{false};
  double wall_seconds{0.0};
  double final_gap_est{0.0};
  std::vector<std::string> notes;

  std::optional<ExecutionProtocol> protocol;       // always populated by solvers
  std::vector<Point> y_points;                     // record_points only
  std::vector<ProxAuditRecord> prox_audit;         // record_prox_audit only
};

/// Test hook: perturbs the exact prox output and certifies the achieved
/// inexactness, targeting delta ~= c / t per half-step.
struct InjectedInexactness {
  double c{0.0};
  std::uint64_t seed{99};
};

struct SolveOptions {
  std::optional<Point> start;
  bool record_points{false};
  bool record_prox_audit{false};
  bool record_time{true};
  int gap_stride{1};
  bool adapt_rho{true};
  std::uint64_t seed{1};
  int ccg_max_iters{2000};
  std::optional<InjectedInexactness> inject;
  // Forces the X2 half onto the exact singleton prox path (requires a
  // singleton LMO domain); used by the reduction checks.
  bool x2_exact_singleton{false};
};

struct SolveBudget {
  int max_iters{1000};
  long max_lmo_calls{std::numeric_limits<long>::max()};
  std::optional<double> target_gap;
};

/// Mirror-prox extragradient loop with exact prox on the prox blocks and
/// eps_t-prox on the LMO block realized by CCG. Runs exactly T iterations
/// (unless aborted by a step-condition violation).
RunTrace cmp_solve(const SemiViProblem& p, const StepPolicy& steps,
                   const InexactnessSchedule& sched, int T,
                   const SolveOptions& opts = {});

/// Budget-bounded driver around the same loop; stops on iteration budget,
/// LMO budget, or target gap.
RunTrace semi_mp_solve(const SemiViProblem& p, const StepPolicy& steps,
                       const InexactnessSchedule& sched, const SolveBudget& budget,
                       const SolveOptions& opts = {});

/// max_t (sigma_t - gamma_t^2 M^2); <= 0 within roundoff on compliant runs.
double verify_step_condition(const RunTrace& trace);

/// Right-hand side of the convergence bound, computed from the logged
/// gamma_t and the achieved per-half-step inexactness (never the requested
/// eps_t): (theta + M^2 sum gamma^2 + sum(delta_y + delta_x)) / sum gamma.
double theorem1_bound(const RunTrace& trace, double theta);

}  // namespace semiprox
