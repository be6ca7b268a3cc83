#pragma once

#include <cstdint>

#include "semiprox/ccg.hpp"
#include "semiprox/cmp.hpp"
#include "semiprox/linalg.hpp"
#include "semiprox/problems.hpp"

namespace semiprox {

enum class DualSetKind { kL2Ball, kLinfBox };

/// min_{||x||_nuc <= v <= vcap} f(x) + lambda v with
/// f(x) = max_{y in dual set} <A x - b, y> and A = scale * P_obs.
struct CompositeModel {
  ObservedMatrix obs;
  double scale{1.0};
  Vec b;
  double lambda{0.1};
  double vcap{1.0};
  DualSetKind dual{DualSetKind::kL2Ball};
  double dual_radius{1.0};

  std::size_t rows() const { return obs.rows; }
  std::size_t cols() const { return obs.cols; }
  double a_op_norm() const { return scale; }  // the mask has unit operator norm
  /// Euclidean radius of the dual set (the smoothing bias constant).
  double dual_l2_radius() const;
};

CompositeModel composite_from_mc_l2(const McL2Spec& spec);
CompositeModel composite_from_robust_cf(const RobustCfSpec& spec);

/// Unsmoothed data-fit term f at a residual r = A x - b.
double composite_fit(const CompositeModel& model, const Vec& residual);

/// Nesterov-smoothed model f^gamma with its gradient oracle.
struct SmoothedObjective {
  CompositeModel model;
  double gamma{0.01};

  double lipschitz_grad() const {
    return model.a_op_norm() * model.a_op_norm() / gamma;
  }
};

double smoothed_value_at_residual(const SmoothedObjective& obj, const Vec& residual);
double smoothed_value(const SmoothedObjective& obj, ConstMatrixView x);
/// The (clipped / projected) dual maximizer y*(x), closed form per dual set.
Vec smoothed_dual_maximizer(const SmoothedObjective& obj, const Vec& residual);
/// grad f^gamma(x) = A^T y*(x), returned dense.
DenseMatrix smoothed_grad(const SmoothedObjective& obj, ConstMatrixView x);

/// Rank-one atoms with nonnegative weights; x = sum theta_i left_i right_i^T
/// (the LMO's sign is absorbed into the stored left vectors).
struct AtomSet {
  std::vector<Vec> left;
  std::vector<Vec> right;
  Vec weights;

  std::size_t size() const { return weights.size(); }
  DenseMatrix reconstruct(std::size_t rows, std::size_t cols) const;
};

struct SmoothCgOptions {
  long max_lmo{1000};
  double stop_gap{0.0};  // stop when the CG gap drops below this
  int reopt_max_iters{500};
  double reopt_grad_tol{1e-8};
  bool record_time{true};
  std::uint64_t seed{1};
  double lmo_tol{1e-9};
  int lmo_max_iters{1000};
};

/// Conditional gradient on the smoothed composite model with full-memory
/// weight reoptimization (projected gradient with Armijo backtracking on
/// theta >= 0) after every LMO call.
RunTrace smooth_cg_solve(const CompositeModel& model, double gamma,
                         const SmoothCgOptions& opts = {});

/// Exact prox over the truncated nuclear epigraph by singular value
/// soft-thresholding: argmin 1/2 ||x - a||^2 + theta v s.t. ||x||_nuc <= v <= vcap.
CcgPoint nuclear_epigraph_prox_svd(ConstMatrixView a, double theta, double vcap);

struct SemiSpgOptions {
  int max_iters{1000};
  long max_lmo{std::numeric_limits<long>::max()};
  bool exact_prox{false};  // test mode: SVD prox instead of CCG
  int ccg_max_iters{2000};
  bool backtracking{true};
  double l_init{0.0};  // 0 => the analytic ||A||^2 / gamma
  bool record_time{true};
  std::uint64_t seed{1};
  std::optional<double> stop_objective;  // stop once the unsmoothed value drops below
};

/// Accelerated proximal gradient on the smoothed composite model; each prox
/// step over the nuclear epigraph is a CCG solve to the scheduled accuracy,
/// with backtracking on the smooth part's curvature.
RunTrace semi_spg_solve(const CompositeModel& model, double gamma,
                        const InexactnessSchedule& sched, const SemiSpgOptions& opts = {});

}  // namespace semiprox
