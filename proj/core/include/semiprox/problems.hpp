#pragma once

#include <functional>
#include <optional>

#include "semiprox/linalg.hpp"
#include "semiprox/vi.hpp"

namespace semiprox {

struct McL2Spec {
  ObservedMatrix obs;
  double lambda{0.1};
  std::optional<double> vcap;  // nuclear-epigraph truncation; defaulted when absent
};

struct RobustCfSpec {
  ObservedMatrix obs;
  double lambda{0.1};
  double rho_initial{1.0};
  bool rho_adaptive{true};
  std::optional<double> vcap;
  std::optional<double> vcap_l1;
};

struct LinkPredSpec {
  ObservedMatrix obs;  // binary labels in {0, 1}
  double lambda1{0.1};
  double lambda2{0.1};
  double rho_initial{1.0};
  bool rho_adaptive{true};
  std::optional<double> vcap;
  std::optional<double> vcap_l1;
};

struct BuiltProblem {
  SemiViProblem vi;
  // learned matrix at a VI point; null for problems without a matrix block
  std::function<DenseMatrix(const Point&)> extract_x;
  // smallest rho making the norm penalty exact (0 when no penalty is used)
  double rho_exactness_bound{0.0};
};

/// min_{||x||_nuc <= v <= vcap} max_{||y||_2 <= 1} <P x - b, y> + lambda v
BuiltProblem build_mc_l2(const McL2Spec& spec);

/// l1 empirical risk + nuclear norm, penalty-coupled through rho <Ax-b-y, w>
BuiltProblem build_robust_cf(const RobustCfSpec& spec);

/// hinge risk + l1 + nuclear norm; hinge duals live in the box [0,1]^|E|
BuiltProblem build_link_pred(const LinkPredSpec& spec);

/// min_{||x|| <= r1} max_{||y|| <= r2} x^T a y  (toy instance; exact gaps)
BuiltProblem make_bilinear_ball_game(const DenseMatrix& a, double r1, double r2);

/// mean |x_ij - b_ij| over held-out cells divided by (hi - lo)
double nmae(ConstMatrixView x, const ObservedMatrix& heldout, double lo, double hi);

/// max <c, w> s.t. ||w||_inf <= beta, ||w||_2 <= rho; exact via bisection on
/// the ball multiplier. Equals min_y beta^-1-free form
/// min_y { beta ||y||_1 + rho ||c - y||_2 } by conjugate duality.
double box_ball_support(const Vec& c, double beta, double rho);

// original composite objectives (nuclear norm via the dense SVD)
double mc_l2_objective(const McL2Spec& spec, ConstMatrixView x);
double robust_cf_objective(const RobustCfSpec& spec, ConstMatrixView x);
double link_pred_objective(const LinkPredSpec& spec, ConstMatrixView x);

// penalty-form value at fixed primal x with the auxiliaries eliminated
// exactly; equals the original objective when rho >= the exactness bound
// and the epigraph caps are slack
double robust_cf_saddle_value(const RobustCfSpec& spec, ConstMatrixView x, double rho);
double link_pred_saddle_value(const LinkPredSpec& spec, ConstMatrixView x, double rho);

}  // namespace semiprox
