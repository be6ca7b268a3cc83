#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "semiprox/domains.hpp"
#include "semiprox/linalg.hpp"

namespace semiprox {

/// Objective phi+(u, v) = phi(u) + theta * v with phi convex and
/// (kappa, L0)-smooth. When phi is quadratic with Hessian q*I,
/// `quad_curvature` enables the exact segment search used by the solver.
struct SmoothSemiLinearObjective {
  std::function<double(const Vec&)> phi;
  std::function<void(const Vec&, Vec&)> grad;
  double theta{0.0};
  double kappa{2.0};
  double l0{1.0};
  std::optional<double> quad_curvature;
};

/// phi(u) = (q/2) ||u - a||^2
SmoothSemiLinearObjective make_quadratic_objective(Vec a, double q, double theta);

struct CcgPoint {
  Vec u;
  double v{0.0};
};

struct CcgCertificate {
  CcgPoint point;
  double delta{0.0};
  int iters_used{0};
  long lmo_calls{0};
  bool exhausted{false};
};

double phi_plus(const SmoothSemiLinearObjective& obj, const CcgPoint& x);

/// Composite conditional gradient over the truncated nuclear epigraph.
/// Stops when the accuracy certificate delta_t <= eps; on exhaustion the
/// best-certificate iterate is returned with the flag set. The update does
/// an exact line search on the segment when the curvature is known, which
/// never does worse than the 2/(t+1) step.
CcgCertificate ccg_solve(const SmoothSemiLinearObjective& obj, const LmoBlock& block,
                         double eps, int max_iters, const CcgPoint& start,
                         std::uint64_t seed, LmoCounter* counter = nullptr);

/// One LMO call: the certificate delta at `point`.
double ccg_gap(const SmoothSemiLinearObjective& obj, const LmoBlock& block,
               const CcgPoint& point, std::uint64_t seed, LmoCounter* counter = nullptr);

}  // namespace semiprox
