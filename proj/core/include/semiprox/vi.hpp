#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "semiprox/domains.hpp"
#include "semiprox/linalg.hpp"

namespace semiprox {

/// Saddle-point view of a problem: value, primal sup, dual inf. The split
/// into min-side and max-side is problem-specific; implementations close
/// over the layout and solve the inner problems exactly.
class SaddleModel {
 public:
  virtual ~SaddleModel() = default;
  virtual double phi(const Point& x) const = 0;
  /// sup over the max-side at x's min-side components
  virtual double phi_bar(const Point& x) const = 0;
  /// inf over the min-side at x's max-side components
  virtual double phi_under(const Point& x) const = 0;

  double eps_sad(const Point& x) const { return phi_bar(x) - phi_under(x); }
};

/// Mutable penalty parameter shared between a problem's field closures and
/// the solver run that owns the adaptation.
struct RhoState {
  double value{1.0};
  double initial{1.0};
  double growth{2.0};
  double cap_factor{1024.0};  // rho never exceeds initial * cap_factor
  int adjustments{0};

  bool at_cap() const { return value >= initial * cap_factor; }
};

/// Semi-structured VI descriptor: product domain, split monotone field
/// F = [F_u(u); F_v] with F_v constant, and Lipschitz metadata.
struct SemiViProblem {
  std::string name;
  DomainProduct domain;
  std::function<void(const Point&, Vec&)> field_u;
  Vec field_v;
  double lipschitz_l{0.0};
  double lipschitz_m{0.0};
  std::optional<double> theta_hint;

  std::shared_ptr<SaddleModel> saddle;  // optional gap instrumentation
  // objective of the original composite problem at a VI point; `cheap`
  // substitutes epigraph heights for norms so traces stay inexpensive
  std::function<double(const Point&)> objective_true;
  std::function<double(const Point&)> objective_cheap;

  std::shared_ptr<RhoState> rho;  // present for penalty-reformulated models
  // returns true when replacing y by its residual slack would increase the
  // objective at the given averaged point (the adaptive-rho trigger)
  std::function<bool(const Point&)> rho_backprojection_increases;
  std::function<double()> recompute_lipschitz;  // re-estimate L after a rho change

  Vec eval_field_u(const Point& x) const {
    Vec fu(domain.u_dim());
    field_u(x, fu);
    return fu;
  }

  /// Theta[X] with respect to the given start; uses the hint when present.
  double theta(const Vec& start_u) const {
    return theta_hint ? *theta_hint : domain.theta_bound(start_u);
  }
};

/// Field value at a point, both components.
struct FieldValue {
  Vec fu;
  Vec fv;
};

FieldValue eval_field(const SemiViProblem& p, const Point& x);

/// t-step execution protocol with an accuracy certificate given by the
/// normalized step weights. Running sums make the resolution exact without
/// retaining the steps; `retain_steps` keeps them for audits.
class ExecutionProtocol {
 public:
  explicit ExecutionProtocol(const DomainProduct& domain, bool retain_steps = false);

  void append(const Point& x, const Vec& fu, const Vec& fv, double weight);

  double total_weight() const { return total_weight_; }
  std::size_t steps() const { return count_; }
  Point averaged() const;

  /// Res(X | I_t, lambda^t) with normalized weights; exact sup via the
  /// domain's per-block closed forms.
  double resolution(const DomainProduct& domain) const;

  struct Step {
    Point x;
    Vec fu;
    Vec fv;
    double weight;
  };
  const std::vector<Step>& retained_steps() const { return steps_; }

 private:
  std::size_t u_dim_{0}, v_dim_{0};
  double total_weight_{0.0};
  std::size_t count_{0};
  double sum_w_fx_{0.0};  // sum of w * <F(x), x>
  Vec sum_w_fu_, sum_w_fv_;
  Vec sum_w_xu_, sum_w_xv_;
  bool retain_{false};
  std::vector<Step> steps_;
};

struct GapReport {
  double resolution{0.0};
  double eps_vi_estimate{0.0};
  std::optional<double> eps_sad_estimate;
  bool lower_bound{false};  // true when eps_vi came from sampling, not the sup
};

/// eps_VI estimate by probing: max over sampled feasible y of <F(y), x - y>.
/// Always a lower bound on the true dual gap.
double eps_vi_sampled(const SemiViProblem& p, const Point& x, int n_samples,
                      std::uint64_t seed);

double eps_sad(const SaddleModel& model, const Point& x);

/// min over sampled feasible pairs of <F(x)-F(y), x-y>; negative values
/// beyond roundoff expose a non-monotone field.
double monotonicity_probe(const SemiViProblem& p, int n_samples, std::uint64_t seed);

/// max over sampled feasible pairs of ||F_u(x)-F_u(y)|| - L ||x-y|| - M.
double smoothness_probe(const SemiViProblem& p, int n_samples, std::uint64_t seed);

/// Operator norm of u -> field(u) - field(0) by power iteration on S^T S,
/// for affine fields. Deterministic for a fixed seed.
double estimate_operator_norm(const std::function<void(const Vec&, Vec&)>& apply,
                              std::size_t dim, int iters, std::uint64_t seed);

/// Convenience: operator norm of the linearized field of an affine-field problem.
double estimate_field_lipschitz(const SemiViProblem& p, int iters = 200,
                                std::uint64_t seed = 7);

}  // namespace semiprox
