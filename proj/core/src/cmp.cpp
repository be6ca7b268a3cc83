#include "semiprox/cmp.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace semiprox {

StepPolicy StepPolicy::fixed(double gamma, bool allow_unsafe) {
  if (gamma <= 0.0) throw std::invalid_argument("StepPolicy: gamma <= 0");
  StepPolicy p;
  p.mode = StepMode::kFixed;
  p.gamma = gamma;
  p.allow_unsafe = allow_unsafe;
  return p;
}

StepPolicy StepPolicy::inverse_l(double safety) {
  if (safety <= 0.0 || safety > 1.0)
    throw std::invalid_argument("StepPolicy: safety must be in (0, 1]");
  StepPolicy p;
  p.mode = StepMode::kInverseL;
  p.safety = safety;
  return p;
}

StepPolicy StepPolicy::line_search(double safety) {
  if (safety <= 0.0) throw std::invalid_argument("StepPolicy: safety <= 0");
  StepPolicy p;
  p.mode = StepMode::kLineSearch;
  p.safety = safety;
  return p;
}

double StepPolicy::gamma_bound(double l, double m) {
  if (l <= 0.0) return std::numeric_limits<double>::infinity();
  return m > 0.0 ? 1.0 / (std::sqrt(2.0) * l) : 1.0 / l;
}

InexactnessSchedule InexactnessSchedule::decaying(double c) {
  if (c <= 0.0) throw std::invalid_argument("InexactnessSchedule: c <= 0");
  InexactnessSchedule s;
  s.mode = InexactnessMode::kDecaying;
  s.c = c;
  return s;
}

InexactnessSchedule InexactnessSchedule::fixed_inner_steps(int k) {
  if (k < 1) throw std::invalid_argument("InexactnessSchedule: k < 1");
  InexactnessSchedule s;
  s.mode = InexactnessMode::kFixedInnerSteps;
  s.k = k;
  return s;
}

namespace {

/// sup over X of the eps-prox defining expression at candidate yhat for
/// xi = [eta_u; eta_v] and Euclidean omega.
double certify_prox(const DomainProduct& dom, const Point& center, const Vec& eta_u,
                    const Vec& eta_v, const Point& yhat) {
  Vec grad_u(eta_u.size());
  for (std::size_t i = 0; i < eta_u.size(); ++i)
    grad_u[i] = eta_u[i] + yhat.u[i] - center.u[i];
  double val = dot(grad_u, yhat.u) + dot(eta_v, yhat.v);
  Vec neg_u = grad_u;
  scal(-1.0, neg_u);
  Vec neg_v = eta_v;
  scal(-1.0, neg_v);
  return val + dom.sup_linear(neg_u, neg_v);
}

struct HalfStepResult {
  Point y;
  double delta{0.0};
  bool exhausted{false};
};

Point perturb_feasible(const DomainProduct& dom, const Point& y, const Vec& dir, double r) {
  Point p = y;
  for (std::size_t i = 0; i < p.u.size(); ++i) p.u[i] += r * dir[i];
  dom.pull_feasible(p);
  return p;
}

/// Perturb an exact prox output until the certified inexactness lands just
/// under `target`; bounded domains may saturate below the target.
HalfStepResult inject_perturbation(const DomainProduct& dom, const Point& center,
                                   const Vec& eta_u, const Vec& eta_v, Point y_exact,
                                   double target, std::mt19937_64& rng) {
  HalfStepResult out;
  if (target <= 0.0) {
    out.y = std::move(y_exact);
    return out;
  }
  Vec dir = random_unit_vector(center.u.size(), rng);
  double r_hi = 1e-3;
  double g_hi = certify_prox(dom, center, eta_u, eta_v,
                             perturb_feasible(dom, y_exact, dir, r_hi));
  int expand = 0;
  while (g_hi < target && expand < 60) {
    r_hi *= 2.0;
    g_hi = certify_prox(dom, center, eta_u, eta_v,
                        perturb_feasible(dom, y_exact, dir, r_hi));
    ++expand;
  }
  double r = r_hi;
  if (g_hi >= target) {
    double lo = 0.0, hi = r_hi;
    for (int it = 0; it < 60; ++it) {
      double mid = 0.5 * (lo + hi);
      double g = certify_prox(dom, center, eta_u, eta_v,
                              perturb_feasible(dom, y_exact, dir, mid));
      if (g >= target)
        hi = mid;
      else
        lo = mid;
    }
    r = lo;
  }
  out.y = perturb_feasible(dom, y_exact, dir, r);
  out.delta = std::max(0.0, certify_prox(dom, center, eta_u, eta_v, out.y));
  return out;
}

std::uint64_t subsolve_seed(std::uint64_t base, int iter, int half) {
  return base * 1000003ull + static_cast<std::uint64_t>(iter) * 2ull +
         static_cast<std::uint64_t>(half);
}

HalfStepResult half_step(const SemiViProblem& p, const Point& x, const FieldValue& f,
                         double gamma, double eps_t, int inner_max, int iter, int half,
                         const SolveOptions& opts, LmoCounter& lmo,
                         std::mt19937_64& inject_rng,
                         std::vector<ProxAuditRecord>* audit) {
  const DomainProduct& dom = p.domain;
  Vec eta_u(f.fu.size()), eta_v(f.fv.size());
  for (std::size_t i = 0; i < eta_u.size(); ++i) eta_u[i] = gamma * f.fu[i];
  for (std::size_t i = 0; i < eta_v.size(); ++i) eta_v[i] = gamma * f.fv[i];

  HalfStepResult out;
  out.y = dom.origin_point();
  dom.prox_x1(x, eta_u, eta_v, out.y);

  if (dom.has_lmo()) {
    const BlockSpan& sp = dom.lmo_span();
    if (opts.x2_exact_singleton) {
      for (std::size_t i = 0; i < sp.u_dim; ++i) out.y.u[sp.u_off + i] = 0.0;
      out.y.v[sp.v_off] = 0.0;
    } else {
      const LmoBlock& blk = *dom.lmo_block();
      Vec a(sp.u_dim);
      for (std::size_t i = 0; i < sp.u_dim; ++i)
        a[i] = x.u[sp.u_off + i] - eta_u[sp.u_off + i];
      SmoothSemiLinearObjective obj =
          make_quadratic_objective(std::move(a), 1.0, eta_v[sp.v_off]);
      CcgPoint start;
      start.u.assign(x.u.begin() + sp.u_off, x.u.begin() + sp.u_off + sp.u_dim);
      start.v = x.v[sp.v_off];
      CcgCertificate cert = ccg_solve(obj, blk, eps_t, inner_max, start,
                                      subsolve_seed(opts.seed, iter, half), &lmo);
      std::copy(cert.point.u.begin(), cert.point.u.end(), out.y.u.begin() + sp.u_off);
      out.y.v[sp.v_off] = cert.point.v;
      out.delta = cert.delta;
      out.exhausted = cert.exhausted;
    }
  } else if (opts.inject && opts.inject->c > 0.0) {
    double target = opts.inject->c / static_cast<double>(iter);
    out = inject_perturbation(dom, x, eta_u, eta_v, std::move(out.y), target, inject_rng);
  }

  if (audit) audit->push_back({x, eta_u, eta_v, out.y, out.delta});
  return out;
}

double compute_sigma(double gamma, const Vec& fx_u, const Vec& fy_u, const Point& y,
                     const Point& xnext, const Point& x) {
  double ip = 0.0, vhat = 0.0, vstep = 0.0;
  for (std::size_t i = 0; i < fx_u.size(); ++i) {
    double df = fy_u[i] - fx_u[i];
    double d1 = y.u[i] - xnext.u[i];
    double d2 = x.u[i] - y.u[i];
    ip += df * d1;
    vhat += d1 * d1;
    vstep += d2 * d2;
  }
  return gamma * ip - 0.5 * vhat - 0.5 * vstep;
}

RunTrace run_mirror_prox(const SemiViProblem& p, const StepPolicy& policy,
                         const InexactnessSchedule& sched, const SolveBudget& budget,
                         const SolveOptions& opts, const char* solver_name) {
  const DomainProduct& dom = p.domain;
  if (opts.x2_exact_singleton && !dom.lmo_is_singleton())
    throw std::invalid_argument("x2_exact_singleton requires a singleton LMO domain");

  double lip_l = p.lipschitz_l;
  const double lip_m = p.lipschitz_m;
  const double admissible = StepPolicy::gamma_bound(lip_l, lip_m);
  if (policy.mode == StepMode::kFixed && !policy.allow_unsafe &&
      policy.gamma > admissible * (1.0 + 1e-12))
    throw std::invalid_argument("StepPolicy: fixed gamma exceeds the admissible bound");

  RunTrace trace;
  trace.solver = solver_name;
  trace.lipschitz_l = lip_l;
  trace.lipschitz_m = lip_m;

  Point x = opts.start ? *opts.start : dom.origin_point();
  trace.theta = p.theta(x.u);

  ExecutionProtocol proto(dom, false);
  LmoCounter lmo;
  std::mt19937_64 inject_rng(opts.inject ? opts.inject->seed : 0);
  std::vector<ProxAuditRecord>* audit = opts.record_prox_audit ? &trace.prox_audit : nullptr;

  const auto t_start = std::chrono::steady_clock::now();
  double gamma_ls = policy.safety / std::max(lip_l, 1e-300);
  double last_gap = std::numeric_limits<double>::quiet_NaN();

  for (int t = 1; t <= budget.max_iters; ++t) {
    if (lmo.calls >= budget.max_lmo_calls) break;

    const double eps_t = sched.eps_at(t);
    const int inner_max = sched.mode == InexactnessMode::kFixedInnerSteps
                              ? sched.k
                              : opts.ccg_max_iters;
    FieldValue fx = eval_field(p, x);

    double gamma;
    switch (policy.mode) {
      case StepMode::kFixed:
        gamma = policy.gamma;
        break;
      case StepMode::kInverseL:
        gamma = policy.safety * StepPolicy::gamma_bound(lip_l, lip_m);
        break;
      case StepMode::kLineSearch:
      default:
        gamma = gamma_ls * 1.2;
        break;
    }

    HalfStepResult hy, hx;
    FieldValue fy;
    double sigma;
    int halvings = 0;
    for (;;) {
      hy = half_step(p, x, fx, gamma, eps_t, inner_max, t, 0, opts, lmo, inject_rng,
                     audit);
      fy = eval_field(p, hy.y);
      hx = half_step(p, x, fy, gamma, eps_t, inner_max, t, 1, opts, lmo, inject_rng,
                     audit);
      sigma = compute_sigma(gamma, fx.fu, fy.fu, hy.y, hx.y, x);
      bool ok = sigma <= gamma * gamma * lip_m * lip_m + 1e-12;
      if (ok || policy.mode != StepMode::kLineSearch || halvings >= 60) break;
      gamma *= 0.5;
      ++halvings;
    }
    if (policy.mode == StepMode::kLineSearch) gamma_ls = gamma;
    if (sched.mode == InexactnessMode::kDecaying && (hy.exhausted || hx.exhausted))
      trace.inner_exhausted = true;

    proto.append(hy.y, fy.fu, fy.fv, gamma);
    Point avg = proto.averaged();

    TraceRow row;
    row.iter = t;
    row.lmo_calls = lmo.calls;
    row.gamma = gamma;
    row.eps_requested = eps_t;
    row.delta_y = hy.delta;
    row.delta_x = hx.delta;
    row.sigma = sigma;
    row.objective = p.objective_cheap ? p.objective_cheap(avg)
                                      : std::numeric_limits<double>::quiet_NaN();
    if (p.saddle && (t == 1 || t % std::max(1, opts.gap_stride) == 0))
      last_gap = p.saddle->eps_sad(avg);
    row.gap_est = last_gap;
    row.elapsed_s = opts.record_time
                        ? std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                        t_start)
                              .count()
                        : 0.0;
    trace.rows.push_back(row);
    if (opts.record_points) trace.y_points.push_back(hy.y);

    double viol = sigma - gamma * gamma * lip_m * lip_m;
    if (viol > 1e-9 && policy.mode != StepMode::kLineSearch) {
      trace.aborted = true;
      trace.abort_reason =
          "step condition violated at iteration " + std::to_string(t) +
          " (sigma exceeds gamma^2 M^2 by " + std::to_string(viol) + ")";
      x = hx.y;
      break;
    }

    // adaptive rho: grow the penalty whenever back-projection would
    // increase the objective at the averaged point
    if (p.rho && opts.adapt_rho && p.rho_backprojection_increases &&
        !p.rho->at_cap() && p.rho_backprojection_increases(avg)) {
      p.rho->value *= p.rho->growth;
      ++p.rho->adjustments;
      trace.rho_adapted = true;
      if (p.recompute_lipschitz) lip_l = p.recompute_lipschitz();
    }

    x = hx.y;
    if (budget.target_gap && !std::isnan(last_gap) && last_gap <= *budget.target_gap)
      break;
  }

  if (proto.steps() > 0) {
    trace.x_bar = proto.averaged();
    trace.sum_gamma = proto.total_weight();
  } else {
    trace.x_bar = x;
  }
  if (p.saddle && proto.steps() > 0) {
    trace.final_gap_est = p.saddle->eps_sad(trace.x_bar);
  } else {
    trace.final_gap_est = std::numeric_limits<double>::quiet_NaN();
  }
  trace.lmo_total = lmo.calls;
  trace.protocol = std::move(proto);
  trace.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return trace;
}

}  // namespace

RunTrace cmp_solve(const SemiViProblem& p, const StepPolicy& steps,
                   const InexactnessSchedule& sched, int T, const SolveOptions& opts) {
  if (T < 0) throw std::invalid_argument("cmp_solve: negative iteration count");
  SolveBudget budget;
  budget.max_iters = T;
  return run_mirror_prox(p, steps, sched, budget, opts, "cmp");
}

RunTrace semi_mp_solve(const SemiViProblem& p, const StepPolicy& steps,
                       const InexactnessSchedule& sched, const SolveBudget& budget,
                       const SolveOptions& opts) {
  if (!p.domain.has_lmo())
    throw std::invalid_argument("semi_mp_solve: problem has no LMO block");
  if (p.domain.prox_blocks().empty())
    throw std::invalid_argument("semi_mp_solve: problem has no prox block");
  return run_mirror_prox(p, steps, sched, budget, opts, "semi-mp");
}

double verify_step_condition(const RunTrace& trace) {
  const double m2 = trace.lipschitz_m * trace.lipschitz_m;
  double worst = -std::numeric_limits<double>::infinity();
  for (const TraceRow& row : trace.rows)
    worst = std::max(worst, row.sigma - row.gamma * row.gamma * m2);
  return trace.rows.empty() ? 0.0 : worst;
}

double theorem1_bound(const RunTrace& trace, double theta) {
  double sum_g = 0.0, sum_g2 = 0.0, sum_eps = 0.0;
  for (const TraceRow& row : trace.rows) {
    sum_g += row.gamma;
    sum_g2 += row.gamma * row.gamma;
    sum_eps += row.delta_y + row.delta_x;
  }
  if (sum_g <= 0.0) throw std::logic_error("theorem1_bound: empty trace");
  const double m2 = trace.lipschitz_m * trace.lipschitz_m;
  return (theta + m2 * sum_g2 + sum_eps) / sum_g;
}

}  // namespace semiprox
