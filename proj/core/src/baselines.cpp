#include "semiprox/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace semiprox {

double CompositeModel::dual_l2_radius() const {
  if (dual == DualSetKind::kL2Ball) return dual_radius;
  return dual_radius * std::sqrt(static_cast<double>(obs.count()));
}

CompositeModel composite_from_mc_l2(const McL2Spec& spec) {
  CompositeModel m;
  m.obs = spec.obs;
  m.scale = 1.0;
  m.b = spec.obs.values();
  m.lambda = spec.lambda;
  m.vcap = spec.vcap ? *spec.vcap : 1.2 * nrm2(m.b) / spec.lambda;
  m.dual = DualSetKind::kL2Ball;
  m.dual_radius = 1.0;
  return m;
}

CompositeModel composite_from_robust_cf(const RobustCfSpec& spec) {
  if (spec.obs.count() == 0)
    throw std::invalid_argument("composite_from_robust_cf: empty observations");
  CompositeModel m;
  m.obs = spec.obs;
  m.scale = 1.0 / static_cast<double>(spec.obs.count());
  m.b = spec.obs.values();
  scal(m.scale, m.b);
  m.lambda = spec.lambda;
  m.vcap = spec.vcap ? *spec.vcap : 1.2 * nrm1(m.b) / spec.lambda;
  m.dual = DualSetKind::kLinfBox;
  m.dual_radius = 1.0;
  return m;
}

double composite_fit(const CompositeModel& model, const Vec& residual) {
  return model.dual == DualSetKind::kL2Ball ? model.dual_radius * nrm2(residual)
                                            : model.dual_radius * nrm1(residual);
}

double smoothed_value_at_residual(const SmoothedObjective& obj, const Vec& r) {
  const double g = obj.gamma;
  const double rad = obj.model.dual_radius;
  if (obj.model.dual == DualSetKind::kL2Ball) {
    double nn = nrm2(r);
    return nn <= g * rad ? nn * nn / (2.0 * g) : rad * nn - g * rad * rad / 2.0;
  }
  double s = 0.0;  // separable Huber over the box
  for (double rk : r) {
    double a = std::abs(rk);
    s += a <= g * rad ? a * a / (2.0 * g) : rad * a - g * rad * rad / 2.0;
  }
  return s;
}

namespace {

Vec residual_of(const CompositeModel& model, ConstMatrixView x) {
  Vec r = apply_mask(x, model.obs);
  scal(model.scale, r);
  axpy(-1.0, model.b, r);
  return r;
}

}  // namespace

double smoothed_value(const SmoothedObjective& obj, ConstMatrixView x) {
  Vec r = residual_of(obj.model, x);
  return smoothed_value_at_residual(obj, r);
}

Vec smoothed_dual_maximizer(const SmoothedObjective& obj, const Vec& r) {
  const double g = obj.gamma;
  const double rad = obj.model.dual_radius;
  Vec y(r.size());
  if (obj.model.dual == DualSetKind::kL2Ball) {
    double nn = nrm2(r);
    double f = nn <= g * rad ? 1.0 / g : rad / nn;
    for (std::size_t k = 0; k < r.size(); ++k) y[k] = f * r[k];
  } else {
    for (std::size_t k = 0; k < r.size(); ++k) y[k] = std::clamp(r[k] / g, -rad, rad);
  }
  return y;
}

DenseMatrix smoothed_grad(const SmoothedObjective& obj, ConstMatrixView x) {
  Vec r = residual_of(obj.model, x);
  Vec y = smoothed_dual_maximizer(obj, r);
  scal(obj.model.scale, y);
  return scatter(y, obj.model.obs);
}

DenseMatrix AtomSet::reconstruct(std::size_t rows, std::size_t cols) const {
  DenseMatrix x(rows, cols);
  for (std::size_t a = 0; a < size(); ++a) {
    if (weights[a] == 0.0) continue;
    for (std::size_t i = 0; i < rows; ++i) {
      double wi = weights[a] * left[a][i];
      double* row = x.a.data() + i * cols;
      for (std::size_t j = 0; j < cols; ++j) row[j] += wi * right[a][j];
    }
  }
  return x;
}

// --- Smooth-CG ------------------------------------------------------------

namespace {

struct ReoptResult {
  int iters{0};
  bool grad_tol_hit{false};
};

// min over theta >= 0 of f^gamma(sum theta_i atom_i) + lambda sum theta_i,
// projected gradient with Armijo backtracking. `masked` caches A atom_i.
ReoptResult reoptimize_weights(const SmoothedObjective& sobj,
                               const std::vector<Vec>& masked, Vec& theta,
                               int max_iters, double grad_tol) {
  const CompositeModel& model = sobj.model;
  const std::size_t t = theta.size();
  const std::size_t e = model.obs.count();
  ReoptResult res;

  auto residual_at = [&](const Vec& th) {
    Vec r(e, 0.0);
    for (std::size_t a = 0; a < t; ++a)
      if (th[a] != 0.0) axpy(th[a], masked[a], r);
    axpy(-1.0, model.b, r);
    return r;
  };
  auto value_at = [&](const Vec& th) {
    Vec r = residual_at(th);
    double lin = 0.0;
    for (double w : th) lin += w;
    return smoothed_value_at_residual(sobj, r) + model.lambda * lin;
  };

  double eta = sobj.gamma / std::max(1.0, static_cast<double>(t));
  double f_cur = value_at(theta);
  Vec grad(t), trial(t);
  for (int it = 1; it <= max_iters; ++it) {
    Vec r = residual_at(theta);
    Vec y = smoothed_dual_maximizer(sobj, r);
    for (std::size_t a = 0; a < t; ++a)
      grad[a] = dot(masked[a], y) + model.lambda;

    // projected gradient norm as the stationarity measure on theta >= 0
    double pg = 0.0;
    for (std::size_t a = 0; a < t; ++a) {
      double g = (theta[a] > 0.0 || grad[a] < 0.0) ? grad[a] : 0.0;
      pg += g * g;
    }
    res.iters = it;
    if (std::sqrt(pg) <= grad_tol) {
      res.grad_tol_hit = true;
      break;
    }

    bool accepted = false;
    for (int bt = 0; bt < 50; ++bt) {
      double decr = 0.0;
      for (std::size_t a = 0; a < t; ++a) {
        trial[a] = std::max(0.0, theta[a] - eta * grad[a]);
        double d = theta[a] - trial[a];
        decr += d * d;
      }
      double f_new = value_at(trial);
      if (f_new <= f_cur - 1e-4 / std::max(eta, 1e-300) * decr) {
        theta = trial;
        f_cur = f_new;
        eta *= 1.5;
        accepted = true;
        break;
      }
      eta *= 0.5;
    }
    if (!accepted) break;  // step collapsed; theta is numerically stationary
  }
  return res;
}

}  // namespace

RunTrace smooth_cg_solve(const CompositeModel& model, double gamma,
                         const SmoothCgOptions& opts) {
  if (gamma <= 0.0) throw std::invalid_argument("smooth_cg_solve: gamma <= 0");
  const std::size_t m = model.rows(), n = model.cols();
  const std::size_t e = model.obs.count();

  SmoothedObjective sobj{model, gamma};
  NuclearEpigraphBlock lmo_block{m, n, model.vcap, opts.lmo_tol, opts.lmo_max_iters};

  RunTrace trace;
  trace.solver = "smooth-cg";

  AtomSet atoms;
  std::vector<Vec> masked;  // A atom_i per atom
  Vec ax(e, 0.0);           // A x for the current weights

  LmoCounter lmo;
  const auto t_start = std::chrono::steady_clock::now();
  bool grad_tol_fired = false, iter_cap_fired = false;

  int iter = 0;
  while (lmo.calls < opts.max_lmo) {
    ++iter;
    Vec r = ax;
    axpy(-1.0, model.b, r);
    Vec y = smoothed_dual_maximizer(sobj, r);
    Vec ys = y;
    scal(model.scale, ys);
    DenseMatrix g = scatter(ys, model.obs);

    LmoResult atom = lmo_nuclear_epigraph(g, model.lambda, lmo_block,
                                          opts.seed + static_cast<std::uint64_t>(iter),
                                          &lmo);
    double v_cur = 0.0;
    for (double w : atoms.weights) v_cur += w;
    // <g, x> = <scatter(scale y), x> = <y, A x>
    double gx = dot(y, ax);
    double gap = gx + model.lambda * v_cur - (atom.zero ? 0.0 : atom.objective);

    if (!atom.zero) {
      Vec al(atom.left);
      scal(-1.0, al);  // absorb the LMO sign
      atoms.left.push_back(al);
      atoms.right.push_back(atom.right);
      atoms.weights.push_back(0.0);
      Vec amk(e);
      for (std::size_t k = 0; k < e; ++k) {
        const auto& t = model.obs.triples[k];
        amk[k] = model.scale * al[t.i] * atom.right[t.j];
      }
      masked.push_back(std::move(amk));
    }

    ReoptResult ro = reoptimize_weights(sobj, masked, atoms.weights,
                                        opts.reopt_max_iters, opts.reopt_grad_tol);
    grad_tol_fired |= ro.grad_tol_hit;
    iter_cap_fired |= !ro.grad_tol_hit;

    std::fill(ax.begin(), ax.end(), 0.0);
    for (std::size_t a = 0; a < masked.size(); ++a)
      if (atoms.weights[a] != 0.0) axpy(atoms.weights[a], masked[a], ax);

    Vec r_new = ax;
    axpy(-1.0, model.b, r_new);
    double v_new = 0.0;
    for (double w : atoms.weights) v_new += w;

    TraceRow row;
    row.iter = iter;
    row.lmo_calls = lmo.calls;
    row.objective = composite_fit(model, r_new) + model.lambda * v_new;
    row.gap_est = gap;
    row.elapsed_s =
        opts.record_time
            ? std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
                  .count()
            : 0.0;
    trace.rows.push_back(row);

    if (gap <= opts.stop_gap) break;
  }

  trace.notes.push_back(grad_tol_fired ? "reopt: gradient tolerance reached"
                                       : "reopt: gradient tolerance never reached");
  if (iter_cap_fired) trace.notes.push_back("reopt: iteration cap hit at least once");

  DenseMatrix x = atoms.reconstruct(m, n);
  trace.x_bar.u = std::move(x.a);
  double v_final = 0.0;
  for (double w : atoms.weights) v_final += w;
  trace.x_bar.v = {v_final};
  trace.lmo_total = lmo.calls;
  trace.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return trace;
}

// --- exact nuclear-epigraph prox (test oracle and Semi-SPG exact mode) --------

CcgPoint nuclear_epigraph_prox_svd(ConstMatrixView a, double theta, double vcap) {
  if (theta < 0.0) throw std::invalid_argument("nuclear_epigraph_prox_svd: theta < 0");
  SvdResult svd = svd_jacobi(a);
  const std::size_t k = svd.sigma.size();
  Vec s(k);
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    s[i] = std::max(0.0, svd.sigma[i] - theta);
    total += s[i];
  }
  if (total > vcap) {
    // extra uniform shift mu so that sum max(sigma - theta - mu, 0) = vcap
    double lo = 0.0, hi = svd.sigma[0];
    for (int it = 0; it < 200; ++it) {
      double mid = 0.5 * (lo + hi);
      double acc = 0.0;
      for (std::size_t i = 0; i < k; ++i) acc += std::max(0.0, svd.sigma[i] - theta - mid);
      if (acc > vcap)
        lo = mid;
      else
        hi = mid;
    }
    total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      s[i] = std::max(0.0, svd.sigma[i] - theta - hi);
      total += s[i];
    }
  }
  CcgPoint out;
  out.u.assign(a.rows * a.cols, 0.0);
  for (std::size_t t = 0; t < k; ++t) {
    if (s[t] == 0.0) continue;
    for (std::size_t i = 0; i < a.rows; ++i) {
      double wi = s[t] * svd.u(i, t);
      double* row = out.u.data() + i * a.cols;
      for (std::size_t j = 0; j < a.cols; ++j) row[j] += wi * svd.v(j, t);
    }
  }
  out.v = total;
  return out;
}

// --- Semi-SPG -------------------------------------------------------------------

RunTrace semi_spg_solve(const CompositeModel& model, double gamma,
                        const InexactnessSchedule& sched, const SemiSpgOptions& opts) {
  if (gamma <= 0.0) throw std::invalid_argument("semi_spg_solve: gamma <= 0");
  const std::size_t m = model.rows(), n = model.cols();
  const std::size_t mn = m * n;

  SmoothedObjective sobj{model, gamma};
  NuclearEpigraphBlock lmo_kind{m, n, model.vcap};
  LmoBlock lmo_block{lmo_kind};

  RunTrace trace;
  trace.solver = "semi-spg";

  Vec x_cur(mn, 0.0), x_prev(mn, 0.0), z(mn, 0.0);
  double v_cur = 0.0;
  double t_mom = 1.0;
  double lcur = opts.l_init > 0.0 ? opts.l_init : sobj.lipschitz_grad();

  LmoCounter lmo;
  const auto t_start = std::chrono::steady_clock::now();

  for (int k = 1; k <= opts.max_iters; ++k) {
    if (lmo.calls >= opts.max_lmo) break;

    ConstMatrixView zv(z, m, n);
    Vec rz = residual_of(model, zv);
    double fz = smoothed_value_at_residual(sobj, rz);
    Vec y = smoothed_dual_maximizer(sobj, rz);
    scal(model.scale, y);
    DenseMatrix g = scatter(y, model.obs);

    CcgPoint next;
    double delta = 0.0;
    bool exhausted = false;
    for (int bt = 0;; ++bt) {
      Vec a(mn);
      for (std::size_t i = 0; i < mn; ++i) a[i] = z[i] - g.a[i] / lcur;
      if (opts.exact_prox) {
        next = nuclear_epigraph_prox_svd(ConstMatrixView(a, m, n), model.lambda / lcur,
                                         model.vcap);
      } else {
        SmoothSemiLinearObjective obj =
            make_quadratic_objective(std::move(a), lcur, model.lambda);
        CcgPoint start{x_cur, v_cur};
        double eps_k = sched.eps_at(k);
        int inner_max = sched.mode == InexactnessMode::kFixedInnerSteps
                            ? sched.k
                            : opts.ccg_max_iters;
        CcgCertificate cert =
            ccg_solve(obj, lmo_block, eps_k, inner_max, start,
                      opts.seed * 7919ull + static_cast<std::uint64_t>(k) * 31ull +
                          static_cast<std::uint64_t>(bt),
                      &lmo);
        next = cert.point;
        delta = cert.delta;
        exhausted = cert.exhausted;
      }
      if (!opts.backtracking) break;
      // upper-bound acceptance test for the smooth part
      ConstMatrixView xv(next.u, m, n);
      Vec rx = residual_of(model, xv);
      double fx = smoothed_value_at_residual(sobj, rx);
      double lin = 0.0, quad = 0.0;
      for (std::size_t i = 0; i < mn; ++i) {
        double d = next.u[i] - z[i];
        lin += g.a[i] * d;
        quad += d * d;
      }
      if (fx <= fz + lin + 0.5 * lcur * quad + 1e-12 || bt >= 60) break;
      lcur *= 2.0;
    }
    if (sched.mode == InexactnessMode::kDecaying && exhausted)
      trace.inner_exhausted = true;

    double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_mom * t_mom));
    double beta = (t_mom - 1.0) / t_next;
    for (std::size_t i = 0; i < mn; ++i)
      z[i] = next.u[i] + beta * (next.u[i] - x_cur[i]);
    x_prev = x_cur;
    x_cur = next.u;
    v_cur = next.v;
    t_mom = t_next;

    ConstMatrixView xv(x_cur, m, n);
    Vec r = residual_of(model, xv);
    TraceRow row;
    row.iter = k;
    row.lmo_calls = lmo.calls;
    row.objective = composite_fit(model, r) + model.lambda * v_cur;
    row.gap_est = std::numeric_limits<double>::quiet_NaN();
    row.gamma = 1.0 / lcur;
    row.eps_requested = sched.eps_at(k);
    row.delta_y = delta;
    row.elapsed_s =
        opts.record_time
            ? std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
                  .count()
            : 0.0;
    trace.rows.push_back(row);

    if (opts.stop_objective && row.objective <= *opts.stop_objective) break;
  }

  trace.x_bar.u = x_cur;
  trace.x_bar.v = {v_cur};
  trace.lmo_total = lmo.calls;
  trace.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return trace;
}

}  // namespace semiprox
