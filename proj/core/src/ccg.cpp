#include "semiprox/ccg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

namespace semiprox {

SmoothSemiLinearObjective make_quadratic_objective(Vec a, double q, double theta) {
  if (q <= 0.0) throw std::invalid_argument("make_quadratic_objective: q <= 0");
  SmoothSemiLinearObjective obj;
  auto center = std::make_shared<Vec>(std::move(a));
  obj.phi = [center, q](const Vec& u) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      double d = u[i] - (*center)[i];
      s += d * d;
    }
    return 0.5 * q * s;
  };
  obj.grad = [center, q](const Vec& u, Vec& g) {
    g.resize(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) g[i] = q * (u[i] - (*center)[i]);
  };
  obj.theta = theta;
  obj.kappa = 2.0;
  obj.l0 = q;
  obj.quad_curvature = q;
  return obj;
}

double phi_plus(const SmoothSemiLinearObjective& obj, const CcgPoint& x) {
  return obj.phi(x.u) + obj.theta * x.v;
}

namespace {

struct LmoEval {
  LmoResult atom;
  double delta{0.0};
  double g_dot_u{0.0};   // <g, u_t>
  double g_dot_atom{0.0};  // <g, u_t[g]>
};

LmoEval evaluate_gap(const SmoothSemiLinearObjective& obj, const LmoBlock& block,
                     const CcgPoint& x, const Vec& g, std::uint64_t seed,
                     LmoCounter* counter) {
  LmoEval ev;
  ev.atom = lmo_nuclear_epigraph(ConstMatrixView(g, block.kind.rows, block.kind.cols),
                                 obj.theta, block.kind, seed, counter);
  ev.g_dot_u = dot(g, x.u);
  ev.g_dot_atom = ev.atom.zero ? 0.0 : -block.kind.vcap * ev.atom.sigma;
  double atom_v = ev.atom.zero ? 0.0 : ev.atom.v;
  ev.delta = std::max(0.0, ev.g_dot_u - ev.g_dot_atom + obj.theta * (x.v - atom_v));
  return ev;
}

}  // namespace

CcgCertificate ccg_solve(const SmoothSemiLinearObjective& obj, const LmoBlock& block,
                         double eps, int max_iters, const CcgPoint& start,
                         std::uint64_t seed, LmoCounter* counter) {
  if (max_iters < 1) throw std::invalid_argument("ccg_solve: max_iters < 1");
  if (start.u.size() != block.u_dim())
    throw std::invalid_argument("ccg_solve: start dimension mismatch");

  CcgCertificate out;
  CcgPoint x = start;
  Vec g(x.u.size());

  CcgPoint best = x;
  double best_delta = std::numeric_limits<double>::infinity();
  long calls = 0;

  for (int t = 1; t <= max_iters; ++t) {
    obj.grad(x.u, g);
    LmoEval ev = evaluate_gap(obj, block, x, g, seed + static_cast<std::uint64_t>(t),
                              counter);
    ++calls;
    out.iters_used = t;
    if (ev.delta < best_delta) {
      best_delta = ev.delta;
      best = x;
    }
    if (ev.delta <= eps) {
      out.point = x;
      out.delta = ev.delta;
      out.lmo_calls = calls;
      return out;
    }
    if (t == max_iters) break;

    // segment search on x + s (x[g] - x), s in [0, 1]
    double atom_v = ev.atom.zero ? 0.0 : ev.atom.v;
    double dv = atom_v - x.v;
    double s;
    if (obj.quad_curvature) {
      double q = *obj.quad_curvature;
      // ||d_u||^2 = ||atom||^2 - 2 <atom, u> + ||u||^2 with ||atom||_F = v
      double atom_dot_u = 0.0;
      if (!ev.atom.zero) {
        for (std::size_t i = 0; i < block.kind.rows; ++i) {
          double li = -ev.atom.v * ev.atom.left[i];
          const double* row = x.u.data() + i * block.kind.cols;
          double acc = 0.0;
          for (std::size_t j = 0; j < block.kind.cols; ++j)
            acc += row[j] * ev.atom.right[j];
          atom_dot_u += li * acc;
        }
      }
      double d_norm_sq = atom_v * atom_v - 2.0 * atom_dot_u + dot(x.u, x.u);
      double denom = q * d_norm_sq;
      s = denom > 0.0 ? std::clamp(ev.delta / denom, 0.0, 1.0) : 1.0;
    } else {
      s = 2.0 / (t + 1.0);
    }

    scal(1.0 - s, x.u);
    ev.atom.add_scaled(s, x.u, block.kind.cols);
    x.v += s * dv;
  }

  out.point = best;
  out.delta = best_delta;
  out.lmo_calls = calls;
  out.exhausted = true;
  return out;
}

double ccg_gap(const SmoothSemiLinearObjective& obj, const LmoBlock& block,
               const CcgPoint& point, std::uint64_t seed, LmoCounter* counter) {
  Vec g(point.u.size());
  obj.grad(point.u, g);
  return evaluate_gap(obj, block, point, g, seed, counter).delta;
}

}  // namespace semiprox
