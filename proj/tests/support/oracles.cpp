#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>

namespace semiprox::testing {

CcgPoint project_nuclear_epigraph(ConstMatrixView a, double beta, double vcap) {
  SvdResult svd = svd_jacobi(a);
  const std::size_t k = svd.sigma.size();

  auto v_at = [&](double mu) { return std::clamp(beta + mu, 0.0, vcap); };
  auto excess = [&](double mu) {
    double s = 0.0;
    for (double sg : svd.sigma) s += std::max(0.0, sg - mu);
    return s - v_at(mu);
  };

  double mu = 0.0;
  if (excess(0.0) > 0.0) {
    double lo = 0.0, hi = svd.sigma.empty() ? 1.0 : svd.sigma[0] + std::abs(beta) + 1.0;
    for (int it = 0; it < 200; ++it) {
      double mid = 0.5 * (lo + hi);
      if (excess(mid) > 0.0)
        lo = mid;
      else
        hi = mid;
    }
    mu = hi;
  }

  CcgPoint out;
  out.v = v_at(mu);
  out.u.assign(a.rows * a.cols, 0.0);
  for (std::size_t t = 0; t < k; ++t) {
    double s = std::max(0.0, svd.sigma[t] - mu);
    if (s == 0.0) continue;
    for (std::size_t i = 0; i < a.rows; ++i) {
      double wi = s * svd.u(i, t);
      double* row = out.u.data() + i * a.cols;
      for (std::size_t j = 0; j < a.cols; ++j) row[j] += wi * svd.v(j, t);
    }
  }
  return out;
}

CcgPoint projected_gradient_epigraph(const DenseMatrix& c, double q, double theta,
                                     double vcap, int max_iters, double tol) {
  const std::size_t mn = c.rows * c.cols;
  CcgPoint z;
  z.u.assign(mn, 0.0);
  z.v = 0.0;
  const double eta = 1.0 / q;
  for (int it = 0; it < max_iters; ++it) {
    Vec step(mn);
    for (std::size_t i = 0; i < mn; ++i) step[i] = z.u[i] - eta * q * (z.u[i] - c.a[i]);
    double v_step = z.v - eta * theta;
    CcgPoint next =
        project_nuclear_epigraph(ConstMatrixView(step, c.rows, c.cols), v_step, vcap);
    double move = 0.0;
    for (std::size_t i = 0; i < mn; ++i) {
      double d = next.u[i] - z.u[i];
      move += d * d;
    }
    move += (next.v - z.v) * (next.v - z.v);
    z = std::move(next);
    if (std::sqrt(move) <= tol) break;
  }
  return z;
}

std::vector<Vec> reference_fista(const CompositeModel& model, double gamma, int iters) {
  const std::size_t m = model.rows(), n = model.cols();
  const std::size_t mn = m * n;
  SmoothedObjective sobj{model, gamma};
  const double lstep = sobj.lipschitz_grad();

  std::vector<Vec> out;
  Vec x(mn, 0.0), x_prev(mn, 0.0), z(mn, 0.0);
  double t = 1.0;
  for (int k = 0; k < iters; ++k) {
    DenseMatrix g = smoothed_grad(sobj, ConstMatrixView(z, m, n));
    Vec a(mn);
    for (std::size_t i = 0; i < mn; ++i) a[i] = z[i] - g.a[i] / lstep;
    CcgPoint p = nuclear_epigraph_prox_svd(ConstMatrixView(a, m, n),
                                           model.lambda / lstep, model.vcap);
    double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    double beta = (t - 1.0) / t_next;
    x_prev = x;
    x = p.u;
    for (std::size_t i = 0; i < mn; ++i) z[i] = x[i] + beta * (x[i] - x_prev[i]);
    t = t_next;
    out.push_back(x);
  }
  return out;
}

}  // namespace semiprox::testing
