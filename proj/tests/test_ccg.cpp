#include <doctest.h>

#include <cmath>

#include "semiprox/ccg.hpp"
#include "support/oracles.hpp"

using namespace semiprox;

namespace {

DenseMatrix random_matrix(std::size_t m, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  DenseMatrix a(m, n);
  for (double& x : a.a) x = g(rng);
  return a;
}

// target strictly inside the truncated epigraph
DenseMatrix interior_target(std::size_t n, double vcap, std::uint64_t seed) {
  DenseMatrix c = random_matrix(n, n, seed);
  double nuc = nuclear_norm(c);
  for (double& x : c.a) x *= 0.5 * vcap / nuc;
  return c;
}

}  // namespace

TEST_CASE("ccg converges to an interior quadratic minimizer with the rate bound") {
  const std::size_t n = 8;
  const double vcap = 2.0;
  LmoBlock block{NuclearEpigraphBlock{n, n, vcap}};
  DenseMatrix c = interior_target(n, vcap, 3);
  SmoothSemiLinearObjective obj = make_quadratic_objective(c.a, 1.0, 0.0);

  // oracle minimum: theta = 0, interior c => min phi+ = 0 at (c, .)
  CcgPoint start;
  start.u.assign(n * n, 0.0);

  const double d = block.diameter();
  CcgPoint x = start;
  for (int t = 1; t <= 400; ++t) {
    CcgCertificate cert = ccg_solve(obj, block, -1.0, t, start, 11);
    double gap = phi_plus(obj, cert.point) - 0.0;
    if (t >= 2) CHECK(gap <= 2.0 * d * d / (t + 1.0) + 1e-9);
    x = cert.point;
  }
  CcgCertificate final_cert = ccg_solve(obj, block, 1e-6, 2000, start, 11);
  CHECK(final_cert.delta <= 1e-6);
  CHECK_FALSE(final_cert.exhausted);
}

TEST_CASE("huge linear coefficient returns the origin after one LMO call") {
  LmoBlock block{NuclearEpigraphBlock{4, 4, 3.0}};
  SmoothSemiLinearObjective obj;
  obj.phi = [](const Vec&) { return 0.0; };
  obj.grad = [](const Vec& u, Vec& g) { g.assign(u.size(), 0.0); };
  obj.theta = 1e6;
  CcgPoint start;
  start.u.assign(16, 0.0);
  LmoCounter counter;
  CcgCertificate cert = ccg_solve(obj, block, 1e-12, 100, start, 1, &counter);
  CHECK(counter.calls == 1);
  CHECK(cert.point.v == 0.0);
  CHECK(nrm2(cert.point.u) == 0.0);
  CHECK(cert.delta == 0.0);
}

TEST_CASE("16x16 quadratic matches the projected-gradient oracle") {
  const std::size_t n = 16;
  const double vcap = 1.0;
  const double theta = 0.05;
  LmoBlock block{NuclearEpigraphBlock{n, n, vcap}};
  DenseMatrix c = random_matrix(n, n, 7);
  for (double& x : c.a) x *= 0.2;
  SmoothSemiLinearObjective obj = make_quadratic_objective(c.a, 1.0, theta);

  CcgPoint oracle = testing::projected_gradient_epigraph(c, 1.0, theta, vcap, 20000, 1e-10);
  double oracle_val = phi_plus(obj, oracle);

  CcgPoint start;
  start.u.assign(n * n, 0.0);
  CcgCertificate cert = ccg_solve(obj, block, 1e-6, 4000, start, 5);
  CHECK(phi_plus(obj, cert.point) - oracle_val <= 1e-4);
  CHECK(phi_plus(obj, cert.point) - oracle_val >= -1e-8);
  // certificate soundness: delta upper-bounds the true gap
  CHECK(cert.delta >= phi_plus(obj, cert.point) - oracle_val - 1e-9);
}

TEST_CASE("iterates stay feasible and the objective never increases") {
  const std::size_t n = 6;
  const double vcap = 1.5;
  LmoBlock block{NuclearEpigraphBlock{n, n, vcap}};
  DenseMatrix c = random_matrix(n, n, 13);
  SmoothSemiLinearObjective obj = make_quadratic_objective(c.a, 1.0, 0.1);

  CcgPoint start;
  start.u.assign(n * n, 0.0);
  double prev = phi_plus(obj, start);
  for (int t = 1; t <= 60; ++t) {
    CcgCertificate cert = ccg_solve(obj, block, -1.0, t, start, 17);
    double val = phi_plus(obj, cert.point);
    CHECK(val <= prev + 1e-12);
    prev = std::min(prev, val);
    ConstMatrixView xv(cert.point.u, n, n);
    CHECK(nuclear_norm(xv) <= cert.point.v + 1e-9);
    CHECK(cert.point.v <= vcap + 1e-12);
  }
}

TEST_CASE("ccg_gap certificate properties") {
  const std::size_t n = 5;
  const double vcap = 1.0;
  LmoBlock block{NuclearEpigraphBlock{n, n, vcap}};
  DenseMatrix c = interior_target(n, vcap, 29);
  SmoothSemiLinearObjective obj = make_quadratic_objective(c.a, 1.0, 0.0);

  // at the exact minimizer the gap vanishes
  CcgPoint minimizer{c.a, nuclear_norm(c)};
  CHECK(ccg_gap(obj, block, minimizer, 3) <= 1e-8);

  // at a far corner the gap dominates the suboptimality
  std::mt19937_64 rng(31);
  Vec lu = random_unit_vector(n, rng), ru = random_unit_vector(n, rng);
  CcgPoint corner;
  corner.u.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) corner.u[i * n + j] = vcap * lu[i] * ru[j];
  corner.v = vcap;
  double gap = ccg_gap(obj, block, corner, 5);
  CHECK(gap >= phi_plus(obj, corner) - 0.0 - 1e-9);

  // min-so-far certificates decay along the trajectory
  CcgPoint start;
  start.u.assign(n * n, 0.0);
  double best_early = std::numeric_limits<double>::infinity();
  double best_late = std::numeric_limits<double>::infinity();
  for (int t = 1; t <= 200; ++t) {
    CcgCertificate cert = ccg_solve(obj, block, -1.0, t, start, 37);
    double d = ccg_gap(obj, block, cert.point, 41);
    if (t <= 20) best_early = std::min(best_early, d);
    best_late = std::min(best_late, d);
  }
  CHECK(best_late <= best_early);
  CHECK(best_late <= 0.1 * std::max(best_early, 1e-12));
}

TEST_CASE("exhaustion returns the best certificate, flagged") {
  const std::size_t n = 6;
  LmoBlock block{NuclearEpigraphBlock{n, n, 2.0}};
  DenseMatrix c = random_matrix(n, n, 43);
  SmoothSemiLinearObjective obj = make_quadratic_objective(c.a, 1.0, 0.2);
  CcgPoint start;
  start.u.assign(n * n, 0.0);
  CcgCertificate cert = ccg_solve(obj, block, 1e-14, 5, start, 47);
  CHECK(cert.exhausted);
  CHECK(cert.iters_used == 5);
  CHECK(cert.delta >= 0.0);
  CHECK(cert.lmo_calls == 5);
}
