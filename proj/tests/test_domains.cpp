#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "semiprox/domains.hpp"

using namespace semiprox;

namespace {

// brute-force argmin of <eta, s> + 1/2||s - center||^2 over the 2-D disk
Vec grid_search_disk(const Vec& center, const Vec& eta, double radius, int steps) {
  Vec best(2, 0.0);
  double best_val = std::numeric_limits<double>::infinity();
  for (int i = -steps; i <= steps; ++i)
    for (int j = -steps; j <= steps; ++j) {
      Vec s{radius * i / steps, radius * j / steps};
      if (nrm2(s) > radius) continue;
      double val = eta[0] * s[0] + eta[1] * s[1] +
                   0.5 * ((s[0] - center[0]) * (s[0] - center[0]) +
                          (s[1] - center[1]) * (s[1] - center[1]));
      if (val < best_val) {
        best_val = val;
        best = s;
      }
    }
  return best;
}

double l1_epi_objective(const Vec& y, double v, const Vec& a, double alpha) {
  double s = alpha * v;
  for (std::size_t i = 0; i < y.size(); ++i) s += 0.5 * (y[i] - a[i]) * (y[i] - a[i]);
  return s;
}

}  // namespace

TEST_CASE("prox onto the euclidean ball") {
  CHECK(prox_euclidean_ball({0, 0}, {0, 0}, 1.0) == Vec{0.0, 0.0});

  Vec hit = prox_euclidean_ball({0, 0}, {-2, 0}, 1.0);
  CHECK(hit[0] == doctest::Approx(1.0));
  CHECK(hit[1] == doctest::Approx(0.0));
  Vec grid = grid_search_disk({0, 0}, {-2, 0}, 1.0, 400);
  CHECK(std::abs(hit[0] - grid[0]) <= 5e-3);
  CHECK(std::abs(hit[1] - grid[1]) <= 5e-3);

  // unconstrained minimizer already feasible
  Vec inside = prox_euclidean_ball({0.2, 0.1}, {0.05, -0.1}, 1.0);
  CHECK(inside[0] == doctest::Approx(0.15));
  CHECK(inside[1] == doctest::Approx(0.2));

  CHECK_THROWS_AS(prox_euclidean_ball({0}, {0}, 0.0), std::invalid_argument);
}

TEST_CASE("prox onto the l1 epigraph") {
  L1EpigraphPoint zero = prox_l1_epigraph({0, 0, 0}, 3.0);
  CHECK(zero.y == Vec{0, 0, 0});
  CHECK(zero.v == 0.0);

  L1EpigraphPoint st = prox_l1_epigraph({3, -1}, 1.0);
  CHECK(st.y[0] == doctest::Approx(2.0));
  CHECK(st.y[1] == doctest::Approx(0.0));
  CHECK(st.v == doctest::Approx(2.0));
  // 1-D grid check per component: the joint objective is separable given v = ||y||_1
  double best = std::numeric_limits<double>::infinity();
  for (int i = -500; i <= 500; ++i)
    for (int j = -500; j <= 500; ++j) {
      Vec y{3.0 * i / 500, 3.0 * j / 500};
      best = std::min(best, l1_epi_objective(y, nrm1(y), {3, -1}, 1.0));
    }
  CHECK(l1_epi_objective(st.y, st.v, {3, -1}, 1.0) <= best + 1e-4);

  L1EpigraphPoint none = prox_l1_epigraph({0.5, -0.25}, 0.0);
  CHECK(none.y == Vec{0.5, -0.25});
  CHECK(none.v == doctest::Approx(0.75));
}

TEST_CASE("l1 ball projection") {
  Vec inside = project_l1_ball({0.2, -0.1}, 1.0);
  CHECK(inside == Vec{0.2, -0.1});
  Vec proj = project_l1_ball({2.0, 1.0}, 1.0);
  CHECK(nrm1(proj) == doctest::Approx(1.0));
  // projection preserves signs and ordering
  CHECK(proj[0] > proj[1]);
  CHECK(proj[1] >= 0.0);
}

TEST_CASE("nuclear epigraph LMO") {
  NuclearEpigraphBlock block{3, 3, 5.0};

  DenseMatrix zero(3, 3);
  LmoResult r0 = lmo_nuclear_epigraph(zero, 1.0, block, 1);
  CHECK(r0.zero);
  CHECK(r0.v == 0.0);

  // fixed 3x3 with sigma_max = 2: diag(2, 0.5, 0.1)
  DenseMatrix eta(3, 3);
  eta(0, 0) = 2.0;
  eta(1, 1) = 0.5;
  eta(2, 2) = 0.1;
  LmoResult r = lmo_nuclear_epigraph(eta, 1.0, block, 2);
  REQUIRE_FALSE(r.zero);
  CHECK(r.v == 5.0);
  CHECK(r.objective == doctest::Approx(-5.0).epsilon(1e-9));
  // brute force via the dense SVD: min(0, vcap (alpha - sigma_max))
  double oracle = std::min(0.0, 5.0 * (1.0 - sigma_max_dense(eta)));
  CHECK(r.objective == doctest::Approx(oracle).epsilon(1e-9));

  // tie at alpha = sigma_max breaks toward the origin
  LmoResult tie = lmo_nuclear_epigraph(eta, sigma_max_dense(eta) + 1e-12, block, 3);
  CHECK(tie.zero);
}

TEST_CASE("lmo objective below random feasible points") {
  std::mt19937_64 rng(5);
  NuclearEpigraphBlock kind{4, 5, 2.0};
  DomainProduct dom({}, LmoBlock{kind});
  DenseMatrix eta(4, 5);
  std::normal_distribution<double> g;
  for (double& x : eta.a) x = g(rng);

  LmoResult r = lmo_nuclear_epigraph(eta, 0.3, kind, 7);
  double lmo_obj = r.zero ? 0.0 : r.objective;
  for (int trial = 0; trial < 1000; ++trial) {
    Point p = dom.sample_feasible(rng);
    double val = dot(eta.a, p.u) + 0.3 * p.v[0];
    CHECK(lmo_obj <= val + 1e-9);
  }
}

TEST_CASE("bregman distance") {
  BregmanState state({0.0, 0.0});
  CHECK(bregman(state, {0.0, 0.0}) == 0.0);
  CHECK(bregman(state, {3.0, 4.0}) == doctest::Approx(12.5));

  // three-term identity V_u(w) - V_{u'}(w) - V_u(u') = <V'_u(u'), w - u'>
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    Vec u = gaussian_vector(6, rng), up = gaussian_vector(6, rng),
        w = gaussian_vector(6, rng);
    BregmanState su(u);
    BregmanState sup(up);
    double lhs = su.value(w) - sup.value(w) - su.value(up);
    Vec grad = su.gradient(up);
    double rhs = 0.0;
    for (std::size_t i = 0; i < 6; ++i) rhs += grad[i] * (w[i] - up[i]);
    CHECK(std::abs(lhs - rhs) <= 1e-10);
  }

  // strong convexity lower bound V_u(u') >= 1/2 ||u - u'||^2
  for (int trial = 0; trial < 50; ++trial) {
    Vec u = gaussian_vector(4, rng), up = gaussian_vector(4, rng);
    BregmanState su(u);
    Vec d(4);
    for (std::size_t i = 0; i < 4; ++i) d[i] = u[i] - up[i];
    CHECK(su.value(up) >= 0.5 * dot(d, d) - 1e-12);
  }
}

TEST_CASE("composite prox satisfies the first-order optimality inequality") {
  std::mt19937_64 rng(13);
  DomainProduct dom({ProxBlock{L1EpigraphBlock{4, 2.0}}, ProxBlock{BallBlock{3, 1.5}},
                     ProxBlock{BoxBlock{2, 0.0, 1.0}}},
                    std::nullopt);
  for (int trial = 0; trial < 20; ++trial) {
    Point center = dom.sample_feasible(rng);
    Vec eta_u = gaussian_vector(dom.u_dim(), rng);
    Vec eta_v = {0.3, 0.0};  // alpha >= 0 on the epigraph height
    eta_v.resize(dom.v_dim());
    Point out = dom.origin_point();
    dom.prox_x1(center, eta_u, eta_v, out);
    CHECK(dom.contains(out, 1e-12));

    // <eta + (s - center), s - p> + <eta_v, v - pv> <= 0 for feasible p
    for (int probe = 0; probe < 100; ++probe) {
      Point p = dom.sample_feasible(rng);
      double val = 0.0;
      for (std::size_t i = 0; i < dom.u_dim(); ++i)
        val += (eta_u[i] + out.u[i] - center.u[i]) * (out.u[i] - p.u[i]);
      for (std::size_t i = 0; i < dom.v_dim(); ++i)
        val += eta_v[i] * (out.v[i] - p.v[i]);
      CHECK(val <= 1e-9);
    }
  }
}

TEST_CASE("domain membership of prox and lmo outputs") {
  std::mt19937_64 rng(21);
  DomainProduct dom({ProxBlock{BallBlock{4, 1.0}}},
                    LmoBlock{NuclearEpigraphBlock{3, 3, 2.0}});
  for (int trial = 0; trial < 50; ++trial) {
    Point p = dom.sample_feasible(rng);
    CHECK(dom.contains(p, 1e-9));
  }

  // pulled points are feasible again
  Point p = dom.sample_feasible(rng);
  for (double& x : p.u) x *= 10.0;
  for (double& x : p.v) x *= 10.0;
  dom.pull_feasible(p);
  CHECK(dom.contains(p, 1e-9));
}

TEST_CASE("sup_linear and theta_bound against sampling") {
  std::mt19937_64 rng(31);
  DomainProduct dom({ProxBlock{BallBlock{3, 2.0}}, ProxBlock{L1EpigraphBlock{4, 1.5}}},
                    LmoBlock{NuclearEpigraphBlock{3, 2, 1.0}});
  Vec g_u = gaussian_vector(dom.u_dim(), rng);
  Vec g_v = gaussian_vector(dom.v_dim(), rng);
  double sup = dom.sup_linear(g_u, g_v);
  for (int trial = 0; trial < 2000; ++trial) {
    Point p = dom.sample_feasible(rng);
    CHECK(dot(g_u, p.u) + dot(g_v, p.v) <= sup + 1e-9);
  }

  Point start = dom.sample_feasible(rng);
  double theta = dom.theta_bound(start.u);
  for (int trial = 0; trial < 2000; ++trial) {
    Point p = dom.sample_feasible(rng);
    Vec d(dom.u_dim());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = p.u[i] - start.u[i];
    CHECK(0.5 * dot(d, d) <= theta + 1e-9);
  }

  // ball sup has a closed form
  DomainProduct ball_only({ProxBlock{BallBlock{3, 2.0}}}, std::nullopt);
  Vec g{1.0, -2.0, 2.0};
  CHECK(ball_only.sup_linear(g, {}) == doctest::Approx(2.0 * 3.0));
}
