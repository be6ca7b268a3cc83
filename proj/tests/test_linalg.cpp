#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "semiprox/linalg.hpp"

using namespace semiprox;

namespace {

ObservedMatrix two_cells() {
  return ObservedMatrix(2, 2, {{0, 0, 1.0}, {1, 1, 4.0}});
}

DenseMatrix random_matrix(std::size_t m, std::size_t n, std::mt19937_64& rng) {
  DenseMatrix a(m, n);
  std::normal_distribution<double> g;
  for (double& x : a.a) x = g(rng);
  return a;
}

}  // namespace

TEST_CASE("apply_mask basics") {
  ObservedMatrix obs = two_cells();

  DenseMatrix zeros(2, 2);
  Vec z = apply_mask(zeros, obs);
  CHECK(z == Vec{0.0, 0.0});

  DenseMatrix x(2, 2);
  x(0, 0) = 1;
  x(0, 1) = 2;
  x(1, 0) = 3;
  x(1, 1) = 4;
  Vec picked = apply_mask(x, obs);
  CHECK(picked == Vec{1.0, 4.0});

  DenseMatrix bad(3, 2);
  CHECK_THROWS_AS(apply_mask(bad, obs), std::invalid_argument);
}

TEST_CASE("apply_mask / scatter adjointness") {
  std::mt19937_64 rng(11);
  std::vector<ObservedMatrix::Triple> triples;
  std::uniform_real_distribution<double> unif(-1, 1);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j)
      if ((i * 8 + j) % 3 == 0) triples.push_back({i, j, unif(rng)});
  ObservedMatrix obs(8, 8, triples);

  DenseMatrix x = random_matrix(8, 8, rng);
  Vec v(obs.count());
  for (double& t : v) t = unif(rng);

  // <mask(x), v> vs <x, scatter(v)> by direct summation
  Vec mx = apply_mask(x, obs);
  double lhs = dot(mx, v);
  DenseMatrix sv = scatter(v, obs);
  double rhs = 0.0;
  for (std::size_t k = 0; k < x.a.size(); ++k) rhs += x.a[k] * sv.a[k];
  CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)));
}

TEST_CASE("observed matrix validation") {
  CHECK_THROWS_AS(ObservedMatrix(2, 2, {{0, 0, 1.0}, {0, 0, 2.0}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(ObservedMatrix(2, 2, {{2, 0, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(ObservedMatrix(2, 2, {{0, 0, std::nan("")}}), std::invalid_argument);
}

TEST_CASE("top_singular_pair on a diagonal matrix") {
  DenseMatrix a(2, 2);
  a(0, 0) = 3.0;
  a(1, 1) = 1.0;
  TopPairResult r = top_singular_pair(a, 1e-9, 1000, 5);
  REQUIRE(r.converged);
  CHECK(r.pair.sigma == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(std::abs(r.pair.left[0]) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(r.pair.right[0]) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("top_singular_pair on a rank-one matrix") {
  std::mt19937_64 rng(3);
  Vec p = random_unit_vector(6, rng);
  Vec q = random_unit_vector(4, rng);
  DenseMatrix a(6, 4);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 4; ++j) a(i, j) = 5.0 * p[i] * q[j];
  TopPairResult r = top_singular_pair(a, 1e-9, 1000, 17);
  REQUIRE(r.converged);
  CHECK(r.pair.sigma == doctest::Approx(5.0).epsilon(1e-9));
  // rank-one: sigma equals the Frobenius norm
  CHECK(std::abs(r.pair.sigma - nrm2(a.a)) <= 1e-9);
}

TEST_CASE("top_singular_pair matches the dense SVD oracle") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    DenseMatrix a = random_matrix(8, 8, rng);
    TopPairResult r = top_singular_pair(a, 1e-9, 1000, 1000 + trial);
    REQUIRE(r.converged);
    double oracle = sigma_max_dense(a);
    CHECK(std::abs(r.pair.sigma - oracle) <= 1e-6 * oracle);
    CHECK(r.pair.sigma <= nrm2(a.a) + 1e-12);
    CHECK(std::abs(nrm2(r.pair.left) - 1.0) <= 1e-12);
    CHECK(std::abs(nrm2(r.pair.right) - 1.0) <= 1e-12);
  }
}

TEST_CASE("top_singular_pair determinism and degenerate input") {
  DenseMatrix zero(3, 3);
  TopPairResult r = top_singular_pair(zero, 1e-9, 100, 9);
  CHECK(r.pair.sigma == 0.0);
  CHECK(r.pair.left == Vec{1.0, 0.0, 0.0});
  CHECK(r.pair.right == Vec{1.0, 0.0, 0.0});

  std::mt19937_64 rng(77);
  DenseMatrix a = random_matrix(5, 7, rng);
  TopPairResult r1 = top_singular_pair(a, 1e-9, 1000, 4242);
  TopPairResult r2 = top_singular_pair(a, 1e-9, 1000, 4242);
  CHECK(r1.pair.sigma == r2.pair.sigma);
  CHECK(r1.pair.left == r2.pair.left);
  CHECK(r1.pair.right == r2.pair.right);
}

TEST_CASE("svd_jacobi factors and reconstructs") {
  std::mt19937_64 rng(101);
  for (auto [m, n] : {std::pair<std::size_t, std::size_t>{6, 6}, {4, 7}, {7, 4}}) {
    DenseMatrix a = random_matrix(m, n, rng);
    SvdResult svd = svd_jacobi(a);
    const std::size_t k = svd.sigma.size();
    REQUIRE(k == std::min(m, n));
    for (std::size_t t = 1; t < k; ++t) CHECK(svd.sigma[t - 1] >= svd.sigma[t]);

    DenseMatrix rec(m, n);
    for (std::size_t t = 0; t < k; ++t)
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j)
          rec(i, j) += svd.sigma[t] * svd.u(i, t) * svd.v(j, t);
    double err = 0.0;
    for (std::size_t i = 0; i < m * n; ++i) err += (rec.a[i] - a.a[i]) * (rec.a[i] - a.a[i]);
    CHECK(std::sqrt(err) <= 1e-10 * nrm2(a.a));

    // orthonormal columns
    for (std::size_t s = 0; s < k; ++s)
      for (std::size_t t = s; t < k; ++t) {
        double uu = 0.0, vv = 0.0;
        for (std::size_t i = 0; i < m; ++i) uu += svd.u(i, s) * svd.u(i, t);
        for (std::size_t i = 0; i < n; ++i) vv += svd.v(i, s) * svd.v(i, t);
        double want = s == t ? 1.0 : 0.0;
        CHECK(std::abs(uu - want) <= 1e-10);
        CHECK(std::abs(vv - want) <= 1e-10);
      }
  }
}

TEST_CASE("nuclear norm basics") {
  DenseMatrix a(2, 2);
  a(0, 0) = 3.0;
  a(1, 1) = 1.0;
  CHECK(nuclear_norm(a) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(sigma_max_dense(a) == doctest::Approx(3.0).epsilon(1e-12));
}
