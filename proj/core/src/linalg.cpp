#include "semiprox/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

namespace semiprox {

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double nrm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double nrm1(std::span<const double> a) {
  double s = 0.0;
  for (double x : a) s += std::abs(x);
  return s;
}

double nrm_inf(std::span<const double> a) {
  double s = 0.0;
  for (double x : a) s = std::max(s, std::abs(x));
  return s;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("axpy: size mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void scal(double alpha, std::span<double> x) {
  for (double& v : x) v *= alpha;
}

ObservedMatrix::ObservedMatrix(std::size_t r, std::size_t c, std::vector<Triple> t)
    : rows(r), cols(c), triples(std::move(t)) {
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const Triple& tr : triples) {
    if (tr.i >= rows || tr.j >= cols)
      throw std::invalid_argument("ObservedMatrix: index out of range");
    if (!std::isfinite(tr.value))
      throw std::invalid_argument("ObservedMatrix: non-finite value");
    if (!seen.emplace(tr.i, tr.j).second)
      throw std::invalid_argument("ObservedMatrix: duplicate cell");
  }
}

Vec ObservedMatrix::values() const {
  Vec out(triples.size());
  for (std::size_t k = 0; k < triples.size(); ++k) out[k] = triples[k].value;
  return out;
}

Vec apply_mask(ConstMatrixView x, const ObservedMatrix& obs) {
  Vec out(obs.count());
  apply_mask(x, obs, out);
  return out;
}

void apply_mask(ConstMatrixView x, const ObservedMatrix& obs, std::span<double> out) {
  if (x.rows != obs.rows || x.cols != obs.cols)
    throw std::invalid_argument("apply_mask: dimension mismatch");
  if (out.size() != obs.count())
    throw std::invalid_argument("apply_mask: output size mismatch");
  for (std::size_t k = 0; k < obs.count(); ++k)
    out[k] = x(obs.triples[k].i, obs.triples[k].j);
}

DenseMatrix scatter(std::span<const double> values, const ObservedMatrix& obs) {
  DenseMatrix out(obs.rows, obs.cols);
  scatter_add(values, obs, 1.0, out.a);
  return out;
}

void scatter_add(std::span<const double> values, const ObservedMatrix& obs, double scale,
                 std::span<double> out) {
  if (values.size() != obs.count())
    throw std::invalid_argument("scatter_add: value count mismatch");
  if (out.size() != obs.rows * obs.cols)
    throw std::invalid_argument("scatter_add: output size mismatch");
  for (std::size_t k = 0; k < obs.count(); ++k)
    out[obs.triples[k].i * obs.cols + obs.triples[k].j] += scale * values[k];
}

namespace {

// y = a * x  (y length rows)
void matvec(ConstMatrixView a, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < a.rows; ++i) {
    double s = 0.0;
    const double* row = a.a.data() + i * a.cols;
    for (std::size_t j = 0; j < a.cols; ++j) s += row[j] * x[j];
    y[i] = s;
  }
}

// y = a^T * x  (y length cols)
void matvec_t(ConstMatrixView a, std::span<const double> x, std::span<double> y) {
  std::fill(y.begin(), y.end(), 0.0);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* row = a.a.data() + i * a.cols;
    for (std::size_t j = 0; j < a.cols; ++j) y[j] += row[j] * x[i];
  }
}

}  // namespace

TopPairResult top_singular_pair(ConstMatrixView a, double tol, int max_iters,
                                std::uint64_t seed) {
  if (tol <= 0.0) throw std::invalid_argument("top_singular_pair: tol must be > 0");
  if (a.rows == 0 || a.cols == 0)
    throw std::invalid_argument("top_singular_pair: empty matrix");
  for (double x : a.a)
    if (!std::isfinite(x))
      throw std::invalid_argument("top_singular_pair: non-finite entry");

  TopPairResult res;
  res.pair.left.assign(a.rows, 0.0);
  res.pair.right.assign(a.cols, 0.0);

  double frob = nrm2(a.a);
  if (frob == 0.0) {
    res.pair.sigma = 0.0;
    res.pair.left[0] = 1.0;
    res.pair.right[0] = 1.0;
    res.converged = true;
    return res;
  }

  std::mt19937_64 rng(seed);
  Vec v = random_unit_vector(a.cols, rng);
  Vec av(a.rows), atav(a.cols);

  double sigma_prev = 0.0;
  for (int k = 1; k <= max_iters; ++k) {
    matvec(a, v, av);
    double sigma = nrm2(av);
    if (sigma == 0.0) {
      // v landed in the null space; restart from a fresh direction
      v = random_unit_vector(a.cols, rng);
      continue;
    }
    matvec_t(a, av, atav);
    double nn = nrm2(atav);
    for (std::size_t j = 0; j < a.cols; ++j) v[j] = atav[j] / nn;
    res.iterations = k;
    if (k > 1 && std::abs(sigma - sigma_prev) <= tol * sigma) {
      res.converged = true;
      sigma_prev = sigma;
      break;
    }
    sigma_prev = sigma;
  }

  matvec(a, v, av);
  double sigma = nrm2(av);
  res.pair.sigma = sigma;
  res.pair.right = v;
  if (sigma > 0.0) {
    for (std::size_t i = 0; i < a.rows; ++i) res.pair.left[i] = av[i] / sigma;
  } else {
    res.pair.left[0] = 1.0;
  }
  return res;
}

namespace {

// One-sided Jacobi: orthogonalizes the columns of w in place while
// accumulating the right rotations into v. Assumes rows >= cols.
void jacobi_sweeps(DenseMatrix& w, DenseMatrix& v) {
  const std::size_t n = w.cols;
  const double eps = 1e-14;
  const int max_sweeps = 60;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double app = 0.0, aqq = 0.0, apq = 0.0;
        for (std::size_t i = 0; i < w.rows; ++i) {
          double wp = w(i, p), wq = w(i, q);
          app += wp * wp;
          aqq += wq * wq;
          apq += wp * wq;
        }
        if (std::abs(apq) <= eps * std::sqrt(app * aqq) || apq == 0.0) continue;
        rotated = true;
        double tau = (aqq - app) / (2.0 * apq);
        double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        double c = 1.0 / std::sqrt(1.0 + t * t);
        double s = c * t;
        for (std::size_t i = 0; i < w.rows; ++i) {
          double wp = w(i, p), wq = w(i, q);
          w(i, p) = c * wp - s * wq;
          w(i, q) = s * wp + c * wq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          double vp = v(i, p), vq = v(i, q);
          v(i, p) = c * vp - s * vq;
          v(i, q) = s * vp + c * vq;
        }
      }
    }
    if (!rotated) break;
  }
}

}  // namespace

SvdResult svd_jacobi(ConstMatrixView a) {
  if (a.rows == 0 || a.cols == 0) throw std::invalid_argument("svd_jacobi: empty matrix");
  const bool transposed = a.rows < a.cols;
  const std::size_t m = transposed ? a.cols : a.rows;
  const std::size_t n = transposed ? a.rows : a.cols;

  DenseMatrix w(m, n);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) {
      if (transposed)
        w(j, i) = a(i, j);
      else
        w(i, j) = a(i, j);
    }

  DenseMatrix v(n, n);
  for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

  jacobi_sweeps(w, v);

  // column norms are the singular values; sort descending
  std::vector<std::size_t> order(n);
  Vec sig(n);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += w(i, j) * w(i, j);
    sig[j] = std::sqrt(s);
    order[j] = j;
  }
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return sig[x] > sig[y]; });

  SvdResult out;
  out.sigma.resize(n);
  DenseMatrix uu(m, n), vv(n, n);
  for (std::size_t jj = 0; jj < n; ++jj) {
    std::size_t j = order[jj];
    out.sigma[jj] = sig[j];
    if (sig[j] > 0.0) {
      for (std::size_t i = 0; i < m; ++i) uu(i, jj) = w(i, j) / sig[j];
    } else {
      // null direction; pick e_{jj} to keep the factor well formed
      uu(jj % m, jj) = 1.0;
    }
    for (std::size_t i = 0; i < n; ++i) vv(i, jj) = v(i, j);
  }

  if (transposed) {
    out.u = std::move(vv);
    out.v = std::move(uu);
  } else {
    out.u = std::move(uu);
    out.v = std::move(vv);
  }
  return out;
}

Vec singular_values(ConstMatrixView a) { return svd_jacobi(a).sigma; }

double nuclear_norm(ConstMatrixView a) {
  Vec s = singular_values(a);
  return std::accumulate(s.begin(), s.end(), 0.0);
}

double sigma_max_dense(ConstMatrixView a) {
  Vec s = singular_values(a);
  return s.empty() ? 0.0 : s.front();
}

Vec gaussian_vector(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vec out(n);
  for (double& x : out) x = g(rng);
  return out;
}

Vec random_unit_vector(std::size_t n, std::mt19937_64& rng) {
  Vec out = gaussian_vector(n, rng);
  double nn = nrm2(out);
  while (nn == 0.0) {
    out = gaussian_vector(n, rng);
    nn = nrm2(out);
  }
  scal(1.0 / nn, out);
  return out;
}

}  // namespace semiprox
