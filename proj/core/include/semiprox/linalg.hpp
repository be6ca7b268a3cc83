#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace semiprox {

using Vec = std::vector<double>;

// --- elementary vector kernels -------------------------------------------

double dot(std::span<const double> a, std::span<const double> b);
double nrm2(std::span<const double> a);
double nrm1(std::span<const double> a);
double nrm_inf(std::span<const double> a);
// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void scal(double alpha, std::span<double> x);

// --- matrices -------------------------------------------------------------

/// Dense row-major matrix. Entries are owned; views below borrow.
struct DenseMatrix {
  std::size_t rows{0};
  std::size_t cols{0};
  Vec a;

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
};

struct ConstMatrixView {
  std::span<const double> a;
  std::size_t rows{0};
  std::size_t cols{0};

  ConstMatrixView() = default;
  ConstMatrixView(std::span<const double> data, std::size_t r, std::size_t c)
      : a(data), rows(r), cols(c) {}
  ConstMatrixView(const DenseMatrix& m) : a(m.a), rows(m.rows), cols(m.cols) {}

  double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
};

/// Sparse observations (i, j, value) of an m x n matrix. Indices are
/// 0-based, unique per cell, and in range; validated at construction.
struct ObservedMatrix {
  struct Triple {
    std::size_t i;
    std::size_t j;
    double value;
  };

  std::size_t rows{0};
  std::size_t cols{0};
  std::vector<Triple> triples;

  ObservedMatrix() = default;
  ObservedMatrix(std::size_t r, std::size_t c, std::vector<Triple> t);

  std::size_t count() const { return triples.size(); }
  Vec values() const;
};

// --- masked observation operator -------------------------------------------

/// Restriction of x onto the observed cells: out[k] = x(i_k, j_k).
Vec apply_mask(ConstMatrixView x, const ObservedMatrix& obs);
void apply_mask(ConstMatrixView x, const ObservedMatrix& obs, std::span<double> out);

/// Adjoint of apply_mask: places values back on their cells, zero elsewhere.
DenseMatrix scatter(std::span<const double> values, const ObservedMatrix& obs);
void scatter_add(std::span<const double> values, const ObservedMatrix& obs, double scale,
                 std::span<double> out);

// --- top singular pair ------------------------------------------------------

struct SingularPair {
  double sigma{0.0};
  Vec left;   // length rows, unit norm
  Vec right;  // length cols, unit norm
};

struct TopPairResult {
  SingularPair pair;
  bool converged{false};
  int iterations{0};
};

/// Power iteration on a^T a with the Rayleigh-quotient stopping rule
/// |sigma_{k+1} - sigma_k| <= tol * sigma_k. Deterministic for a fixed seed.
/// The zero matrix yields sigma = 0 with canonical unit vectors e1.
TopPairResult top_singular_pair(ConstMatrixView a, double tol, int max_iters,
                                std::uint64_t seed);

// --- dense SVD (one-sided Jacobi) -------------------------------------------

struct SvdResult {
  DenseMatrix u;  // rows x k
  Vec sigma;      // length k = min(rows, cols), descending
  DenseMatrix v;  // cols x k
};

/// Full dense SVD by one-sided Jacobi rotations. Intended for small
/// matrices: objective evaluation, certificates, and test oracles.
SvdResult svd_jacobi(ConstMatrixView a);

Vec singular_values(ConstMatrixView a);
double nuclear_norm(ConstMatrixView a);
double sigma_max_dense(ConstMatrixView a);

// --- seeded sampling helpers -------------------------------------------------

Vec gaussian_vector(std::size_t n, std::mt19937_64& rng);
Vec random_unit_vector(std::size_t n, std::mt19937_64& rng);

}  // namespace semiprox
