#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <variant>
#include <vector>

#include "semiprox/linalg.hpp"

namespace semiprox {

/// A point of a product domain X in E_u x E_v. The v-components are the
/// epigraph heights that enter the field linearly; the distance-generating
/// function only ever sees u.
struct Point {
  Vec u;
  Vec v;
};

// --- prox-capable blocks ----------------------------------------------------

struct BallBlock {
  std::size_t dim{0};
  double radius{1.0};
};

struct BoxBlock {
  std::size_t dim{0};
  double lo{0.0};
  double hi{1.0};
};

/// {(y, v): ||y||_1 <= v <= vcap}
struct L1EpigraphBlock {
  std::size_t dim{0};
  double vcap{1.0};
};

struct FreeBlock {
  std::size_t dim{0};
};

using ProxBlockKind = std::variant<BallBlock, BoxBlock, L1EpigraphBlock, FreeBlock>;

struct ProxBlock {
  ProxBlockKind kind;

  std::size_t u_dim() const;
  std::size_t v_dim() const;
};

// --- LMO-capable block --------------------------------------------------------

/// {(x, v): ||x||_nuc <= v <= vcap}, with linear minimization served by one
/// top-singular-pair computation.
struct NuclearEpigraphBlock {
  std::size_t rows{0};
  std::size_t cols{0};
  double vcap{1.0};
  double lmo_tol{1e-9};
  int lmo_max_iters{1000};
  int lmo_retries{3};
};

struct LmoBlock {
  NuclearEpigraphBlock kind;

  std::size_t u_dim() const { return kind.rows * kind.cols; }
  std::size_t v_dim() const { return 1; }
  /// Frobenius diameter of the u-projection {x: ||x||_nuc <= vcap}.
  double diameter() const { return 2.0 * kind.vcap; }
};

struct LmoCounter {
  long calls{0};
};

// --- elementary prox / lmo operations ----------------------------------------

/// argmin_{||s|| <= radius} <eta, s> + 1/2 ||s - center||^2,
/// i.e. the ball projection of center - eta.
Vec prox_euclidean_ball(const Vec& center, const Vec& eta, double radius);

struct L1EpigraphPoint {
  Vec y;
  double v{0.0};
};

/// argmin_{||y||_1 <= v} 1/2 ||y - a||^2 + alpha * v: componentwise
/// soft-threshold of a at alpha, with v = ||y||_1.
L1EpigraphPoint prox_l1_epigraph(const Vec& a, double alpha);

/// Euclidean projection onto {||y||_1 <= radius}.
Vec project_l1_ball(const Vec& a, double radius);

struct LmoResult {
  bool zero{true};   // origin atom (x = 0, v = 0)
  Vec left;          // unit, length rows (when !zero)
  Vec right;         // unit, length cols (when !zero)
  double v{0.0};     // vcap when !zero
  double objective{0.0};
  double sigma{0.0};  // Rayleigh value of the pair used
  int power_iterations{0};

  /// out += weight * x where x = -v * left * right^T (no-op for zero atoms).
  void add_scaled(double weight, std::span<double> out, std::size_t cols) const;
};

class PowerIterationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Minimizer of <eta, x> + alpha * v over the truncated nuclear epigraph:
/// origin when sigma_max(eta) <= alpha (ties break toward the origin),
/// otherwise x = -vcap * u1 v1^T, v = vcap.
LmoResult lmo_nuclear_epigraph(ConstMatrixView eta, double alpha,
                               const NuclearEpigraphBlock& block, std::uint64_t seed,
                               LmoCounter* counter = nullptr);

// --- Bregman distance ----------------------------------------------------------

/// Euclidean distance-generating function omega(u) = 1/2 ||u||^2 with its
/// value and gradient cached at the center.
struct BregmanState {
  Vec center;
  double omega_center{0.0};

  explicit BregmanState(Vec u);
  /// V_u(u') = omega(u') - omega(u) - <omega'(u), u' - u>, computed from the
  /// definition (not the collapsed 1/2||u'-u||^2 form).
  double value(const Vec& u_prime) const;
  /// V'_u(u') = omega'(u') - omega'(u)
  Vec gradient(const Vec& u_prime) const;
};

double bregman(const BregmanState& state, const Vec& u_prime);

// --- product domain --------------------------------------------------------------

struct BlockSpan {
  std::size_t u_off{0}, u_dim{0};
  std::size_t v_off{0}, v_dim{0};
};

/// X = X_1 x X_2: an ordered list of prox blocks followed by at most one LMO
/// block. Owns the flat layout used by points, fields, and certificates.
class DomainProduct {
 public:
  DomainProduct() = default;
  DomainProduct(std::vector<ProxBlock> prox, std::optional<LmoBlock> lmo);

  std::size_t u_dim() const { return u_dim_; }
  std::size_t v_dim() const { return v_dim_; }
  const std::vector<ProxBlock>& prox_blocks() const { return prox_; }
  const std::optional<LmoBlock>& lmo_block() const { return lmo_; }
  const BlockSpan& prox_span(std::size_t i) const { return prox_spans_[i]; }
  const BlockSpan& lmo_span() const { return lmo_span_; }

  Point origin_point() const;

  /// Exact prox over every prox block: per block,
  /// min <eta_u, s> + <eta_v, w> + 1/2 ||s - center_u||^2. LMO-block
  /// components of `out` are left untouched.
  void prox_x1(const Point& center, const Vec& eta_u, const Vec& eta_v, Point& out) const;

  /// Exact sup over X of <g_u, u> + <g_v, v>. Infinite for free blocks with a
  /// nonzero coefficient. Nuclear-block sups go through the dense SVD so that
  /// certificates never depend on the power-iteration path.
  double sup_linear(const Vec& g_u, const Vec& g_v) const;

  /// Theta[X] = sup_{[u;v] in X} 1/2 ||u - start||^2, exact per block.
  double theta_bound(const Vec& start_u) const;

  Point sample_feasible(std::mt19937_64& rng) const;
  bool contains(const Point& p, double tol) const;

  /// Pulls a point back into the domain block by block (feasible-making,
  /// not the Euclidean projection).
  void pull_feasible(Point& p) const;

  bool has_lmo() const { return lmo_.has_value(); }
  bool lmo_is_singleton() const { return lmo_ && lmo_->kind.vcap == 0.0; }

 private:
  std::vector<ProxBlock> prox_;
  std::optional<LmoBlock> lmo_;
  std::vector<BlockSpan> prox_spans_;
  BlockSpan lmo_span_;
  std::size_t u_dim_{0}, v_dim_{0};
};

}  // namespace semiprox
