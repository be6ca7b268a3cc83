#include "semiprox/domains.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace semiprox {

std::size_t ProxBlock::u_dim() const {
  return std::visit([](const auto& b) { return b.dim; }, kind);
}

std::size_t ProxBlock::v_dim() const {
  return std::holds_alternative<L1EpigraphBlock>(kind) ? 1u : 0u;
}

Vec prox_euclidean_ball(const Vec& center, const Vec& eta, double radius) {
  if (radius <= 0.0) throw std::invalid_argument("prox_euclidean_ball: radius <= 0");
  if (center.size() != eta.size())
    throw std::invalid_argument("prox_euclidean_ball: size mismatch");
  Vec s(center.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = center[i] - eta[i];
  double nn = nrm2(s);
  if (nn > radius) scal(radius / nn, s);
  return s;
}

L1EpigraphPoint prox_l1_epigraph(const Vec& a, double alpha) {
  if (alpha < 0.0) throw std::invalid_argument("prox_l1_epigraph: alpha < 0");
  L1EpigraphPoint out;
  out.y.resize(a.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double m = std::abs(a[i]) - alpha;
    out.y[i] = m > 0.0 ? (a[i] > 0.0 ? m : -m) : 0.0;
    sum += std::abs(out.y[i]);
  }
  out.v = sum;
  return out;
}

Vec project_l1_ball(const Vec& a, double radius) {
  if (radius < 0.0) throw std::invalid_argument("project_l1_ball: radius < 0");
  if (nrm1(a) <= radius) return a;
  // find the soft-threshold level by sorting |a|
  Vec mag(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) mag[i] = std::abs(a[i]);
  std::sort(mag.begin(), mag.end(), std::greater<double>());
  double cum = 0.0, tau = 0.0;
  for (std::size_t k = 0; k < mag.size(); ++k) {
    cum += mag[k];
    double cand = (cum - radius) / static_cast<double>(k + 1);
    if (k + 1 == mag.size() || mag[k + 1] <= cand) {
      tau = cand;
      break;
    }
  }
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    double m = std::abs(a[i]) - tau;
    out[i] = m > 0.0 ? (a[i] > 0.0 ? m : -m) : 0.0;
  }
  return out;
}

void LmoResult::add_scaled(double weight, std::span<double> out, std::size_t cols) const {
  if (zero) return;
  double w = -weight * v;
  for (std::size_t i = 0; i < left.size(); ++i) {
    double wi = w * left[i];
    double* row = out.data() + i * cols;
    for (std::size_t j = 0; j < cols; ++j) row[j] += wi * right[j];
  }
}

LmoResult lmo_nuclear_epigraph(ConstMatrixView eta, double alpha,
                               const NuclearEpigraphBlock& block, std::uint64_t seed,
                               LmoCounter* counter) {
  if (alpha < 0.0) throw std::invalid_argument("lmo_nuclear_epigraph: alpha < 0");
  if (eta.rows != block.rows || eta.cols != block.cols)
    throw std::invalid_argument("lmo_nuclear_epigraph: dimension mismatch");
  if (counter) ++counter->calls;

  LmoResult out;
  if (block.vcap == 0.0) return out;  // singleton domain

  TopPairResult top;
  for (int attempt = 0; attempt <= block.lmo_retries; ++attempt) {
    top = top_singular_pair(eta, block.lmo_tol, block.lmo_max_iters, seed + attempt);
    if (top.converged) break;
  }
  if (!top.converged) throw PowerIterationError("lmo: power iteration did not converge");

  out.sigma = top.pair.sigma;
  out.power_iterations = top.iterations;
  if (top.pair.sigma <= alpha) return out;  // ties break toward the origin

  out.zero = false;
  out.left = top.pair.left;
  out.right = top.pair.right;
  out.v = block.vcap;
  out.objective = block.vcap * (alpha - top.pair.sigma);
  return out;
}

BregmanState::BregmanState(Vec u) : center(std::move(u)) {
  omega_center = 0.5 * dot(center, center);
}

double BregmanState::value(const Vec& u_prime) const {
  if (u_prime.size() != center.size())
    throw std::invalid_argument("bregman: dimension mismatch");
  double omega_prime = 0.5 * dot(u_prime, u_prime);
  double cross = 0.0;
  for (std::size_t i = 0; i < center.size(); ++i)
    cross += center[i] * (u_prime[i] - center[i]);
  return omega_prime - omega_center - cross;
}

Vec BregmanState::gradient(const Vec& u_prime) const {
  Vec g(u_prime.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = u_prime[i] - center[i];
  return g;
}

double bregman(const BregmanState& state, const Vec& u_prime) { return state.value(u_prime); }

DomainProduct::DomainProduct(std::vector<ProxBlock> prox, std::optional<LmoBlock> lmo)
    : prox_(std::move(prox)), lmo_(std::move(lmo)) {
  std::size_t u = 0, v = 0;
  for (const ProxBlock& b : prox_) {
    prox_spans_.push_back({u, b.u_dim(), v, b.v_dim()});
    u += b.u_dim();
    v += b.v_dim();
  }
  if (lmo_) {
    lmo_span_ = {u, lmo_->u_dim(), v, lmo_->v_dim()};
    u += lmo_->u_dim();
    v += lmo_->v_dim();
  }
  u_dim_ = u;
  v_dim_ = v;
}

Point DomainProduct::origin_point() const {
  Point p;
  p.u.assign(u_dim_, 0.0);
  p.v.assign(v_dim_, 0.0);
  return p;
}

namespace {

std::span<const double> slice(const Vec& x, std::size_t off, std::size_t n) {
  return {x.data() + off, n};
}

std::span<double> slice(Vec& x, std::size_t off, std::size_t n) {
  return {x.data() + off, n};
}

}  // namespace

void DomainProduct::prox_x1(const Point& center, const Vec& eta_u, const Vec& eta_v,
                            Point& out) const {
  if (center.u.size() != u_dim_ || eta_u.size() != u_dim_ || eta_v.size() != v_dim_)
    throw std::invalid_argument("prox_x1: dimension mismatch");
  out.u.resize(u_dim_);
  out.v.resize(v_dim_);
  for (std::size_t bi = 0; bi < prox_.size(); ++bi) {
    const BlockSpan& sp = prox_spans_[bi];
    auto c = slice(center.u, sp.u_off, sp.u_dim);
    auto e = slice(eta_u, sp.u_off, sp.u_dim);
    Vec a(sp.u_dim);
    for (std::size_t i = 0; i < sp.u_dim; ++i) a[i] = c[i] - e[i];

    std::visit(
        [&](const auto& blk) {
          using T = std::decay_t<decltype(blk)>;
          auto o = slice(out.u, sp.u_off, sp.u_dim);
          if constexpr (std::is_same_v<T, BallBlock>) {
            double nn = nrm2(a);
            double f = (nn > blk.radius) ? blk.radius / nn : 1.0;
            for (std::size_t i = 0; i < sp.u_dim; ++i) o[i] = f * a[i];
          } else if constexpr (std::is_same_v<T, BoxBlock>) {
            for (std::size_t i = 0; i < sp.u_dim; ++i)
              o[i] = std::clamp(a[i], blk.lo, blk.hi);
          } else if constexpr (std::is_same_v<T, FreeBlock>) {
            for (std::size_t i = 0; i < sp.u_dim; ++i) o[i] = a[i];
          } else if constexpr (std::is_same_v<T, L1EpigraphBlock>) {
            double alpha = eta_v[sp.v_off];
            if (alpha >= 0.0) {
              L1EpigraphPoint r = prox_l1_epigraph(a, alpha);
              if (r.v > blk.vcap) {
                Vec y = project_l1_ball(a, blk.vcap);
                std::copy(y.begin(), y.end(), o.begin());
                out.v[sp.v_off] = blk.vcap;
              } else {
                std::copy(r.y.begin(), r.y.end(), o.begin());
                out.v[sp.v_off] = r.v;
              }
            } else {
              // negative linear coefficient drives v to the cap
              Vec y = project_l1_ball(a, blk.vcap);
              std::copy(y.begin(), y.end(), o.begin());
              out.v[sp.v_off] = blk.vcap;
            }
          }
        },
        prox_[bi].kind);
  }
}

double DomainProduct::sup_linear(const Vec& g_u, const Vec& g_v) const {
  if (g_u.size() != u_dim_ || g_v.size() != v_dim_)
    throw std::invalid_argument("sup_linear: dimension mismatch");
  double total = 0.0;
  for (std::size_t bi = 0; bi < prox_.size(); ++bi) {
    const BlockSpan& sp = prox_spans_[bi];
    auto g = slice(g_u, sp.u_off, sp.u_dim);
    total += std::visit(
        [&](const auto& blk) -> double {
          using T = std::decay_t<decltype(blk)>;
          if constexpr (std::is_same_v<T, BallBlock>) {
            return blk.radius * nrm2(g);
          } else if constexpr (std::is_same_v<T, BoxBlock>) {
            double s = 0.0;
            for (double gi : g) s += std::max(gi * blk.lo, gi * blk.hi);
            return s;
          } else if constexpr (std::is_same_v<T, FreeBlock>) {
            for (double gi : g)
              if (gi != 0.0) return std::numeric_limits<double>::infinity();
            return 0.0;
          } else {  // L1EpigraphBlock
            return blk.vcap * std::max(0.0, nrm_inf(g) + g_v[sp.v_off]);
          }
        },
        prox_[bi].kind);
  }
  if (lmo_) {
    const BlockSpan& sp = lmo_span_;
    ConstMatrixView m(slice(g_u, sp.u_off, sp.u_dim), lmo_->kind.rows, lmo_->kind.cols);
    double smax = (lmo_->kind.vcap > 0.0) ? sigma_max_dense(m) : 0.0;
    total += lmo_->kind.vcap * std::max(0.0, smax + g_v[sp.v_off]);
  }
  return total;
}

double DomainProduct::theta_bound(const Vec& start_u) const {
  if (start_u.size() != u_dim_) throw std::invalid_argument("theta_bound: dimension mismatch");
  double total = 0.0;
  for (std::size_t bi = 0; bi < prox_.size(); ++bi) {
    const BlockSpan& sp = prox_spans_[bi];
    auto s = slice(start_u, sp.u_off, sp.u_dim);
    total += std::visit(
        [&](const auto& blk) -> double {
          using T = std::decay_t<decltype(blk)>;
          if constexpr (std::is_same_v<T, BallBlock>) {
            double d = blk.radius + nrm2(s);
            return 0.5 * d * d;
          } else if constexpr (std::is_same_v<T, BoxBlock>) {
            double acc = 0.0;
            for (double si : s) {
              double d = std::max(blk.hi - si, si - blk.lo);
              acc += d * d;
            }
            return 0.5 * acc;
          } else if constexpr (std::is_same_v<T, FreeBlock>) {
            return blk.dim == 0 ? 0.0 : std::numeric_limits<double>::infinity();
          } else {  // L1EpigraphBlock
            double n2 = dot(s, s);
            return 0.5 * (n2 + blk.vcap * blk.vcap + 2.0 * blk.vcap * nrm_inf(s));
          }
        },
        prox_[bi].kind);
  }
  if (lmo_) {
    const BlockSpan& sp = lmo_span_;
    ConstMatrixView m(slice(start_u, sp.u_off, sp.u_dim), lmo_->kind.rows, lmo_->kind.cols);
    double vcap = lmo_->kind.vcap;
    double smax = (vcap > 0.0) ? sigma_max_dense(m) : 0.0;
    total += 0.5 * (dot(m.a, m.a) + vcap * vcap + 2.0 * vcap * smax);
  }
  return total;
}

Point DomainProduct::sample_feasible(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Point p = origin_point();
  for (std::size_t bi = 0; bi < prox_.size(); ++bi) {
    const BlockSpan& sp = prox_spans_[bi];
    auto o = slice(p.u, sp.u_off, sp.u_dim);
    std::visit(
        [&](const auto& blk) {
          using T = std::decay_t<decltype(blk)>;
          if constexpr (std::is_same_v<T, BallBlock>) {
            Vec d = random_unit_vector(sp.u_dim, rng);
            double r = blk.radius * unif(rng);
            for (std::size_t i = 0; i < sp.u_dim; ++i) o[i] = r * d[i];
          } else if constexpr (std::is_same_v<T, BoxBlock>) {
            for (std::size_t i = 0; i < sp.u_dim; ++i)
              o[i] = blk.lo + (blk.hi - blk.lo) * unif(rng);
          } else if constexpr (std::is_same_v<T, FreeBlock>) {
            Vec g = gaussian_vector(sp.u_dim, rng);
            std::copy(g.begin(), g.end(), o.begin());
          } else {  // L1EpigraphBlock
            double v = blk.vcap * unif(rng);
            Vec g = gaussian_vector(sp.u_dim, rng);
            double n1 = nrm1(g);
            double target = v * unif(rng);
            if (n1 > 0.0)
              for (std::size_t i = 0; i < sp.u_dim; ++i) o[i] = g[i] * target / n1;
            p.v[sp.v_off] = v;
          }
        },
        prox_[bi].kind);
  }
  if (lmo_) {
    const BlockSpan& sp = lmo_span_;
    double vcap = lmo_->kind.vcap;
    double v = vcap * unif(rng);
    if (v > 0.0) {
      Vec g = gaussian_vector(sp.u_dim, rng);
      ConstMatrixView gm(g, lmo_->kind.rows, lmo_->kind.cols);
      double nn = nuclear_norm(gm);
      double target = v * unif(rng);
      auto o = slice(p.u, sp.u_off, sp.u_dim);
      if (nn > 0.0)
        for (std::size_t i = 0; i < sp.u_dim; ++i) o[i] = g[i] * target / nn;
    }
    p.v[sp.v_off] = v;
  }
  return p;
}

void DomainProduct::pull_feasible(Point& p) const {
  for (std::size_t bi = 0; bi < prox_.size(); ++bi) {
    const BlockSpan& sp = prox_spans_[bi];
    auto s = slice(p.u, sp.u_off, sp.u_dim);
    std::visit(
        [&](const auto& blk) {
          using T = std::decay_t<decltype(blk)>;
          if constexpr (std::is_same_v<T, BallBlock>) {
            double nn = nrm2(s);
            if (nn > blk.radius)
              for (double& si : s) si *= blk.radius / nn;
          } else if constexpr (std::is_same_v<T, BoxBlock>) {
            for (double& si : s) si = std::clamp(si, blk.lo, blk.hi);
          } else if constexpr (std::is_same_v<T, L1EpigraphBlock>) {
            double& v = p.v[sp.v_off];
            v = std::clamp(v, 0.0, blk.vcap);
            Vec y(s.begin(), s.end());
            Vec proj = project_l1_ball(y, v);
            std::copy(proj.begin(), proj.end(), s.begin());
          }
        },
        prox_[bi].kind);
  }
  if (lmo_) {
    const BlockSpan& sp = lmo_span_;
    double& v = p.v[sp.v_off];
    v = std::clamp(v, 0.0, lmo_->kind.vcap);
    auto s = slice(p.u, sp.u_off, sp.u_dim);
    ConstMatrixView m(s, lmo_->kind.rows, lmo_->kind.cols);
    double nn = nuclear_norm(m);
    if (nn > v) {
      double f = (nn > 0.0) ? v / nn : 0.0;
      for (double& si : s) si *= f;
    }
  }
}

bool DomainProduct::contains(const Point& p, double tol) const {
  if (p.u.size() != u_dim_ || p.v.size() != v_dim_) return false;
  for (std::size_t bi = 0; bi < prox_.size(); ++bi) {
    const BlockSpan& sp = prox_spans_[bi];
    auto s = slice(p.u, sp.u_off, sp.u_dim);
    bool ok = std::visit(
        [&](const auto& blk) -> bool {
          using T = std::decay_t<decltype(blk)>;
          if constexpr (std::is_same_v<T, BallBlock>) {
            return nrm2(s) <= blk.radius + tol;
          } else if constexpr (std::is_same_v<T, BoxBlock>) {
            for (double si : s)
              if (si < blk.lo - tol || si > blk.hi + tol) return false;
            return true;
          } else if constexpr (std::is_same_v<T, FreeBlock>) {
            return true;
          } else {  // L1EpigraphBlock
            double v = p.v[sp.v_off];
            return nrm1(s) <= v + tol && v <= blk.vcap + tol;
          }
        },
        prox_[bi].kind);
    if (!ok) return false;
  }
  if (lmo_) {
    const BlockSpan& sp = lmo_span_;
    double v = p.v[sp.v_off];
    if (v > lmo_->kind.vcap + tol) return false;
    ConstMatrixView m(slice(p.u, sp.u_off, sp.u_dim), lmo_->kind.rows, lmo_->kind.cols);
    if (nuclear_norm(m) > v + tol) return false;
  }
  return true;
}

}  // namespace semiprox
