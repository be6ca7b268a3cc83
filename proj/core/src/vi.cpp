#include "semiprox/vi.hpp"

#include <cmath>
#include <stdexcept>

namespace semiprox {

FieldValue eval_field(const SemiViProblem& p, const Point& x) {
  FieldValue f;
  f.fu.assign(p.domain.u_dim(), 0.0);
  p.field_u(x, f.fu);
  f.fv = p.field_v;
  return f;
}

ExecutionProtocol::ExecutionProtocol(const DomainProduct& domain, bool retain_steps)
    : u_dim_(domain.u_dim()),
      v_dim_(domain.v_dim()),
      sum_w_fu_(domain.u_dim(), 0.0),
      sum_w_fv_(domain.v_dim(), 0.0),
      sum_w_xu_(domain.u_dim(), 0.0),
      sum_w_xv_(domain.v_dim(), 0.0),
      retain_(retain_steps) {}

void ExecutionProtocol::append(const Point& x, const Vec& fu, const Vec& fv, double weight) {
  if (weight < 0.0) throw std::invalid_argument("protocol: negative weight");
  if (x.u.size() != u_dim_ || fu.size() != u_dim_ || x.v.size() != v_dim_ ||
      fv.size() != v_dim_)
    throw std::invalid_argument("protocol: dimension mismatch");
  total_weight_ += weight;
  ++count_;
  sum_w_fx_ += weight * (dot(fu, x.u) + dot(fv, x.v));
  axpy(weight, fu, sum_w_fu_);
  axpy(weight, fv, sum_w_fv_);
  axpy(weight, x.u, sum_w_xu_);
  axpy(weight, x.v, sum_w_xv_);
  if (retain_) steps_.push_back({x, fu, fv, weight});
}

Point ExecutionProtocol::averaged() const {
  if (total_weight_ <= 0.0) throw std::logic_error("protocol: no weight accumulated");
  Point p;
  p.u = sum_w_xu_;
  p.v = sum_w_xv_;
  scal(1.0 / total_weight_, p.u);
  scal(1.0 / total_weight_, p.v);
  return p;
}

double ExecutionProtocol::resolution(const DomainProduct& domain) const {
  if (total_weight_ <= 0.0) throw std::logic_error("protocol: no weight accumulated");
  // Res = sum_t lambda_t <F(x_t), x_t> + sup_x <-sum_t lambda_t F(x_t), x>
  Vec neg_fu = sum_w_fu_;
  Vec neg_fv = sum_w_fv_;
  scal(-1.0 / total_weight_, neg_fu);
  scal(-1.0 / total_weight_, neg_fv);
  return sum_w_fx_ / total_weight_ + domain.sup_linear(neg_fu, neg_fv);
}

double eps_vi_sampled(const SemiViProblem& p, const Point& x, int n_samples,
                      std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double best = 0.0;
  for (int s = 0; s < n_samples; ++s) {
    Point y = p.domain.sample_feasible(rng);
    FieldValue f = eval_field(p, y);
    double val = 0.0;
    for (std::size_t i = 0; i < x.u.size(); ++i) val += f.fu[i] * (x.u[i] - y.u[i]);
    for (std::size_t i = 0; i < x.v.size(); ++i) val += f.fv[i] * (x.v[i] - y.v[i]);
    best = std::max(best, val);
  }
  return best;
}

double eps_sad(const SaddleModel& model, const Point& x) { return model.eps_sad(x); }

double monotonicity_probe(const SemiViProblem& p, int n_samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double worst = std::numeric_limits<double>::infinity();
  for (int s = 0; s < n_samples; ++s) {
    Point x = p.domain.sample_feasible(rng);
    Point y = p.domain.sample_feasible(rng);
    FieldValue fx = eval_field(p, x);
    FieldValue fy = eval_field(p, y);
    double val = 0.0;
    for (std::size_t i = 0; i < x.u.size(); ++i)
      val += (fx.fu[i] - fy.fu[i]) * (x.u[i] - y.u[i]);
    // F_v is constant, so the v-terms cancel
    worst = std::min(worst, val);
  }
  return worst;
}

double smoothness_probe(const SemiViProblem& p, int n_samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double worst = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < n_samples; ++s) {
    Point x = p.domain.sample_feasible(rng);
    Point y = p.domain.sample_feasible(rng);
    FieldValue fx = eval_field(p, x);
    FieldValue fy = eval_field(p, y);
    Vec d(fx.fu.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = fx.fu[i] - fy.fu[i];
    Vec du(x.u.size());
    for (std::size_t i = 0; i < du.size(); ++i) du[i] = x.u[i] - y.u[i];
    worst = std::max(worst, nrm2(d) - p.lipschitz_l * nrm2(du) - p.lipschitz_m);
  }
  return worst;
}

double estimate_operator_norm(const std::function<void(const Vec&, Vec&)>& apply,
                              std::size_t dim, int iters, std::uint64_t seed) {
  if (dim == 0) return 0.0;
  std::mt19937_64 rng(seed);
  Vec z = random_unit_vector(dim, rng);
  Vec sz(dim), w(dim);

  // Power iteration on S^T S = -S S for skew S. The linear part of every
  // convex-concave saddle field is skew, which is the only case this
  // routine is used for.
  double norm_sq = 0.0;
  for (int k = 0; k < iters; ++k) {
    apply(z, sz);
    apply(sz, w);
    for (std::size_t i = 0; i < dim; ++i) w[i] = -w[i];
    double nn = nrm2(w);
    if (nn == 0.0) return 0.0;
    norm_sq = nn;
    for (std::size_t i = 0; i < dim; ++i) z[i] = w[i] / nn;
  }
  return std::sqrt(norm_sq);
}

double estimate_field_lipschitz(const SemiViProblem& p, int iters, std::uint64_t seed) {
  const std::size_t dim = p.domain.u_dim();
  Point zero = p.domain.origin_point();
  Vec f0 = p.eval_field_u(zero);
  auto apply = [&](const Vec& z, Vec& out) {
    Point x = p.domain.origin_point();
    x.u = z;
    out.assign(dim, 0.0);
    p.field_u(x, out);
    for (std::size_t i = 0; i < dim; ++i) out[i] -= f0[i];
  };
  return estimate_operator_norm(apply, dim, iters, seed);
}

}  // namespace semiprox
