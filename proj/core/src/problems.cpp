#include "semiprox/problems.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

namespace semiprox {

namespace {

std::span<const double> uslice(const Point& p, const BlockSpan& sp) {
  return {p.u.data() + sp.u_off, sp.u_dim};
}

DenseMatrix matrix_from_slice(const Point& p, const BlockSpan& sp, std::size_t rows,
                              std::size_t cols) {
  DenseMatrix x(rows, cols);
  std::copy(p.u.begin() + sp.u_off, p.u.begin() + sp.u_off + sp.u_dim, x.a.begin());
  return x;
}

double l2_residual_on_cells(ConstMatrixView x, const ObservedMatrix& obs,
                            const Vec& b, double scale) {
  double s = 0.0;
  for (std::size_t k = 0; k < obs.count(); ++k) {
    double r = scale * x(obs.triples[k].i, obs.triples[k].j) - b[k];
    s += r * r;
  }
  return std::sqrt(s);
}

double l1_risk(ConstMatrixView x, const ObservedMatrix& obs) {
  double s = 0.0;
  for (const auto& t : obs.triples) s += std::abs(x(t.i, t.j) - t.value);
  return obs.count() > 0 ? s / static_cast<double>(obs.count()) : 0.0;
}

double hinge_risk(ConstMatrixView x, const ObservedMatrix& obs) {
  double s = 0.0;
  for (const auto& t : obs.triples)
    s += std::max(0.0, 1.0 - (t.value - 0.5) * x(t.i, t.j));
  return obs.count() > 0 ? s / static_cast<double>(obs.count()) : 0.0;
}

// --- matrix completion, l2 fit -------------------------------------------

class McL2Saddle final : public SaddleModel {
 public:
  McL2Saddle(std::shared_ptr<const McL2Spec> spec, std::shared_ptr<const Vec> b,
             BlockSpan ysp, BlockSpan xsp, double vcap)
      : spec_(std::move(spec)), b_(std::move(b)), ysp_(ysp), xsp_(xsp), vcap_(vcap) {}

  double phi(const Point& p) const override {
    ConstMatrixView x(uslice(p, xsp_), spec_->obs.rows, spec_->obs.cols);
    Vec px = apply_mask(x, spec_->obs);
    auto y = uslice(p, ysp_);
    double s = 0.0;
    for (std::size_t k = 0; k < px.size(); ++k) s += (px[k] - (*b_)[k]) * y[k];
    return s + spec_->lambda * p.v[xsp_.v_off];
  }

  double phi_bar(const Point& p) const override {
    ConstMatrixView x(uslice(p, xsp_), spec_->obs.rows, spec_->obs.cols);
    Vec px = apply_mask(x, spec_->obs);
    axpy(-1.0, *b_, px);
    return nrm2(px) + spec_->lambda * p.v[xsp_.v_off];
  }

  double phi_under(const Point& p) const override {
    auto y = uslice(p, ysp_);
    DenseMatrix sy = scatter(y, spec_->obs);
    double smax = sigma_max_dense(sy);
    double val = -dot(*b_, y);
    return val + std::min(0.0, vcap_ * (spec_->lambda - smax));
  }

 private:
  std::shared_ptr<const McL2Spec> spec_;
  std::shared_ptr<const Vec> b_;
  BlockSpan ysp_, xsp_;
  double vcap_;
};

constexpr std::size_t kDenseNuclearLimit = 1u << 16;  // entries

}  // namespace

BuiltProblem build_mc_l2(const McL2Spec& spec_in) {
  if (spec_in.lambda <= 0.0) throw std::invalid_argument("mc-l2: lambda must be > 0");
  auto spec = std::make_shared<McL2Spec>(spec_in);
  const std::size_t m = spec->obs.rows, n = spec->obs.cols;
  const std::size_t e = spec->obs.count();
  auto b = std::make_shared<const Vec>(spec->obs.values());

  double vcap;
  if (spec->vcap) {
    vcap = *spec->vcap;
  } else {
    // objective-at-zero bound: lambda * v_opt <= ||b||_2
    double by_objective = nrm2(*b) / spec->lambda;
    double by_scatter = std::numeric_limits<double>::infinity();
    if (e > 0 && m * n <= kDenseNuclearLimit)
      by_scatter = nuclear_norm(scatter(*b, spec->obs));
    vcap = 1.2 * std::min(by_objective, by_scatter);
    spec->vcap = vcap;
  }

  DomainProduct dom({ProxBlock{BallBlock{e, 1.0}}},
                    LmoBlock{NuclearEpigraphBlock{m, n, vcap}});
  const BlockSpan ysp = dom.prox_span(0);
  const BlockSpan xsp = dom.lmo_span();

  BuiltProblem out;
  out.vi.name = "mc-l2";
  out.vi.domain = dom;
  out.vi.field_v = {spec->lambda};
  out.vi.lipschitz_l = 1.0;  // operator norm of the observation mask
  out.vi.lipschitz_m = 0.0;

  out.vi.field_u = [spec, b, ysp, xsp, m, n](const Point& p, Vec& fu) {
    std::fill(fu.begin(), fu.end(), 0.0);
    ConstMatrixView x(uslice(p, xsp), m, n);
    Vec px = apply_mask(x, spec->obs);
    for (std::size_t k = 0; k < px.size(); ++k)
      fu[ysp.u_off + k] = (*b)[k] - px[k];
    scatter_add(uslice(p, ysp), spec->obs, 1.0,
                {fu.data() + xsp.u_off, xsp.u_dim});
  };

  out.vi.saddle = std::make_shared<McL2Saddle>(spec, b, ysp, xsp, vcap);
  out.vi.objective_cheap = [spec, b, xsp, m, n](const Point& p) {
    ConstMatrixView x(uslice(p, xsp), m, n);
    return l2_residual_on_cells(x, spec->obs, *b, 1.0) + spec->lambda * p.v[xsp.v_off];
  };
  out.vi.objective_true = [spec, b, xsp, m, n](const Point& p) {
    ConstMatrixView x(uslice(p, xsp), m, n);
    return l2_residual_on_cells(x, spec->obs, *b, 1.0) +
           spec->lambda * nuclear_norm(x);
  };
  out.extract_x = [xsp, m, n](const Point& p) { return matrix_from_slice(p, xsp, m, n); };
  return out;
}

double mc_l2_objective(const McL2Spec& spec, ConstMatrixView x) {
  Vec b = spec.obs.values();
  return l2_residual_on_cells(x, spec.obs, b, 1.0) + spec.lambda * nuclear_norm(x);
}

// --- robust collaborative filtering -----------------------------------------

namespace {

class RobustCfSaddle final : public SaddleModel {
 public:
  RobustCfSaddle(std::shared_ptr<const RobustCfSpec> spec, std::shared_ptr<const Vec> b,
                 std::shared_ptr<const RhoState> rho, BlockSpan ysp, BlockSpan wsp,
                 BlockSpan xsp, double vcap, double vcap_l1)
      : spec_(std::move(spec)),
        b_(std::move(b)),
        rho_(std::move(rho)),
        ysp_(ysp),
        wsp_(wsp),
        xsp_(xsp),
        vcap_(vcap),
        vcap_l1_(vcap_l1) {}

  // residual Ax - b - y on the observed cells
  Vec residual(const Point& p) const {
    ConstMatrixView x(uslice(p, xsp_), spec_->obs.rows, spec_->obs.cols);
    Vec r = apply_mask(x, spec_->obs);
    const double inv_e = 1.0 / static_cast<double>(spec_->obs.count());
    auto y = uslice(p, ysp_);
    for (std::size_t k = 0; k < r.size(); ++k)
      r[k] = inv_e * r[k] - (*b_)[k] - y[k];
    return r;
  }

  double phi(const Point& p) const override {
    Vec r = residual(p);
    return p.v[ysp_.v_off] + spec_->lambda * p.v[xsp_.v_off] +
           rho_->value * dot(r, uslice(p, wsp_));
  }

  double phi_bar(const Point& p) const override {
    Vec r = residual(p);
    return p.v[ysp_.v_off] + spec_->lambda * p.v[xsp_.v_off] + rho_->value * nrm2(r);
  }

  double phi_under(const Point& p) const override {
    const double rho = rho_->value;
    auto w = uslice(p, wsp_);
    // min over (x, v1): lambda v1 + <x, rho A^T w>
    Vec scaled(w.size());
    const double inv_e = 1.0 / static_cast<double>(spec_->obs.count());
    for (std::size_t k = 0; k < w.size(); ++k) scaled[k] = rho * inv_e * w[k];
    DenseMatrix eta = scatter(scaled, spec_->obs);
    double nuc_part = std::min(0.0, vcap_ * (spec_->lambda - sigma_max_dense(eta)));
    // min over (y, v2): v2 - rho <y, w>
    double l1_part = std::min(0.0, vcap_l1_ * (1.0 - rho * nrm_inf(w)));
    return -rho * dot(*b_, w) + nuc_part + l1_part;
  }

 private:
  std::shared_ptr<const RobustCfSpec> spec_;
  std::shared_ptr<const Vec> b_;
  std::shared_ptr<const RhoState> rho_;
  BlockSpan ysp_, wsp_, xsp_;
  double vcap_, vcap_l1_;
};

}  // namespace

BuiltProblem build_robust_cf(const RobustCfSpec& spec_in) {
  if (spec_in.lambda <= 0.0) throw std::invalid_argument("robust-cf: lambda must be > 0");
  if (spec_in.rho_initial <= 0.0)
    throw std::invalid_argument("robust-cf: rho must be > 0");
  if (spec_in.obs.count() == 0)
    throw std::invalid_argument("robust-cf: empty observation set");
  auto spec = std::make_shared<RobustCfSpec>(spec_in);
  const std::size_t m = spec->obs.rows, n = spec->obs.cols;
  const std::size_t e = spec->obs.count();
  const double inv_e = 1.0 / static_cast<double>(e);

  Vec bv = spec->obs.values();
  scal(inv_e, bv);
  auto b = std::make_shared<const Vec>(std::move(bv));

  const double risk_at_zero = nrm1(*b);
  const double vcap = spec->vcap ? *spec->vcap : 1.2 * risk_at_zero / spec->lambda;
  const double vcap_l1 = spec->vcap_l1 ? *spec->vcap_l1 : 1.2 * risk_at_zero;
  spec->vcap = vcap;
  spec->vcap_l1 = vcap_l1;

  DomainProduct dom({ProxBlock{L1EpigraphBlock{e, vcap_l1}}, ProxBlock{BallBlock{e, 1.0}}},
                    LmoBlock{NuclearEpigraphBlock{m, n, vcap}});
  const BlockSpan ysp = dom.prox_span(0);
  const BlockSpan wsp = dom.prox_span(1);
  const BlockSpan xsp = dom.lmo_span();

  auto rho = std::make_shared<RhoState>();
  rho->value = rho->initial = spec->rho_initial;

  // exact operator norm of the rho = 1 linear part: sqrt(1 + sigma(A)^2)
  const double sigma_a = inv_e;
  const double base_norm = std::sqrt(1.0 + sigma_a * sigma_a);

  BuiltProblem out;
  out.vi.name = "robust-cf";
  out.vi.domain = dom;
  out.vi.field_v = {1.0, spec->lambda};
  out.vi.lipschitz_l = spec->rho_initial * base_norm;
  out.vi.lipschitz_m = 0.0;
  out.vi.rho = rho;
  out.vi.recompute_lipschitz = [rho, base_norm]() { return rho->value * base_norm; };
  out.rho_exactness_bound = std::sqrt(static_cast<double>(e));

  out.vi.field_u = [spec, b, rho, ysp, wsp, xsp, m, n, inv_e](const Point& p, Vec& fu) {
    std::fill(fu.begin(), fu.end(), 0.0);
    const double r = rho->value;
    auto y = uslice(p, ysp);
    auto w = uslice(p, wsp);
    ConstMatrixView x(uslice(p, xsp), m, n);
    Vec ax = apply_mask(x, spec->obs);
    scal(inv_e, ax);
    for (std::size_t k = 0; k < y.size(); ++k) {
      fu[ysp.u_off + k] = -r * w[k];
      fu[wsp.u_off + k] = r * (y[k] - ax[k] + (*b)[k]);
    }
    Vec sw(w.size());
    for (std::size_t k = 0; k < w.size(); ++k) sw[k] = r * inv_e * w[k];
    scatter_add(sw, spec->obs, 1.0, {fu.data() + xsp.u_off, xsp.u_dim});
  };

  auto saddle =
      std::make_shared<RobustCfSaddle>(spec, b, rho, ysp, wsp, xsp, vcap, vcap_l1);
  out.vi.saddle = saddle;

  out.vi.objective_cheap = [spec, xsp, m, n](const Point& p) {
    ConstMatrixView x(uslice(p, xsp), m, n);
    return l1_risk(x, spec->obs) + spec->lambda * p.v[xsp.v_off];
  };
  out.vi.objective_true = [spec, xsp, m, n](const Point& p) {
    ConstMatrixView x(uslice(p, xsp), m, n);
    return l1_risk(x, spec->obs) + spec->lambda * nuclear_norm(x);
  };

  out.vi.rho_backprojection_increases = [spec, saddle, rho, ysp, xsp, m, n](
                                            const Point& p) {
    ConstMatrixView x(uslice(p, xsp), m, n);
    double backprojected = l1_risk(x, spec->obs);
    Vec r = saddle->residual(p);
    double current = p.v[ysp.v_off] + rho->value * nrm2(r);
    return backprojected > current + 1e-12;
  };

  out.extract_x = [xsp, m, n](const Point& p) { return matrix_from_slice(p, xsp, m, n); };
  return out;
}

double robust_cf_objective(const RobustCfSpec& spec, ConstMatrixView x) {
  return l1_risk(x, spec.obs) + spec.lambda * nuclear_norm(x);
}

double robust_cf_saddle_value(const RobustCfSpec& spec, ConstMatrixView x, double rho) {
  const double inv_e = 1.0 / static_cast<double>(spec.obs.count());
  Vec c = apply_mask(x, spec.obs);
  for (std::size_t k = 0; k < c.size(); ++k)
    c[k] = inv_e * (c[k] - spec.obs.triples[k].value);
  return box_ball_support(c, 1.0, rho) + spec.lambda * nuclear_norm(x);
}

// --- link prediction -----------------------------------------------------------

namespace {

class LinkPredSaddle final : public SaddleModel {
 public:
  LinkPredSaddle(std::shared_ptr<const LinkPredSpec> spec,
                 std::shared_ptr<const RhoState> rho, BlockSpan zsp, BlockSpan ysp,
                 BlockSpan wsp, BlockSpan xsp, double vcap, double vcap_l1)
      : spec_(std::move(spec)),
        rho_(std::move(rho)),
        zsp_(zsp),
        ysp_(ysp),
        wsp_(wsp),
        xsp_(xsp),
        vcap_(vcap),
        vcap_l1_(vcap_l1) {}

  double phi(const Point& p) const override {
    const double inv_e = 1.0 / static_cast<double>(spec_->obs.count());
    ConstMatrixView x(uslice(p, xsp_), spec_->obs.rows, spec_->obs.cols);
    auto z = uslice(p, zsp_);
    double risk = 0.0;
    for (std::size_t k = 0; k < spec_->obs.count(); ++k) {
      const auto& t = spec_->obs.triples[k];
      risk += z[k] * (1.0 - (t.value - 0.5) * x(t.i, t.j));
    }
    risk *= inv_e;
    double coupling = 0.0;
    auto y = uslice(p, ysp_);
    auto w = uslice(p, wsp_);
    auto xu = uslice(p, xsp_);
    for (std::size_t i = 0; i < w.size(); ++i) coupling += (xu[i] - y[i]) * w[i];
    return risk + spec_->lambda1 * p.v[ysp_.v_off] + spec_->lambda2 * p.v[xsp_.v_off] +
           rho_->value * coupling;
  }

  double phi_bar(const Point& p) const override {
    ConstMatrixView x(uslice(p, xsp_), spec_->obs.rows, spec_->obs.cols);
    auto y = uslice(p, ysp_);
    auto xu = uslice(p, xsp_);
    Vec d(xu.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = xu[i] - y[i];
    return hinge_risk(x, spec_->obs) + spec_->lambda1 * p.v[ysp_.v_off] +
           spec_->lambda2 * p.v[xsp_.v_off] + rho_->value * nrm2(d);
  }

  double phi_under(const Point& p) const override {
    const double rho = rho_->value;
    const double inv_e = 1.0 / static_cast<double>(spec_->obs.count());
    auto z = uslice(p, zsp_);
    auto w = uslice(p, wsp_);
    // eta = rho w - (1/|E|) scatter(s .* z)
    Vec eta(w.begin(), w.end());
    scal(rho, eta);
    Vec sz(z.size());
    for (std::size_t k = 0; k < z.size(); ++k)
      sz[k] = (spec_->obs.triples[k].value - 0.5) * z[k];
    scatter_add(sz, spec_->obs, -inv_e, eta);
    ConstMatrixView eta_m(eta, spec_->obs.rows, spec_->obs.cols);
    double nuc_part =
        std::min(0.0, vcap_ * (spec_->lambda2 - sigma_max_dense(eta_m)));
    double l1_part = std::min(0.0, vcap_l1_ * (spec_->lambda1 - rho * nrm_inf(w)));
    double zsum = 0.0;
    for (double zk : z) zsum += zk;
    return inv_e * zsum + nuc_part + l1_part;
  }

 private:
  std::shared_ptr<const LinkPredSpec> spec_;
  std::shared_ptr<const RhoState> rho_;
  BlockSpan zsp_, ysp_, wsp_, xsp_;
  double vcap_, vcap_l1_;
};

}  // namespace

BuiltProblem build_link_pred(const LinkPredSpec& spec_in) {
  if (spec_in.lambda1 <= 0.0 || spec_in.lambda2 <= 0.0)
    throw std::invalid_argument("link-pred: lambdas must be > 0");
  if (spec_in.obs.count() == 0)
    throw std::invalid_argument("link-pred: empty observation set");
  for (const auto& t : spec_in.obs.triples)
    if (t.value != 0.0 && t.value != 1.0)
      throw std::invalid_argument("link-pred: labels must be 0 or 1");

  auto spec = std::make_shared<LinkPredSpec>(spec_in);
  const std::size_t m = spec->obs.rows, n = spec->obs.cols;
  const std::size_t e = spec->obs.count();
  const std::size_t mn = m * n;
  const double inv_e = 1.0 / static_cast<double>(e);

  // hinge risk at x = 0 is exactly 1
  const double vcap = spec->vcap ? *spec->vcap : 1.2 / spec->lambda2;
  const double vcap_l1 = spec->vcap_l1 ? *spec->vcap_l1 : 1.2 / spec->lambda1;
  spec->vcap = vcap;
  spec->vcap_l1 = vcap_l1;

  DomainProduct dom({ProxBlock{BoxBlock{e, 0.0, 1.0}},
                     ProxBlock{L1EpigraphBlock{mn, vcap_l1}},
                     ProxBlock{BallBlock{mn, 1.0}}},
                    LmoBlock{NuclearEpigraphBlock{m, n, vcap}});
  const BlockSpan zsp = dom.prox_span(0);
  const BlockSpan ysp = dom.prox_span(1);
  const BlockSpan wsp = dom.prox_span(2);
  const BlockSpan xsp = dom.lmo_span();

  auto rho = std::make_shared<RhoState>();
  rho->value = rho->initial = spec->rho_initial;

  BuiltProblem out;
  out.vi.name = "link-pred";
  out.vi.domain = dom;
  out.vi.field_v = {spec->lambda1, spec->lambda2};
  out.vi.lipschitz_m = 0.0;
  out.vi.rho = rho;
  out.rho_exactness_bound = spec->lambda1 * std::sqrt(static_cast<double>(mn));

  auto field = [spec, rho, zsp, ysp, wsp, xsp, m, n, inv_e](const Point& p, Vec& fu) {
    std::fill(fu.begin(), fu.end(), 0.0);
    const double r = rho->value;
    auto z = uslice(p, zsp);
    auto y = uslice(p, ysp);
    auto w = uslice(p, wsp);
    auto xu = uslice(p, xsp);
    ConstMatrixView x(xu, m, n);
    for (std::size_t k = 0; k < spec->obs.count(); ++k) {
      const auto& t = spec->obs.triples[k];
      double s = t.value - 0.5;
      fu[zsp.u_off + k] = inv_e * (s * x(t.i, t.j) - 1.0);
    }
    for (std::size_t i = 0; i < w.size(); ++i) {
      fu[ysp.u_off + i] = -r * w[i];
      fu[wsp.u_off + i] = r * (y[i] - xu[i]);
      fu[xsp.u_off + i] = r * w[i];
    }
    Vec sz(z.size());
    for (std::size_t k = 0; k < z.size(); ++k)
      sz[k] = (spec->obs.triples[k].value - 0.5) * z[k];
    scatter_add(sz, spec->obs, -inv_e, {fu.data() + xsp.u_off, xsp.u_dim});
  };
  out.vi.field_u = field;

  const std::size_t u_dim = dom.u_dim();
  auto lip_estimator = [field, u_dim, zsp, ysp, wsp, xsp, e, mn]() {
    Point zero;
    zero.u.assign(u_dim, 0.0);
    zero.v.assign(2, 0.0);
    Vec f0(u_dim);
    field(zero, f0);
    auto apply = [&](const Vec& zv, Vec& outv) {
      Point q = zero;
      q.u = zv;
      outv.assign(u_dim, 0.0);
      field(q, outv);
      for (std::size_t i = 0; i < u_dim; ++i) outv[i] -= f0[i];
    };
    return 1.001 * estimate_operator_norm(apply, u_dim, 300, 7);
  };
  out.vi.lipschitz_l = lip_estimator();
  out.vi.recompute_lipschitz = lip_estimator;

  auto saddle = std::make_shared<LinkPredSaddle>(spec, rho, zsp, ysp, wsp, xsp, vcap,
                                                 vcap_l1);
  out.vi.saddle = saddle;

  out.vi.objective_cheap = [spec, ysp, xsp, m, n](const Point& p) {
    ConstMatrixView x(uslice(p, xsp), m, n);
    return hinge_risk(x, spec->obs) + spec->lambda1 * p.v[ysp.v_off] +
           spec->lambda2 * p.v[xsp.v_off];
  };
  out.vi.objective_true = [spec, xsp, m, n](const Point& p) {
    ConstMatrixView x(uslice(p, xsp), m, n);
    return hinge_risk(x, spec->obs) + spec->lambda1 * nrm1(uslice(p, xsp)) +
           spec->lambda2 * nuclear_norm(x);
  };

  out.vi.rho_backprojection_increases = [spec, rho, ysp, xsp](const Point& p) {
    auto xu = uslice(p, xsp);
    auto y = uslice(p, ysp);
    Vec d(xu.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = xu[i] - y[i];
    double backprojected = spec->lambda1 * nrm1(xu);
    double current = spec->lambda1 * p.v[ysp.v_off] + rho->value * nrm2(d);
    return backprojected > current + 1e-12;
  };

  out.extract_x = [xsp, m, n](const Point& p) { return matrix_from_slice(p, xsp, m, n); };
  return out;
}

double link_pred_objective(const LinkPredSpec& spec, ConstMatrixView x) {
  return hinge_risk(x, spec.obs) + spec.lambda1 * nrm1(x.a) +
         spec.lambda2 * nuclear_norm(x);
}

double link_pred_saddle_value(const LinkPredSpec& spec, ConstMatrixView x, double rho) {
  Vec c(x.a.begin(), x.a.end());
  return hinge_risk(x, spec.obs) + box_ball_support(c, spec.lambda1, rho) +
         spec.lambda2 * nuclear_norm(x);
}

// --- toy bilinear ball game -------------------------------------------------------

namespace {

class BilinearSaddle final : public SaddleModel {
 public:
  BilinearSaddle(std::shared_ptr<const DenseMatrix> a, double r1, double r2)
      : a_(std::move(a)), r1_(r1), r2_(r2) {}

  double phi(const Point& p) const override {
    double s = 0.0;
    for (std::size_t i = 0; i < a_->rows; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < a_->cols; ++j) acc += (*a_)(i, j) * p.u[a_->rows + j];
      s += p.u[i] * acc;
    }
    return s;
  }

  double phi_bar(const Point& p) const override {
    // sup_{||y|| <= r2} x^T A y = r2 ||A^T x||
    Vec atx(a_->cols, 0.0);
    for (std::size_t i = 0; i < a_->rows; ++i)
      for (std::size_t j = 0; j < a_->cols; ++j) atx[j] += (*a_)(i, j) * p.u[i];
    return r2_ * nrm2(atx);
  }

  double phi_under(const Point& p) const override {
    Vec ay(a_->rows, 0.0);
    for (std::size_t i = 0; i < a_->rows; ++i)
      for (std::size_t j = 0; j < a_->cols; ++j)
        ay[i] += (*a_)(i, j) * p.u[a_->rows + j];
    return -r1_ * nrm2(ay);
  }

 private:
  std::shared_ptr<const DenseMatrix> a_;
  double r1_, r2_;
};

}  // namespace

BuiltProblem make_bilinear_ball_game(const DenseMatrix& a, double r1, double r2) {
  if (r1 <= 0.0 || r2 <= 0.0) throw std::invalid_argument("ball game: radii must be > 0");
  auto am = std::make_shared<const DenseMatrix>(a);
  const std::size_t n1 = a.rows, n2 = a.cols;

  DomainProduct dom({ProxBlock{BallBlock{n1, r1}}, ProxBlock{BallBlock{n2, r2}}},
                    std::nullopt);

  BuiltProblem out;
  out.vi.name = "bilinear-ball-game";
  out.vi.domain = dom;
  out.vi.field_v = {};
  out.vi.lipschitz_l = sigma_max_dense(*am);
  out.vi.lipschitz_m = 0.0;

  out.vi.field_u = [am, n1, n2](const Point& p, Vec& fu) {
    for (std::size_t i = 0; i < n1; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n2; ++j) acc += (*am)(i, j) * p.u[n1 + j];
      fu[i] = acc;
    }
    for (std::size_t j = 0; j < n2; ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n1; ++i) acc += (*am)(i, j) * p.u[i];
      fu[n1 + j] = -acc;
    }
  };

  auto saddle = std::make_shared<BilinearSaddle>(am, r1, r2);
  out.vi.saddle = saddle;
  out.vi.objective_cheap = [saddle](const Point& p) { return saddle->phi_bar(p); };
  out.vi.objective_true = out.vi.objective_cheap;
  return out;
}

// --- shared helpers --------------------------------------------------------------

double nmae(ConstMatrixView x, const ObservedMatrix& heldout, double lo, double hi) {
  if (hi <= lo) throw std::invalid_argument("nmae: invalid rating range");
  if (heldout.count() == 0) throw std::invalid_argument("nmae: empty held-out set");
  if (x.rows != heldout.rows || x.cols != heldout.cols)
    throw std::invalid_argument("nmae: dimension mismatch");
  double s = 0.0;
  for (const auto& t : heldout.triples) s += std::abs(x(t.i, t.j) - t.value);
  return s / (static_cast<double>(heldout.count()) * (hi - lo));
}

double box_ball_support(const Vec& c, double beta, double rho) {
  if (beta < 0.0 || rho < 0.0)
    throw std::invalid_argument("box_ball_support: negative level");
  double norm_box = 0.0;  // ||beta sign(c)||_2 restricted to the support of c
  for (double ci : c)
    if (ci != 0.0) norm_box += beta * beta;
  norm_box = std::sqrt(norm_box);
  if (norm_box <= rho) return beta * nrm1(c);

  // bisection on the ball multiplier: w_i = clip(c_i / mu, +-beta)
  auto norm_at = [&](double mu) {
    double s = 0.0;
    for (double ci : c) {
      double w = std::clamp(ci / mu, -beta, beta);
      s += w * w;
    }
    return std::sqrt(s);
  };
  double mu_lo = 1e-300, mu_hi = std::max(nrm2(c) / std::max(rho, 1e-300), 1e-280);
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (mu_lo + mu_hi);
    if (norm_at(mid) > rho)
      mu_lo = mid;
    else
      mu_hi = mid;
  }
  double val = 0.0;
  for (double ci : c) val += ci * std::clamp(ci / mu_hi, -beta, beta);
  return val;
}

}  // namespace semiprox
