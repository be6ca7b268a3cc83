#include "semiprox/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace semiprox {

namespace {

std::string fmt_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// thin QR by modified Gram-Schmidt; returns R (k x k), overwrites a with Q
DenseMatrix thin_qr_inplace(DenseMatrix& a) {
  const std::size_t m = a.rows, k = a.cols;
  DenseMatrix r(k, k);
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      double s = 0.0;
      for (std::size_t t = 0; t < m; ++t) s += a(t, i) * a(t, j);
      r(i, j) = s;
      for (std::size_t t = 0; t < m; ++t) a(t, j) -= s * a(t, i);
    }
    double nn = 0.0;
    for (std::size_t t = 0; t < m; ++t) nn += a(t, j) * a(t, j);
    nn = std::sqrt(nn);
    r(j, j) = nn;
    if (nn > 0.0)
      for (std::size_t t = 0; t < m; ++t) a(t, j) /= nn;
  }
  return r;
}

}  // namespace

SyntheticData generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  if (spec.m == 0 || spec.n == 0) throw std::invalid_argument("synthetic: empty dims");
  if (spec.rank == 0 || spec.rank > std::min(spec.m, spec.n))
    throw std::invalid_argument("synthetic: rank out of range");
  if (spec.obs_fraction <= 0.0 || spec.obs_fraction > 1.0)
    throw std::invalid_argument("synthetic: obs_fraction must be in (0, 1]");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  DenseMatrix u(spec.m, spec.rank), v(spec.n, spec.rank);
  for (double& x : u.a) x = gauss(rng);
  for (double& x : v.a) x = gauss(rng);

  // nuclear norm of U V^T from the small factor: svd(R_u R_v^T)
  DenseMatrix qu = u, qv = v;
  DenseMatrix ru = thin_qr_inplace(qu);
  DenseMatrix rv = thin_qr_inplace(qv);
  DenseMatrix core(spec.rank, spec.rank);
  for (std::size_t i = 0; i < spec.rank; ++i)
    for (std::size_t j = 0; j < spec.rank; ++j) {
      double s = 0.0;
      for (std::size_t t = 0; t < spec.rank; ++t) s += ru(i, t) * rv(j, t);
      core(i, j) = s;
    }
  double nuc = nuclear_norm(core);
  if (nuc <= 0.0) throw std::runtime_error("synthetic: degenerate factor draw");

  SyntheticData out;
  out.truth = DenseMatrix(spec.m, spec.n);
  for (std::size_t i = 0; i < spec.m; ++i)
    for (std::size_t j = 0; j < spec.n; ++j) {
      double s = 0.0;
      for (std::size_t t = 0; t < spec.rank; ++t) s += u(i, t) * v(j, t);
      out.truth(i, j) = s / nuc;
    }

  const std::size_t mn = spec.m * spec.n;
  std::size_t k = static_cast<std::size_t>(std::llround(spec.obs_fraction * mn));
  k = std::clamp<std::size_t>(k, 1, mn);
  std::vector<std::size_t> cells(mn);
  for (std::size_t i = 0; i < mn; ++i) cells[i] = i;
  std::shuffle(cells.begin(), cells.end(), rng);
  cells.resize(k);
  std::sort(cells.begin(), cells.end());

  std::vector<ObservedMatrix::Triple> triples;
  triples.reserve(k);
  for (std::size_t c : cells) {
    std::size_t i = c / spec.n, j = c % spec.n;
    double val = out.truth(i, j);
    if (spec.noise > 0.0) val += spec.noise * gauss(rng);
    triples.push_back({i, j, val});
  }
  out.obs = ObservedMatrix(spec.m, spec.n, std::move(triples));
  return out;
}

// --- loaders ---------------------------------------------------------------------

ObservedMatrix load_ratings(const std::string& path, int index_base,
                            std::optional<std::size_t> rows,
                            std::optional<std::size_t> cols) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open ratings file: " + path);

  std::vector<ObservedMatrix::Triple> triples;
  std::set<std::pair<std::size_t, std::size_t>> seen;
  std::size_t max_i = 0, max_j = 0;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    long long ui, it;
    double rating;
    if (line.empty()) continue;
    if (!(ls >> ui >> it >> rating))
      throw ParseError(path + ": malformed line " + std::to_string(lineno));
    ui -= index_base;
    it -= index_base;
    if (ui < 0 || it < 0)
      throw ParseError(path + ": index below base at line " + std::to_string(lineno));
    auto i = static_cast<std::size_t>(ui);
    auto j = static_cast<std::size_t>(it);
    if (!seen.emplace(i, j).second)
      throw ParseError(path + ": duplicate (user, item) at line " +
                       std::to_string(lineno));
    triples.push_back({i, j, rating});
    max_i = std::max(max_i, i);
    max_j = std::max(max_j, j);
  }
  if (triples.empty()) throw ParseError(path + ": no ratings found");

  std::size_t r = rows.value_or(max_i + 1);
  std::size_t c = cols.value_or(max_j + 1);
  if (r < max_i + 1 || c < max_j + 1)
    throw ParseError(path + ": dimension override smaller than the data");
  return ObservedMatrix(r, c, std::move(triples));
}

ObservedMatrix load_edge_list(const std::string& path, std::size_t top_k) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open edge list: " + path);

  std::vector<std::pair<long long, long long>> edges;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '#') continue;
    std::istringstream ls(line);
    long long a, b;
    if (!(ls >> a >> b))
      throw ParseError(path + ": malformed line " + std::to_string(lineno));
    edges.emplace_back(a, b);
  }
  if (edges.empty()) throw ParseError(path + ": no edges found");

  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  std::map<long long, std::size_t> degree;
  for (const auto& [a, b] : edges) {
    ++degree[a];
    ++degree[b];
  }

  std::set<long long> kept;
  if (top_k > 0 && top_k < degree.size()) {
    std::vector<std::pair<long long, std::size_t>> by_degree(degree.begin(),
                                                             degree.end());
    std::sort(by_degree.begin(), by_degree.end(), [](const auto& x, const auto& y) {
      if (x.second != y.second) return x.second > y.second;
      return x.first < y.first;
    });
    for (std::size_t i = 0; i < top_k; ++i) kept.insert(by_degree[i].first);
  } else {
    for (const auto& [id, _] : degree) kept.insert(id);
  }

  std::map<long long, std::size_t> compact;
  for (long long id : kept) compact.emplace(id, compact.size());

  std::vector<ObservedMatrix::Triple> triples;
  for (const auto& [a, b] : edges) {
    auto ia = compact.find(a);
    auto ib = compact.find(b);
    if (ia == compact.end() || ib == compact.end()) continue;
    triples.push_back({ia->second, ib->second, 1.0});
  }
  std::size_t nn = compact.size();
  return ObservedMatrix(nn, nn, std::move(triples));
}

SplitResult split_train_test(const ObservedMatrix& obs, double train_fraction,
                             std::uint64_t seed) {
  if (train_fraction < 0.0 || train_fraction > 1.0)
    throw std::invalid_argument("split: fraction out of range");
  std::vector<std::size_t> idx(obs.count());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);

  auto n_train = static_cast<std::size_t>(
      std::llround(train_fraction * static_cast<double>(obs.count())));
  n_train = std::min(n_train, obs.count());

  auto canonical = [](std::vector<ObservedMatrix::Triple> t) {
    std::sort(t.begin(), t.end(), [](const auto& a, const auto& b) {
      return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
    return t;
  };

  std::vector<ObservedMatrix::Triple> train, test;
  for (std::size_t k = 0; k < obs.count(); ++k) {
    (k < n_train ? train : test).push_back(obs.triples[idx[k]]);
  }
  SplitResult out;
  out.train = ObservedMatrix(obs.rows, obs.cols, canonical(std::move(train)));
  out.test = ObservedMatrix(obs.rows, obs.cols, canonical(std::move(test)));
  return out;
}

// --- configuration ------------------------------------------------------------------

ExperimentConfig parse_config(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }

  ExperimentConfig cfg;
  try {
    const auto& prob = j.at("problem");
    cfg.model = prob.at("model").get<std::string>();
    if (cfg.model != "mc-l2" && cfg.model != "robust-cf" && cfg.model != "link-pred")
      throw ConfigError("unknown model: " + cfg.model);

    const auto& data = prob.at("data");
    if (data.contains("synthetic")) {
      const auto& s = data["synthetic"];
      SyntheticSpec spec;
      spec.m = s.value("m", 64);
      spec.n = s.value("n", 64);
      spec.rank = s.value("rank", 4);
      spec.obs_fraction = s.value("obs_fraction", 0.3);
      spec.noise = s.value("noise", 0.0);
      cfg.synthetic = spec;
    } else if (data.contains("ratings")) {
      cfg.ratings_path = data["ratings"].get<std::string>();
    } else if (data.contains("edges")) {
      cfg.edges_path = data["edges"].get<std::string>();
      cfg.top_k = data.value("top_k", 0);
    } else {
      throw ConfigError("problem.data must name synthetic, ratings, or edges");
    }
    cfg.ratings_index_base = data.value("index_base", 1);

    cfg.lambda = prob.value("lambda", 0.0);
    cfg.lambda2 = prob.value("lambda2", 0.0);
    if (prob.contains("rho")) {
      cfg.rho_initial = prob["rho"].value("initial", 1.0);
      cfg.rho_adaptive = prob["rho"].value("adaptive", true);
    }
    if (prob.contains("vcap") && !prob["vcap"].is_null())
      cfg.vcap = prob["vcap"].get<double>();
    if (prob.contains("vcap_l1") && !prob["vcap_l1"].is_null())
      cfg.vcap_l1 = prob["vcap_l1"].get<double>();
    cfg.train_fraction = prob.value("train_fraction", 0.8);
    if (prob.contains("rating_range")) {
      cfg.rating_lo = prob["rating_range"].at(0).get<double>();
      cfg.rating_hi = prob["rating_range"].at(1).get<double>();
    }

    if (j.contains("solvers")) cfg.solvers = j["solvers"].get<std::vector<std::string>>();
    for (const std::string& s : cfg.solvers)
      if (s != "semi-mp" && s != "semi-spg" && s != "smooth-cg")
        throw ConfigError("unknown solver: " + s);

    if (j.contains("step")) {
      cfg.step_mode = j["step"].value("mode", "inverse-l");
      cfg.step_gamma = j["step"].value("gamma", 0.0);
      cfg.step_safety = j["step"].value("safety", 1.0);
    }
    if (j.contains("inexactness")) {
      cfg.inexact_mode = j["inexactness"].value("mode", "decaying");
      cfg.inexact_c = j["inexactness"].value("c", 0.0);
      cfg.inexact_k = j["inexactness"].value("k", 5);
    }
    if (j.contains("smoothing")) {
      cfg.smoothing_gamma = j["smoothing"].value("gamma", 0.01);
      cfg.smoothing_grid = j["smoothing"].value("grid", false);
    }
    if (j.contains("budget")) {
      cfg.max_iters = j["budget"].value("max_iters", 1000);
      cfg.max_lmo = j["budget"].value("max_lmo_calls", 50000L);
    }
    cfg.seed = j.value("seed", 42);
    cfg.output_dir = j.value("output", "out");
    cfg.record_time = j.value("record_time", true);
    cfg.gap_stride = j.value("gap_stride", 1);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config error: ") + e.what());
  }

  cfg.raw_json = j.dump();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

// --- trace files --------------------------------------------------------------------

TraceFileData make_trace_file(const RunTrace& trace, const ExperimentConfig& cfg) {
  TraceFileData out;
  out.header.push_back("# semiprox-trace v1");
  out.header.push_back("# solver: " + trace.solver);
  out.header.push_back("# model: " + cfg.model);
  out.header.push_back("# seed: " + std::to_string(cfg.seed));
  out.header.push_back("# L: " + fmt_g17(trace.lipschitz_l));
  out.header.push_back("# M: " + fmt_g17(trace.lipschitz_m));
  out.header.push_back("# theta: " + fmt_g17(trace.theta));
  out.header.push_back("# sum_gamma: " + fmt_g17(trace.sum_gamma));
  out.header.push_back("# lmo_total: " + std::to_string(trace.lmo_total));
  out.header.push_back(std::string("# aborted: ") + (trace.aborted ? "1" : "0"));
  if (trace.aborted) out.header.push_back("# abort_reason: " + trace.abort_reason);
  for (const std::string& note : trace.notes) out.header.push_back("# note: " + note);
  out.header.push_back("# config: " + cfg.raw_json);
  out.header.push_back(
      "# columns: iter,elapsed_s,lmo_calls,objective,gap_est,gamma,eps_req,delta_y,"
      "delta_x,sigma");
  out.rows = trace.rows;
  return out;
}

std::string serialize_trace_file(const TraceFileData& data) {
  std::ostringstream ss;
  for (const std::string& h : data.header) ss << h << '\n';
  for (const TraceRow& r : data.rows) {
    ss << r.iter << ',' << fmt_g17(r.elapsed_s) << ',' << r.lmo_calls << ','
       << fmt_g17(r.objective) << ',' << fmt_g17(r.gap_est) << ',' << fmt_g17(r.gamma)
       << ',' << fmt_g17(r.eps_requested) << ',' << fmt_g17(r.delta_y) << ','
       << fmt_g17(r.delta_x) << ',' << fmt_g17(r.sigma) << '\n';
  }
  return ss.str();
}

TraceFileData read_trace_file(std::istream& in) {
  TraceFileData out;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      out.header.push_back(line);
      continue;
    }
    TraceRow r;
    char c;
    std::istringstream ls(line);
    if (!(ls >> r.iter >> c >> r.elapsed_s >> c >> r.lmo_calls >> c >> r.objective >>
          c >> r.gap_est >> c >> r.gamma >> c >> r.eps_requested >> c >> r.delta_y >>
          c >> r.delta_x >> c >> r.sigma))
      throw ParseError("trace: malformed row at line " + std::to_string(lineno));
    out.rows.push_back(r);
  }
  return out;
}

void write_trace_file(const std::string& path, const TraceFileData& data) {
  std::ofstream outf(path, std::ios::binary);
  if (!outf) throw std::runtime_error("cannot write trace file: " + path);
  outf << serialize_trace_file(data);
}

// --- orchestration -------------------------------------------------------------------

namespace {

struct PreparedData {
  ObservedMatrix train;
  ObservedMatrix test;
  double lambda{0.0};
  double lambda2{0.0};
};

PreparedData prepare_data(const ExperimentConfig& cfg) {
  ObservedMatrix all;
  if (cfg.synthetic) {
    all = generate_synthetic(*cfg.synthetic, cfg.seed).obs;
  } else if (cfg.ratings_path) {
    all = load_ratings(*cfg.ratings_path, cfg.ratings_index_base);
  } else if (cfg.edges_path) {
    all = load_edge_list(*cfg.edges_path, cfg.top_k);
  } else {
    throw ConfigError("no data source configured");
  }

  PreparedData out;
  if (cfg.train_fraction < 1.0) {
    SplitResult split = split_train_test(all, cfg.train_fraction, cfg.seed);
    out.train = std::move(split.train);
    out.test = std::move(split.test);
  } else {
    out.train = std::move(all);
  }

  double default_lambda =
      1.0 / std::sqrt(static_cast<double>(std::max(out.train.rows, out.train.cols)));
  out.lambda = cfg.lambda > 0.0 ? cfg.lambda : default_lambda;
  out.lambda2 = cfg.lambda2 > 0.0 ? cfg.lambda2 : default_lambda;
  return out;
}

BuiltProblem build_problem(const ExperimentConfig& cfg, const PreparedData& data) {
  if (cfg.model == "mc-l2") {
    McL2Spec spec{data.train, data.lambda, cfg.vcap};
    return build_mc_l2(spec);
  }
  if (cfg.model == "robust-cf") {
    RobustCfSpec spec{data.train,    data.lambda, cfg.rho_initial,
                      cfg.rho_adaptive, cfg.vcap,    cfg.vcap_l1};
    return build_robust_cf(spec);
  }
  LinkPredSpec spec{data.train,      data.lambda, data.lambda2, cfg.rho_initial,
                    cfg.rho_adaptive, cfg.vcap,    cfg.vcap_l1};
  return build_link_pred(spec);
}

double true_objective(const ExperimentConfig& cfg, const PreparedData& data,
                      ConstMatrixView x) {
  if (cfg.model == "mc-l2") {
    McL2Spec spec{data.train, data.lambda, cfg.vcap};
    return mc_l2_objective(spec, x);
  }
  if (cfg.model == "robust-cf") {
    RobustCfSpec spec{data.train,    data.lambda, cfg.rho_initial,
                      cfg.rho_adaptive, cfg.vcap,    cfg.vcap_l1};
    return robust_cf_objective(spec, x);
  }
  LinkPredSpec spec{data.train,      data.lambda, data.lambda2, cfg.rho_initial,
                    cfg.rho_adaptive, cfg.vcap,    cfg.vcap_l1};
  return link_pred_objective(spec, x);
}

StepPolicy step_policy_from(const ExperimentConfig& cfg) {
  if (cfg.step_mode == "fixed") return StepPolicy::fixed(cfg.step_gamma);
  if (cfg.step_mode == "line-search") return StepPolicy::line_search(cfg.step_safety);
  if (cfg.step_mode != "inverse-l") throw ConfigError("unknown step mode: " + cfg.step_mode);
  return StepPolicy::inverse_l(cfg.step_safety);
}

InexactnessSchedule schedule_from(const ExperimentConfig& cfg, double theta) {
  if (cfg.inexact_mode == "fixed-inner-steps")
    return InexactnessSchedule::fixed_inner_steps(cfg.inexact_k);
  if (cfg.inexact_mode != "decaying")
    throw ConfigError("unknown inexactness mode: " + cfg.inexact_mode);
  return InexactnessSchedule::decaying(cfg.inexact_c > 0.0 ? cfg.inexact_c : theta);
}

SolverSummary summarize(const ExperimentConfig& cfg, const PreparedData& data,
                        const RunTrace& trace, const DenseMatrix& x, double vcap) {
  SolverSummary s;
  s.solver = trace.solver;
  s.iters = trace.rows.empty() ? 0 : trace.rows.back().iter;
  s.lmo_calls = trace.lmo_total;
  s.final_objective = trace.rows.empty() ? std::numeric_limits<double>::quiet_NaN()
                                         : trace.rows.back().objective;
  s.final_objective_true = true_objective(cfg, data, x);
  s.final_gap_est = trace.final_gap_est;
  s.wall_seconds = trace.wall_seconds;
  s.vcap = vcap;
  s.v_final = trace.x_bar.v.empty() ? 0.0 : trace.x_bar.v.back();
  if (cfg.model != "link-pred" && data.test.count() > 0) {
    s.nmae_test = nmae(x, data.test, cfg.rating_lo, cfg.rating_hi);
  } else {
    s.nmae_test = std::numeric_limits<double>::quiet_NaN();
  }
  if (trace.rows.empty()) s.status = "no iterations";
  if (trace.aborted) s.status = "aborted: " + trace.abort_reason;
  return s;
}

}  // namespace

std::string summary_csv(const std::vector<SolverSummary>& rows) {
  std::ostringstream ss;
  ss << "solver,status,iters,lmo_calls,objective,objective_true,gap_est,nmae,"
        "wall_s,vcap,v_final\n";
  for (const SolverSummary& s : rows) {
    std::string status = s.status;
    std::replace(status.begin(), status.end(), ',', ';');
    ss << s.solver << ',' << status << ',' << s.iters << ',' << s.lmo_calls << ','
       << fmt_g17(s.final_objective) << ',' << fmt_g17(s.final_objective_true) << ','
       << fmt_g17(s.final_gap_est) << ',' << fmt_g17(s.nmae_test) << ','
       << fmt_g17(s.wall_seconds) << ',' << fmt_g17(s.vcap) << ','
       << fmt_g17(s.v_final) << '\n';
  }
  return ss.str();
}

std::vector<SolverSummary> run_experiment(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  PreparedData data = prepare_data(cfg);
  fs::create_directories(cfg.output_dir);

  std::vector<SolverSummary> summaries;
  double best_grid_gamma = cfg.smoothing_gamma;
  double best_grid_objective = std::numeric_limits<double>::infinity();

  for (const std::string& solver : cfg.solvers) {
    try {
      if (solver == "semi-mp") {
        BuiltProblem built = build_problem(cfg, data);
        Point origin = built.vi.domain.origin_point();
        double theta = built.vi.theta(origin.u);
        SolveOptions opts;
        opts.seed = cfg.seed;
        opts.record_time = cfg.record_time;
        opts.gap_stride = cfg.gap_stride;
        opts.adapt_rho = cfg.rho_adaptive;
        SolveBudget budget;
        budget.max_iters = cfg.max_iters;
        budget.max_lmo_calls = cfg.max_lmo;
        RunTrace trace = semi_mp_solve(built.vi, step_policy_from(cfg),
                                       schedule_from(cfg, theta), budget, opts);
        DenseMatrix x = built.extract_x(trace.x_bar);
        double vcap = built.vi.domain.lmo_block()->kind.vcap;
        write_trace_file((fs::path(cfg.output_dir) / "semi-mp.csv").string(),
                         make_trace_file(trace, cfg));
        summaries.push_back(summarize(cfg, data, trace, x, vcap));
      } else if (solver == "smooth-cg" || solver == "semi-spg") {
        if (cfg.model == "link-pred")
          throw std::runtime_error(
              "smoothing baselines are not defined for the hinge model");
        CompositeModel model;
        if (cfg.model == "mc-l2") {
          McL2Spec spec{data.train, data.lambda, cfg.vcap};
          model = composite_from_mc_l2(spec);
        } else {
          RobustCfSpec spec{data.train,    data.lambda, cfg.rho_initial,
                            cfg.rho_adaptive, cfg.vcap,    cfg.vcap_l1};
          model = composite_from_robust_cf(spec);
        }

        if (solver == "smooth-cg") {
          std::vector<double> grid =
              cfg.smoothing_grid ? std::vector<double>{1e-3, 1e-2, 1e-1, 1e0}
                                 : std::vector<double>{cfg.smoothing_gamma};
          for (double g : grid) {
            SmoothCgOptions opts;
            opts.max_lmo = cfg.max_lmo;
            opts.record_time = cfg.record_time;
            opts.seed = cfg.seed;
            RunTrace trace = smooth_cg_solve(model, g, opts);
            if (grid.size() > 1) trace.solver = "smooth-cg[g=" + fmt_g17(g) + "]";
            DenseMatrix x(model.rows(), model.cols());
            x.a = trace.x_bar.u;
            std::string fname = grid.size() > 1
                                    ? "smooth-cg-g" + fmt_g17(g) + ".csv"
                                    : "smooth-cg.csv";
            write_trace_file((fs::path(cfg.output_dir) / fname).string(),
                             make_trace_file(trace, cfg));
            SolverSummary s = summarize(cfg, data, trace, x, model.vcap);
            if (s.final_objective_true < best_grid_objective) {
              best_grid_objective = s.final_objective_true;
              best_grid_gamma = g;
            }
            summaries.push_back(std::move(s));
          }
        } else {
          double g = cfg.smoothing_grid ? best_grid_gamma : cfg.smoothing_gamma;
          SemiSpgOptions opts;
          opts.max_iters = cfg.max_iters;
          opts.max_lmo = cfg.max_lmo;
          opts.record_time = cfg.record_time;
          opts.seed = cfg.seed;
          InexactnessSchedule sched =
              cfg.inexact_mode == "fixed-inner-steps"
                  ? InexactnessSchedule::fixed_inner_steps(cfg.inexact_k)
                  : InexactnessSchedule::decaying(cfg.inexact_c > 0.0 ? cfg.inexact_c
                                                                      : 1.0);
          RunTrace trace = semi_spg_solve(model, g, sched, opts);
          DenseMatrix x(model.rows(), model.cols());
          x.a = trace.x_bar.u;
          write_trace_file((fs::path(cfg.output_dir) / "semi-spg.csv").string(),
                           make_trace_file(trace, cfg));
          summaries.push_back(summarize(cfg, data, trace, x, model.vcap));
        }
      } else {
        throw ConfigError("unknown solver: " + solver);
      }
    } catch (const std::exception& e) {
      SolverSummary s;
      s.solver = solver;
      s.status = std::string("error: ") + e.what();
      s.final_objective = s.final_objective_true = s.final_gap_est = s.nmae_test =
          std::numeric_limits<double>::quiet_NaN();
      summaries.push_back(std::move(s));
    }
  }

  std::ofstream sf(fs::path(cfg.output_dir) / "summary.csv", std::ios::binary);
  sf << summary_csv(summaries);
  return summaries;
}

ValidationReport validate_trace_file(const std::string& path) {
  ValidationReport report;
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    report.ok = false;
    report.findings.push_back("cannot open file");
    return report;
  }
  std::ostringstream raw;
  raw << in.rdbuf();
  std::istringstream ss(raw.str());
  TraceFileData data;
  try {
    data = read_trace_file(ss);
  } catch (const std::exception& e) {
    report.ok = false;
    report.findings.push_back(std::string("parse: ") + e.what());
    return report;
  }

  if (serialize_trace_file(data) != raw.str()) {
    report.ok = false;
    report.findings.push_back("reload-reserialize is not byte-identical");
  } else {
    report.findings.push_back("reload-reserialize: byte-identical");
  }

  for (std::size_t k = 1; k < data.rows.size(); ++k) {
    if (data.rows[k].iter <= data.rows[k - 1].iter) {
      report.ok = false;
      report.findings.push_back("iter column is not strictly increasing");
      break;
    }
  }
  for (std::size_t k = 1; k < data.rows.size(); ++k) {
    if (data.rows[k].lmo_calls < data.rows[k - 1].lmo_calls) {
      report.ok = false;
      report.findings.push_back("lmo_calls column decreases");
      break;
    }
  }

  auto header_value = [&](const std::string& key) -> std::optional<double> {
    std::string tag = "# " + key + ": ";
    for (const std::string& h : data.header)
      if (h.rfind(tag, 0) == 0) return std::stod(h.substr(tag.size()));
    return std::nullopt;
  };

  if (auto m = header_value("M")) {
    double worst = -std::numeric_limits<double>::infinity();
    for (const TraceRow& r : data.rows)
      worst = std::max(worst, r.sigma - r.gamma * r.gamma * (*m) * (*m));
    if (!data.rows.empty()) {
      if (worst > 1e-9) {
        report.ok = false;
        report.findings.push_back("step condition violated: max(sigma - gamma^2 M^2) = " +
                                  fmt_g17(worst));
      } else {
        report.findings.push_back("step condition holds: max(sigma - gamma^2 M^2) = " +
                                  fmt_g17(worst));
      }
    }
  }

  if (auto theta = header_value("theta")) {
    auto m = header_value("M").value_or(0.0);
    double sg = 0.0, sg2 = 0.0, se = 0.0;
    for (const TraceRow& r : data.rows) {
      sg += r.gamma;
      sg2 += r.gamma * r.gamma;
      se += r.delta_y + r.delta_x;
    }
    if (sg > 0.0) {
      double bound = (*theta + m * m * sg2 + se) / sg;
      report.findings.push_back("accuracy bound from the log: " + fmt_g17(bound));
      if (!data.rows.empty() && !std::isnan(data.rows.back().gap_est) &&
          data.rows.back().gap_est > bound + 1e-9) {
        report.ok = false;
        report.findings.push_back("last gap estimate exceeds the bound");
      }
    }
  }

  return report;
}

}  // namespace semiprox
