#include "djam/experiment.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>

#include "djam/errors.hpp"
#include "djam/rng.hpp"

namespace djam {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr int kMaxTopologyAttempts = 1000;
constexpr int kMaxInstanceAttempts = 100;
constexpr double kOracleTol = 1e-13;
constexpr long long kOracleMaxSweeps = 1000000;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &pos);
  } catch (const std::exception&) {
    throw ConfigError("key `" + key + "`: cannot parse number from `" + value +
                      "`");
  }
  if (pos != value.size()) {
    throw ConfigError("key `" + key + "`: trailing content in `" + value + "`");
  }
  return v;
}

long long parse_int(const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(value, &pos);
  } catch (const std::exception&) {
    throw ConfigError("key `" + key + "`: cannot parse integer from `" + value +
                      "`");
  }
  if (pos != value.size()) {
    throw ConfigError("key `" + key + "`: trailing content in `" + value + "`");
  }
  return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(value, &pos);
  } catch (const std::exception&) {
    throw ConfigError("key `" + key + "`: cannot parse seed from `" + value +
                      "`");
  }
  if (pos != value.size()) {
    throw ConfigError("key `" + key + "`: trailing content in `" + value + "`");
  }
  return static_cast<std::uint64_t>(v);
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::set<std::string> seen;
  std::string init_policy = "zeros";
  double init_constant = 0.0;
  bool have_init_constant = false;

  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) +
                        ": expected `key = value`");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError("line " + std::to_string(lineno) +
                        ": empty key or value");
    }
    if (!seen.insert(key).second) {
      throw ConfigError("duplicate key `" + key + "`");
    }

    if (key == "n") {
      cfg.n = static_cast<int>(parse_int(key, value));
    } else if (key == "topology.radius") {
      cfg.topology_radius = parse_double(key, value);
    } else if (key == "trials") {
      cfg.trials = parse_int(key, value);
    } else if (key == "rounds") {
      cfg.rounds = parse_int(key, value);
    } else if (key == "noise.base") {
      cfg.noise.base = parse_double(key, value);
    } else if (key == "noise.outlier_prob") {
      cfg.noise.outlier_prob = parse_double(key, value);
    } else if (key == "noise.outlier_scale") {
      cfg.noise.outlier_scale = parse_double(key, value);
    } else if (key == "huber.delta") {
      cfg.huber_delta = parse_double(key, value);
    } else if (key == "admm.rhos") {
      cfg.admm_rhos.clear();
      std::istringstream items(value);
      std::string item;
      while (std::getline(items, item, ',')) {
        item = trim(item);
        if (item.empty()) {
          throw ConfigError("key `admm.rhos`: empty list entry");
        }
        cfg.admm_rhos.push_back(parse_double(key, item));
      }
      if (cfg.admm_rhos.empty()) {
        throw ConfigError("key `admm.rhos`: empty list");
      }
    } else if (key == "init.policy") {
      init_policy = value;
    } else if (key == "init.constant") {
      init_constant = parse_double(key, value);
      have_init_constant = true;
    } else if (key == "seed.instance") {
      cfg.seed_instance = parse_u64(key, value);
    } else if (key == "seed.trials") {
      cfg.seed_trials = parse_u64(key, value);
    } else if (key == "trace.trials") {
      cfg.trace_trials = parse_int(key, value);
    } else if (key == "algorithm") {
      if (value == "djam") {
        cfg.algorithm = Algorithm::Djam;
      } else if (value == "admm") {
        cfg.algorithm = Algorithm::Admm;
      } else if (value == "both") {
        cfg.algorithm = Algorithm::Both;
      } else {
        throw ConfigError("key `algorithm`: expected djam, admm or both, got `" +
                          value + "`");
      }
    } else {
      throw ConfigError("unknown key `" + key + "`");
    }
  }

  if (init_policy == "zeros") {
    if (have_init_constant) {
      throw ConfigError("init.constant given but init.policy is zeros");
    }
    cfg.init = InitPolicy::zeros();
  } else if (init_policy == "constant") {
    cfg.init = InitPolicy::constant_value(init_constant);
  } else {
    throw ConfigError("init.policy must be zeros or constant, got `" +
                      init_policy + "`");
  }

  if (cfg.n < 1) throw ConfigError("n must be >= 1");
  if (!(cfg.topology_radius > 0.0)) {
    throw ConfigError("topology.radius must be positive");
  }
  if (cfg.trials < 1) throw ConfigError("trials must be >= 1");
  if (cfg.rounds < 0) throw ConfigError("rounds must be >= 0");
  if (!(cfg.noise.base > 0.0)) throw ConfigError("noise.base must be positive");
  if (cfg.noise.outlier_prob < 0.0 || cfg.noise.outlier_prob > 1.0) {
    throw ConfigError("noise.outlier_prob must lie in [0, 1]");
  }
  if (!(cfg.noise.outlier_scale > 0.0)) {
    throw ConfigError("noise.outlier_scale must be positive");
  }
  if (!(cfg.huber_delta > 0.0)) throw ConfigError("huber.delta must be positive");
  for (double rho : cfg.admm_rhos) {
    if (!(rho > 0.0)) throw ConfigError("admm.rhos entries must be positive");
  }
  if (cfg.trace_trials < 0) throw ConfigError("trace.trials must be >= 0");
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

namespace {

// Positions are redrawn wholesale until the radius graph is connected.
std::vector<WeightedEdge> geometric_edges(
    const std::vector<std::pair<double, double>>& pts, double radius) {
  std::vector<WeightedEdge> edges;
  const int n = static_cast<int>(pts.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double dx = pts[i].first - pts[j].first;
      const double dy = pts[i].second - pts[j].second;
      if (dx * dx + dy * dy <= radius * radius) {
        edges.push_back({i, j, 1.0});
      }
    }
  }
  return edges;
}

bool connected(int n, const std::vector<WeightedEdge>& edges) {
  std::vector<std::vector<int>> adj(n);
  for (const auto& e : edges) {
    adj[e.i].push_back(e.j);
    adj[e.j].push_back(e.i);
  }
  std::vector<char> vis(n, 0);
  std::vector<int> stack{0};
  vis[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int v : adj[u]) {
      if (!vis[v]) {
        vis[v] = 1;
        ++count;
        stack.push_back(v);
      }
    }
  }
  return count == n;
}

}  // namespace

FieldInstance generate_instance(const ExperimentConfig& cfg,
                                std::uint64_t instance_seed) {
  const int n = cfg.n;
  Rng rng(instance_seed);

  // Topology: n points in the unit square, edges within the radius.
  std::vector<std::pair<double, double>> pts(n);
  std::vector<WeightedEdge> edges;
  bool ok = false;
  for (int attempt = 0; attempt < kMaxTopologyAttempts; ++attempt) {
    for (auto& pt : pts) {
      pt.first = rng.uniform();
      pt.second = rng.uniform();
    }
    edges = geometric_edges(pts, cfg.topology_radius);
    if (connected(n, edges)) {
      ok = true;
      break;
    }
  }
  if (!ok) {
    throw InvalidTopology("no connected geometric graph on " +
                          std::to_string(n) + " agents with radius " +
                          std::to_string(cfg.topology_radius) + " after " +
                          std::to_string(kMaxTopologyAttempts) + " attempts");
  }

  // Coupling weights and prior diagonal, uniform on [0.5, 1.5]; the implied
  // precision (weighted Laplacian + diagonal) is positive definite by
  // construction.
  for (auto& e : edges) {
    e.weight = rng.uniform(0.5, 1.5);
  }
  std::vector<double> sigma(n);
  for (double& s : sigma) {
    s = rng.uniform(0.5, 1.5);
  }

  Network net = Network::build(n, 1, edges);

  Eigen::MatrixXd precision = Eigen::MatrixXd::Zero(n, n);
  for (int e = 0; e < net.num_edges(); ++e) {
    const Edge& ed = net.edges()[e];
    const double w = net.edge_weight(e);
    precision(ed.i, ed.i) += w;
    precision(ed.j, ed.j) += w;
    precision(ed.i, ed.j) -= w;
    precision(ed.j, ed.i) -= w;
  }
  for (int i = 0; i < n; ++i) {
    precision(i, i) += sigma[i];
  }

  // theta ~ N(0, precision^{-1}): with precision = L L^T, solving
  // L^T theta = z for z ~ N(0, I) gives the right covariance.
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) {
    throw FactorizationFailure(
        "prior precision is not positive definite (unexpected by construction)");
  }
  Eigen::VectorXd z(n);
  for (int i = 0; i < n; ++i) {
    z[i] = rng.normal();
  }
  const Eigen::VectorXd theta =
      llt.matrixU().solve(z);

  std::vector<double> theta_true(n);
  std::vector<double> y(n);
  for (int i = 0; i < n; ++i) {
    theta_true[i] = theta[i];
    const double scale = rng.uniform() < cfg.noise.outlier_prob
                             ? cfg.noise.outlier_scale
                             : cfg.noise.base;
    y[i] = theta_true[i] + scale * rng.normal();
  }

  FieldInstance inst{std::move(net), std::move(sigma), std::move(theta_true),
                     std::move(y),   cfg.huber_delta,  cfg.noise,
                     std::move(pts)};
  return inst;
}

FieldInstance generate_instance(const ExperimentConfig& cfg) {
  return generate_instance(cfg, cfg.seed_instance);
}

LossList instance_losses(const FieldInstance& inst) {
  LossList losses;
  losses.reserve(inst.y.size());
  for (std::size_t i = 0; i < inst.y.size(); ++i) {
    losses.push_back(std::make_shared<HuberFieldLoss>(
        inst.y[i], inst.sigma_diag[i], inst.delta));
  }
  return losses;
}

std::vector<double> relative_error_series(
    const std::vector<std::vector<Eigen::VectorXd>>& own_models_per_round,
    const std::vector<Eigen::VectorXd>& theta_star) {
  const std::size_t n = theta_star.size();
  std::vector<double> norms(n);
  for (std::size_t i = 0; i < n; ++i) {
    norms[i] = theta_star[i].norm();
    if (norms[i] == 0.0) {
      throw ZeroNormSolutionComponent(
          "relative error is undefined: ||theta_star|| of agent " +
          std::to_string(i) + " is zero");
    }
  }
  std::vector<double> out;
  out.reserve(own_models_per_round.size());
  for (const auto& models : own_models_per_round) {
    if (models.size() != n) {
      throw DimensionMismatch("round has " + std::to_string(models.size()) +
                              " own models for " + std::to_string(n) +
                              " agents");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sum += (models[i] - theta_star[i]).norm() / norms[i];
    }
    out.push_back(sum / static_cast<double>(n));
  }
  return out;
}

MonteCarloResult monte_carlo(const ExperimentConfig& cfg) {
  // Instance + reference solution; regenerate (next seed) while the relative
  // error metric is undefined.
  std::vector<std::string> log;
  std::optional<FieldInstance> instance;
  Solution solution;
  std::uint64_t seed = cfg.seed_instance;
  for (int attempt = 0; attempt < kMaxInstanceAttempts && !instance;
       ++attempt) {
    FieldInstance inst = generate_instance(cfg, seed);
    LossList losses = instance_losses(inst);
    Solution sol =
        solve_sync_jacobi(inst.net, losses, kOracleTol, kOracleMaxSweeps);
    bool zero = false;
    for (const auto& v : sol.theta_star) {
      if (v.norm() == 0.0) zero = true;
    }
    if (zero) {
      log.push_back("instance seed " + std::to_string(seed) +
                    " has a zero-norm solution component; regenerated");
      ++seed;
      continue;
    }
    instance = std::move(inst);
    solution = std::move(sol);
  }
  if (!instance) {
    throw ZeroNormSolutionComponent(
        "no instance with a well-defined relative error metric after " +
        std::to_string(kMaxInstanceAttempts) + " regenerations");
  }
  MonteCarloResult result{std::move(*instance), std::move(solution),
                          seed,                 {},
                          {},                   std::move(log)};

  const Network& net = result.instance.net;
  const LossList losses = instance_losses(result.instance);
  const auto& theta_star = result.solution.theta_star;

  struct Variant {
    std::string algorithm;
    double rho;
  };
  std::vector<Variant> variants;
  if (cfg.algorithm == Algorithm::Djam || cfg.algorithm == Algorithm::Both) {
    variants.push_back({"djam", kNaN});
  }
  if (cfg.algorithm == Algorithm::Admm || cfg.algorithm == Algorithm::Both) {
    for (double rho : cfg.admm_rhos) {
      variants.push_back({"admm", rho});
    }
  }

  for (const auto& variant : variants) {
    AggregateSeries series;
    series.algorithm = variant.algorithm;
    series.rho = variant.rho;
    std::vector<double> sum(static_cast<std::size_t>(cfg.rounds), 0.0);
    long long successes = 0;

    for (long long trial = 0; trial < cfg.trials; ++trial) {
      const Schedule sched =
          Schedule::uniform(net, derive_seed(cfg.seed_trials, trial));
      try {
        Trace trace;
        if (variant.algorithm == "djam") {
          SimState state = init_state(net, cfg.init);
          trace = run_djam(state, net, losses, sched, cfg.rounds, &theta_star);
        } else {
          AdmmState state = admm_init(net, losses, variant.rho, cfg.init);
          trace = run_admm(state, net, losses, sched, cfg.rounds, &theta_star);
        }
        for (std::size_t r = 0; r < trace.rows.size(); ++r) {
          sum[r] += trace.rows[r].mean_rel_error;
        }
        ++successes;
        if (trial < cfg.trace_trials) {
          result.sample_traces.push_back(
              {variant.algorithm, variant.rho, trial + 1, std::move(trace)});
        }
      } catch (const Error& err) {
        result.log.push_back(variant.algorithm +
                             (variant.algorithm == "admm"
                                  ? " rho=" + std::to_string(variant.rho)
                                  : "") +
                             " trial " + std::to_string(trial + 1) +
                             " failed: " + err.what());
      }
    }

    series.mean_rel_error.resize(sum.size(), kNaN);
    if (successes > 0) {
      for (std::size_t r = 0; r < sum.size(); ++r) {
        series.mean_rel_error[r] = sum[r] / static_cast<double>(successes);
      }
    }
    result.series.push_back(std::move(series));
  }

  return result;
}

}  // namespace djam
