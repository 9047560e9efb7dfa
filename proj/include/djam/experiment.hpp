#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "djam/admm.hpp"
#include "djam/gossip.hpp"
#include "djam/losses.hpp"
#include "djam/network.hpp"
#include "djam/oracle.hpp"

namespace djam {

/// Measurement noise: nu_i ~ N(0, base^2) with probability 1 - outlier_prob
/// and N(0, outlier_scale^2) with probability outlier_prob. The occasional
/// inflated-scale draws are the outliers the Huber fit is robust against.
struct NoiseConfig {
  double base = 0.1;
  double outlier_prob = 0.1;
  double outlier_scale = 1.0;
};

/// One scalar field-estimation problem over a random geometric network:
/// a zero-mean Gaussian field whose precision matrix is the weighted graph
/// Laplacian of the network plus the positive diagonal sigma_diag (so its
/// off-diagonal sparsity matches the edge set exactly), observed through
/// noisy per-agent measurements y = theta_true + noise. The robust MAP
/// objective decomposes into HuberFieldLoss terms plus the pairwise
/// coupling already carried by the network weights.
struct FieldInstance {
  Network net;
  std::vector<double> sigma_diag;
  std::vector<double> theta_true;
  std::vector<double> y;
  double delta = 0.3;
  NoiseConfig noise;
  /// Unit-square agent locations behind the geometric topology.
  std::vector<std::pair<double, double>> positions;
};

enum class Algorithm { Djam, Admm, Both };

/// Flat key-value experiment configuration (see parse_config for the keys).
struct ExperimentConfig {
  int n = 30;
  // Default radius covers the whole unit square: the dense topology keeps the
  // gossip descent slow enough that the default horizon cuts it near 1e-9
  // instead of the solver floor.
  double topology_radius = 1.5;
  long long trials = 100;
  long long rounds = 200000;
  NoiseConfig noise;
  double huber_delta = 0.3;
  std::vector<double> admm_rhos{0.1, 0.316, 1.0, 3.16, 10.0};
  InitPolicy init;
  std::uint64_t seed_instance = 9;
  std::uint64_t seed_trials = 2;
  /// How many leading trials keep their full per-round trace for export.
  long long trace_trials = 1;
  Algorithm algorithm = Algorithm::Djam;
};

/// Parses the flat `key = value` config text ('#' comments). Known keys:
///   n, topology.radius, trials, rounds, noise.base, noise.outlier_prob,
///   noise.outlier_scale, huber.delta, admm.rhos (comma list), init.policy
///   (zeros | constant), init.constant, seed.instance, seed.trials,
///   trace.trials, algorithm (djam | admm | both).
/// Unknown or duplicate keys are errors.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

/// Deterministically builds the instance from the given seed: geometric
/// topology (positions redrawn until connected), edge weights and prior
/// diagonal uniform on [0.5, 1.5], field sampled from the implied Gaussian,
/// measurements corrupted by the noise mixture.
FieldInstance generate_instance(const ExperimentConfig& cfg,
                                std::uint64_t instance_seed);
FieldInstance generate_instance(const ExperimentConfig& cfg);

/// Per-agent robust losses: agent i gets HuberFieldLoss(y_i, sigma_ii, delta).
LossList instance_losses(const FieldInstance& inst);

/// Per-round mean over agents of ||own_i(t) - theta_star_i|| /
/// ||theta_star_i||. Undefined when some ||theta_star_i|| is zero; the
/// Monte Carlo harness regenerates the instance in that case.
std::vector<double> relative_error_series(
    const std::vector<std::vector<Eigen::VectorXd>>& own_models_per_round,
    const std::vector<Eigen::VectorXd>& theta_star);

/// One algorithm variant's per-round mean relative error, averaged across
/// trials. rho is NaN for the gossip algorithm.
struct AggregateSeries {
  std::string algorithm;
  double rho = 0.0;
  std::vector<double> mean_rel_error;
};

struct SampleTrace {
  std::string algorithm;
  double rho = 0.0;
  long long trial = 0;
  Trace trace;
};

struct MonteCarloResult {
  FieldInstance instance;
  Solution solution;
  std::uint64_t instance_seed_used = 0;
  std::vector<AggregateSeries> series;
  std::vector<SampleTrace> sample_traces;
  std::vector<std::string> log;
};

/// Full harness: one instance (regenerated with the next seed if the metric
/// is undefined), reference solution to residual 1e-13, then `trials`
/// independent runs per selected variant differing only in the edge-draw
/// seed (trial seed = derive_seed(seed.trials, trial index)). Per-trial
/// failures are logged and excluded from the average.
MonteCarloResult monte_carlo(const ExperimentConfig& cfg);

}  // namespace djam
