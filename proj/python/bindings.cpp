#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>

#include "djam/admm.hpp"
#include "djam/errors.hpp"
#include "djam/experiment.hpp"
#include "djam/gossip.hpp"
#include "djam/io.hpp"
#include "djam/losses.hpp"
#include "djam/network.hpp"
#include "djam/oracle.hpp"
#include "djam/rng.hpp"

namespace py = pybind11;
using namespace djam;

namespace {

const std::vector<Eigen::VectorXd>* opt_ref(
    const std::optional<std::vector<Eigen::VectorXd>>& v) {
  return v ? &*v : nullptr;
}

}  // namespace

PYBIND11_MODULE(_djam, m) {
  m.doc() = "Asynchronous single-neighbor gossip personalized learning";

  py::register_exception<Error>(m, "DjamError");

  py::class_<Edge>(m, "Edge")
      .def(py::init([](int i, int j) { return Edge{i, j}; }), py::arg("i"),
           py::arg("j"))
      .def_readonly("i", &Edge::i)
      .def_readonly("j", &Edge::j)
      .def("__repr__", [](const Edge& e) {
        return "Edge(" + std::to_string(e.i) + ", " + std::to_string(e.j) + ")";
      });

  py::class_<Network>(m, "Network")
      .def_static(
          "build",
          [](int n, int p, const std::vector<std::tuple<int, int, double>>& es) {
            std::vector<WeightedEdge> edges;
            edges.reserve(es.size());
            for (const auto& [i, j, w] : es) edges.push_back({i, j, w});
            return Network::build(n, p, edges);
          },
          py::arg("n"), py::arg("p"), py::arg("weighted_edges"))
      .def_property_readonly("n", &Network::num_agents)
      .def_property_readonly("p", &Network::dim)
      .def_property_readonly("num_edges", &Network::num_edges)
      .def("edges", &Network::edges)
      .def("has_edge", &Network::has_edge)
      .def("weight", &Network::weight)
      .def("neighbors", &Network::neighbors)
      .def("agent_weight_sum", &Network::agent_weight_sum);

  m.def("parse_edge_list",
        [](const std::string& text) {
          std::vector<std::tuple<int, int, double>> out;
          for (const auto& e : parse_edge_list(text)) {
            out.emplace_back(e.i, e.j, e.weight);
          }
          return out;
        },
        py::arg("text"));

  py::class_<PersonalLoss, std::shared_ptr<PersonalLoss>>(m, "PersonalLoss")
      .def_property_readonly("dim", &PersonalLoss::dim)
      .def("eval", &loss_eval)
      .def("grad", &loss_grad)
      .def_property_readonly("strong_convexity", &PersonalLoss::strong_convexity)
      .def_property_readonly("grad_lipschitz", &PersonalLoss::grad_lipschitz);

  py::class_<QuadraticLoss, PersonalLoss, std::shared_ptr<QuadraticLoss>>(
      m, "QuadraticLoss")
      .def(py::init<Eigen::MatrixXd, Eigen::VectorXd>(), py::arg("A"),
           py::arg("y"))
      .def_property_readonly("A", &QuadraticLoss::A)
      .def_property_readonly("y", &QuadraticLoss::y);

  py::class_<HuberFieldLoss, PersonalLoss, std::shared_ptr<HuberFieldLoss>>(
      m, "HuberFieldLoss")
      .def(py::init<double, double, double>(), py::arg("y"), py::arg("sigma"),
           py::arg("delta"))
      .def_property_readonly("y", &HuberFieldLoss::y)
      .def_property_readonly("sigma", &HuberFieldLoss::sigma)
      .def_property_readonly("delta", &HuberFieldLoss::delta);

  m.def("resolvent", &resolvent, py::arg("loss"), py::arg("w"), py::arg("s"),
        py::arg("tol_rel") = kResolventTol);
  m.def("local_solve", &local_solve, py::arg("net"), py::arg("losses"),
        py::arg("j"), py::arg("neighbor_models"));

  py::class_<InitPolicy>(m, "InitPolicy")
      .def_static("zeros", &InitPolicy::zeros)
      .def_static("constant", &InitPolicy::constant_value, py::arg("c"))
      .def_static("per_agent", &InitPolicy::per_agent_models, py::arg("models"))
      .def_static("per_pair",
                  [](const std::map<std::pair<int, int>, Eigen::VectorXd>& m2) {
                    return InitPolicy::per_pair_entries(m2);
                  },
                  py::arg("entries"));

  py::class_<SimState>(m, "SimState")
      .def_readonly("round", &SimState::round)
      .def("table",
           [](const SimState& st, const Network& net, int i, int k) {
             return table_entry(st, net, i, k);
           },
           py::arg("net"), py::arg("i"), py::arg("k"));

  py::class_<Schedule>(m, "Schedule")
      .def(py::init<const Network&, std::vector<double>, std::uint64_t>(),
           py::arg("net"), py::arg("probs"), py::arg("seed"))
      .def_static("uniform", &Schedule::uniform, py::arg("net"), py::arg("seed"))
      .def_property_readonly("probs", &Schedule::probs)
      .def_property_readonly("seed", &Schedule::seed);

  py::class_<Rng>(m, "Rng")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("uniform", [](Rng& r) { return r.uniform(); })
      .def("normal", [](Rng& r) { return r.normal(); });

  m.def("derive_seed", &derive_seed, py::arg("master"), py::arg("index"));
  m.def("draw_edge", &draw_edge, py::arg("schedule"), py::arg("rng"));

  py::class_<TraceRow>(m, "TraceRow")
      .def_readonly("round", &TraceRow::round)
      .def_readonly("edge_i", &TraceRow::edge_i)
      .def_readonly("edge_j", &TraceRow::edge_j)
      .def_readonly("v", &TraceRow::v)
      .def_readonly("mean_rel_error", &TraceRow::mean_rel_error)
      .def_readonly("epoch", &TraceRow::epoch);

  py::class_<Trace>(m, "Trace")
      .def_readonly("rows", &Trace::rows)
      .def("v_series",
           [](const Trace& t) {
             std::vector<double> out;
             out.reserve(t.rows.size());
             for (const auto& r : t.rows) out.push_back(r.v);
             return out;
           })
      .def("mean_rel_error_series", [](const Trace& t) {
        std::vector<double> out;
        out.reserve(t.rows.size());
        for (const auto& r : t.rows) out.push_back(r.mean_rel_error);
        return out;
      });

  m.def("init_state", &init_state, py::arg("net"),
        py::arg("policy") = InitPolicy::zeros());
  m.def("gossip_round", &gossip_round, py::arg("state"), py::arg("net"),
        py::arg("losses"), py::arg("edge"));
  m.def("own_model", &own_model, py::arg("state"), py::arg("net"),
        py::arg("losses"), py::arg("i"));
  m.def(
      "run_djam",
      [](SimState& state, const Network& net, const LossList& losses,
         const Schedule& sched, long long rounds,
         const std::optional<std::vector<Eigen::VectorXd>>& theta_star) {
        return run_djam(state, net, losses, sched, rounds, opt_ref(theta_star));
      },
      py::arg("state"), py::arg("net"), py::arg("losses"), py::arg("schedule"),
      py::arg("rounds"), py::arg("theta_star") = py::none());
  m.def("max_error", &max_error, py::arg("state"), py::arg("net"),
        py::arg("theta_star"));
  m.def("epoch_boundaries",
        [](const std::vector<std::pair<int, int>>& seq, const Network& net) {
          std::vector<Edge> edges;
          edges.reserve(seq.size());
          for (const auto& [i, j] : seq) edges.push_back({i, j});
          return epoch_boundaries(edges, net);
        },
        py::arg("edge_sequence"), py::arg("net"));
  m.def("contraction_factor", &contraction_factor, py::arg("net"),
        py::arg("losses"));

  py::class_<Solution>(m, "Solution")
      .def_readonly("theta_star", &Solution::theta_star)
      .def_readonly("residual", &Solution::residual)
      .def_readonly("sweeps", &Solution::sweeps);

  m.def("solve_exact_quadratic", &solve_exact_quadratic, py::arg("net"),
        py::arg("losses"));
  m.def("solve_sync_jacobi", &solve_sync_jacobi, py::arg("net"),
        py::arg("losses"), py::arg("tol"), py::arg("max_sweeps"));
  m.def("fixed_point_residual", &fixed_point_residual, py::arg("theta"),
        py::arg("net"), py::arg("losses"));

  py::class_<AdmmState>(m, "AdmmState")
      .def_readonly("theta", &AdmmState::theta)
      .def_readonly("rho", &AdmmState::rho)
      .def_readonly("round", &AdmmState::round);

  m.def("admm_init", &admm_init, py::arg("net"), py::arg("losses"),
        py::arg("rho"), py::arg("policy") = InitPolicy::zeros());
  m.def("admm_round", &admm_round, py::arg("state"), py::arg("net"),
        py::arg("losses"), py::arg("edge"));
  m.def(
      "run_admm",
      [](AdmmState& state, const Network& net, const LossList& losses,
         const Schedule& sched, long long rounds,
         const std::optional<std::vector<Eigen::VectorXd>>& theta_star) {
        return run_admm(state, net, losses, sched, rounds, opt_ref(theta_star));
      },
      py::arg("state"), py::arg("net"), py::arg("losses"), py::arg("schedule"),
      py::arg("rounds"), py::arg("theta_star") = py::none());
  m.def("admm_feasibility", &admm_feasibility, py::arg("state"), py::arg("net"));

  py::class_<NoiseConfig>(m, "NoiseConfig")
      .def(py::init<>())
      .def_readwrite("base", &NoiseConfig::base)
      .def_readwrite("outlier_prob", &NoiseConfig::outlier_prob)
      .def_readwrite("outlier_scale", &NoiseConfig::outlier_scale);

  py::enum_<Algorithm>(m, "Algorithm")
      .value("DJAM", Algorithm::Djam)
      .value("ADMM", Algorithm::Admm)
      .value("BOTH", Algorithm::Both);

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_readwrite("n", &ExperimentConfig::n)
      .def_readwrite("topology_radius", &ExperimentConfig::topology_radius)
      .def_readwrite("trials", &ExperimentConfig::trials)
      .def_readwrite("rounds", &ExperimentConfig::rounds)
      .def_readwrite("noise", &ExperimentConfig::noise)
      .def_readwrite("huber_delta", &ExperimentConfig::huber_delta)
      .def_readwrite("admm_rhos", &ExperimentConfig::admm_rhos)
      .def_readwrite("seed_instance", &ExperimentConfig::seed_instance)
      .def_readwrite("seed_trials", &ExperimentConfig::seed_trials)
      .def_readwrite("trace_trials", &ExperimentConfig::trace_trials)
      .def_readwrite("algorithm", &ExperimentConfig::algorithm);

  m.def("parse_config", &parse_config, py::arg("text"));
  m.def("load_config_file", &load_config_file, py::arg("path"));

  py::class_<FieldInstance>(m, "FieldInstance")
      .def_readonly("net", &FieldInstance::net)
      .def_readonly("sigma_diag", &FieldInstance::sigma_diag)
      .def_readonly("theta_true", &FieldInstance::theta_true)
      .def_readonly("y", &FieldInstance::y)
      .def_readonly("delta", &FieldInstance::delta)
      .def_readonly("positions", &FieldInstance::positions);

  m.def("generate_instance",
        py::overload_cast<const ExperimentConfig&>(&generate_instance),
        py::arg("config"));
  m.def("generate_instance",
        py::overload_cast<const ExperimentConfig&, std::uint64_t>(
            &generate_instance),
        py::arg("config"), py::arg("instance_seed"));
  m.def("instance_losses", &instance_losses, py::arg("instance"));
  m.def("relative_error_series", &relative_error_series,
        py::arg("own_models_per_round"), py::arg("theta_star"));

  py::class_<AggregateSeries>(m, "AggregateSeries")
      .def_readonly("algorithm", &AggregateSeries::algorithm)
      .def_readonly("rho", &AggregateSeries::rho)
      .def_readonly("mean_rel_error", &AggregateSeries::mean_rel_error);

  py::class_<SampleTrace>(m, "SampleTrace")
      .def_readonly("algorithm", &SampleTrace::algorithm)
      .def_readonly("rho", &SampleTrace::rho)
      .def_readonly("trial", &SampleTrace::trial)
      .def_readonly("trace", &SampleTrace::trace);

  py::class_<MonteCarloResult>(m, "MonteCarloResult")
      .def_readonly("instance", &MonteCarloResult::instance)
      .def_readonly("solution", &MonteCarloResult::solution)
      .def_readonly("instance_seed_used", &MonteCarloResult::instance_seed_used)
      .def_readonly("series", &MonteCarloResult::series)
      .def_readonly("sample_traces", &MonteCarloResult::sample_traces)
      .def_readonly("log", &MonteCarloResult::log);

  m.def("monte_carlo", &monte_carlo, py::arg("config"));

  m.def("aggregate_csv", [](const std::vector<AggregateSeries>& series) {
    std::ostringstream os;
    write_aggregate_csv(os, series);
    return os.str();
  });
  m.def("solution_csv", [](const std::vector<Eigen::VectorXd>& theta_star) {
    std::ostringstream os;
    write_solution_csv(os, theta_star);
    return os.str();
  });
}
