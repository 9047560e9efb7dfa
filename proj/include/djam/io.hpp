#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "djam/experiment.hpp"
#include "djam/gossip.hpp"
#include "djam/network.hpp"
#include "djam/oracle.hpp"

namespace djam {

/// Round-tripping decimal form: 17 significant digits, trailing zeros
/// trimmed.
std::string format_double(double v);

/// Trace CSV: `trial,round,edge_i,edge_j,V,mean_rel_error,epoch` with agent
/// indices 1-based; V and mean_rel_error empty when unavailable, epoch empty
/// except on rows completing an epoch. Optional trailing columns `algorithm`
/// and `rho` identify the run in merged files.
struct TraceCsvColumns {
  bool algorithm = false;
  bool rho = false;
};

void write_trace_header(std::ostream& os, const TraceCsvColumns& cols);
void write_trace_rows(std::ostream& os, const Trace& trace, long long trial,
                      const TraceCsvColumns& cols,
                      const std::string& algorithm = "", double rho = 0.0);

/// Aggregate CSV: `algorithm,rho,round,mean_rel_error`, one row per round
/// per variant; rho empty for the gossip algorithm.
void write_aggregate_csv(std::ostream& os,
                         const std::vector<AggregateSeries>& series);

/// Solution CSV: `agent,coord,value`, both indices 1-based.
void write_solution_csv(std::ostream& os,
                        const std::vector<Eigen::VectorXd>& theta_star);
std::vector<Eigen::VectorXd> read_solution_csv(std::istream& in);

/// Edge-list text format: `i j W_ij` per line, 1-based.
void write_edge_list(std::ostream& os, const Network& net);

/// Instance CSV: `agent,sigma,theta_true,y`, agent 1-based.
void write_instance_csv(std::ostream& os, const FieldInstance& inst);

}  // namespace djam
