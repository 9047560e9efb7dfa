#include "djam/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "djam/errors.hpp"

namespace djam {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::string opt_double(double v) {
  return std::isnan(v) ? std::string() : format_double(v);
}

std::string strip_cr(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == '\n')) s.pop_back();
  return s;
}

}  // namespace

void write_trace_header(std::ostream& os, const TraceCsvColumns& cols) {
  os << "trial,round,edge_i,edge_j,V,mean_rel_error,epoch";
  if (cols.algorithm) os << ",algorithm";
  if (cols.rho) os << ",rho";
  os << "\n";
}

void write_trace_rows(std::ostream& os, const Trace& trace, long long trial,
                      const TraceCsvColumns& cols, const std::string& algorithm,
                      double rho) {
  for (const TraceRow& row : trace.rows) {
    os << trial << ',' << row.round << ',' << row.edge_i + 1 << ','
       << row.edge_j + 1 << ',' << opt_double(row.v) << ','
       << opt_double(row.mean_rel_error) << ',';
    if (row.epoch > 0) os << row.epoch;
    if (cols.algorithm) os << ',' << algorithm;
    if (cols.rho) os << ',' << opt_double(rho);
    os << '\n';
  }
}

void write_aggregate_csv(std::ostream& os,
                         const std::vector<AggregateSeries>& series) {
  os << "algorithm,rho,round,mean_rel_error\n";
  for (const AggregateSeries& s : series) {
    const std::string rho = opt_double(s.rho);
    for (std::size_t r = 0; r < s.mean_rel_error.size(); ++r) {
      os << s.algorithm << ',' << rho << ',' << r + 1 << ','
         << opt_double(s.mean_rel_error[r]) << '\n';
    }
  }
}

void write_solution_csv(std::ostream& os,
                        const std::vector<Eigen::VectorXd>& theta_star) {
  os << "agent,coord,value\n";
  for (std::size_t i = 0; i < theta_star.size(); ++i) {
    for (Eigen::Index c = 0; c < theta_star[i].size(); ++c) {
      os << i + 1 << ',' << c + 1 << ',' << format_double(theta_star[i][c])
         << '\n';
    }
  }
}

std::vector<Eigen::VectorXd> read_solution_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != "agent,coord,value") {
    throw ParseError("solution CSV must start with header agent,coord,value");
  }
  std::map<std::pair<long, long>, double> cells;
  long max_agent = 0;
  long max_coord = 0;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string a, c, v;
    if (!std::getline(fields, a, ',') || !std::getline(fields, c, ',') ||
        !std::getline(fields, v)) {
      throw ParseError("solution CSV line " + std::to_string(lineno) +
                       ": expected agent,coord,value");
    }
    long agent = 0, coord = 0;
    double value = 0.0;
    try {
      agent = std::stol(a);
      coord = std::stol(c);
      value = std::stod(v);
    } catch (const std::exception&) {
      throw ParseError("solution CSV line " + std::to_string(lineno) +
                       ": cannot parse fields");
    }
    if (agent < 1 || coord < 1) {
      throw ParseError("solution CSV line " + std::to_string(lineno) +
                       ": indices are 1-based");
    }
    if (!cells.emplace(std::make_pair(agent, coord), value).second) {
      throw ParseError("solution CSV line " + std::to_string(lineno) +
                       ": duplicate cell");
    }
    max_agent = std::max(max_agent, agent);
    max_coord = std::max(max_coord, coord);
  }
  if (max_agent == 0) {
    throw ParseError("solution CSV has no data rows");
  }
  if (cells.size() != static_cast<std::size_t>(max_agent) * max_coord) {
    throw ParseError("solution CSV is missing cells for a full " +
                     std::to_string(max_agent) + " x " +
                     std::to_string(max_coord) + " grid");
  }
  std::vector<Eigen::VectorXd> out(max_agent, Eigen::VectorXd(max_coord));
  for (const auto& [key, value] : cells) {
    out[key.first - 1][key.second - 1] = value;
  }
  return out;
}

void write_edge_list(std::ostream& os, const Network& net) {
  os << "# i j W_ij (1-based agent indices)\n";
  for (int e = 0; e < net.num_edges(); ++e) {
    const Edge& ed = net.edges()[e];
    os << ed.i + 1 << ' ' << ed.j + 1 << ' '
       << format_double(net.edge_weight(e)) << '\n';
  }
}

void write_instance_csv(std::ostream& os, const FieldInstance& inst) {
  os << "agent,sigma,theta_true,y\n";
  for (std::size_t i = 0; i < inst.y.size(); ++i) {
    os << i + 1 << ',' << format_double(inst.sigma_diag[i]) << ','
       << format_double(inst.theta_true[i]) << ',' << format_double(inst.y[i])
       << '\n';
  }
}

}  // namespace djam
