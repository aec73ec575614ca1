#pragma once

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "rgne/common.hpp"
#include "rgne/dynamics.hpp"
#include "rgne/verify.hpp"

namespace rgne {

/// Shortest round-trippable decimal form.
inline std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_kkt_report(std::ostream& os, const KktReport& r) {
  os << "stationarity_residual = " << fmt_double(r.stationarity) << '\n'
     << "primal_feasibility_residual = " << fmt_double(r.primal_feas) << '\n'
     << "complementarity = " << fmt_double(r.complementarity) << '\n'
     << "consensus_residual = " << fmt_double(r.consensus) << '\n';
}

inline std::string kkt_csv_header() {
  return "stationarity,primal_feas,complementarity,consensus";
}

inline std::string kkt_csv_row(const KktReport& r) {
  return fmt_double(r.stationarity) + "," + fmt_double(r.primal_feas) + "," +
         fmt_double(r.complementarity) + "," + fmt_double(r.consensus);
}

inline void write_epsilon_report(std::ostream& os, const EpsilonReport& r) {
  os << "constraint_model = "
     << (r.model == ConstraintModel::EllipsoidWorstCase ? "ellipsoid"
                                                        : "polytope")
     << '\n';
  os << "empirical_eps = " << fmt_double(r.empirical_eps) << '\n';
  for (std::size_t i = 0; i < r.per_player_eps.size(); ++i)
    os << "eps_player_" << i + 1 << " = " << fmt_double(r.per_player_eps[i])
       << (r.br_converged[i] ? "" : "  # lower bound, solver stalled") << '\n';
  os << "profile_restored_to_feasibility = " << (r.restored ? "yes" : "no")
     << '\n';
  os << "restore_distance = " << fmt_double(r.restore_distance) << '\n';
  os << "true_worst_case_violation = " << fmt_double(r.true_violation) << '\n';
  if (!r.metrics.empty()) {
    os << "delta_angular = " << fmt_double(r.delta.angular) << '\n';
    if (r.delta.hausdorff_available)
      os << "delta_hausdorff = " << fmt_double(*r.delta.hausdorff) << '\n';
    else
      os << "delta_hausdorff = unavailable  # h_i nu_i >= 2, bound vacuous\n";
    os << "radius_r = " << fmt_double(r.radius_r) << '\n';
    os << "mu = " << fmt_double(r.mu) << '\n';
    for (std::size_t i = 0; i < r.metrics.size(); ++i) {
      const auto& m = r.metrics[i];
      os << "player_" << i + 1 << ".h = " << fmt_double(m.hausdorff)
         << "  player_" << i + 1 << ".theta = " << fmt_double(m.max_angle)
         << "  player_" << i + 1 << ".q = " << m.facet_count << "  player_"
         << i + 1 << ".nu = " << fmt_double(m.curvature) << "  player_" << i + 1
         << ".c = " << fmt_double(r.c_consts[i]) << '\n';
    }
    os << "# nu is the max-boundary-curvature convention; c and r make delta "
          "convention-dependent\n";
  }
  if (!r.lipschitz.empty()) {
    for (std::size_t i = 0; i < r.lipschitz.size(); ++i)
      os << "lipschitz_player_" << i + 1 << " = " << fmt_double(r.lipschitz[i])
         << '\n';
  }
}

inline std::string trajectory_csv_header(const ExtendedGame& eg) {
  std::string h = "t,deriv_norm";
  for (int i = 0; i < eg.players(); ++i)
    for (int k = 0; k < eg.dim(); ++k)
      h += ",x_" + std::to_string(i + 1) + "_" + std::to_string(k + 1);
  for (int i = 0; i < eg.players(); ++i)
    for (int k = 0; k < eg.facet_count(i); ++k)
      h += ",sigma_" + std::to_string(i + 1) + "_" + std::to_string(k + 1);
  for (int i = 0; i < eg.players(); ++i) h += ",lambda_" + std::to_string(i + 1);
  for (int i = 0; i < eg.players(); ++i) h += ",zeta_" + std::to_string(i + 1);
  return h;
}

inline void write_trajectory_csv(std::ostream& os, const ExtendedGame& eg,
                                 const SwarmTrajectory& traj) {
  os << trajectory_csv_header(eg) << '\n';
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const auto& s = traj.states[k];
    os << fmt_double(traj.times[k]) << ',' << fmt_double(traj.deriv_norms[k]);
    for (int i = 0; i < eg.players(); ++i) {
      const Vec zi = eg.z_block(s.z, i);
      for (int c = 0; c < eg.dim(); ++c) os << ',' << fmt_double(zi(c));
    }
    for (int i = 0; i < eg.players(); ++i) {
      const Vec zi = eg.z_block(s.z, i);
      for (int c = 0; c < eg.facet_count(i); ++c)
        os << ',' << fmt_double(zi(eg.dim() + c));
    }
    for (int i = 0; i < eg.players(); ++i) os << ',' << fmt_double(s.lambda(i));
    for (int i = 0; i < eg.players(); ++i) os << ',' << fmt_double(s.zeta(i));
    os << '\n';
  }
}

/// Parsed CSV: header names plus rows of doubles.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const {
    for (std::size_t j = 0; j < columns.size(); ++j)
      if (columns[j] == name) return static_cast<int>(j);
    return -1;
  }
};

inline CsvTable read_csv(std::istream& is) {
  CsvTable t;
  std::string line;
  require(static_cast<bool>(std::getline(is, line)), Errc::IoError,
          "read_csv: empty input");
  std::stringstream hs(line);
  std::string cell;
  while (std::getline(hs, cell, ',')) t.columns.push_back(cell);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::vector<double> row;
    while (std::getline(ls, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw Error(Errc::IoError, "read_csv: non-numeric cell '" + cell + "'");
      }
    }
    require(row.size() == t.columns.size(), Errc::IoError,
            "read_csv: ragged row");
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace rgne
