#pragma once

#include <string>
#include <vector>

#include "dbs/grid.hpp"
#include "dbs/opf.hpp"

namespace fixture {

// Branch whose per-unit resistance/reactance come out as requested.
inline dbs::grid::Branch line(const std::string& a, const std::string& b,
                              double r_pu, double x_pu = 0.0,
                              double i_max_A = 100.0) {
  const dbs::grid::PerUnitBase base;
  return {a, b, r_pu * base.z_ohm(), x_pu * base.z_ohm(), 1000.0, i_max_A};
}

// CIGRE LV benchmark line data, typed in independently of data/.
inline dbs::grid::GridModel cigre() {
  std::vector<dbs::grid::Branch> br;
  auto add = [&](std::string a, std::string b, double r, double x, double len,
                 double imax) { br.push_back({a, b, r, x, len, imax}); };
  for (int k = 1; k <= 9; ++k) {
    add("R" + std::to_string(k), "R" + std::to_string(k + 1), 0.405, 0.205, 35, 398);
  }
  add("R3", "R11", 2.05, 0.212, 35, 158);
  add("R4", "R12", 2.05, 0.212, 30, 158);
  add("R12", "R13", 2.05, 0.212, 35, 158);
  add("R13", "R14", 2.05, 0.212, 35, 158);
  add("R14", "R15", 2.05, 0.212, 35, 158);
  add("R6", "R16", 2.05, 0.212, 30, 158);
  add("R9", "R17", 2.05, 0.212, 30, 158);
  add("R10", "R18", 2.05, 0.212, 30, 158);
  return dbs::grid::GridModel::from_branches(br, "R1");
}

inline dbs::opf::GeneratorSpec feeder(const std::string& bus, double c_export,
                                      double c_import) {
  dbs::opf::GeneratorSpec g;
  g.bus = bus;
  g.kind = dbs::opf::GeneratorKind::SlackFeeder;
  g.p_min = -dbs::lp::kInf;
  g.p_max = dbs::lp::kInf;
  g.q_max = dbs::lp::kInf;
  g.cost.segments = {{c_export, 0.0}, {c_import, 0.0}};
  return g;
}

inline dbs::opf::GeneratorSpec pv(const std::string& bus, double p_max,
                                  double q_max = 0.0) {
  dbs::opf::GeneratorSpec g;
  g.bus = bus;
  g.kind = dbs::opf::GeneratorKind::Pv;
  g.p_max = p_max;
  g.q_max = q_max;
  g.cost.segments = {{0.0, 0.0}};
  return g;
}

}  // namespace fixture
