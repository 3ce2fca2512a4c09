#include "dbs/opf.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dbs/error.hpp"

namespace dbs::opf {

using lp::kInf;
using lp::RowBuilder;
using lp::RowSense;

const char* to_string(GeneratorKind k) {
  switch (k) {
    case GeneratorKind::SlackFeeder: return "slack";
    case GeneratorKind::Pv: return "pv";
    case GeneratorKind::StorageDischarge: return "dis";
    case GeneratorKind::StorageCharge: return "ch";
  }
  return "gen";
}

void PwaCost::validate() const {
  for (std::size_t i = 1; i < segments.size(); ++i) {
    if (segments[i].gradient < segments[i - 1].gradient) {
      throw input_error("NonConvexCost",
                        "segment " + std::to_string(i) + " gradient " +
                            std::to_string(segments[i].gradient) +
                            " is below its predecessor");
    }
  }
}

double PwaCost::evaluate(double p_kw) const {
  double best = segments.empty() ? 0.0 : -kInf;
  for (const PwaSegment& s : segments) {
    best = std::max(best, s.gradient * p_kw / 1000.0 + s.offset);
  }
  return best;
}

QPolygon build_q_polygon(const GeneratorSpec& g) {
  QPolygon poly;
  const double pi = std::numbers::pi;
  switch (g.q_shape) {
    case QShape::Rectangular:
      poly.q_lo = -g.q_max;
      poly.q_hi = g.q_max;
      return poly;
    case QShape::Circular: {
      if (!(g.s_max > 0.0) || !std::isfinite(g.s_max) || g.facets < 3) {
        throw input_error("UnsupportedShape", "circular polygon needs finite s_max and >= 3 facets");
      }
      // Vertices at 2*pi*k/N on the circle; facet normals halfway between.
      const int n = g.facets;
      const double apothem = g.s_max * std::cos(pi / n);
      for (int k = 0; k < n; ++k) {
        const double th = (2.0 * k + 1.0) * pi / n;
        poly.rows.push_back({std::cos(th), std::sin(th), apothem});
      }
      return poly;
    }
    case QShape::CosPhi: {
      if (!(g.s_max > 0.0) || !std::isfinite(g.s_max) || !(g.cos_phi > 0.0) ||
          g.cos_phi > 1.0) {
        throw input_error("UnsupportedShape", "cos-phi polygon needs finite s_max and cos_phi in (0,1]");
      }
      const double phi = std::acos(g.cos_phi);
      const double tan_phi = std::tan(phi);
      poly.p_lo = 0.0;
      poly.rows.push_back({-tan_phi, 1.0, 0.0});
      poly.rows.push_back({-tan_phi, -1.0, 0.0});
      const int arcs = std::max(1, static_cast<int>(std::ceil(2.0 * phi * g.facets / (2.0 * pi) - 1e-12)));
      const double step = 2.0 * phi / arcs;
      for (int k = 0; k < arcs; ++k) {
        const double mid = -phi + (k + 0.5) * step;
        poly.rows.push_back({std::cos(mid), std::sin(mid), g.s_max * std::cos(step / 2.0)});
      }
      return poly;
    }
  }
  throw input_error("UnsupportedShape", "unknown polygon shape");
}

CostRows build_pwa_cost_rows(lp::LpProblem& lp, const PwaCost& cost,
                             int gen_column, int y_column, double s_base_mw,
                             const std::string& prefix) {
  cost.validate();
  CostRows out;
  for (std::size_t i = 0; i < cost.segments.size(); ++i) {
    RowBuilder row;
    row.add(gen_column, cost.segments[i].gradient * s_base_mw).add(y_column, -1.0);
    out.rows.push_back(lp.add_ineq(row, RowSense::LessEqual, -cost.segments[i].offset,
                                   prefix + ":s" + std::to_string(i)));
  }
  return out;
}

SingleShotLayout append_step(lp::LpProblem& lp, const StepInput& in,
                             const std::string& prefix) {
  const grid::LinearGridOperators& ops = *in.ops;
  const grid::GridModel& grid = *in.grid;
  SingleShotLayout L;
  L.nl = ops.num_branches();
  L.nb = ops.num_buses();
  L.ng = static_cast<int>(in.gens.size());
  if (static_cast<int>(in.p_d.size()) != L.nb || static_cast<int>(in.q_d.size()) != L.nb) {
    throw input_error("DimensionMismatch", "load vectors need one entry per bus");
  }
  if (std::none_of(in.gens.begin(), in.gens.end(), [](const GeneratorSpec& g) {
        return g.kind == GeneratorKind::SlackFeeder;
      })) {
    throw input_error("MissingSlack", "no SlackFeeder generator");
  }
  const double s_kw = grid.base.s_kw();
  const double s_mw = s_kw / 1000.0;
  L.first_eq = lp.num_eq();
  L.first_ineq = lp.num_ineq();

  std::vector<double> pd(L.nb), qd(L.nb);
  for (int b = 0; b < L.nb; ++b) {
    pd[b] = in.p_d[b] / s_kw;
    qd[b] = in.q_d[b] / s_kw;
  }
  std::vector<QPolygon> polys;
  for (const GeneratorSpec& g : in.gens) {
    L.gen_bus.push_back(grid.bus_index(g.bus));
    polys.push_back(build_q_polygon(g));
    g.cost.validate();
    if (g.p_min > g.p_max) {
      throw input_error("InvalidGenerator", "p_min > p_max at " + g.bus);
    }
  }

  auto name = [&](const char* what, int k) {
    return prefix + what + std::to_string(k);
  };
  L.pl_p = lp.num_cols();
  for (int l = 0; l < L.nl; ++l) lp.add_column(0.0, 0.0, kInf, name("plp", l));
  L.pl_q = lp.num_cols();
  for (int l = 0; l < L.nl; ++l) lp.add_column(0.0, 0.0, kInf, name("plq", l));
  L.p_gen = lp.num_cols();
  for (int g = 0; g < L.ng; ++g) {
    const double lo = std::max(in.gens[g].p_min, polys[g].p_lo);
    lp.add_column(0.0, lo / s_kw, in.gens[g].p_max / s_kw, name("p", g));
  }
  L.q_gen = lp.num_cols();
  for (int g = 0; g < L.ng; ++g) {
    lp.add_column(0.0, polys[g].q_lo / s_kw, polys[g].q_hi / s_kw, name("q", g));
  }
  L.v = lp.num_cols();
  for (int b = 0; b < L.nb; ++b) {
    if (b == ops.slack) lp.add_column(0.0, ops.v_slack, ops.v_slack, name("v", b));
    else lp.add_column(0.0, in.v_min, in.v_max, name("v", b));
  }
  L.y = lp.num_cols();
  for (int g = 0; g < L.ng; ++g) {
    const bool priced = !in.gens[g].cost.segments.empty();
    lp.add_column(in.y_weight, priced ? -kInf : 0.0, priced ? kInf : 0.0, name("y", g));
  }

  // cost epigraphs
  for (int g = 0; g < L.ng; ++g) {
    build_pwa_cost_rows(lp, in.gens[g].cost, L.col_p(g), L.col_y(g), s_mw,
                        prefix + "cost:g" + std::to_string(g));
  }

  RowBuilder row;
  // power balance
  double sum_pd = 0.0;
  for (double v : pd) sum_pd += v;
  row.clear();
  for (int g = 0; g < L.ng; ++g) row.add(L.col_p(g), 1.0);
  for (int l = 0; l < L.nl; ++l) row.add(L.col_pl_p(l), -1.0).add(L.col_pl_q(l), -1.0);
  L.balance_row = lp.add_eq(row, sum_pd, prefix + "balance");

  // voltage approximation, one row per non-slack bus
  for (int k = 0; k < L.nb - 1; ++k) {
    row.clear();
    double rhs = -ops.v_slack;
    for (int b = 0; b < L.nb; ++b) {
      rhs += ops.Bv(k, b) * pd[b] + ops.Bv(k, L.nb + b) * qd[b];
    }
    for (int g = 0; g < L.ng; ++g) {
      const int b = L.gen_bus[g];
      row.add(L.col_p(g), ops.Bv(k, b)).add(L.col_q(g), ops.Bv(k, L.nb + b));
    }
    row.add(L.col_v(ops.nonslack[k]), -1.0);
    lp.add_eq(row, rhs, prefix + "volt:" + grid.buses[ops.nonslack[k]].id);
  }

  // loss epigraphs
  for (int l = 0; l < L.nl; ++l) {
    double l0pd = 0.0, l1pd = 0.0, l0qd = 0.0, l1qd = 0.0;
    for (int b = 0; b < L.nb; ++b) {
      l0pd += ops.L0(l, b) * pd[b];
      l1pd += ops.L1(l, b) * pd[b];
      l0qd += ops.L0(l, b) * qd[b];
      l1qd += ops.L1(l, b) * qd[b];
    }
    struct Plane {
      const char* tag;
      bool reactive;
      const Eigen::MatrixXd* mat;
      double sign;
      double rhs;
    };
    const Plane planes[8] = {
        {"lossp0-", false, &ops.L0, -1.0, -l0pd},
        {"lossp0+", false, &ops.L0, +1.0, l0pd},
        {"lossp1-", false, &ops.L1, -1.0, -l1pd + ops.b_loss[l]},
        {"lossp1+", false, &ops.L1, +1.0, l1pd + ops.b_loss[l]},
        {"lossq0-", true, &ops.L0, -1.0, -l0qd},
        {"lossq0+", true, &ops.L0, +1.0, l0qd},
        {"lossq1-", true, &ops.L1, -1.0, -l1qd + ops.b_loss[l]},
        {"lossq1+", true, &ops.L1, +1.0, l1qd + ops.b_loss[l]},
    };
    for (const Plane& pl : planes) {
      row.clear();
      row.add(pl.reactive ? L.col_pl_q(l) : L.col_pl_p(l), 1.0);
      for (int g = 0; g < L.ng; ++g) {
        const double a = (*pl.mat)(l, L.gen_bus[g]);
        row.add(pl.reactive ? L.col_q(g) : L.col_p(g), pl.sign * a);
      }
      lp.add_ineq(row, RowSense::GreaterEqual, pl.rhs,
                  prefix + pl.tag + ":l" + std::to_string(l));
    }
  }

  // branch flow limits
  for (int l = 0; l < L.nl; ++l) {
    double brpd = 0.0;
    for (int b = 0; b < L.nb; ++b) brpd += ops.Br(l, b) * pd[b];
    row.clear();
    for (int g = 0; g < L.ng; ++g) row.add(L.col_p(g), ops.Br(l, L.gen_bus[g]));
    lp.add_ineq(row, RowSense::LessEqual, ops.i_max[l] + brpd,
                prefix + "imax+:l" + std::to_string(l));
    lp.add_ineq(row, RowSense::GreaterEqual, -ops.i_max[l] + brpd,
                prefix + "imax-:l" + std::to_string(l));
  }

  // apparent-power polygons
  for (int g = 0; g < L.ng; ++g) {
    for (std::size_t f = 0; f < polys[g].rows.size(); ++f) {
      const PolygonRow& pr = polys[g].rows[f];
      row.clear();
      row.add(L.col_p(g), pr.a_p).add(L.col_q(g), pr.a_q);
      lp.add_ineq(row, RowSense::LessEqual, pr.rhs / s_kw,
                  prefix + "pq:g" + std::to_string(g) + ":f" + std::to_string(f));
    }
  }
  return L;
}

SingleShot assemble_single_shot(const grid::GridModel& grid,
                                const grid::LinearGridOperators& ops,
                                const std::vector<GeneratorSpec>& gens,
                                const std::vector<double>& p_d_kw,
                                const std::vector<double>& q_d_kvar,
                                double v_min, double v_max) {
  StepInput in;
  in.ops = &ops;
  in.grid = &grid;
  in.gens = gens;
  in.p_d = p_d_kw;
  in.q_d = q_d_kvar;
  in.v_min = v_min;
  in.v_max = v_max;
  SingleShot out;
  out.layout = append_step(out.problem, in, "");
  return out;
}

Dispatch extract_dispatch(const SingleShotLayout& L,
                          const std::vector<double>& x, double s_kw) {
  Dispatch d;
  for (int g = 0; g < L.ng; ++g) {
    d.p_kw.push_back(x[L.col_p(g)] * s_kw);
    d.q_kvar.push_back(x[L.col_q(g)] * s_kw);
    d.cost.push_back(x[L.col_y(g)]);
  }
  for (int b = 0; b < L.nb; ++b) d.v.push_back(x[L.col_v(b)]);
  for (int l = 0; l < L.nl; ++l) {
    d.loss_p_kw.push_back(x[L.col_pl_p(l)] * s_kw);
    d.loss_q_kw.push_back(x[L.col_pl_q(l)] * s_kw);
  }
  return d;
}

void bus_injections(const SingleShotLayout& L, const Dispatch& d,
                    const std::vector<double>& p_d_kw,
                    const std::vector<double>& q_d_kvar, double s_kw,
                    std::vector<double>& p, std::vector<double>& q) {
  p.assign(L.nb, 0.0);
  q.assign(L.nb, 0.0);
  for (int b = 0; b < L.nb; ++b) {
    p[b] = -p_d_kw[b] / s_kw;
    q[b] = -q_d_kvar[b] / s_kw;
  }
  for (int g = 0; g < L.ng; ++g) {
    p[L.gen_bus[g]] += d.p_kw[g] / s_kw;
    q[L.gen_bus[g]] += d.q_kvar[g] / s_kw;
  }
}

}  // namespace dbs::opf
