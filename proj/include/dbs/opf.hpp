#pragma once

#include <string>
#include <vector>

#include "dbs/grid.hpp"
#include "dbs/lp/lp_problem.hpp"

namespace dbs::opf {

enum class GeneratorKind { SlackFeeder, Pv, StorageDischarge, StorageCharge };
enum class QShape { Circular, CosPhi, Rectangular };

const char* to_string(GeneratorKind k);

// y >= gradient * p + offset per segment; gradient in EUR/MWh, offset in EUR/h.
struct PwaSegment {
  double gradient = 0.0;
  double offset = 0.0;
};

struct PwaCost {
  std::vector<PwaSegment> segments;

  // Throws NonConvexCost unless gradients are non-decreasing.
  void validate() const;
  double evaluate(double p_kw) const;  // EUR/h, max over segments
};

struct GeneratorSpec {
  std::string bus;
  GeneratorKind kind = GeneratorKind::Pv;
  double p_min = 0.0;  // kW
  double p_max = 0.0;  // kW
  double s_max = lp::kInf;  // kVA
  QShape q_shape = QShape::Rectangular;
  double q_max = 0.0;     // kVar, Rectangular only
  double cos_phi = 1.0;   // CosPhi only
  int facets = 8;         // Circular / CosPhi polygon resolution
  PwaCost cost;
  std::string label;      // free-form tag used in row names
};

// a_p * p + a_q * q <= rhs, all in the generator's own units (kW, kVar).
struct PolygonRow {
  double a_p = 0.0;
  double a_q = 0.0;
  double rhs = 0.0;
};

struct QPolygon {
  std::vector<PolygonRow> rows;
  double q_lo = -lp::kInf, q_hi = lp::kInf;
  double p_lo = -lp::kInf;  // extra lower bound on p (CosPhi requires p >= 0)
};

// Inscribed polygon for the apparent-power set. Throws UnsupportedShape.
QPolygon build_q_polygon(const GeneratorSpec& gen);

struct CostRows {
  std::vector<int> rows;  // inequality row indices
};

// Appends one `c_i * S * p - y <= -b_i` row per segment (S converts the
// per-unit p column to MW). Throws NonConvexCost.
CostRows build_pwa_cost_rows(lp::LpProblem& lp, const PwaCost& cost,
                             int gen_column, int y_column, double s_base_mw,
                             const std::string& prefix);

struct SingleShotLayout {
  int nl = 0, ng = 0, nb = 0;
  int pl_p = 0, pl_q = 0, p_gen = 0, q_gen = 0, v = 0, y = 0;
  int first_eq = 0, first_ineq = 0;
  int balance_row = -1;
  std::vector<int> gen_bus;  // C_g as a bus index per generator

  int col_pl_p(int l) const { return pl_p + l; }
  int col_pl_q(int l) const { return pl_q + l; }
  int col_p(int g) const { return p_gen + g; }
  int col_q(int g) const { return q_gen + g; }
  int col_v(int b) const { return v + b; }
  int col_y(int g) const { return y + g; }
  int end() const { return y + ng; }
};

struct StepInput {
  const grid::LinearGridOperators* ops = nullptr;
  const grid::GridModel* grid = nullptr;
  std::vector<GeneratorSpec> gens;
  std::vector<double> p_d;  // kW per bus, consumption positive
  std::vector<double> q_d;  // kVar per bus
  double v_min = 0.9;
  double v_max = 1.1;
  double y_weight = 1.0;    // objective coefficient on each y
};

// Appends the columns and rows of one time step; row names start with
// `prefix` followed by a constraint tag, e.g. "k3:lossp0-:l5".
SingleShotLayout append_step(lp::LpProblem& lp, const StepInput& in,
                             const std::string& prefix);

struct SingleShot {
  lp::LpProblem problem;
  SingleShotLayout layout;
};

// Throws MissingSlack, DimensionMismatch, NonConvexCost, UnsupportedShape.
SingleShot assemble_single_shot(const grid::GridModel& grid,
                                const grid::LinearGridOperators& ops,
                                const std::vector<GeneratorSpec>& gens,
                                const std::vector<double>& p_d_kw,
                                const std::vector<double>& q_d_kvar,
                                double v_min = 0.9, double v_max = 1.1);

struct Dispatch {
  std::vector<double> p_kw, q_kvar;  // per generator
  std::vector<double> v;             // per bus
  std::vector<double> loss_p_kw, loss_q_kw;  // per branch
  std::vector<double> cost;          // y per generator, EUR/h
};

Dispatch extract_dispatch(const SingleShotLayout& layout,
                          const std::vector<double>& primal, double s_base_kw);

// Net per-unit bus injections (generation minus load) for a dispatch.
void bus_injections(const SingleShotLayout& layout, const Dispatch& d,
                    const std::vector<double>& p_d_kw,
                    const std::vector<double>& q_d_kvar, double s_base_kw,
                    std::vector<double>& p_pu, std::vector<double>& q_pu);

}  // namespace dbs::opf
