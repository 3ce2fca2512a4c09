#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace dbs::grid {

// Balanced per-phase equivalent; powers are three-phase totals.
struct PerUnitBase {
  double v_ln = 230.0;    // V
  double s_va = 100.0e3;  // VA

  double s_kw() const { return s_va / 1e3; }
  double z_ohm() const { return 3.0 * v_ln * v_ln / s_va; }
  double i_amp() const { return s_va / (3.0 * v_ln); }
};

struct Bus {
  std::string id;
  bool is_slack = false;
};

struct Branch {
  std::string from;
  std::string to;
  double r_ohm_per_km = 0.0;
  double x_ohm_per_km = 0.0;
  double length_m = 0.0;
  double i_max_A = 0.0;
};

struct GridModel {
  std::vector<Bus> buses;
  std::vector<Branch> branches;
  PerUnitBase base;
  double slack_voltage = 1.0;

  // Buses in order of first appearance; `slack_id` becomes the slack.
  static GridModel from_branches(std::vector<Branch> branches,
                                 const std::string& slack_id,
                                 PerUnitBase base = {});

  int num_buses() const { return static_cast<int>(buses.size()); }
  int num_branches() const { return static_cast<int>(branches.size()); }
  int slack_index() const;
  int bus_index(const std::string& id) const;  // throws UnknownBus

  double r_pu(int l) const;
  double x_pu(int l) const;
  double i_max_pu(int l) const;

  // Throws InvalidGrid for a missing/duplicate slack or non-positive line data.
  void validate() const;
};

// Orientation of the spanning tree away from the slack.
struct RadialTree {
  std::vector<int> parent;         // per bus, -1 for the slack
  std::vector<int> parent_branch;  // per bus, -1 for the slack
  std::vector<int> order;          // breadth-first from the slack
  std::vector<int> downstream;     // per branch, the bus on the far side
};

RadialTree analyze_tree(const GridModel& grid);  // throws NotRadial

// n_l x n_b; entry (l, b) = 1 when the path from bus b to the slack runs
// through branch l. The slack column is therefore zero.
Eigen::MatrixXd build_bibc(const GridModel& grid);

struct LinearGridOperators {
  Eigen::MatrixXd Mf;        // n_l x n_b
  Eigen::MatrixXd M;         // n_l x (n_b - 1), slack column removed
  Eigen::VectorXd r, x;      // per-unit branch resistance / reactance
  Eigen::VectorXd vdf;       // 1/|v| per bus
  Eigen::MatrixXd Bv;        // (n_b - 1) x 2 n_b
  Eigen::MatrixXd Br;        // n_l x n_b
  Eigen::MatrixXd L0, L1;    // n_l x n_b
  Eigen::VectorXd b_loss;    // n_l
  Eigen::VectorXd i0, i1;    // per-unit supporting currents
  Eigen::VectorXd i_max;     // per-unit branch ratings
  std::vector<int> nonslack; // bus index of each row of Bv
  int slack = 0;
  double v_slack = 1.0;

  int num_buses() const { return static_cast<int>(Mf.cols()); }
  int num_branches() const { return static_cast<int>(Mf.rows()); }
};

struct OperatorOptions {
  // Operating-point voltage magnitudes per bus; empty means flat 1.0.
  std::vector<double> v_operating;
  // Supporting currents as fractions of each branch rating.
  double i0_fraction = 0.5;
  double i1_fraction = 1.0;
  // Per-branch overrides in per-unit (take precedence when non-empty).
  std::vector<double> i0_pu, i1_pu;
};

// Throws NotRadial, DegenerateVoltage (|v| < 0.5) or InvalidSupport.
LinearGridOperators build_operators(const GridModel& grid,
                                    const OperatorOptions& opts = {});

// Linear-model evaluations on per-unit bus injections (generation positive).
Eigen::VectorXd linear_voltages(const LinearGridOperators& ops,
                                const Eigen::VectorXd& p,
                                const Eigen::VectorXd& q);  // all buses
Eigen::VectorXd linear_currents(const LinearGridOperators& ops,
                                const Eigen::VectorXd& p);
// max-of-planes loss per branch for a branch-current vector.
Eigen::VectorXd plane_losses(const LinearGridOperators& ops,
                             const Eigen::VectorXd& i_branch);

}  // namespace dbs::grid
