#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <string>
#include <vector>

#include "dbs/lp/lp_problem.hpp"

namespace dbs::storage {

struct StorageSpec {
  std::string bus;
  double p_dis_max = 10.0;  // kW
  double p_ch_max = 10.0;   // kW (magnitude)
  double q_max = 10.0;      // kVar
  double eta_dis = 0.88;
  double eta_ch = 0.88;
  double e0 = 0.0;          // kWh
  double z_max = 100.0;     // kWh

  void validate() const;    // throws InvalidStorage
};

// Energy change over one step for discharge p_dis >= 0 and charge p_ch <= 0.
double soe_delta(const StorageSpec& s, double p_dis, double p_ch, double T);

struct DegradationPlane {
  double a1 = 0.0;  // kWh/h per kW of battery power
  double a2 = 0.0;  // 1/h on the SoE
  double a3 = 0.0;  // 1/h on the capacity
};

struct DegradationMap {
  std::vector<DegradationPlane> planes;

  int n_p() const { return static_cast<int>(planes.size()); }
  // Capacity fade rate in kWh/h.
  double evaluate(double p_bat, double e, double z) const;
};

// Closed-form synthetic fade: k1*|p| + k2*max(e - 0.9 z, 0) + k3*z per hour.
struct SyntheticFade {
  double k1 = 2.5e-5;
  double k2 = 1.0e-4;
  double k3 = 2.28e-6;
  double high_soe = 0.9;

  double operator()(double p, double e, double z) const;
};

struct FadeSample {
  double p = 0.0, e = 0.0, z = 0.0, fade = 0.0;
};

// Samples the synthetic function over [-p_ch_max, p_dis_max] x [0, z] for
// each capacity in `z_levels`.
std::vector<FadeSample> sample_fade(const SyntheticFade& f, double p_ch_max,
                                    double p_dis_max,
                                    const std::vector<double>& z_levels,
                                    int n_p = 21, int n_e = 21);

// Max-affine fit through the origin with every plane at or below every
// sample: greedy plane insertion followed by partition refinement, each
// plane solved as a small LP. Throws DegenerateSamples when the (p, e, z)
// design has rank < 3.
DegradationMap convexify_map(const std::vector<FadeSample>& samples,
                             int max_planes = 6, double tol = 1e-12);

// Default map: 6-plane convexification of SyntheticFade{} sampled at
// capacities 5, 10 and 20 kWh with 10 kW power limits.
DegradationMap default_map();

std::string map_to_json(const DegradationMap& m);
DegradationMap map_from_json(const std::string& text);  // throws ParseError

// E = S_x e(0) + S_u U with U = [u_0; ...; u_{N-1}], u_k = [p_dis(k); p_ch(k)]
// in kW, E = [e(1); ...; e(N)] in kWh.
struct SoEEvolution {
  int N = 0;
  int ns = 0;
  double T = 1.0;
  Eigen::MatrixXd B;                   // ns x 2ns
  Eigen::SparseMatrix<double> Sx;      // N ns x ns
  Eigen::SparseMatrix<double> Su;      // N ns x 2 N ns

  Eigen::VectorXd propagate(const Eigen::VectorXd& e0,
                            const Eigen::VectorXd& U) const;
};

SoEEvolution soe_matrices(const std::vector<StorageSpec>& fleet, int N,
                          double T);

// Rows over [U; z]:  S_u U - (1 (x) I) z <= -S_x e0  and  -S_u U <= S_x e0.
struct LinearRows {
  Eigen::SparseMatrix<double, Eigen::RowMajor> A;
  Eigen::VectorXd b;
};
LinearRows soe_bound_rows(const SoEEvolution& ev, const Eigen::VectorXd& e0);

// Rows over [U; z; D], D = [d(0); ...; d(N-1)], one per (step, unit, plane)
// in that nesting order.
LinearRows degradation_rows(const DegradationMap& map, const SoEEvolution& ev,
                            const Eigen::VectorXd& e0);

// Column map used to splice [U; z; D] blocks into an LpProblem. Power
// columns may be in per-unit, in which case `kw_per_unit` rescales them.
struct FleetColumns {
  std::vector<std::vector<int>> p_dis;  // [k][i]
  std::vector<std::vector<int>> p_ch;   // [k][i]
  std::vector<int> z;                   // [i]
  std::vector<std::vector<int>> d;      // [k][i], may be empty
  double kw_per_unit = 1.0;

  int local_to_lp(int local, int N, int ns) const;
};

// Appends every row of `rows` (LessEqual) with the given label per row.
void append_rows(lp::LpProblem& lp, const LinearRows& rows,
                 const FleetColumns& cols, int N, int ns,
                 const std::vector<std::string>& names);

}  // namespace dbs::storage
