#include "dbs/storage.hpp"

#include <algorithm>
#include <cmath>
#include "json.hpp"

#include "dbs/error.hpp"
#include "dbs/lp/simplex.hpp"

namespace dbs::storage {

void StorageSpec::validate() const {
  if (!(eta_dis > 0.0 && eta_dis <= 1.0) || !(eta_ch > 0.0 && eta_ch <= 1.0)) {
    throw input_error("InvalidStorage", "efficiencies must lie in (0, 1] at " + bus);
  }
  if (!(e0 >= 0.0) || !(p_dis_max >= 0.0) || !(p_ch_max >= 0.0) || !(z_max >= 0.0)) {
    throw input_error("InvalidStorage", "negative storage parameter at " + bus);
  }
}

double soe_delta(const StorageSpec& s, double p_dis, double p_ch, double T) {
  return -T * (p_dis / s.eta_dis + s.eta_ch * p_ch);
}

double DegradationMap::evaluate(double p, double e, double z) const {
  double best = -lp::kInf;
  for (const auto& pl : planes) best = std::max(best, pl.a1 * p + pl.a2 * e + pl.a3 * z);
  return best;
}

double SyntheticFade::operator()(double p, double e, double z) const {
  return k1 * std::abs(p) + k2 * std::max(e - high_soe * z, 0.0) + k3 * z;
}

std::vector<FadeSample> sample_fade(const SyntheticFade& f, double p_ch_max,
                                    double p_dis_max,
                                    const std::vector<double>& z_levels,
                                    int n_p, int n_e) {
  std::vector<FadeSample> out;
  for (double z : z_levels) {
    for (int i = 0; i < n_p; ++i) {
      const double p = -p_ch_max + (p_dis_max + p_ch_max) * i / (n_p - 1);
      for (int j = 0; j < n_e; ++j) {
        const double e = z * j / (n_e - 1);
        out.push_back({p, e, z, f(p, e, z)});
      }
    }
  }
  return out;
}

namespace {

Eigen::Vector3d features(const FadeSample& s) { return {s.p, s.e, s.z}; }

// max sum_{s in part} a.x_s  s.t.  a.x_s <= fade_s for every sample.
// `bias` (optional) adds weight to one sample.
DegradationPlane fit_plane(const std::vector<FadeSample>& samples,
                           const std::vector<int>& part, int bias) {
  lp::LpProblem p;
  Eigen::Vector3d w = Eigen::Vector3d::Zero();
  for (int s : part) w += features(samples[s]);
  if (bias >= 0) {
    // Tangent at the biased sample; the partition sum only breaks ties.
    w = features(samples[bias]) + 1e-6 * w / std::max<std::size_t>(part.size(), 1);
  }
  for (int k = 0; k < 3; ++k) p.add_column(-w[k], -lp::kInf, lp::kInf);
  for (const FadeSample& s : samples) {
    p.add_ineq(std::vector<int>{0, 1, 2}, std::vector<double>{s.p, s.e, s.z},
               lp::RowSense::LessEqual, s.fade);
  }
  const auto sol = lp::solve_lp(p);
  if (!sol.optimal()) {
    throw numerical_error("FitFailed", std::string("plane fit LP ended ") +
                                           lp::to_string(sol.status));
  }
  return {sol.primal[0], sol.primal[1], sol.primal[2]};
}

double plane_value(const DegradationPlane& pl, const FadeSample& s) {
  return pl.a1 * s.p + pl.a2 * s.e + pl.a3 * s.z;
}

double total_gap(const DegradationMap& m, const std::vector<FadeSample>& samples) {
  double g = 0.0;
  for (const auto& s : samples) g += s.fade - m.evaluate(s.p, s.e, s.z);
  return g;
}

void refine(DegradationMap& m, const std::vector<FadeSample>& samples) {
  for (int round = 0; round < 20; ++round) {
    std::vector<std::vector<int>> parts(m.planes.size());
    for (int s = 0; s < static_cast<int>(samples.size()); ++s) {
      int best = 0;
      for (int k = 1; k < m.n_p(); ++k) {
        if (plane_value(m.planes[k], samples[s]) > plane_value(m.planes[best], samples[s])) best = k;
      }
      parts[best].push_back(s);
    }
    const double before = total_gap(m, samples);
    DegradationMap next;
    for (std::size_t k = 0; k < parts.size(); ++k) {
      if (parts[k].empty()) continue;
      next.planes.push_back(fit_plane(samples, parts[k], -1));
    }
    if (total_gap(next, samples) >= before - 1e-15 * (1.0 + before)) return;
    m = std::move(next);
  }
}

}  // namespace

DegradationMap convexify_map(const std::vector<FadeSample>& samples,
                             int max_planes, double tol) {
  Eigen::MatrixXd x(samples.size(), 3);
  for (std::size_t s = 0; s < samples.size(); ++s) x.row(s) = features(samples[s]).transpose();
  Eigen::FullPivLU<Eigen::MatrixXd> lu(x);
  lu.setThreshold(1e-12);
  if (samples.size() < 3 || lu.rank() < 3) {
    throw input_error("DegenerateSamples", "(p, e, z) samples span fewer than 3 dimensions");
  }
  std::vector<int> all(samples.size());
  for (std::size_t s = 0; s < samples.size(); ++s) all[s] = static_cast<int>(s);

  DegradationMap m;
  m.planes.push_back(fit_plane(samples, all, -1));
  while (m.n_p() < max_planes) {
    int worst = -1;
    double worst_gap = tol;
    for (int s = 0; s < static_cast<int>(samples.size()); ++s) {
      const double g = samples[s].fade - m.evaluate(samples[s].p, samples[s].e, samples[s].z);
      if (g > worst_gap) {
        worst_gap = g;
        worst = s;
      }
    }
    if (worst < 0) break;
    m.planes.push_back(fit_plane(samples, all, worst));
    refine(m, samples);
  }

  // Drop planes that never attain the max on any sample.
  DegradationMap out;
  for (const auto& pl : m.planes) {
    bool active = false;
    for (const auto& s : samples) {
      if (plane_value(pl, s) >= m.evaluate(s.p, s.e, s.z) - 1e-15) {
        active = true;
        break;
      }
    }
    const bool dup = std::any_of(out.planes.begin(), out.planes.end(), [&](const DegradationPlane& q) {
      return std::abs(q.a1 - pl.a1) + std::abs(q.a2 - pl.a2) + std::abs(q.a3 - pl.a3) < 1e-14;
    });
    if (active && !dup) out.planes.push_back(pl);
  }
  return out;
}

DegradationMap default_map() {
  const SyntheticFade f;
  return convexify_map(sample_fade(f, 10.0, 10.0, {5.0, 10.0, 20.0}), 6);
}

std::string map_to_json(const DegradationMap& m) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["units"] = {{"a1", "kWh/h per kW"}, {"a2", "1/h (per kWh of SoE)"}, {"a3", "1/h (per kWh of capacity)"}};
  j["label"] = "synthetic";
  j["planes"] = nlohmann::json::array();
  for (const auto& p : m.planes) j["planes"].push_back({p.a1, p.a2, p.a3});
  return j.dump(2);
}

DegradationMap map_from_json(const std::string& text) {
  DegradationMap m;
  try {
    const auto j = nlohmann::json::parse(text);
    for (const auto& t : j.at("planes")) {
      if (t.size() != 3) throw input_error("ParseError", "plane entries must be triples");
      m.planes.push_back({t[0].get<double>(), t[1].get<double>(), t[2].get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw input_error("ParseError", std::string("degradation map: ") + e.what());
  }
  return m;
}

Eigen::VectorXd SoEEvolution::propagate(const Eigen::VectorXd& e0,
                                        const Eigen::VectorXd& U) const {
  return Sx * e0 + Su * U;
}

SoEEvolution soe_matrices(const std::vector<StorageSpec>& fleet, int N, double T) {
  SoEEvolution ev;
  ev.N = N;
  ev.ns = static_cast<int>(fleet.size());
  ev.T = T;
  const int ns = ev.ns;
  ev.B = Eigen::MatrixXd::Zero(ns, 2 * ns);
  for (int i = 0; i < ns; ++i) {
    fleet[i].validate();
    ev.B(i, i) = -T / fleet[i].eta_dis;
    ev.B(i, ns + i) = -T * fleet[i].eta_ch;
  }
  std::vector<Eigen::Triplet<double>> sx, su;
  for (int k = 0; k < N; ++k) {
    for (int i = 0; i < ns; ++i) {
      const int row = k * ns + i;
      sx.emplace_back(row, i, 1.0);
      for (int t = 0; t <= k; ++t) {
        su.emplace_back(row, t * 2 * ns + i, ev.B(i, i));
        su.emplace_back(row, t * 2 * ns + ns + i, ev.B(i, ns + i));
      }
    }
  }
  ev.Sx.resize(N * ns, ns);
  ev.Sx.setFromTriplets(sx.begin(), sx.end());
  ev.Su.resize(N * ns, 2 * N * ns);
  ev.Su.setFromTriplets(su.begin(), su.end());
  return ev;
}

LinearRows soe_bound_rows(const SoEEvolution& ev, const Eigen::VectorXd& e0) {
  const int N = ev.N, ns = ev.ns;
  const int nu = 2 * N * ns;
  std::vector<Eigen::Triplet<double>> t;
  for (int r = 0; r < ev.Su.outerSize(); ++r) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(ev.Su, r); it; ++it) {
      t.emplace_back(it.row(), it.col(), it.value());
      t.emplace_back(N * ns + it.row(), it.col(), -it.value());
    }
  }
  for (int k = 0; k < N; ++k)
    for (int i = 0; i < ns; ++i) t.emplace_back(k * ns + i, nu + i, -1.0);
  LinearRows out;
  out.A.resize(2 * N * ns, nu + ns);
  out.A.setFromTriplets(t.begin(), t.end());
  const Eigen::VectorXd sxe = ev.Sx * e0;
  out.b.resize(2 * N * ns);
  out.b << -sxe, sxe;
  return out;
}

LinearRows degradation_rows(const DegradationMap& map, const SoEEvolution& ev,
                            const Eigen::VectorXd& e0) {
  const int N = ev.N, ns = ev.ns, np = map.n_p();
  const int nu = 2 * N * ns;
  // Row-major copy of Su so each SoE row can be scaled by a2.
  const Eigen::SparseMatrix<double, Eigen::RowMajor> su = ev.Su;
  const Eigen::VectorXd sxe = ev.Sx * e0;
  std::vector<Eigen::Triplet<double>> t;
  LinearRows out;
  out.b.resize(N * ns * np);
  for (int k = 0; k < N; ++k) {
    for (int i = 0; i < ns; ++i) {
      const int soe_row = k * ns + i;
      for (int q = 0; q < np; ++q) {
        const DegradationPlane& pl = map.planes[q];
        const int row = (k * ns + i) * np + q;
        t.emplace_back(row, k * 2 * ns + i, pl.a1);
        t.emplace_back(row, k * 2 * ns + ns + i, pl.a1);
        if (pl.a2 != 0.0) {
          for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(su, soe_row); it; ++it) {
            t.emplace_back(row, it.col(), pl.a2 * it.value());
          }
        }
        t.emplace_back(row, nu + i, pl.a3);
        t.emplace_back(row, nu + ns + k * ns + i, -1.0);
        out.b[row] = -pl.a2 * sxe[soe_row];
      }
    }
  }
  out.A.resize(N * ns * np, nu + ns + N * ns);
  out.A.setFromTriplets(t.begin(), t.end());
  return out;
}

int FleetColumns::local_to_lp(int local, int N, int ns) const {
  const int nu = 2 * N * ns;
  if (local < nu) {
    const int k = local / (2 * ns);
    const int j = local % (2 * ns);
    return j < ns ? p_dis[k][j] : p_ch[k][j - ns];
  }
  if (local < nu + ns) return z[local - nu];
  const int r = local - nu - ns;
  if (d.empty()) throw input_error("MissingColumns", "degradation columns not provided");
  return d[r / ns][r % ns];
}

void append_rows(lp::LpProblem& lp, const LinearRows& rows,
                 const FleetColumns& cols, int N, int ns,
                 const std::vector<std::string>& names) {
  const int nu = 2 * N * ns;
  lp::RowBuilder rb;
  for (int r = 0; r < rows.A.outerSize(); ++r) {
    rb.clear();
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(rows.A, r); it; ++it) {
      const double scale = it.col() < nu ? cols.kw_per_unit : 1.0;
      rb.add(cols.local_to_lp(static_cast<int>(it.col()), N, ns), it.value() * scale);
    }
    lp.add_ineq(rb, lp::RowSense::LessEqual, rows.b[r],
                r < static_cast<int>(names.size()) ? names[r] : std::string());
  }
}

}  // namespace dbs::storage
