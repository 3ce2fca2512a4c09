#include "dbs/accuracy.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "dbs/error.hpp"
#include "dbs/loadflow.hpp"
#include "json.hpp"

namespace dbs::accuracy {

AccuracySample evaluate_sample(const scenario::Scenario& sc, const std::vector<double>& p_kw,
                               const std::vector<double>& q_kvar) {
  const int nb = sc.grid.num_buses();
  const double s = sc.grid.base.s_kw();
  AccuracySample out;
  out.p_kw = p_kw;
  out.q_kvar = q_kvar;
  Eigen::VectorXd p(nb), q(nb);
  for (int b = 0; b < nb; ++b) {
    p[b] = p_kw[b] / s;
    q[b] = q_kvar[b] / s;
  }
  loadflow::LoadflowResult lf;
  try {
    lf = loadflow::fbs_loadflow(sc.grid, std::vector<double>(p.data(), p.data() + nb),
                                std::vector<double>(q.data(), q.data() + nb));
  } catch (const Error&) {
    out.converged = false;
    out.v_err = out.i_err = std::numeric_limits<double>::infinity();
    return out;
  }
  const Eigen::VectorXd vl = grid::linear_voltages(sc.ops, p, q);
  const Eigen::VectorXd ip = grid::linear_currents(sc.ops, p);
  const Eigen::VectorXd iq = grid::linear_currents(sc.ops, q);
  for (int b = 0; b < nb; ++b) out.v_err = std::max(out.v_err, std::abs(vl[b] - std::abs(lf.v[b])));
  for (int l = 0; l < sc.grid.num_branches(); ++l) {
    const double il = std::hypot(ip[l], iq[l]);
    out.i_err = std::max(out.i_err, std::abs(il - lf.i_b[l]) / sc.ops.i_max[l]);
  }
  const double plane = grid::plane_losses(sc.ops, ip).sum() + grid::plane_losses(sc.ops, iq).sum();
  out.loss_err_kw = std::abs(plane - lf.total_losses()) * s;
  return out;
}

AccuracyReport linearization_accuracy(const scenario::Scenario& sc, const AccuracyOptions& opts) {
  if (opts.samples < 0 || !(opts.range >= 0.0)) {
    throw input_error("InvalidOptions", "samples and range must be non-negative");
  }
  const int nb = sc.grid.num_buses();
  std::vector<double> p_rating(nb, 0.0), q_rating(nb, 0.0);
  for (const scenario::PvSpec& pv : sc.config.pv) {
    const int b = sc.grid.bus_index(pv.bus);
    p_rating[b] += pv.p_max;
    q_rating[b] += pv.q_max;
  }
  for (const storage::StorageSpec& st : sc.config.storage) {
    const int b = sc.grid.bus_index(st.bus);
    p_rating[b] += std::max(st.p_dis_max, st.p_ch_max);
    q_rating[b] += st.q_max;
  }
  AccuracyReport r;
  r.samples = opts.samples;
  r.range = opts.range;
  r.v_threshold = opts.v_threshold;
  r.i_threshold = opts.i_threshold;
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> p(nb), q(nb);
  for (int k = 0; k < opts.samples; ++k) {
    for (int b = 0; b < nb; ++b) {
      p[b] = opts.range * p_rating[b] * u(rng);
      q[b] = opts.range * q_rating[b] * u(rng);
    }
    p[sc.grid.slack_index()] = q[sc.grid.slack_index()] = 0.0;
    AccuracySample smp = evaluate_sample(sc, p, q);
    smp.index = k;
    if (!smp.converged) {
      ++r.nonconverged;
      ++r.violation_count;
      if (r.violations.size() < 20) r.violations.push_back(std::move(smp));
      continue;
    }
    if (smp.v_err > r.max_v_err) {
      r.max_v_err = smp.v_err;
      r.worst_v = k;
    }
    if (smp.i_err > r.max_i_err) {
      r.max_i_err = smp.i_err;
      r.worst_i = k;
    }
    r.max_loss_err_kw = std::max(r.max_loss_err_kw, smp.loss_err_kw);
    if (smp.v_err > opts.v_threshold || smp.i_err > opts.i_threshold) {
      ++r.violation_count;
      if (r.violations.size() < 20) r.violations.push_back(std::move(smp));
    }
  }
  return r;
}

std::string report_json(const AccuracyReport& r) {
  nlohmann::json j;
  j["schema_version"] = scenario::kSchemaVersion;
  j["samples"] = r.samples;
  j["range"] = r.range;
  j["v_threshold_pu"] = r.v_threshold;
  j["i_threshold_of_rating"] = r.i_threshold;
  j["max_voltage_error_pu"] = r.max_v_err;
  j["max_current_error_of_rating"] = r.max_i_err;
  j["max_loss_error_kw"] = r.max_loss_err_kw;
  j["worst_voltage_sample"] = r.worst_v;
  j["worst_current_sample"] = r.worst_i;
  j["within_thresholds"] = r.within();
  j["violation_count"] = r.violation_count;
  j["nonconverged_count"] = r.nonconverged;
  j["violations"] = nlohmann::json::array();
  for (const AccuracySample& s : r.violations) {
    j["violations"].push_back({{"sample", s.index}, {"converged", s.converged},
                               {"voltage_error_pu", s.converged ? s.v_err : -1.0},
                               {"current_error_of_rating", s.converged ? s.i_err : -1.0},
                               {"p_kw", s.p_kw}, {"q_kvar", s.q_kvar}});
  }
  return j.dump(2) + "\n";
}

}  // namespace dbs::accuracy
