#pragma once

#include <string>
#include <vector>

#include "dbs/scenario.hpp"

namespace dbs::accuracy {

struct AccuracyOptions {
  int samples = 1000;
  double range = 0.3;      // injections drawn uniformly in +-range x device rating
  unsigned long long seed = 1;
  double v_threshold = 0.01;   // p.u.
  double i_threshold = 0.05;   // fraction of the branch rating
};

struct AccuracySample {
  int index = 0;
  std::vector<double> p_kw, q_kvar;  // per bus, generation positive
  double v_err = 0.0;                // max |v_linear - |v_fbs|| over buses, p.u.
  double i_err = 0.0;                // max branch-current error / rating
  double loss_err_kw = 0.0;          // |plane losses - load-flow losses|
  bool converged = true;
};

struct AccuracyReport {
  int samples = 0;
  double range = 0.0;
  double v_threshold = 0.0, i_threshold = 0.0;
  double max_v_err = 0.0, max_i_err = 0.0, max_loss_err_kw = 0.0;  // converged samples
  int worst_v = -1, worst_i = -1;
  std::vector<AccuracySample> violations;  // first 20 breaching samples
  int violation_count = 0;
  int nonconverged = 0;                    // included in violation_count

  bool within() const { return violation_count == 0; }
};

// Bus ratings are the summed PV and storage active / reactive limits at each
// bus. Linear branch current is |(M p, M q)| against the load-flow magnitude.
// Non-converging load flows count as violations instead of throwing.
AccuracyReport linearization_accuracy(const scenario::Scenario& sc,
                                      const AccuracyOptions& opts = {});

// One sample at explicit injections (kW / kVar per bus).
AccuracySample evaluate_sample(const scenario::Scenario& sc, const std::vector<double>& p_kw,
                               const std::vector<double>& q_kvar);

std::string report_json(const AccuracyReport& r);

}  // namespace dbs::accuracy
