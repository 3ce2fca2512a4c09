// dbsplan: storage planning and simulation driver.
//
//   dbsplan plan      --scenario desk --costs 50:500:50 --horizon 24
//   dbsplan simulate  --scenario s.json --z 5,5 --controller heuristic
//   dbsplan compare   --scenario desk --costs 100:300:100
//   dbsplan validate  --scenario cigre --range 0.3
//   dbsplan make-scenario --preset desk --output desk.json
//
// Exit codes: 0 success, 1 input error, 2 non-convergence, 3 numerical failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <omp.h>

#include "CLI11.hpp"
#include "dbs/accuracy.hpp"
#include "dbs/benders.hpp"
#include "dbs/economics.hpp"
#include "dbs/error.hpp"
#include "dbs/heuristic.hpp"
#include "dbs/mpc.hpp"
#include "dbs/scenario.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace dbs;
using nlohmann::json;

namespace {

struct Common {
  std::string scenario = "desk";
  std::optional<unsigned long long> seed;
  std::string out_dir = "out";
  std::vector<int> horizons;
  std::optional<int> update_cycle;
  std::optional<int> steps;
  int threads = 1;
};

std::string fmt_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

void write_file(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw input_error("IoError", "cannot write " + p.string());
  out << text;
}

const char* category_name(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::Input: return "input";
    case ErrorCategory::NonConvergence: return "non_convergence";
    case ErrorCategory::Numerical: return "numerical";
  }
  return "unknown";
}

json error_json(const Error& e) {
  return {{"schema_version", scenario::kSchemaVersion},
          {"error", {{"kind", e.kind()}, {"category", category_name(e.category())},
                     {"message", e.detail()}}}};
}

// "a:b:s" inclusive ladder, or a single value.
std::vector<double> parse_ladder(const std::string& spec) {
  std::vector<double> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ':')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw input_error("InvalidArgument", "cost ladder '" + spec + "' is not a:b:s");
    }
  }
  if (parts.size() == 1) return parts;
  if (parts.size() != 3 || parts[2] <= 0.0 || parts[1] < parts[0]) {
    throw input_error("InvalidArgument", "cost ladder '" + spec + "' is not a:b:s with s > 0");
  }
  std::vector<double> out;
  const int n = static_cast<int>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
  for (int k = 0; k <= n; ++k) out.push_back(parts[0] + k * parts[2]);
  return out;
}

std::vector<double> parse_list(const std::string& spec) {
  std::vector<double> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw input_error("InvalidArgument", "'" + spec + "' is not a comma separated list");
    }
  }
  return out;
}

scenario::ScenarioConfig resolve_config(const Common& o, std::string& base_dir) {
  scenario::ScenarioConfig cfg;
  base_dir = ".";
  if (o.scenario == "desk") {
    cfg = scenario::desk_config(o.steps.value_or(48));
  } else if (o.scenario == "cigre") {
    cfg = scenario::cigre_config(DBS_DATA_DIR "/cigre_lv.csv");
  } else {
    cfg = scenario::load_config(o.scenario);
    base_dir = fs::path(o.scenario).parent_path().string();
    if (base_dir.empty()) base_dir = ".";
  }
  if (o.seed) cfg.profiles.seed = *o.seed;
  if (o.steps && o.scenario != "desk") cfg.N = *o.steps;
  if (o.update_cycle) cfg.c = *o.update_cycle;
  if (!o.horizons.empty()) {
    const int hmin = *std::min_element(o.horizons.begin(), o.horizons.end());
    if (cfg.c > hmin) cfg.c = hmin;
  }
  cfg.validate();
  return cfg;
}

std::vector<int> horizons_of(const Common& o, const scenario::ScenarioConfig& cfg) {
  return o.horizons.empty() ? std::vector<int>{cfg.H} : o.horizons;
}

mpc::MpcConfig mpc_for(const scenario::ScenarioConfig& cfg, int H, double cd, bool degradation) {
  mpc::MpcConfig m = mpc::config_from(cfg, cd, degradation);
  m.H = H;
  if (m.c > H) m.c = H;
  return m;
}

bool controller_degradation(const std::string& c) { return c == "mpc-deg"; }

void write_metadata(const fs::path& dir, const std::string& command, const std::string& started,
                    int argc, char** argv) {
  json j;
  j["schema_version"] = scenario::kSchemaVersion;
  j["command"] = command;
  j["argv"] = std::vector<std::string>(argv, argv + argc);
  j["started_utc"] = started;
  j["finished_utc"] = utc_now();
  j["profiles"] = "synthetic profiles are generated data, not measurements";
  write_file(dir / "metadata.json", j.dump(2) + "\n");
}

std::string trajectory_csv(const scenario::Scenario& sc, const multiperiod::Trajectory& t) {
  std::ostringstream o;
  o.precision(10);
  o << "# schema_version=" << scenario::kSchemaVersion << "\n";
  o << "step,feeder_p_kw,feeder_q_kvar,import_eur_per_mwh,export_eur_per_mwh,energy_cost_eur,"
       "degradation_cost_eur,load_kw,losses_kw";
  for (const auto& pv : sc.config.pv) o << ",pv_avail_" << pv.bus << ",pv_p_" << pv.bus;
  for (const auto& s : sc.config.storage)
    o << ",p_dis_" << s.bus << ",p_ch_" << s.bus << ",soe_" << s.bus << ",fade_" << s.bus;
  o << "\n";
  for (const auto& r : t.steps) {
    o << r.step << ',' << r.feeder_p << ',' << r.feeder_q << ',' << r.import_price << ','
      << r.export_price << ',' << r.energy_cost << ',' << r.degradation_cost << ',' << r.load_p
      << ',' << r.losses_p;
    for (std::size_t j = 0; j < r.pv_p.size(); ++j) o << ',' << r.pv_avail[j] << ',' << r.pv_p[j];
    for (std::size_t i = 0; i < r.soe.size(); ++i)
      o << ',' << r.p_dis[i] << ',' << r.p_ch[i] << ',' << r.soe[i] << ',' << r.fade[i];
    o << "\n";
  }
  return o.str();
}

mpc::MpcRunResult simulate(const scenario::Scenario& sc, const std::string& controller, int H,
                           double cd, const std::vector<double>& z, const std::string& trace) {
  if (controller == "heuristic") return heuristic::run_heuristic_year(sc, z, sc.config.N);
  mpc::MpcConfig m = mpc_for(sc.config, H, cd, controller_degradation(controller));
  m.trace_path = trace;
  return mpc::run_receding_horizon(sc, m, z);
}

// ---- plan ----------------------------------------------------------------

struct PlanJob {
  double cost = 0.0;
  int H = 0;
  std::optional<benders::PlanResult> plan;
  std::optional<Error> error;
};

std::string job_dir(double cost, int H) { return "plan_cd" + fmt_num(cost) + "_H" + std::to_string(H); }

void run_plans(const scenario::Scenario& sc, const std::string& controller, double epsilon,
               const fs::path& out, std::vector<PlanJob>& jobs, int threads, bool write) {
  const bool deg = controller_degradation(controller);
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (int k = 0; k < static_cast<int>(jobs.size()); ++k) {
    PlanJob& job = jobs[k];
    const mpc::MpcConfig m = mpc_for(sc.config, job.H, job.cost, deg);
    benders::BendersOptions bo;
    bo.battery_cost = job.cost;
    bo.epsilon = epsilon;
    bo.max_iterations = sc.config.max_benders_iterations;
    bo.alpha_down = sc.config.alpha_down;
    try {
      job.plan = benders::run_benders(sc, m, bo);
      if (write) {
        const fs::path dir = out / job_dir(job.cost, job.H);
        write_file(dir / "plan.json", benders::plan_json(*job.plan, sc, bo, m));
        write_file(dir / "convergence.csv", benders::convergence_csv(*job.plan));
        mpc::MpcConfig replay = m;
        replay.trace_path = (dir / "trace.jsonl").string();
        mpc::run_receding_horizon(sc, replay, job.plan->z);
      }
    } catch (const Error& e) {
      job.error = e;
      if (write) {
        try {
          write_file(out / job_dir(job.cost, job.H) / "error.json", error_json(e).dump(2) + "\n");
        } catch (const Error&) {
        }
      }
    }
  }
}

int worst_exit(const std::vector<PlanJob>& jobs) {
  int code = 0;
  for (const PlanJob& j : jobs)
    if (j.error) code = std::max(code, static_cast<int>(j.error->category()));
  return code;
}

std::string plan_summary_csv(const scenario::Scenario& sc, const std::string& controller,
                             const std::vector<PlanJob>& jobs) {
  std::ostringstream o;
  o.precision(10);
  o << "# schema_version=" << scenario::kSchemaVersion << "\n";
  o << "battery_cost_eur_per_kwh,H,controller,status,iterations,gap,total_capacity_kwh";
  for (const auto& s : sc.config.storage) o << ",z_" << s.bus;
  o << ",J_sub_eur,investment_eur,profit_eur\n";
  for (const PlanJob& j : jobs) {
    o << j.cost << ',' << j.H << ',' << controller << ',';
    if (!j.plan) {
      o << j.error->kind() << ",,,";
      for (std::size_t i = 0; i < sc.config.storage.size(); ++i) o << ',';
      o << ",,\n";
      continue;
    }
    const auto& p = *j.plan;
    double total = 0.0;
    for (double z : p.z) total += z;
    o << "converged," << p.iterations << ',' << p.gap << ',' << total;
    for (double z : p.z) o << ',' << z;
    o << ',' << p.J_sub << ',' << p.investment << ',' << -p.objective() << "\n";
  }
  return o.str();
}

std::vector<PlanJob> make_jobs(const std::vector<double>& costs, const std::vector<int>& hs) {
  std::vector<PlanJob> jobs;
  for (int H : hs)
    for (double c : costs) jobs.push_back({c, H, std::nullopt, std::nullopt});
  return jobs;
}

std::vector<double> costs_of(const std::optional<double>& cost, const std::string& ladder,
                             const scenario::ScenarioConfig& cfg) {
  if (cost) return {*cost};
  if (!ladder.empty()) return parse_ladder(ladder);
  if (!cfg.battery_costs.empty()) return cfg.battery_costs;
  throw input_error("InvalidArgument", "no battery cost given (--cost or --costs)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed battery storage planning"};
  app.require_subcommand(1);
  Common o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--scenario", o.scenario, "scenario file or preset (desk, cigre)");
    sub->add_option("--seed", o.seed, "profile synthesis seed");
    sub->add_option("--out-dir", o.out_dir, "output directory");
    sub->add_option("--horizon", o.horizons, "prediction horizon H in steps (repeatable)");
    sub->add_option("--update-cycle", o.update_cycle, "update cycle c in steps");
    sub->add_option("--steps", o.steps, "simulated steps N");
    sub->add_option("--threads", o.threads, "worker threads for sweeps")->check(CLI::PositiveNumber);
  };

  std::optional<double> cost;
  std::string ladder, controller = "mpc-deg", z_list, plan_file, plan_controller = "mpc-deg";
  std::vector<std::string> controllers = {"mpc", "mpc-deg", "heuristic"};
  double epsilon = -1.0;
  const auto ctrl_check = CLI::IsMember({"mpc", "mpc-deg", "heuristic"});

  CLI::App* plan = app.add_subcommand("plan", "size storage with Benders decomposition");
  add_common(plan);
  plan->add_option("--cost", cost, "battery cost EUR/kWh");
  plan->add_option("--costs", ladder, "cost ladder a:b:s");
  plan->add_option("--controller", controller, "mpc or mpc-deg")->check(CLI::IsMember({"mpc", "mpc-deg"}));
  plan->add_option("--epsilon", epsilon, "relative gap tolerance");

  CLI::App* sim = app.add_subcommand("simulate", "run a controller at fixed capacities");
  add_common(sim);
  sim->add_option("--cost", cost, "battery cost EUR/kWh (degradation weight)");
  sim->add_option("--controller", controller, "mpc, mpc-deg or heuristic")->check(ctrl_check);
  sim->add_option("--z", z_list, "capacities in kWh, comma separated");
  sim->add_option("--plan", plan_file, "read capacities from a plan.json");

  CLI::App* cmp = app.add_subcommand("compare", "economics table across costs and controllers");
  add_common(cmp);
  cmp->add_option("--cost", cost, "battery cost EUR/kWh");
  cmp->add_option("--costs", ladder, "cost ladder a:b:s");
  cmp->add_option("--controller", controllers, "controllers to compare (repeatable)")->check(ctrl_check);
  cmp->add_option("--plan-controller", plan_controller, "controller used for sizing")
      ->check(CLI::IsMember({"mpc", "mpc-deg"}));
  cmp->add_option("--epsilon", epsilon, "relative gap tolerance");
  double discount_rate = 0.0;
  cmp->add_option("--discount-rate", discount_rate, "rate for the reported NPV");

  CLI::App* val = app.add_subcommand("validate", "linearization accuracy report");
  add_common(val);
  accuracy::AccuracyOptions ao;
  val->add_option("--samples", ao.samples, "random injection samples");
  val->add_option("--range", ao.range, "injection range as a fraction of device ratings");

  CLI::App* mk = app.add_subcommand("make-scenario", "write a preset scenario file");
  std::string preset = "desk", output = "scenario.json", grid_file;
  int mk_steps = 48;
  mk->add_option("--preset", preset, "desk or cigre")->check(CLI::IsMember({"desk", "cigre"}));
  mk->add_option("--output", output, "scenario file to write");
  mk->add_option("--grid", grid_file, "grid CSV referenced by the cigre preset");
  mk->add_option("--steps", mk_steps, "N for the desk preset");
  mk->add_option("--seed", o.seed, "profile synthesis seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << error_json(input_error("InvalidArgument", e.what())).dump() << "\n";
    return 1;
  }

  const std::string started = utc_now();
  const fs::path out(o.out_dir);
  try {
    if (*mk) {
      scenario::ScenarioConfig cfg =
          preset == "desk" ? scenario::desk_config(mk_steps)
                           : scenario::cigre_config(grid_file.empty() ? DBS_DATA_DIR "/cigre_lv.csv" : grid_file);
      if (o.seed) cfg.profiles.seed = *o.seed;
      cfg.validate();
      scenario::save_config(cfg, output);
      std::cout << "wrote " << output << "\n";
      return 0;
    }

    std::string base_dir;
    const scenario::ScenarioConfig cfg = resolve_config(o, base_dir);
    const scenario::Scenario sc = scenario::build_scenario(cfg, base_dir);
    const std::vector<int> hs = horizons_of(o, cfg);
    const double eps = epsilon > 0.0 ? epsilon : cfg.epsilon;

    if (*val) {
      ao.seed = o.seed.value_or(1);
      const accuracy::AccuracyReport r = accuracy::linearization_accuracy(sc, ao);
      write_file(out / "accuracy.json", accuracy::report_json(r));
      write_metadata(out, "validate", started, argc, argv);
      std::printf("samples %d  max |dv| %.6f p.u.  max di %.4f of rating  max dloss %.4f kW  "
                  "non-converged %d  %s\n",
                  r.samples, r.max_v_err, r.max_i_err, r.max_loss_err_kw, r.nonconverged,
                  r.within() ? "within thresholds" : "THRESHOLD BREACH");
      return 0;
    }

    if (*plan) {
      std::vector<PlanJob> jobs = make_jobs(costs_of(cost, ladder, cfg), hs);
      run_plans(sc, controller, eps, out, jobs, o.threads, true);
      write_file(out / "plan_summary.csv", plan_summary_csv(sc, controller, jobs));
      write_metadata(out, "plan", started, argc, argv);
      for (const PlanJob& j : jobs) {
        if (j.plan) {
          double total = 0.0;
          for (double z : j.plan->z) total += z;
          std::printf("c_d %-8s H %-4d capacity %10.4f kWh  profit %12.4f EUR  iterations %d\n",
                      fmt_num(j.cost).c_str(), j.H, total, -j.plan->objective(), j.plan->iterations);
        } else {
          std::printf("c_d %-8s H %-4d %s\n", fmt_num(j.cost).c_str(), j.H, j.error->what());
          std::cerr << error_json(*j.error).dump() << "\n";
        }
      }
      return worst_exit(jobs);
    }

    if (*sim) {
      std::vector<double> z;
      if (!plan_file.empty()) {
        std::ifstream in(plan_file);
        if (!in) throw input_error("IoError", "cannot read " + plan_file);
        json j;
        try {
          j = json::parse(in);
        } catch (const json::exception& e) {
          throw input_error("ParseError", plan_file + ": " + e.what());
        }
        for (const auto& s : cfg.storage) z.push_back(j.at("capacity_kwh").value(s.bus, 0.0));
        if (!cost && j.contains("battery_cost_eur_per_kwh")) cost = j["battery_cost_eur_per_kwh"].get<double>();
      } else if (!z_list.empty()) {
        z = parse_list(z_list);
      } else {
        throw input_error("InvalidArgument", "simulate needs --z or --plan");
      }
      if (z.size() != cfg.storage.size()) {
        throw input_error("DimensionMismatch", "expected " + std::to_string(cfg.storage.size()) + " capacities");
      }
      const int H = hs.front();
      const std::string trace = controller == "heuristic" ? "" : (out / "trace.jsonl").string();
      if (!trace.empty()) fs::create_directories(out);
      const mpc::MpcRunResult r = simulate(sc, controller, H, cost.value_or(0.0), z, trace);
      write_file(out / "trajectory.csv", trajectory_csv(sc, r.trajectory));
      json s;
      s["schema_version"] = scenario::kSchemaVersion;
      s["controller"] = controller;
      s["H"] = H;
      s["steps"] = r.trajectory.steps.size();
      s["energy_cost_eur"] = r.trajectory.energy_cost;
      s["degradation_cost_eur"] = r.trajectory.degradation_cost;
      s["J_sub_eur"] = r.J_sub;
      s["imported_mwh"] = r.trajectory.imported_mwh();
      s["exported_mwh"] = r.trajectory.exported_mwh();
      s["pv_curtailed_mwh"] = r.trajectory.pv_curtailed_mwh();
      s["fade_kwh"] = r.trajectory.total_fade();
      s["lambda_s"] = r.lambda_s;
      write_file(out / "summary.json", s.dump(2) + "\n");
      write_metadata(out, "simulate", started, argc, argv);
      std::printf("%s: energy cost %.4f EUR, imported %.4f MWh, curtailed %.4f MWh\n",
                  controller.c_str(), r.trajectory.energy_cost, r.trajectory.imported_mwh(),
                  r.trajectory.pv_curtailed_mwh());
      return 0;
    }

    if (*cmp) {
      std::vector<PlanJob> jobs = make_jobs(costs_of(cost, ladder, cfg), hs);
      run_plans(sc, plan_controller, eps, out, jobs, o.threads, false);
      const double years = cfg.N * cfg.T / 8760.0;
      std::vector<economics::EconResult> rows(jobs.size() * controllers.size());
      std::vector<std::optional<Error>> errors(rows.size());
#pragma omp parallel for schedule(dynamic) num_threads(o.threads)
      for (int k = 0; k < static_cast<int>(rows.size()); ++k) {
        const PlanJob& job = jobs[k / controllers.size()];
        const std::string& ctl = controllers[k % controllers.size()];
        economics::EconResult& e = rows[k];
        e.battery_cost = job.cost;
        e.H = job.H;
        e.controller = ctl;
        if (!job.plan) {
          errors[k] = job.error;
          continue;
        }
        try {
          const std::vector<double>& z = job.plan->z;
          const mpc::MpcRunResult with = simulate(sc, ctl, job.H, job.cost, z, "");
          const mpc::MpcRunResult without =
              simulate(sc, ctl, job.H, job.cost, std::vector<double>(z.size(), 0.0), "");
          double load = 0.0;
          for (const auto& s : with.trajectory.steps) load += s.load_p * cfg.T / 1000.0;
          for (double v : z) e.total_capacity_kwh += v;
          e.investment = job.cost * e.total_capacity_kwh;
          e.self_sufficiency = economics::self_sufficiency(load, with.trajectory.imported_mwh());
          std::vector<double> fade = with.trajectory.total_fade();
          for (double& f : fade) f /= years;
          const economics::Lifetime life = economics::battery_lifetime(fade, z, cfg.eol);
          e.lifetime_years = life.years;
          e.lifetime_crossing = life.crossing;
          e.revenue_with_storage = -with.trajectory.energy_cost / years;
          e.revenue_without_storage = -without.trajectory.energy_cost / years;
          e.pv_curtailed_mwh = with.trajectory.pv_curtailed_mwh() / years;
          const double dj = e.revenue_with_storage - e.revenue_without_storage;
          if (e.investment > 0.0) {
            e.npv = economics::npv(e.investment, dj, life.years, discount_rate);
            const economics::IrrResult ir = economics::irr(e.investment, dj, life.years);
            e.irr = ir.irr;
            e.irr_found = ir.sign_change;
          }
        } catch (const Error& err) {
          errors[k] = err;
        }
      }
      std::string csv = economics::results_csv_header();
      int code = 0;
      for (std::size_t k = 0; k < rows.size(); ++k) {
        if (errors[k]) {
          std::cerr << error_json(*errors[k]).dump() << "\n";
          code = std::max(code, static_cast<int>(errors[k]->category()));
          continue;
        }
        csv += economics::results_csv_row(rows[k]);
      }
      write_file(out / "results.csv", csv);
      write_metadata(out, "compare", started, argc, argv);
      std::printf("%zu rows written to %s\n", rows.size(), (out / "results.csv").string().c_str());
      return code;
    }
  } catch (const Error& e) {
    std::cerr << error_json(e).dump() << "\n";
    try {
      write_file(out / "error.json", error_json(e).dump(2) + "\n");
    } catch (const Error&) {
    }
    return static_cast<int>(e.category());
  } catch (const std::exception& e) {
    std::cerr << error_json(numerical_error("Internal", e.what())).dump() << "\n";
    return 3;
  }
  return 0;
}
