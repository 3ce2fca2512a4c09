#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dbs/grid.hpp"
#include "dbs/storage.hpp"

namespace dbs::scenario {

inline constexpr int kSchemaVersion = 1;

struct TariffCalendar {
  double import_high = 246.0;  // EUR/MWh
  double import_low = 131.5;   // EUR/MWh
  double export_price = 50.0;  // EUR/MWh
  int high_start_hour = 6;
  int high_end_hour = 22;      // exclusive
  int high_last_weekday = 5;   // 0 = Monday ... 5 = Saturday
  double pv_cost = 0.0;
  double storage_cost = 0.0;
};

struct TariffPoint {
  double import_price = 0.0;
  double export_price = 0.0;
};

// The year starts Monday 00:00 with no DST shifts.
TariffPoint tariff_at(const TariffCalendar& cal, int step, double T = 1.0);

struct PvSpec {
  std::string bus;
  double p_max = 20.0;  // kW
  double q_max = 10.0;  // kVar
};

struct ProfileSource {
  enum class Kind { Synthetic, Files };
  Kind kind = Kind::Synthetic;
  std::uint64_t seed = 1;
  double pv_target_mwh = 465.0;
  double load_target_mwh = 61.5;
  std::string pv_file;    // CSV step,bus,kW
  std::string load_file;
};

struct ScenarioConfig {
  int schema_version = kSchemaVersion;
  std::string name = "scenario";
  std::string grid_file;                // CSV; relative to the config file
  std::vector<grid::Branch> branches;   // inline alternative to grid_file
  std::string slack_bus = "R1";
  grid::PerUnitBase base;
  std::vector<std::string> load_buses;
  std::vector<storage::StorageSpec> storage;
  std::vector<PvSpec> pv;
  TariffCalendar tariff;
  double epsilon = 0.01;
  std::vector<double> battery_costs;    // EUR/kWh sweep
  std::vector<int> horizons = {6, 12, 24, 168, 672};
  int H = 24;
  int c = 6;
  double T = 1.0;
  int N = 8760;
  double v_min = 0.9;
  double v_max = 1.1;
  double load_power_factor = 0.97;
  double calendar_life_years = 10.0;
  double eol = 0.8;
  double alpha_down = -100000.0;
  int max_benders_iterations = 100;
  double i0_fraction = 0.5;
  double i1_fraction = 1.0;
  double storage_voltage_refinement = 0.0;  // unused unless > 0
  std::string degradation_map_file;     // empty: synthetic default
  ProfileSource profiles;

  // Throws InvalidScenario (missing fields, N % c != 0, ...).
  void validate() const;
};

std::string to_json(const ScenarioConfig& cfg);
ScenarioConfig from_json(const std::string& text);  // throws ParseError
ScenarioConfig load_config(const std::string& path);
void save_config(const ScenarioConfig& cfg, const std::string& path);

// CSV header: start_node,end_node,r_ohm_per_km,x_ohm_per_km,length_m,i_max_A
grid::GridModel load_grid(const std::string& path, const std::string& slack = "R1",
                          grid::PerUnitBase base = {});
grid::GridModel parse_grid_csv(const std::string& text, const std::string& slack = "R1",
                               grid::PerUnitBase base = {});

struct ProfileSet {
  std::vector<std::string> buses;          // row order of pv_kw / load_kw
  std::vector<std::vector<double>> pv_kw;  // [bus][step], per installed PV unit total
  std::vector<std::vector<double>> load_kw;
  int steps() const { return buses.empty() ? 0 : static_cast<int>(pv_kw.front().size()); }
  int bus_row(const std::string& bus) const;  // -1 if absent
  // Wraps modulo the series length.
  double pv(int row, int step) const;
  double load(int row, int step) const;
  double pv_total_mwh(double T = 1.0) const;
  double load_total_mwh(double T = 1.0) const;
};

struct ProfileTargets {
  double pv_mwh = 465.0;
  double load_mwh = 61.5;
  double T = 1.0;
};

// Clear-sky bell with seasonal day length and a seeded AR(1) cloud factor
// for PV; two-peak household load with seeded noise. Scaled so the totals
// hit the targets; PV is clamped at each unit's rating and the scale is
// re-solved so the clamp does not break the target.
ProfileSet synthesize_profiles(std::uint64_t seed, int days,
                               const std::vector<PvSpec>& pv,
                               const std::vector<std::string>& load_buses,
                               const ProfileTargets& targets);

void write_profiles_csv(const ProfileSet& p, const std::string& pv_path,
                        const std::string& load_path);
ProfileSet read_profiles_csv(const std::string& pv_path, const std::string& load_path);
void write_profiles_binary(const ProfileSet& p, const std::string& path);
ProfileSet read_profiles_binary(const std::string& path);

// Everything a run needs, resolved from a config.
struct Scenario {
  ScenarioConfig config;
  grid::GridModel grid;
  grid::LinearGridOperators ops;
  ProfileSet profiles;
  storage::DegradationMap map;
};

Scenario build_scenario(const ScenarioConfig& cfg, const std::string& base_dir = ".");

// 3-bus chain R1-R2-R3 with two PV units, two loads and two storage units.
ScenarioConfig desk_config(int N = 48);
// Shipped CIGRE grid with the reference study parameters (18 storage, 18 PV units).
ScenarioConfig cigre_config(const std::string& grid_file);

}  // namespace dbs::scenario
