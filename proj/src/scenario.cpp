#include "dbs/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "dbs/error.hpp"
#include "json.hpp"

namespace dbs::scenario {

using nlohmann::json;

TariffPoint tariff_at(const TariffCalendar& cal, int step, double T) {
  const double hours = step * T;
  const long whole = static_cast<long>(std::floor(hours + 1e-9));
  const int weekday = static_cast<int>(((whole / 24) % 7 + 7) % 7);
  const double hour = hours - 24.0 * std::floor((hours + 1e-9) / 24.0);
  const bool high = weekday <= cal.high_last_weekday &&
                    hour + 1e-9 >= cal.high_start_hour && hour + 1e-9 < cal.high_end_hour;
  return {high ? cal.import_high : cal.import_low, cal.export_price};
}

void ScenarioConfig::validate() const {
  auto bad = [](const std::string& m) { return input_error("InvalidScenario", m); };
  if (schema_version != kSchemaVersion) throw bad("unsupported schema_version " + std::to_string(schema_version));
  if (grid_file.empty() && branches.empty()) throw bad("no grid_file and no inline branches");
  if (!(T > 0.0)) throw bad("T must be positive");
  if (N < 1 || c < 1 || H < c) throw bad("need 1 <= c <= H and N >= 1");
  if (N % c != 0) throw bad("N = " + std::to_string(N) + " is not divisible by c = " + std::to_string(c));
  if (!(v_min < v_max)) throw bad("v_min must be below v_max");
  if (!(epsilon > 0.0)) throw bad("epsilon must be positive");
  if (!(eol > 0.0 && eol < 1.0)) throw bad("eol must lie in (0, 1)");
  if (!(calendar_life_years > 0.0)) throw bad("calendar_life_years must be positive");
  if (!(load_power_factor > 0.0 && load_power_factor <= 1.0)) throw bad("load_power_factor must lie in (0, 1]");
  if (!(tariff.export_price <= tariff.import_low && tariff.export_price <= tariff.import_high))
    throw bad("feed-in price above an import price makes the feeder cost non-convex");
  for (const storage::StorageSpec& s : storage) s.validate();
  for (const PvSpec& p : pv)
    if (p.p_max < 0.0 || p.q_max < 0.0) throw bad("negative PV rating at " + p.bus);
  for (int h : horizons)
    if (h < 1) throw bad("horizon lengths must be positive");
}

// ---------------------------------------------------------------- JSON

namespace {

json branch_json(const grid::Branch& b) {
  return {{"start_node", b.from}, {"end_node", b.to}, {"r_ohm_per_km", b.r_ohm_per_km},
          {"x_ohm_per_km", b.x_ohm_per_km}, {"length_m", b.length_m}, {"i_max_A", b.i_max_A}};
}

template <class T>
void get_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

std::string to_json(const ScenarioConfig& c) {
  json j;
  j["schema_version"] = c.schema_version;
  j["name"] = c.name;
  j["grid_file"] = c.grid_file;
  j["branches"] = json::array();
  for (const grid::Branch& b : c.branches) j["branches"].push_back(branch_json(b));
  j["slack_bus"] = c.slack_bus;
  j["base"] = {{"v_ln", c.base.v_ln}, {"s_va", c.base.s_va}};
  j["load_buses"] = c.load_buses;
  j["storage"] = json::array();
  for (const storage::StorageSpec& s : c.storage) {
    j["storage"].push_back({{"bus", s.bus}, {"p_dis_max", s.p_dis_max}, {"p_ch_max", s.p_ch_max},
                            {"q_max", s.q_max}, {"eta_dis", s.eta_dis}, {"eta_ch", s.eta_ch},
                            {"e0", s.e0}, {"z_max", s.z_max}});
  }
  j["pv"] = json::array();
  for (const PvSpec& p : c.pv) j["pv"].push_back({{"bus", p.bus}, {"p_max", p.p_max}, {"q_max", p.q_max}});
  const TariffCalendar& t = c.tariff;
  j["tariff"] = {{"import_high", t.import_high}, {"import_low", t.import_low},
                 {"export_price", t.export_price}, {"high_start_hour", t.high_start_hour},
                 {"high_end_hour", t.high_end_hour}, {"high_last_weekday", t.high_last_weekday},
                 {"pv_cost", t.pv_cost}, {"storage_cost", t.storage_cost}};
  j["epsilon"] = c.epsilon;
  j["battery_costs"] = c.battery_costs;
  j["horizons"] = c.horizons;
  j["H"] = c.H;
  j["c"] = c.c;
  j["T"] = c.T;
  j["N"] = c.N;
  j["v_min"] = c.v_min;
  j["v_max"] = c.v_max;
  j["load_power_factor"] = c.load_power_factor;
  j["calendar_life_years"] = c.calendar_life_years;
  j["eol"] = c.eol;
  j["alpha_down"] = c.alpha_down;
  j["max_benders_iterations"] = c.max_benders_iterations;
  j["i0_fraction"] = c.i0_fraction;
  j["i1_fraction"] = c.i1_fraction;
  j["degradation_map_file"] = c.degradation_map_file;
  const ProfileSource& p = c.profiles;
  j["profiles"] = {{"kind", p.kind == ProfileSource::Kind::Files ? "files" : "synthetic"},
                   {"seed", p.seed}, {"pv_target_mwh", p.pv_target_mwh},
                   {"load_target_mwh", p.load_target_mwh}, {"pv_file", p.pv_file},
                   {"load_file", p.load_file}};
  return j.dump(2) + "\n";
}

ScenarioConfig from_json(const std::string& text) {
  ScenarioConfig c;
  try {
    const json j = json::parse(text);
    if (!j.is_object()) throw input_error("ParseError", "scenario root must be an object");
    get_opt(j, "schema_version", c.schema_version);
    get_opt(j, "name", c.name);
    get_opt(j, "grid_file", c.grid_file);
    if (j.contains("branches")) {
      for (const json& b : j.at("branches")) {
        c.branches.push_back({b.at("start_node").get<std::string>(), b.at("end_node").get<std::string>(),
                              b.at("r_ohm_per_km").get<double>(), b.at("x_ohm_per_km").get<double>(),
                              b.at("length_m").get<double>(), b.at("i_max_A").get<double>()});
      }
    }
    get_opt(j, "slack_bus", c.slack_bus);
    if (j.contains("base")) {
      get_opt(j.at("base"), "v_ln", c.base.v_ln);
      get_opt(j.at("base"), "s_va", c.base.s_va);
    }
    get_opt(j, "load_buses", c.load_buses);
    if (j.contains("storage")) {
      for (const json& s : j.at("storage")) {
        storage::StorageSpec u;
        u.bus = s.at("bus").get<std::string>();
        get_opt(s, "p_dis_max", u.p_dis_max);
        get_opt(s, "p_ch_max", u.p_ch_max);
        get_opt(s, "q_max", u.q_max);
        get_opt(s, "eta_dis", u.eta_dis);
        get_opt(s, "eta_ch", u.eta_ch);
        get_opt(s, "e0", u.e0);
        get_opt(s, "z_max", u.z_max);
        c.storage.push_back(u);
      }
    }
    if (j.contains("pv")) {
      for (const json& p : j.at("pv")) {
        PvSpec u;
        u.bus = p.at("bus").get<std::string>();
        get_opt(p, "p_max", u.p_max);
        get_opt(p, "q_max", u.q_max);
        c.pv.push_back(u);
      }
    }
    if (j.contains("tariff")) {
      const json& t = j.at("tariff");
      get_opt(t, "import_high", c.tariff.import_high);
      get_opt(t, "import_low", c.tariff.import_low);
      get_opt(t, "export_price", c.tariff.export_price);
      get_opt(t, "high_start_hour", c.tariff.high_start_hour);
      get_opt(t, "high_end_hour", c.tariff.high_end_hour);
      get_opt(t, "high_last_weekday", c.tariff.high_last_weekday);
      get_opt(t, "pv_cost", c.tariff.pv_cost);
      get_opt(t, "storage_cost", c.tariff.storage_cost);
    }
    get_opt(j, "epsilon", c.epsilon);
    get_opt(j, "battery_costs", c.battery_costs);
    get_opt(j, "horizons", c.horizons);
    get_opt(j, "H", c.H);
    get_opt(j, "c", c.c);
    get_opt(j, "T", c.T);
    get_opt(j, "N", c.N);
    get_opt(j, "v_min", c.v_min);
    get_opt(j, "v_max", c.v_max);
    get_opt(j, "load_power_factor", c.load_power_factor);
    get_opt(j, "calendar_life_years", c.calendar_life_years);
    get_opt(j, "eol", c.eol);
    get_opt(j, "alpha_down", c.alpha_down);
    get_opt(j, "max_benders_iterations", c.max_benders_iterations);
    get_opt(j, "i0_fraction", c.i0_fraction);
    get_opt(j, "i1_fraction", c.i1_fraction);
    get_opt(j, "degradation_map_file", c.degradation_map_file);
    if (j.contains("profiles")) {
      const json& p = j.at("profiles");
      std::string kind = "synthetic";
      get_opt(p, "kind", kind);
      if (kind == "files") c.profiles.kind = ProfileSource::Kind::Files;
      else if (kind == "synthetic") c.profiles.kind = ProfileSource::Kind::Synthetic;
      else throw input_error("ParseError", "profiles.kind must be 'synthetic' or 'files'");
      get_opt(p, "seed", c.profiles.seed);
      get_opt(p, "pv_target_mwh", c.profiles.pv_target_mwh);
      get_opt(p, "load_target_mwh", c.profiles.load_target_mwh);
      get_opt(p, "pv_file", c.profiles.pv_file);
      get_opt(p, "load_file", c.profiles.load_file);
    }
  } catch (const json::exception& e) {
    throw input_error("ParseError", std::string("scenario JSON: ") + e.what());
  }
  return c;
}

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("ParseError", "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

ScenarioConfig load_config(const std::string& path) { return from_json(slurp(path)); }

void save_config(const ScenarioConfig& cfg, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("IoError", "cannot write " + path);
  out << to_json(cfg);
}

// ---------------------------------------------------------------- grid CSV

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto a = cell.find_first_not_of(" \t\r");
    const auto b = cell.find_last_not_of(" \t\r");
    out.push_back(a == std::string::npos ? std::string() : cell.substr(a, b - a + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& cell, int line, const std::string& column) {
  double v = 0.0;
  const char* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw input_error("ParseError", "line " + std::to_string(line) + ", column '" + column +
                                        "': not a number: '" + cell + "'");
  }
  return v;
}

}  // namespace

grid::GridModel parse_grid_csv(const std::string& text, const std::string& slack,
                               grid::PerUnitBase base) {
  static const std::vector<std::string> header = {"start_node", "end_node", "r_ohm_per_km",
                                                  "x_ohm_per_km", "length_m", "i_max_A"};
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool have_header = false;
  std::vector<grid::Branch> branches;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const std::vector<std::string> cells = split_csv(line);
    if (!have_header) {
      for (std::size_t k = 0; k < header.size(); ++k) {
        if (k >= cells.size() || cells[k] != header[k]) {
          throw input_error("ParseError", "line " + std::to_string(lineno) + ", column " +
                                              std::to_string(k + 1) + ": expected header '" +
                                              header[k] + "', found '" +
                                              (k < cells.size() ? cells[k] : std::string()) + "'");
        }
      }
      if (cells.size() != header.size()) {
        throw input_error("ParseError", "line " + std::to_string(lineno) + ": unexpected column '" +
                                            cells[header.size()] + "'");
      }
      have_header = true;
      continue;
    }
    if (cells.size() != header.size()) {
      throw input_error("ParseError", "line " + std::to_string(lineno) + ": expected " +
                                          std::to_string(header.size()) + " fields, found " +
                                          std::to_string(cells.size()));
    }
    grid::Branch b;
    b.from = cells[0];
    b.to = cells[1];
    if (b.from.empty() || b.to.empty()) {
      throw input_error("ParseError", "line " + std::to_string(lineno) + ", column '" +
                                          (b.from.empty() ? header[0] : header[1]) + "': empty");
    }
    b.r_ohm_per_km = parse_number(cells[2], lineno, header[2]);
    b.x_ohm_per_km = parse_number(cells[3], lineno, header[3]);
    b.length_m = parse_number(cells[4], lineno, header[4]);
    b.i_max_A = parse_number(cells[5], lineno, header[5]);
    branches.push_back(b);
  }
  if (!have_header) throw input_error("ParseError", "grid file has no header");
  grid::GridModel g = grid::GridModel::from_branches(branches, slack, base);
  g.validate();
  grid::analyze_tree(g);
  return g;
}

grid::GridModel load_grid(const std::string& path, const std::string& slack,
                          grid::PerUnitBase base) {
  return parse_grid_csv(slurp(path), slack, base);
}

// ---------------------------------------------------------------- profiles

int ProfileSet::bus_row(const std::string& bus) const {
  const auto it = std::find(buses.begin(), buses.end(), bus);
  return it == buses.end() ? -1 : static_cast<int>(it - buses.begin());
}

namespace {
int wrap_index(int step, int len) { return ((step % len) + len) % len; }
}  // namespace

double ProfileSet::pv(int row, int step) const {
  const auto& s = pv_kw[row];
  return s[wrap_index(step, static_cast<int>(s.size()))];
}

double ProfileSet::load(int row, int step) const {
  const auto& s = load_kw[row];
  return s[wrap_index(step, static_cast<int>(s.size()))];
}

double ProfileSet::pv_total_mwh(double T) const {
  double e = 0.0;
  for (const auto& s : pv_kw)
    for (double v : s) e += v;
  return e * T / 1000.0;
}

double ProfileSet::load_total_mwh(double T) const {
  double e = 0.0;
  for (const auto& s : load_kw)
    for (double v : s) e += v;
  return e * T / 1000.0;
}

ProfileSet synthesize_profiles(std::uint64_t seed, int days, const std::vector<PvSpec>& pv,
                               const std::vector<std::string>& load_buses,
                               const ProfileTargets& targets) {
  const double pi = std::numbers::pi;
  const double T = targets.T;
  const int steps_per_day = static_cast<int>(std::lround(24.0 / T));
  const int steps = days * steps_per_day;
  ProfileSet out;
  std::map<std::string, double> rating;
  for (const PvSpec& p : pv) {
    if (out.bus_row(p.bus) < 0) out.buses.push_back(p.bus);
    rating[p.bus] += p.p_max;
  }
  for (const std::string& b : load_buses)
    if (out.bus_row(b) < 0) out.buses.push_back(b);
  const int nrows = static_cast<int>(out.buses.size());
  out.pv_kw.assign(nrows, std::vector<double>(steps, 0.0));
  out.load_kw.assign(nrows, std::vector<double>(steps, 0.0));
  const double scale_days = days / 365.0;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // One weather process shared by the whole area (a few hundred metres
  // across), plus a small per-bus jitter.
  std::vector<double> clear(steps, 0.0), cloud(steps, 1.0);
  double ar = 0.0;
  for (int d = 0; d < days; ++d) {
    const double season = std::cos(2.0 * pi * (d - 171) / 365.0);
    const double day_len = 12.0 + 4.0 * season;
    const double rise = 12.0 - 0.5 * day_len;
    const double peak = 0.65 + 0.35 * season;
    ar = 0.7 * ar + 0.3 * gauss(rng);
    const double day_cloud = std::clamp(0.75 + 0.35 * ar, 0.1, 1.0);
    for (int h = 0; h < steps_per_day; ++h) {
      const int k = d * steps_per_day + h;
      const double t = (h + 0.5) * T;
      const double x = (t - rise) / day_len;
      if (x > 0.0 && x < 1.0) clear[k] = peak * std::pow(std::sin(pi * x), 1.5);
      cloud[k] = std::clamp(day_cloud + 0.08 * gauss(rng), 0.05, 1.0);
    }
  }
  std::vector<std::vector<double>> shape(nrows, std::vector<double>(steps, 0.0));
  for (int r = 0; r < nrows; ++r) {
    if (!rating.count(out.buses[r])) continue;
    for (int k = 0; k < steps; ++k) {
      if (clear[k] <= 0.0) continue;
      shape[r][k] = clear[k] * std::clamp(cloud[k] + 0.03 * gauss(rng), 0.0, 1.0);
    }
  }
  // Find a common scale so the clamped series hits the target.
  const double pv_target_kwh = targets.pv_mwh * 1000.0 * scale_days;
  auto pv_energy = [&](double a) {
    double e = 0.0;
    for (int r = 0; r < nrows; ++r) {
      const auto it = rating.find(out.buses[r]);
      if (it == rating.end()) continue;
      for (int k = 0; k < steps; ++k) e += std::min(a * it->second * shape[r][k], it->second);
    }
    return e * T;
  };
  double lo = 0.0, hi = 1.0;
  if (pv_target_kwh > 0.0 && pv_energy(1e6) > 0.0) {
    while (pv_energy(hi) < pv_target_kwh && hi < 1e6) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (pv_energy(mid) < pv_target_kwh ? lo : hi) = mid;
    }
  } else {
    hi = 0.0;
  }
  for (int r = 0; r < nrows; ++r) {
    const auto it = rating.find(out.buses[r]);
    if (it == rating.end()) continue;
    for (int k = 0; k < steps; ++k) out.pv_kw[r][k] = std::min(hi * it->second * shape[r][k], it->second);
  }

  // Household load: base, morning and evening peaks, winter uplift, noise.
  std::lognormal_distribution<double> noise(0.0, 0.15);
  double load_raw = 0.0;
  for (int r = 0; r < nrows; ++r) {
    if (std::find(load_buses.begin(), load_buses.end(), out.buses[r]) == load_buses.end()) continue;
    for (int d = 0; d < days; ++d) {
      const bool weekend = d % 7 >= 5;
      const double winter = 1.0 + 0.15 * std::cos(2.0 * pi * (d - 15) / 365.0);
      const double morning = weekend ? 9.0 : 7.5;
      for (int h = 0; h < steps_per_day; ++h) {
        const int k = d * steps_per_day + h;
        const double t = (h + 0.5) * T;
        const double base = 0.3 + 0.6 * std::exp(-0.5 * std::pow((t - morning) / 1.2, 2)) +
                            1.0 * std::exp(-0.5 * std::pow((t - 19.0) / 2.0, 2));
        out.load_kw[r][k] = base * winter * noise(rng);
        load_raw += out.load_kw[r][k];
      }
    }
  }
  const double load_target_kwh = targets.load_mwh * 1000.0 * scale_days;
  if (load_raw > 0.0) {
    const double a = load_target_kwh / (load_raw * T);
    for (auto& s : out.load_kw)
      for (double& v : s) v *= a;
  }
  return out;
}

void write_profiles_csv(const ProfileSet& p, const std::string& pv_path,
                        const std::string& load_path) {
  auto dump = [&](const std::vector<std::vector<double>>& series, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw input_error("IoError", "cannot write " + path);
    out << "# schema_version=" << kSchemaVersion << "\n";
    out << "step,bus,kW\n";
    out.precision(17);
    for (int k = 0; k < p.steps(); ++k)
      for (std::size_t r = 0; r < p.buses.size(); ++r) out << k << ',' << p.buses[r] << ',' << series[r][k] << '\n';
  };
  dump(p.pv_kw, pv_path);
  dump(p.load_kw, load_path);
}

namespace {

void read_series(const std::string& path, std::vector<std::string>& buses,
                 std::map<std::string, std::vector<double>>& out) {
  std::istringstream in(slurp(path));
  std::string line;
  int lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const std::vector<std::string> cells = split_csv(line);
    if (!header) {
      if (cells != std::vector<std::string>{"step", "bus", "kW"}) {
        throw input_error("ParseError", path + " line " + std::to_string(lineno) +
                                            ": expected header 'step,bus,kW'");
      }
      header = true;
      continue;
    }
    if (cells.size() != 3) {
      throw input_error("ParseError", path + " line " + std::to_string(lineno) + ": expected 3 fields");
    }
    const int step = static_cast<int>(parse_number(cells[0], lineno, "step"));
    const double v = parse_number(cells[2], lineno, "kW");
    auto& s = out[cells[1]];
    if (s.empty() && std::find(buses.begin(), buses.end(), cells[1]) == buses.end()) buses.push_back(cells[1]);
    if (step != static_cast<int>(s.size())) {
      throw input_error("ParseError", path + " line " + std::to_string(lineno) +
                                          ", column 'step': steps must be consecutive per bus");
    }
    s.push_back(v);
  }
}

}  // namespace

ProfileSet read_profiles_csv(const std::string& pv_path, const std::string& load_path) {
  std::vector<std::string> buses;
  std::map<std::string, std::vector<double>> pv, load;
  read_series(pv_path, buses, pv);
  read_series(load_path, buses, load);
  std::size_t len = 0;
  for (const auto& [b, s] : pv) len = std::max(len, s.size());
  for (const auto& [b, s] : load) len = std::max(len, s.size());
  ProfileSet out;
  out.buses = buses;
  for (const std::string& b : buses) {
    std::vector<double> a = pv.count(b) ? pv[b] : std::vector<double>(len, 0.0);
    std::vector<double> c = load.count(b) ? load[b] : std::vector<double>(len, 0.0);
    if (a.size() != len || c.size() != len) {
      throw input_error("ParseError", "profile series for bus " + b + " has a different length");
    }
    for (double v : a)
      if (v < 0.0) throw input_error("ParseError", "negative PV availability at bus " + b);
    out.pv_kw.push_back(std::move(a));
    out.load_kw.push_back(std::move(c));
  }
  return out;
}

namespace {
constexpr char kMagic[8] = {'D', 'B', 'S', 'P', 'R', 'O', 'F', '1'};

template <class T>
void put(std::ostream& o, const T& v) {
  o.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <class T>
T take(std::istream& i) {
  T v{};
  if (!i.read(reinterpret_cast<char*>(&v), sizeof(T))) throw input_error("ParseError", "truncated profile cache");
  return v;
}
}  // namespace

void write_profiles_binary(const ProfileSet& p, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("IoError", "cannot write " + path);
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kSchemaVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(p.buses.size()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(p.steps()));
  for (const std::string& b : p.buses) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(b.size()));
    out.write(b.data(), static_cast<std::streamsize>(b.size()));
  }
  for (const auto* series : {&p.pv_kw, &p.load_kw})
    for (const auto& s : *series) out.write(reinterpret_cast<const char*>(s.data()), static_cast<std::streamsize>(s.size() * sizeof(double)));
}

ProfileSet read_profiles_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("ParseError", "cannot open " + path);
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) {
    throw input_error("ParseError", path + " is not a profile cache");
  }
  const auto version = take<std::uint32_t>(in);
  if (version != kSchemaVersion) throw input_error("ParseError", "profile cache schema " + std::to_string(version));
  const auto nb = take<std::uint32_t>(in);
  const auto steps = take<std::uint32_t>(in);
  ProfileSet p;
  for (std::uint32_t r = 0; r < nb; ++r) {
    const auto len = take<std::uint32_t>(in);
    std::string b(len, '\0');
    if (!in.read(b.data(), len)) throw input_error("ParseError", "truncated profile cache");
    p.buses.push_back(b);
  }
  for (auto* series : {&p.pv_kw, &p.load_kw}) {
    series->assign(nb, std::vector<double>(steps));
    for (auto& s : *series)
      if (!in.read(reinterpret_cast<char*>(s.data()), static_cast<std::streamsize>(steps * sizeof(double))))
        throw input_error("ParseError", "truncated profile cache");
  }
  return p;
}

// ---------------------------------------------------------------- build

Scenario build_scenario(const ScenarioConfig& cfg, const std::string& base_dir) {
  cfg.validate();
  namespace fs = std::filesystem;
  auto resolve = [&](const std::string& f) {
    const fs::path p(f);
    return (p.is_absolute() ? p : fs::path(base_dir) / p).string();
  };
  Scenario sc;
  sc.config = cfg;
  if (!cfg.grid_file.empty()) sc.grid = load_grid(resolve(cfg.grid_file), cfg.slack_bus, cfg.base);
  else sc.grid = grid::GridModel::from_branches(cfg.branches, cfg.slack_bus, cfg.base);
  sc.grid.validate();
  for (const storage::StorageSpec& s : cfg.storage) sc.grid.bus_index(s.bus);
  for (const PvSpec& p : cfg.pv) sc.grid.bus_index(p.bus);
  for (const std::string& b : cfg.load_buses) sc.grid.bus_index(b);

  grid::OperatorOptions oo;
  oo.i0_fraction = cfg.i0_fraction;
  oo.i1_fraction = cfg.i1_fraction;
  sc.ops = grid::build_operators(sc.grid, oo);

  if (cfg.profiles.kind == ProfileSource::Kind::Files) {
    sc.profiles = read_profiles_csv(resolve(cfg.profiles.pv_file), resolve(cfg.profiles.load_file));
  } else {
    const int steps_per_day = static_cast<int>(std::lround(24.0 / cfg.T));
    const int days = std::max(1, (cfg.N + steps_per_day - 1) / steps_per_day);
    ProfileTargets t;
    t.pv_mwh = cfg.profiles.pv_target_mwh;
    t.load_mwh = cfg.profiles.load_target_mwh;
    t.T = cfg.T;
    sc.profiles = synthesize_profiles(cfg.profiles.seed, days, cfg.pv, cfg.load_buses, t);
  }
  sc.map = cfg.degradation_map_file.empty()
               ? storage::default_map()
               : storage::map_from_json(slurp(resolve(cfg.degradation_map_file)));
  return sc;
}

// ---------------------------------------------------------------- presets

namespace {
std::vector<double> cost_ladder() {
  std::vector<double> c;
  for (int v = 50; v <= 1000; v += 50) c.push_back(v);
  return c;
}
}  // namespace

ScenarioConfig desk_config(int N) {
  ScenarioConfig c;
  c.name = "desk";
  c.branches = {{"R1", "R2", 0.405, 0.205, 150.0, 50.0},
                {"R2", "R3", 0.405, 0.205, 150.0, 50.0}};
  c.slack_bus = "R1";
  c.load_buses = {"R2", "R3"};
  for (const char* b : {"R2", "R3"}) {
    storage::StorageSpec s;
    s.bus = b;
    s.z_max = 50.0;
    c.storage.push_back(s);
    c.pv.push_back({b, 20.0, 10.0});
  }
  c.battery_costs = cost_ladder();
  c.horizons = {6, 12, 24};
  c.H = N;
  c.c = N;
  c.N = N;
  // Two of the eighteen households of the reference area.
  c.profiles.pv_target_mwh = 465.0 * 2.0 / 18.0;
  c.profiles.load_target_mwh = 61.5 * 2.0 / 18.0;
  c.profiles.seed = 7;
  return c;
}

ScenarioConfig cigre_config(const std::string& grid_file) {
  ScenarioConfig c;
  c.name = "cigre-lv";
  c.grid_file = grid_file;
  c.slack_bus = "R1";
  for (int k = 1; k <= 18; ++k) {
    const std::string b = "R" + std::to_string(k);
    c.load_buses.push_back(b);
    storage::StorageSpec s;
    s.bus = b;
    c.storage.push_back(s);
    c.pv.push_back({b, 20.0, 10.0});
  }
  c.battery_costs = cost_ladder();
  c.H = 24;
  c.c = 6;
  c.N = 8760;
  return c;
}

}  // namespace dbs::scenario
