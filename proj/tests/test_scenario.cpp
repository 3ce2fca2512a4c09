#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "dbs/error.hpp"
#include "dbs/scenario.hpp"
#include "fixtures.hpp"

using namespace dbs;
using namespace dbs::scenario;

namespace {

const std::string kGrid = std::string(DBS_DATA_DIR) + "/cigre_lv.csv";

int at(int day, int hour) { return day * 24 + hour; }  // day 0 = Monday

std::string tmp(const std::string& leaf) {
  return (std::filesystem::temp_directory_path() / ("dbs_test_" + leaf)).string();
}

}  // namespace

TEST_CASE("tariff calendar spot checks") {
  const TariffCalendar cal;
  struct Spot {
    int step;
    double import_price;
  };
  const Spot spots[] = {
      {at(2, 10), 246.0},   // Wednesday 10:00
      {at(6, 10), 131.5},   // Sunday 10:00
      {at(0, 5), 131.5},    // Monday 05:00
      {at(0, 6), 246.0},    // Monday 06:00
      {at(0, 21), 246.0},
      {at(0, 22), 131.5},
      {at(5, 12), 246.0},   // Saturday
      {at(5, 23), 131.5},
      {at(7, 10), 246.0},   // next Monday
      {at(364, 3), 131.5},
  };
  for (const Spot& s : spots) {
    const TariffPoint p = tariff_at(cal, s.step);
    CHECK(p.import_price == s.import_price);
    CHECK(p.export_price == 50.0);
  }
  // Half-hour steps address wall-clock time.
  CHECK(tariff_at(cal, 2 * 6, 0.5).import_price == 246.0);
  CHECK(tariff_at(cal, 2 * 6 - 1, 0.5).import_price == 131.5);
}

TEST_CASE("shipped grid reproduces the line table") {
  const grid::GridModel g = load_grid(kGrid);
  const grid::GridModel ref = fixture::cigre();
  REQUIRE(g.num_branches() == 17);
  CHECK(g.num_buses() == 18);
  int laterals = 0;
  for (int l = 0; l < 17; ++l) {
    const grid::Branch& a = g.branches[l];
    const grid::Branch& b = ref.branches[l];
    CHECK(a.from == b.from);
    CHECK(a.to == b.to);
    CHECK(a.r_ohm_per_km == b.r_ohm_per_km);
    CHECK(a.x_ohm_per_km == b.x_ohm_per_km);
    CHECK(a.length_m == b.length_m);
    CHECK(a.i_max_A == b.i_max_A);
    if (a.r_ohm_per_km == 2.05) ++laterals;
  }
  CHECK(laterals == 8);
  CHECK(g.branches[0].r_ohm_per_km == 0.405);
  CHECK(g.branches[0].length_m == 35.0);
  CHECK(g.branches[0].i_max_A == 398.0);
  CHECK(g.slack_index() == g.bus_index("R1"));
}

TEST_CASE("grid CSV errors name their location") {
  const std::string good = "start_node,end_node,r_ohm_per_km,x_ohm_per_km,length_m,i_max_A\n";
  try {
    parse_grid_csv("start_node,end_node,r_ohm_per_km,x_ohm_per_kn,length_m,i_max_A\nR1,R2,1,1,1,1\n");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.kind() == "ParseError");
    CHECK(std::string(e.what()).find("x_ohm_per_km") != std::string::npos);
  }
  try {
    parse_grid_csv(good + "R1,R2,0.4,0.2,abc,100\n");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.kind() == "ParseError");
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    CHECK(std::string(e.what()).find("length_m") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_grid_csv(good + "R1,R2,0.4,0.2,10\n"), Error);
  try {
    parse_grid_csv(good + "R1,R2,0.4,0.2,10,100\nR2,R3,0.4,0.2,10,100\nR3,R1,0.4,0.2,10,100\n");
    FAIL("expected NotRadial");
  } catch (const Error& e) {
    CHECK(e.kind() == "NotRadial");
  }
}

TEST_CASE("synthetic profiles hit their targets") {
  std::vector<PvSpec> pv;
  std::vector<std::string> loads;
  for (int k = 1; k <= 18; ++k) {
    pv.push_back({"R" + std::to_string(k), 20.0, 10.0});
    loads.push_back("R" + std::to_string(k));
  }
  const ProfileSet p = synthesize_profiles(3, 365, pv, loads, {});
  REQUIRE(p.steps() == 8760);
  CHECK(std::abs(p.pv_total_mwh() - 465.0) <= 0.001 * 465.0);
  CHECK(std::abs(p.load_total_mwh() - 61.5) <= 0.001 * 61.5);
  for (std::size_t r = 0; r < p.buses.size(); ++r) {
    for (int d = 0; d < 365; ++d) {
      CHECK(p.pv_kw[r][d * 24 + 2] == 0.0);
      CHECK(p.pv_kw[r][d * 24 + 23] == 0.0);
    }
    for (double v : p.pv_kw[r]) {
      CHECK(v >= 0.0);
      CHECK(v <= 20.0);
    }
    for (double v : p.load_kw[r]) CHECK(v > 0.0);
  }
  // Daylight production is not flat.
  CHECK(p.pv_kw[0][24 * 172 + 12] > p.pv_kw[0][24 * 172 + 7]);

  const ProfileSet q = synthesize_profiles(3, 365, pv, loads, {});
  CHECK(q.pv_kw == p.pv_kw);
  CHECK(q.load_kw == p.load_kw);
  const ProfileSet other = synthesize_profiles(4, 365, pv, loads, {});
  CHECK(other.pv_kw != p.pv_kw);
}

TEST_CASE("profile access wraps past the end") {
  const ProfileSet p = synthesize_profiles(1, 2, {{"B", 10.0, 0.0}}, {"B"}, {});
  REQUIRE(p.steps() == 48);
  for (int k = 0; k < 24; ++k) {
    CHECK(p.pv(0, 48 + k) == p.pv(0, k));
    CHECK(p.load(0, 48 + k) == p.load(0, k));
  }
}

TEST_CASE("profile CSV and cache round-trip") {
  const ProfileSet p = synthesize_profiles(9, 3, {{"A", 10.0, 0.0}, {"B", 5.0, 0.0}}, {"B", "C"}, {});
  const std::string pv = tmp("pv.csv"), ld = tmp("load.csv"), bin = tmp("prof.bin");
  write_profiles_csv(p, pv, ld);
  const ProfileSet c = read_profiles_csv(pv, ld);
  CHECK(c.buses == p.buses);
  CHECK(c.pv_kw == p.pv_kw);
  CHECK(c.load_kw == p.load_kw);
  write_profiles_binary(p, bin);
  const ProfileSet b = read_profiles_binary(bin);
  CHECK(b.buses == p.buses);
  CHECK(b.pv_kw == p.pv_kw);
  CHECK(b.load_kw == p.load_kw);
  {
    std::ofstream o(bin, std::ios::binary);
    o << "garbage";
  }
  CHECK_THROWS_AS(read_profiles_binary(bin), Error);
  for (const auto& f : {pv, ld, bin}) std::remove(f.c_str());
}

TEST_CASE("config JSON round-trip is canonical") {
  ScenarioConfig c = cigre_config("cigre_lv.csv");
  c.tariff.pv_cost = 1.5;
  c.profiles.kind = ProfileSource::Kind::Files;
  c.profiles.pv_file = "pv.csv";
  const std::string a = to_json(c);
  const ScenarioConfig back = from_json(a);
  CHECK(to_json(back) == a);
  CHECK(back.storage.size() == 18);
  CHECK(back.pv[3].q_max == 10.0);
  CHECK(back.H == 24);
  CHECK(back.c == 6);
  CHECK(back.battery_costs.size() == 20);

  const ScenarioConfig d = desk_config();
  CHECK(to_json(from_json(to_json(d))) == to_json(d));
  CHECK(from_json(to_json(d)).branches.size() == 2);
}

TEST_CASE("config defaults and validation") {
  const ScenarioConfig c = from_json(R"({"grid_file": "g.csv"})");
  CHECK(c.N == 8760);
  CHECK(c.c == 6);
  CHECK(c.T == 1.0);
  CHECK(c.epsilon == 0.01);
  CHECK(c.v_min == 0.9);
  CHECK(c.v_max == 1.1);
  CHECK(c.tariff.import_high == 246.0);
  CHECK(c.tariff.import_low == 131.5);
  CHECK(c.tariff.export_price == 50.0);
  CHECK_NOTHROW(c.validate());

  ScenarioConfig bad = c;
  bad.N = 8761;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = c;
  bad.H = 3;
  CHECK_THROWS_AS(bad.validate(), Error);
  CHECK_THROWS_AS(from_json("{not json"), Error);
  CHECK_THROWS_AS(from_json(R"({"profiles": {"kind": "weather"}})"), Error);
}

TEST_CASE("scenario build resolves files relative to the config") {
  const ScenarioConfig cfg = cigre_config("cigre_lv.csv");
  ScenarioConfig small = cfg;
  small.N = 48;
  small.H = 24;
  const Scenario sc = build_scenario(small, DBS_DATA_DIR);
  CHECK(sc.grid.num_buses() == 18);
  CHECK(sc.profiles.steps() == 48);
  CHECK(sc.map.n_p() == 4);
  CHECK_THROWS_AS(build_scenario(small, "/nonexistent"), Error);

  const Scenario desk = build_scenario(desk_config());
  CHECK(desk.grid.num_buses() == 3);
  CHECK(desk.profiles.steps() == 48);
}
