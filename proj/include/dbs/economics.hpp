#pragma once

#include <string>
#include <vector>

namespace dbs::economics {

// (E_ld - E_im) / E_ld. Throws NonPositiveLoad.
double self_sufficiency(double e_load_mwh, double e_import_mwh);

struct Lifetime {
  int years = 0;            // whole years, capped at the calendar life
  double crossing = 0.0;    // uncapped time at which retention reaches eol
};

// Smallest whole m with aggregate remaining capacity / initial <= eol,
// assuming the same fade every year; capped at `calendar_cap`.
Lifetime battery_lifetime(const std::vector<double>& yearly_fade_kwh,
                          const std::vector<double>& z_kwh, double eol = 0.8,
                          int calendar_cap = 10);

double npv(double investment, double delta_j, int m, double rate);

struct IrrResult {
  double irr = -1.0;
  bool sign_change = true;  // false: no root in the bracket, irr = -1
  int iterations = 0;
};

// Bisection on (-0.99, 10), 200 iterations at most, stopping once
// |NPV| <= 1e-6 * investment.
IrrResult irr(double investment, double delta_j, int m);

struct EconResult {
  double battery_cost = 0.0;
  int H = 0;
  std::string controller;
  double total_capacity_kwh = 0.0;
  double self_sufficiency = 0.0;
  int lifetime_years = 0;
  double lifetime_crossing = 0.0;
  double npv = 0.0;
  double irr = -1.0;
  bool irr_found = false;
  double revenue_with_storage = 0.0;     // EUR per year, -J_sub
  double revenue_without_storage = 0.0;
  double pv_curtailed_mwh = 0.0;
  double investment = 0.0;
};

std::string results_csv_header();
std::string results_csv_row(const EconResult& r);

}  // namespace dbs::economics
