#include "dbs/economics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "dbs/error.hpp"
#include "dbs/scenario.hpp"

namespace dbs::economics {

double self_sufficiency(double e_load_mwh, double e_import_mwh) {
  if (!(e_load_mwh > 0.0)) throw input_error("NonPositiveLoad", "load energy must be positive");
  if (e_import_mwh < 0.0) throw input_error("InvalidEnergy", "imported energy must be non-negative");
  return (e_load_mwh - e_import_mwh) / e_load_mwh;
}

Lifetime battery_lifetime(const std::vector<double>& yearly_fade_kwh,
                          const std::vector<double>& z_kwh, double eol, int calendar_cap) {
  if (!(eol > 0.0 && eol < 1.0)) throw input_error("InvalidEol", "eol must lie in (0, 1)");
  double fade = 0.0, cap = 0.0;
  for (std::size_t i = 0; i < z_kwh.size(); ++i) {
    cap += z_kwh[i];
    fade += i < yearly_fade_kwh.size() ? std::max(yearly_fade_kwh[i], 0.0) : 0.0;
  }
  Lifetime out;
  if (cap <= 0.0 || fade <= 0.0) {
    out.years = calendar_cap;
    out.crossing = std::numeric_limits<double>::infinity();
    return out;
  }
  out.crossing = (1.0 - eol) * cap / fade;
  // Retention after m years is 1 - m fade / cap; the tolerance absorbs
  // rounding when the crossing lands on a whole year.
  const double m = std::ceil(out.crossing - 1e-9);
  out.years = static_cast<int>(std::clamp(m, 1.0, static_cast<double>(calendar_cap)));
  return out;
}

double npv(double investment, double delta_j, int m, double rate) {
  double v = -investment;
  double disc = 1.0;
  for (int k = 1; k <= m; ++k) {
    disc /= (1.0 + rate);
    v += delta_j * disc;
  }
  return v;
}

IrrResult irr(double investment, double delta_j, int m) {
  if (!(investment > 0.0)) throw input_error("InvalidInvestment", "investment must be positive");
  if (m < 1) throw input_error("InvalidLifetime", "m must be at least 1");
  IrrResult r;
  double lo = -0.99, hi = 10.0;
  double f_lo = npv(investment, delta_j, m, lo), f_hi = npv(investment, delta_j, m, hi);
  if (delta_j <= 0.0 || f_lo * f_hi > 0.0) {
    r.sign_change = false;
    r.irr = -1.0;
    return r;
  }
  const double tol = 1e-6 * investment;
  for (r.iterations = 1; r.iterations <= 200; ++r.iterations) {
    const double mid = 0.5 * (lo + hi);
    const double f = npv(investment, delta_j, m, mid);
    r.irr = mid;
    if (std::abs(f) <= tol) return r;
    // NPV decreases in the rate for positive cash flows.
    if ((f > 0.0) == (f_lo > 0.0)) {
      lo = mid;
      f_lo = f;
    } else {
      hi = mid;
    }
  }
  return r;
}

std::string results_csv_header() {
  std::ostringstream o;
  o << "# schema_version=" << scenario::kSchemaVersion << "\n";
  o << "battery_cost_eur_per_kwh,H,controller,total_capacity_kwh,investment_eur,"
       "self_sufficiency,lifetime_years,lifetime_crossing_years,npv_eur,irr,irr_found,"
       "revenue_with_storage_eur,revenue_without_storage_eur,pv_curtailed_mwh\n";
  return o.str();
}

std::string results_csv_row(const EconResult& r) {
  std::ostringstream o;
  o.precision(10);
  o << r.battery_cost << ',' << r.H << ',' << r.controller << ',' << r.total_capacity_kwh << ','
    << r.investment << ',' << r.self_sufficiency << ',' << r.lifetime_years << ','
    << r.lifetime_crossing << ',' << r.npv << ',' << r.irr << ',' << (r.irr_found ? 1 : 0) << ','
    << r.revenue_with_storage << ',' << r.revenue_without_storage << ',' << r.pv_curtailed_mwh
    << "\n";
  return o.str();
}

}  // namespace dbs::economics
