#include "dbs/lp/mps.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "dbs/error.hpp"

namespace dbs::lp {
namespace {

std::string gen_name(char prefix, int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%c%07d", prefix, i + 1);
  return buf;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void field_line(std::ostream& out, const std::string& f1, const std::string& f2,
                const std::string& f3, const std::string& f4) {
  char buf[96];
  std::snprintf(buf, sizeof buf, " %-2s %-8s  %-8s  %12s", f1.c_str(),
                f2.c_str(), f3.c_str(), f4.c_str());
  out << buf << '\n';
}

}  // namespace

void write_mps(const LpProblem& p, std::ostream& out, const std::string& name) {
  p.validate();
  const int n = p.num_cols();
  const int meq = p.num_eq();
  const int m = meq + p.num_ineq();
  auto row_name = [](int i) { return gen_name('R', i); };

  for (int i = 0; i < m; ++i) {
    const std::string& label = i < meq ? p.eq_names[i] : p.ineq_names[i - meq];
    if (!label.empty()) out << "* " << row_name(i) << " " << label << '\n';
  }
  for (int j = 0; j < n; ++j) {
    if (j < static_cast<int>(p.col_names.size()) && !p.col_names[j].empty()) {
      out << "* " << gen_name('C', j) << " " << p.col_names[j] << '\n';
    }
  }
  if (p.objective_offset != 0.0) {
    out << "* objective offset " << num(p.objective_offset) << '\n';
  }

  out << "NAME          " << name.substr(0, 8) << '\n';
  out << "ROWS\n";
  out << " N  COST\n";
  for (int i = 0; i < m; ++i) {
    const char* t = i < meq ? "E"
                    : p.ineq_sense[i - meq] == RowSense::LessEqual ? "L"
                                                                   : "G";
    out << " " << t << "  " << row_name(i) << '\n';
  }

  // Column-major pass over the two CSR blocks.
  std::vector<std::vector<std::pair<int, double>>> cols(n);
  for (int r = 0; r < meq; ++r) {
    for (int k = p.eq.start[r]; k < p.eq.start[r + 1]; ++k) {
      cols[p.eq.index[k]].emplace_back(r, p.eq.value[k]);
    }
  }
  for (int r = 0; r < p.num_ineq(); ++r) {
    for (int k = p.ineq.start[r]; k < p.ineq.start[r + 1]; ++k) {
      cols[p.ineq.index[k]].emplace_back(meq + r, p.ineq.value[k]);
    }
  }
  out << "COLUMNS\n";
  for (int j = 0; j < n; ++j) {
    const std::string cn = gen_name('C', j);
    if (p.objective[j] != 0.0 || cols[j].empty()) {
      field_line(out, "", cn, "COST", num(p.objective[j]));
    }
    for (auto [r, v] : cols[j]) field_line(out, "", cn, row_name(r), num(v));
  }

  out << "RHS\n";
  for (int i = 0; i < m; ++i) {
    const double b = i < meq ? p.eq_rhs[i] : p.ineq_rhs[i - meq];
    if (b != 0.0) field_line(out, "", "RHS", row_name(i), num(b));
  }

  out << "BOUNDS\n";
  for (int j = 0; j < n; ++j) {
    const std::string cn = gen_name('C', j);
    const double lo = p.lower[j], up = p.upper[j];
    const bool flo = std::isfinite(lo), fup = std::isfinite(up);
    if (flo && fup && lo == up) {
      field_line(out, "FX", "BND", cn, num(lo));
    } else if (!flo && !fup) {
      field_line(out, "FR", "BND", cn, "");
    } else {
      if (!flo) field_line(out, "MI", "BND", cn, "");
      else if (lo != 0.0) field_line(out, "LO", "BND", cn, num(lo));
      if (fup) field_line(out, "UP", "BND", cn, num(up));
    }
  }
  out << "ENDATA\n";
}

void write_mps_file(const LpProblem& p, const std::string& path,
                    const std::string& name) {
  std::ofstream f(path);
  if (!f) throw input_error("IoError", "cannot open " + path + " for writing");
  write_mps(p, f, name);
}

}  // namespace dbs::lp
