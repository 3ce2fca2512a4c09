#pragma once

#include <iosfwd>
#include <string>

#include "dbs/lp/lp_problem.hpp"

namespace dbs::lp {

// Fixed-format MPS. Row and column names are generated (R0000001, C0000001)
// so they fit the 8-character fields; the original labels are emitted as
// comment lines ahead of the ROWS section.
void write_mps(const LpProblem& problem, std::ostream& out,
               const std::string& name = "DBSLP");
void write_mps_file(const LpProblem& problem, const std::string& path,
                    const std::string& name = "DBSLP");

}  // namespace dbs::lp
