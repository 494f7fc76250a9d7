#include "stlreach/milp.hpp"

#include "simplex_impl.hpp"
#include "stlreach/errors.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

namespace stlreach {

int MilpProblem::add_var(double lo_, double hi_, double obj, bool binary,
                         std::string name) {
  if (lo_ > hi_) throw ConfigError("variable bounds inverted: " + name);
  if (binary && (lo_ < 0.0 || hi_ > 1.0))
    throw ConfigError("binary variable bounds must lie in [0,1]: " + name);
  lo.push_back(lo_);
  hi.push_back(hi_);
  objective.push_back(obj);
  is_binary.push_back(binary);
  names.push_back(std::move(name));
  return num_vars() - 1;
}

void MilpProblem::add_row(LinRow row) {
  for (auto [v, c] : row.terms) {
    if (v < 0 || v >= num_vars()) throw ConfigError("row references unknown variable");
    if (!std::isfinite(c)) throw ConfigError("non-finite row coefficient");
  }
  if (!std::isfinite(row.rhs)) throw ConfigError("non-finite row rhs");
  rows.push_back(std::move(row));
}

double MilpProblem::eval_row(const LinRow &row, const std::vector<double> &x) const {
  double v = 0.0;
  for (auto [j, c] : row.terms) v += c * x[j];
  return v;
}

double MilpProblem::infeasibility(const std::vector<double> &x) const {
  double worst = 0.0;
  for (int j = 0; j < num_vars(); ++j) {
    worst = std::max(worst, lo[j] - x[j]);
    worst = std::max(worst, x[j] - hi[j]);
  }
  for (const auto &row : rows) {
    double v = eval_row(row, x);
    switch (row.rel) {
    case Rel::LE: worst = std::max(worst, v - row.rhs); break;
    case Rel::GE: worst = std::max(worst, row.rhs - v); break;
    case Rel::EQ: worst = std::max(worst, std::abs(v - row.rhs)); break;
    }
  }
  return worst;
}

LpSolution solve_lp(const MilpProblem &p) {
  detail::Simplex sx(p);
  LpSolution out;
  switch (sx.solve_primal()) {
  case LpStatus::Optimal:
    out.status = LpStatus::Optimal;
    sx.get_solution(out.x);
    out.objective = sx.objective();
    break;
  case LpStatus::Infeasible:
    out.status = LpStatus::Infeasible;
    break;
  case LpStatus::Unbounded:
    out.status = LpStatus::Unbounded;
    break;
  }
  out.iterations = sx.iterations();
  return out;
}

void MilpProblem::write_mps(const std::string &path) const {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open for writing: " + path);
  os << "NAME          STLPLAN\n";
  os << "ROWS\n";
  os << " N  COST\n";
  std::vector<std::string> row_names(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    row_names[i] = "R" + std::to_string(i);
    char rel = rows[i].rel == Rel::LE ? 'L' : rows[i].rel == Rel::GE ? 'G' : 'E';
    os << " " << rel << "  " << row_names[i] << "\n";
  }
  // Column-major coefficient lists.
  std::vector<std::vector<std::pair<int, double>>> cols(num_vars());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (auto [v, c] : rows[i].terms) cols[v].push_back({static_cast<int>(i), c});
  os << "COLUMNS\n";
  bool in_int = false;
  char buf[160];
  for (int j = 0; j < num_vars(); ++j) {
    if (is_binary[j] != in_int) {
      os << "    MARKER                 'MARKER'                 "
         << (is_binary[j] ? "'INTORG'" : "'INTEND'") << "\n";
      in_int = is_binary[j];
    }
    std::string vn = "V" + std::to_string(j);
    if (objective[j] != 0.0) {
      std::snprintf(buf, sizeof buf, "    %-10s%-10s%.12g\n", vn.c_str(), "COST",
                    objective[j]);
      os << buf;
    }
    for (auto [r, c] : cols[j]) {
      std::snprintf(buf, sizeof buf, "    %-10s%-10s%.12g\n", vn.c_str(),
                    row_names[r].c_str(), c);
      os << buf;
    }
  }
  if (in_int)
    os << "    MARKER                 'MARKER'                 'INTEND'\n";
  os << "RHS\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].rhs == 0.0) continue;
    std::snprintf(buf, sizeof buf, "    %-10s%-10s%.12g\n", "RHS",
                  row_names[i].c_str(), rows[i].rhs);
    os << buf;
  }
  os << "BOUNDS\n";
  for (int j = 0; j < num_vars(); ++j) {
    std::string vn = "V" + std::to_string(j);
    if (std::isfinite(lo[j])) {
      std::snprintf(buf, sizeof buf, " LO %-10s%-10s%.12g\n", "BND", vn.c_str(), lo[j]);
      os << buf;
    } else {
      std::snprintf(buf, sizeof buf, " MI %-10s%-10s\n", "BND", vn.c_str());
      os << buf;
    }
    if (std::isfinite(hi[j])) {
      std::snprintf(buf, sizeof buf, " UP %-10s%-10s%.12g\n", "BND", vn.c_str(), hi[j]);
      os << buf;
    }
  }
  os << "ENDATA\n";
}

} // namespace stlreach
