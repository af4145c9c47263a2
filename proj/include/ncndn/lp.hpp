#pragma once

// Small dense linear programs: maximize c'x subject to linear rows, x >= 0.
// Two-phase tableau simplex. Meant for validation-sized instances (a few
// hundred rows), not for production workloads.

#include <utility>
#include <vector>

namespace ncndn::lp {

enum class Sense { kLessEqual, kGreaterEqual, kEqual };

struct Constraint {
  std::vector<std::pair<int, double>> terms;  // (variable, coefficient)
  Sense sense = Sense::kLessEqual;
  double rhs = 0.0;
};

struct Problem {
  int num_vars = 0;
  std::vector<double> objective;  // maximized; missing entries are zero
  std::vector<Constraint> constraints;

  int add_var(double obj = 0.0) {
    objective.resize(num_vars);
    objective.push_back(obj);
    return num_vars++;
  }
  void add(std::vector<std::pair<int, double>> terms, Sense sense, double rhs) {
    constraints.push_back({std::move(terms), sense, rhs});
  }
};

enum class Status { kOptimal, kInfeasible, kUnbounded };

struct Solution {
  Status status = Status::kInfeasible;
  double objective = 0.0;
  std::vector<double> x;
};

Solution maximize(const Problem& problem);

}  // namespace ncndn::lp
