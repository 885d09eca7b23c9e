#pragma once

// Small conic programs with known answers, used by `panoma validate-solver`
// and the test suite.

#include <string>
#include <vector>

#include "panoma/conic.hpp"

namespace panoma::conic {

struct SolverCheck {
  std::string name;
  ConicProgram program;
  SolveStatus expected = SolveStatus::optimal;
  double objective = 0.0; // only meaningful when optimal
};

std::vector<SolverCheck> solver_checks();

struct CheckOutcome {
  bool pass = false;
  SolveResult result;
  double error = 0.0; // absolute objective error for optimal cases
};

CheckOutcome run_check(const SolverCheck &c, double tol = 1e-6, const SolverSettings &settings = {});

} // namespace panoma::conic
