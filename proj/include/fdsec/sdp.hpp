#pragma once

#include <vector>

#include "fdsec/lmi.hpp"

namespace fdsec {

struct SdpOptions {
  double feas_tol = 1e-8;   // block eigenvalue / linear slack tolerance
  double gap_tol = 1e-7;    // relative duality gap at termination
  int max_iterations = 200;
  double step_fraction = 0.98;
};

enum class SdpStatus { Optimal, Infeasible, NumericalFailure };

struct SdpSolution {
  SdpStatus status = SdpStatus::NumericalFailure;
  Eigen::VectorXd x;  // scalarized parameter vector
  double objective = 0.0;
  double duality_gap = 0.0;      // relative
  double max_violation = 0.0;    // re-evaluated block/linear infeasibility
  double infeasibility_margin = 0.0;  // relaxation optimum when infeasible
  int iterations = 0;

  // Cone multipliers at the optimum. var_duals has one entry per variable
  // (1x1 for nonnegative scalars, empty for free scalars); block_duals one per
  // added matrix block; linear_duals one per added scalar constraint, with the
  // multiplier of "expr <= 0" nonnegative and equality duals sign-free.
  std::vector<ComplexMatrix> var_duals;
  std::vector<ComplexMatrix> block_duals;
  std::vector<double> linear_duals;
};

struct FeasibilityProbe {
  bool feasible = false;
  double margin = 0.0;  // relaxation optimum s*; feasible iff s* <= feas_tol
  Eigen::VectorXd x;    // relaxation minimizer; strictly feasible when s* < 0
  SdpStatus status = SdpStatus::NumericalFailure;
  int iterations = 0;
};

// Minimizes the problem's objective. Runs the feasibility relaxation first;
// status Infeasible carries the positive relaxation optimum as the margin.
// A marginal verdict (margin within 100x feas_tol) is re-resolved at tight
// gap tolerance before Infeasible is reported, so feasible sets with no
// strict interior classify correctly.
SdpSolution solve(const LmiProblem& p, const SdpOptions& opts = {});

// solve, retried once with tolerances loosened tenfold on a numerical
// failure.
SdpSolution solve_resolved(const LmiProblem& p, const SdpOptions& opts = {});

// Feasibility relaxation only: minimize s with every block shifted by s*I and
// every scalar inequality relaxed by s.
FeasibilityProbe probe_feasible(const LmiProblem& p, const SdpOptions& opts = {});

// probe_feasible with two fallbacks: a numerical failure retries once with
// tolerances loosened tenfold, and an infeasible verdict whose margin sits
// within 100x feas_tol re-runs at tight gap tolerance, separating optimizer
// slack from true infeasibility on problems with no strict interior.
FeasibilityProbe probe_feasible_resolved(const LmiProblem& p,
                                         const SdpOptions& opts = {});

bool check_feasible(const LmiProblem& p, const SdpOptions& opts = {});

// Largest violation over all constraints of p at x, measured on the complex
// side: negated minimum block eigenvalue, linear slack, |equality residual|.
double max_constraint_violation(const LmiProblem& p, const Eigen::VectorXd& x);

}  // namespace fdsec
