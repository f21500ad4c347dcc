#pragma once

#include <array>
#include <vector>

#include "fdsec/perfect.hpp"

namespace fdsec {

// Auxiliary variables of one robust design: the ten worst-case quadratic
// bounds and their sphere multipliers. Bound index -> quantity:
//   [0] max (eaves1+e) Phi1    [1] max (eaves2+e) Phi2     leakage numerator
//   [2] min (eaves1+e) Psi1    [3] min (eaves2+e) Psi2     leakage denominator
//   [4] min (direct1+e) Phi1   [7] min (direct2+e) Phi2    message numerators
//   [6] max (direct1+e) Psi1   [9] max (direct2+e) Psi2    own-jamming spill
//   [5] max e (Phi2+Psi2)      [8] max e (Phi1+Psi1)       self-interference
// where each "v X" stands for the quadratic form (v+e) X (v+e)^* and the max
// or min runs over the matching error ball; [5] and [8] are pure error terms
// at the receivers of messages 1 and 2.
struct RobustAux {
  std::array<double, 10> bound{};
  std::array<double, 10> lambda{};  // 0 where the error bound is zero
};

struct RobustLmis {
  LmiProblem problem;
  std::array<VarRef, 2> signal, jamming;
  std::array<VarRef, 10> bound;
  std::array<VarRef, 10> lambda;  // id -1 where a nominal row replaced a block
};

// Worst-case feasibility system at rate targets (r1, r2) and eavesdropper
// SINR bound t. Each uncertain quadratic form gets a bound variable tied
// down by an error-ball certificate block (or by the nominal value when its
// error bound is zero); the leakage, rate, and trace couplings then run over
// the bounds.
// Scalar rows in order: leakage, rate1, rate2, trace1, trace2, then nominal
// replacement rows in bound-index order, then jamming pins when disabled.
RobustLmis build_robust_lmis(const SystemInstance& inst, double r1, double r2,
                             double t, bool allow_jamming = true);

// Same system with the couplings given as SINR thresholds directly
// (gamma = 2^r - 1); gamma_s2 caps the link into receiver S2 and gamma_s1
// the link into S1. An infinite gamma_eaves omits the eavesdropper coupling
// row together with bound variables 1-4 and their blocks (their handles come
// back with id -1), shifting the remaining rows up one.
RobustLmis build_sinr_lmis(const SystemInstance& inst, double gamma_eaves,
                           double gamma_s2, double gamma_s1,
                           bool allow_jamming = true);

struct RobustDesign {
  CovarianceDesign cov;
  RobustAux aux;
};

// Reads covariances and auxiliary bound values out of a solution vector;
// omitted bounds come back as zero.
RobustDesign extract_robust_design(const RobustLmis& lmis,
                                   const Eigen::VectorXd& x);

struct RobustLeakageResult {
  CellStatus status = CellStatus::NumericalFailure;
  double t_min = 0.0;            // certified worst-case eavesdropper SINR
  double leakage_upper = 0.0;    // log2(1 + t_min)
  std::array<double, 2> rate_lower{};  // certified message-rate floors
  double sum_lower = 0.0;  // max(0, rate_lower sum - leakage_upper)
  RobustDesign design;
};

// Bisects t over [0, worst-case full-power SINR]; certificates come from the
// bound variables of the stored feasible design.
RobustLeakageResult robust_min_leakage(const SystemInstance& inst, double r1,
                                       double r2,
                                       const SolverOptions& opts = {},
                                       bool allow_jamming = true);

struct RobustSweepCell {
  int k = 0, l = 0;
  double r1 = 0.0, r2 = 0.0;  // rate targets
  CellStatus status = CellStatus::NumericalFailure;
  double leakage_upper = 0.0;
  std::array<double, 2> rate_lower{};
  double sum_lower = 0.0;
  RobustDesign design;
};

struct RobustSweepResult {
  int k_steps = 0, l_steps = 0;
  CapacityBounds caps;
  std::vector<RobustSweepCell> cells;
  int best_index = -1;
  double best_sum = 0.0;
};

// Certified-rate sweep over [0, caps.direct[0]] x [0, caps.direct[1]]. An
// axis whose worst-case capacity is zero collapses to the single target 0.
// Cells near full rate can come back InfeasibleAtCapacity when nonzero
// self-interference error makes the decoupled caps unreachable jointly.
RobustSweepResult robust_max_sum_secrecy(const SystemInstance& inst,
                                         int k_steps, int l_steps,
                                         const SolverOptions& opts = {});

// Cell boxes for region_boundary: certified floors and sum per solved cell.
std::vector<SweepCell> region_cells(const RobustSweepResult& sweep);

}  // namespace fdsec
