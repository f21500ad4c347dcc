#pragma once

#include <array>
#include <vector>

#include "fdsec/channel.hpp"
#include "fdsec/lmi.hpp"
#include "fdsec/sdp.hpp"

namespace fdsec {

enum class CellStatus { Solved, InfeasibleAtCapacity, NumericalFailure };

struct SolverOptions {
  double zeta = 1e-4;  // bisection stops once the bracket is this wide
  int threads = 1;     // grid sweeps only; single solves always run inline
  SdpOptions sdp;
};

// Variable handles for one assembled design problem.
struct DesignLmis {
  LmiProblem problem;
  std::array<VarRef, 2> signal;
  std::array<VarRef, 2> jamming;
};

// Feasibility system for message rates (r1, r2) with the eavesdropper SINR
// capped at t. Scalar rows in order: leakage, rate1, rate2, trace1, trace2.
// With leakage_as_objective the leakage row is dropped (rows shift up one)
// and the leakage numerator minus t times the jamming part is minimized.
DesignLmis build_design_lmis(const SystemInstance& inst, double r1, double r2,
                             double t, bool leakage_as_objective = false);

// Reads the four covariances out of a solution vector, projecting each onto
// the PSD cone to absorb solver slack.
CovarianceDesign design_from_vector(const DesignLmis& lmis,
                                    const Eigen::VectorXd& x);

// Same extraction for any problem holding the four covariances.
CovarianceDesign project_design(const LmiProblem& problem,
                                const std::array<VarRef, 2>& signal,
                                const std::array<VarRef, 2>& jamming,
                                const Eigen::VectorXd& x);

struct LeakageResult {
  CellStatus status = CellStatus::NumericalFailure;
  double t_min = 0.0;       // smallest feasible eavesdropper SINR
  double leakage = 0.0;     // log2(1 + t_min)
  CovarianceDesign design;  // feasible at t_min; meaningful only when Solved
};

// Bisects t over [0, full-power SINR]. The returned upper end is feasible,
// within zeta of an infeasible point (unless 0 itself is feasible), and the
// stored design certifies it.
LeakageResult min_leakage_at_rates(const SystemInstance& inst, double r1,
                                   double r2, const SolverOptions& opts = {});

struct SweepCell {
  int k = 0, l = 0;
  double r1 = 0.0, r2 = 0.0;
  CellStatus status = CellStatus::NumericalFailure;
  double leakage = 0.0;
  double sum_secrecy = 0.0;  // max(0, r1 + r2 - leakage)
  CovarianceDesign design;
};

struct SweepResult {
  int k_steps = 0, l_steps = 0;
  CapacityBounds caps;
  std::vector<SweepCell> cells;  // row-major, (k_steps+1) x (l_steps+1)
  int best_index = -1;
  double best_sum = 0.0;
};

// Evaluates min_leakage_at_rates over the rate grid covering
// [0, caps.direct[0]] x [0, caps.direct[1]]. Ties on the best sum prefer
// larger k+l, then larger k.
SweepResult max_sum_secrecy(const SystemInstance& inst, int k_steps,
                            int l_steps, const SolverOptions& opts = {});

struct RegionPoint {
  double r1 = 0.0;
  double r2 = 0.0;
};

// Outer boundary of the union over solved cells of
// {(x, y) >= 0 : x <= r1, y <= r2, x + y <= sum_secrecy}, walked from the
// y-axis to the x-axis with collinear runs merged; ends with a drop to y = 0.
std::vector<RegionPoint> region_boundary(const std::vector<SweepCell>& cells);
std::vector<RegionPoint> region_boundary(const SweepResult& sweep);

// True when inner's region sits inside outer's, allowing `slack` per axis.
bool region_contains(const std::vector<RegionPoint>& outer,
                     const std::vector<RegionPoint>& inner, double slack);

}  // namespace fdsec
