#pragma once

#include <array>
#include <string>
#include <vector>

#include "fdsec/perfect.hpp"

namespace fdsec {

// Lagrange multipliers of the fixed-rate leakage-minimization problem:
// lambda per power cap, nu per rate floor, mu on the leakage coupling, and
// one PSD cone dual per covariance.
struct KktMultipliers {
  std::array<double, 2> lambda{};  // power caps
  double mu = 0.0;                 // leakage coupling
  std::array<double, 2> nu{};      // rate floors
  std::array<HermitianMatrix, 2> signal_dual;   // cone dual of signal[u]
  std::array<HermitianMatrix, 2> jamming_dual;  // cone dual of jamming[u]
};

// Residuals of the fifteen first-order optimality conditions, all expected
// ~0 at a converged optimum:
//   [0]      worst primal constraint violation
//   [1]-[2]  |lambda_u * (power used - P_u)|
//   [3]-[6]  |Tr(dual * cov)| for signal1, jamming1, signal2, jamming2
//   [7]      |mu * (leakage numerator - t * denominator)|
//   [8]-[9]  |nu_u * rate-floor slack|
//   [10]     |mu * (N0 + jamming power at the eavesdropper) - 1|
//   [11]-[14] Frobenius defect of each cone dual against its stationarity
//             expression, in the order of [3]-[6]
struct KktReport {
  std::array<double, 15> residual{};
  double max_residual = 0.0;
};

// Pure evaluator; throws std::invalid_argument when a dual or primal matrix
// is missing or sized against the instance.
KktReport kkt_residuals(const SystemInstance& inst, double r1, double r2,
                        const CovarianceDesign& primal,
                        const KktMultipliers& duals, double t);

// Multiplier recovery at a fixed cap t: re-solve with the leakage numerator
// minus t times the jamming part as the objective, then scale the engine's
// duals by mu = 1/(N0 + jamming power at the eavesdropper). The objective
// optimum is ~0 exactly when t is the cell's minimum feasible cap.
struct DualExtraction {
  bool ok = false;
  KktMultipliers duals;
  CovarianceDesign primal;
  double objective = 0.0;
};
DualExtraction extract_duals(const SystemInstance& inst, double r1, double r2,
                             double t, const SdpOptions& opts = {});

enum class CheckVerdict { Pass, Fail, Indeterminate };

struct RankReport {
  CheckVerdict verdict = CheckVerdict::Indeterminate;
  std::string note;
};

// Rank structure implied by the active-set pattern of user u's duals. With
// the power cap decisively active (lambda_u above the dead band): a nonzero
// signal covariance must be rank one, and so must a nonzero jamming
// covariance when t > zeta. With the cap decisively slack: the signal
// covariance has rank at most M_u - 1, its range orthogonal to the
// eavesdropper vector (that direction carries at most a 1e-6 fraction of the
// spectral peak), and t stays within 2*zeta of zero. Inside the dead band,
// or when the cap is slack while the eavesdropper and direct channels are
// collinear, the verdict is Indeterminate.
RankReport rank_consistency(const SystemInstance& inst,
                            const CovarianceDesign& primal,
                            const KktMultipliers& duals, int user, double t,
                            double zeta);

struct CellKktReport {
  int k = 0, l = 0;
  double r1 = 0.0, r2 = 0.0;
  double t = 0.0;  // refined minimum cap the duals certify
  bool has_duals = false;
  std::string note;  // why duals are unavailable, when they are
  KktReport residuals;
  std::array<RankReport, 2> rank;
};

// Refines the cell's minimum cap from its bisection bracket down to
// refine_tol (the slackness products need the cap at full precision, not at
// the sweep's zeta), extracts duals there, and evaluates both reports.
// A rate floor sitting at its capacity cap pins that user's covariance to a
// single point; no strictly feasible design exists, bounded multipliers need
// not, and the cell reports duals unavailable rather than a failure.
CellKktReport verify_cell(const SystemInstance& inst, double r1, double r2,
                          double t_min, const SolverOptions& opts = {},
                          double refine_tol = 1e-9);

// verify_cell over every solved cell of a sweep, parallel over cells.
std::vector<CellKktReport> verify_sweep(const SystemInstance& inst,
                                        const SweepResult& sweep,
                                        const SolverOptions& opts = {});

// One line per cell plus a tally; residuals compare against residual_tol.
std::string format_kkt_report(const std::vector<CellKktReport>& cells,
                              double residual_tol = 1e-6);

}  // namespace fdsec
