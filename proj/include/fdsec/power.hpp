#pragma once

#include <limits>
#include <vector>

#include "fdsec/robust.hpp"

namespace fdsec {

// Worst-case SINR targets of a power-minimization run. gamma_s2 floors the
// link into receiver S2 (message 1), gamma_s1 the link into S1 (message 2);
// gamma_eaves caps the best-case eavesdropper SINR, infinity meaning
// uncapped (the coupling is omitted rather than approximated).
struct SinrSpec {
  double gamma_eaves = std::numeric_limits<double>::infinity();
  double gamma_s2 = 0.0;
  double gamma_s1 = 0.0;

  void validate() const;
};

enum class PowerStatus { Solved, Infeasible, NumericalFailure };

struct PowerResult {
  PowerStatus status = PowerStatus::NumericalFailure;
  double total_power = 0.0;  // trace of the returned design
  double margin = 0.0;       // relaxation optimum when infeasible
  RobustDesign design;
};

// Minimizes total transmit power subject to the SINR targets under the
// per-user budget caps; a single solve, no bisection. Zero floors return the
// all-zero design without touching the solver.
PowerResult min_total_power(const SystemInstance& inst, const SinrSpec& spec,
                            const SolverOptions& opts = {});

struct PowerSweepPoint {
  double floor = 0.0;  // symmetric user floor applied to both links
  PowerStatus status = PowerStatus::NumericalFailure;
  double total_power = 0.0;
  double margin = 0.0;
};

// min_total_power at each symmetric floor with a shared eavesdropper cap.
// Feasible totals are nondecreasing in the floor.
std::vector<PowerSweepPoint> power_vs_sinr_sweep(
    const SystemInstance& inst, const std::vector<double>& floors,
    double gamma_eaves, const SolverOptions& opts = {});

}  // namespace fdsec
