#pragma once

#include <array>

#include "fdsec/channel.hpp"

namespace fdsec {

// Power split found by the scalar oracle, in the same units as the budgets.
struct ScalarSplit {
  std::array<double, 2> signal{};
  std::array<double, 2> jamming{};
};

struct ScalarOracleResult {
  double sum_max = 0.0;
  ScalarSplit best{};
};

// Brute-force reference for single-antenna instances: grids each user's power
// split over the simplex signal + jamming <= budget with `power_grid_steps`
// subdivisions per axis and evaluates the nominal sum secrecy expression at
// every pair of splits. Error bounds on the instance are ignored. Throws
// std::invalid_argument for multi-antenna users or a nonpositive grid.
ScalarOracleResult scalar_sum_secrecy_oracle(const SystemInstance& inst,
                                             int power_grid_steps,
                                             int threads = 1);

// Deterministic worst-case rates over the six error balls: every ball is
// scanned at radii {0, eps/2, eps} times a uniform direction grid (phase
// circle for one antenna, three-angle sphere parameterization for two), with
// the pair of balls behind each rate searched jointly. Refining
// `grid_steps_per_dim` on a 2x schedule only tightens the reported extrema.
// Throws std::invalid_argument for more than two antennas per user.
WorstCaseRates adversarial_error_search(const SystemInstance& inst,
                                        const CovarianceDesign& d,
                                        int grid_steps_per_dim,
                                        int threads = 1);

}  // namespace fdsec
