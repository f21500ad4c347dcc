#include "fdsec/power.hpp"

#include <cmath>
#include <stdexcept>

#include "fdsec/parallel.hpp"

namespace fdsec {

void SinrSpec::validate() const {
  if (std::isnan(gamma_eaves) || !(gamma_eaves >= 0.0))
    throw std::invalid_argument("eavesdropper SINR cap must be >= 0");
  if (!std::isfinite(gamma_s2) || gamma_s2 < 0.0 || !std::isfinite(gamma_s1) ||
      gamma_s1 < 0.0)
    throw std::invalid_argument("user SINR floors must be finite and >= 0");
}

PowerResult min_total_power(const SystemInstance& inst, const SinrSpec& spec,
                            const SolverOptions& opts) {
  inst.validate();
  spec.validate();
  PowerResult res;
  if (spec.gamma_s2 == 0.0 && spec.gamma_s1 == 0.0) {
    res.status = PowerStatus::Solved;
    res.design.cov = CovarianceDesign::Zero(inst);
    return res;
  }

  RobustLmis lmis =
      build_sinr_lmis(inst, spec.gamma_eaves, spec.gamma_s2, spec.gamma_s1);
  LmiProblem& p = lmis.problem;
  LinExpr total;
  for (int u = 0; u < 2; ++u) {
    total.axpy(1.0, p.trace_expr(lmis.signal[u]));
    total.axpy(1.0, p.trace_expr(lmis.jamming[u]));
  }
  p.set_objective(total);

  const SdpSolution sol = solve_resolved(p, opts.sdp);
  if (sol.status == SdpStatus::Infeasible) {
    res.status = PowerStatus::Infeasible;
    res.margin = sol.infeasibility_margin;
    return res;
  }
  if (sol.status != SdpStatus::Optimal) return res;
  res.status = PowerStatus::Solved;
  res.design = extract_robust_design(lmis, sol.x);
  res.total_power = res.design.cov.total_power();
  return res;
}

std::vector<PowerSweepPoint> power_vs_sinr_sweep(
    const SystemInstance& inst, const std::vector<double>& floors,
    double gamma_eaves, const SolverOptions& opts) {
  std::vector<PowerSweepPoint> table(floors.size());
  parallel_for(static_cast<int>(floors.size()), opts.threads, [&](int i) {
    SinrSpec spec;
    spec.gamma_eaves = gamma_eaves;
    spec.gamma_s2 = floors[i];
    spec.gamma_s1 = floors[i];
    const PowerResult r = min_total_power(inst, spec, opts);
    table[i] = {floors[i], r.status, r.total_power, r.margin};
  });
  return table;
}

}  // namespace fdsec
