#include "fdsec/robust.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "fdsec/parallel.hpp"

namespace fdsec {
namespace {

// Error-ball certificate block: with sign = -1 it certifies
//   (v+e) X (v+e)^* <= bound  for all ||e|| <= eps,
// with sign = +1 the matching lower bound (bound_coeff flips accordingly).
void add_sphere_block(LmiProblem& p, VarRef x, const ComplexRowVec& v,
                      double eps, VarRef bound, double bound_coeff,
                      VarRef lambda, double sign) {
  const int m = static_cast<int>(v.size());
  MatExpr block(m + 1);
  p.add_bordered_into(block, x, v, sign);
  p.add_scalar_identity_into(block, lambda, 1.0, 0, m);
  p.add_scalar_entry_into(block, bound, m, m, bound_coeff);
  p.add_scalar_entry_into(block, lambda, m, m, -eps * eps);
  p.add_block(std::move(block));
}

// Pure-error block certifying e (A + B) e^* <= bound for all ||e|| <= eps.
void add_self_block(LmiProblem& p, VarRef a, VarRef b, int m, double eps,
                    VarRef bound, VarRef lambda) {
  MatExpr block(m + 1);
  p.add_matrix_into(block, a, -1.0, 0);
  p.add_matrix_into(block, b, -1.0, 0);
  p.add_scalar_identity_into(block, lambda, 1.0, 0, m);
  p.add_scalar_entry_into(block, bound, m, m, 1.0);
  p.add_scalar_entry_into(block, lambda, m, m, -eps * eps);
  p.add_block(std::move(block));
}

double clamp0(double v) { return v > 0.0 ? v : 0.0; }

}  // namespace

RobustLmis build_robust_lmis(const SystemInstance& inst, double r1, double r2,
                             double t, bool allow_jamming) {
  if (!(r1 >= 0.0) || !(r2 >= 0.0))
    throw std::invalid_argument("rate targets must be >= 0");
  return build_sinr_lmis(inst, t, std::exp2(r1) - 1.0, std::exp2(r2) - 1.0,
                         allow_jamming);
}

RobustLmis build_sinr_lmis(const SystemInstance& inst, double gamma_eaves,
                           double gamma_s2, double gamma_s1,
                           bool allow_jamming) {
  if (!(gamma_eaves >= 0.0) || !(gamma_s2 >= 0.0) || !(gamma_s1 >= 0.0) ||
      std::isnan(gamma_eaves))
    throw std::invalid_argument("SINR thresholds must be >= 0");
  if (std::isinf(gamma_s2) || std::isinf(gamma_s1))
    throw std::invalid_argument("SINR floors must be finite");
  const bool cap_eaves = !std::isinf(gamma_eaves);

  RobustLmis d;
  LmiProblem& p = d.problem;
  d.signal[0] = p.add_hermitian("Phi1", inst.antennas[0]);
  d.jamming[0] = p.add_hermitian("Psi1", inst.antennas[0]);
  d.signal[1] = p.add_hermitian("Phi2", inst.antennas[1]);
  d.jamming[1] = p.add_hermitian("Psi2", inst.antennas[1]);

  // Upper bounds on maxima may need to absorb the sphere multiplier, so only
  // the bounds on minima and the self terms carry the nonnegative cone.
  static constexpr VarKind kKind[10] = {
      VarKind::FreeScalar,   VarKind::FreeScalar,   VarKind::NonnegScalar,
      VarKind::NonnegScalar, VarKind::NonnegScalar, VarKind::NonnegScalar,
      VarKind::FreeScalar,   VarKind::NonnegScalar, VarKind::NonnegScalar,
      VarKind::FreeScalar};
  for (int i = 0; i < 10; ++i) {
    if (!cap_eaves && i < 4) continue;
    d.bound[i] = p.add_scalar("t" + std::to_string(i + 1), kKind[i]);
  }

  auto sp = [&](VarRef r) { return p.var(r).offset; };

  if (cap_eaves) {
    LinExpr leak;
    leak.constant = -gamma_eaves * inst.noise_power;
    leak.add(sp(d.bound[0]), 1.0);
    leak.add(sp(d.bound[1]), 1.0);
    leak.add(sp(d.bound[2]), -gamma_eaves);
    leak.add(sp(d.bound[3]), -gamma_eaves);
    p.add_linear(leak, Rel::LessEq);
  }
  {
    LinExpr rate;
    rate.constant = gamma_s2 * inst.noise_power;
    rate.add(sp(d.bound[5]), gamma_s2);
    rate.add(sp(d.bound[6]), gamma_s2);
    rate.add(sp(d.bound[4]), -1.0);
    p.add_linear(rate, Rel::LessEq);
  }
  {
    LinExpr rate;
    rate.constant = gamma_s1 * inst.noise_power;
    rate.add(sp(d.bound[8]), gamma_s1);
    rate.add(sp(d.bound[9]), gamma_s1);
    rate.add(sp(d.bound[7]), -1.0);
    p.add_linear(rate, Rel::LessEq);
  }
  for (int u = 0; u < 2; ++u) {
    LinExpr tr;
    tr.constant = -inst.power[u];
    tr.axpy(1.0, p.trace_expr(d.signal[u]));
    tr.axpy(1.0, p.trace_expr(d.jamming[u]));
    p.add_linear(tr, Rel::LessEq);
  }

  // One certificate per uncertain bound: a sphere block when the error bound
  // is positive, the nominal quadratic form otherwise. +1 pins a lower bound
  // (bound <= form), -1 an upper bound (form <= bound).
  struct BoundSpec {
    VarRef var;
    const ComplexRowVec* vec;
    double eps;
    double dir;
  };
  const BoundSpec spec[10] = {
      {d.signal[0], &inst.eaves[0], inst.eaves_err[0], -1.0},
      {d.signal[1], &inst.eaves[1], inst.eaves_err[1], -1.0},
      {d.jamming[0], &inst.eaves[0], inst.eaves_err[0], 1.0},
      {d.jamming[1], &inst.eaves[1], inst.eaves_err[1], 1.0},
      {d.signal[0], &inst.direct[0], inst.direct_err[0], 1.0},
      {{}, nullptr, inst.self_err[1], -1.0},
      {d.jamming[0], &inst.direct[0], inst.direct_err[0], -1.0},
      {d.signal[1], &inst.direct[1], inst.direct_err[1], 1.0},
      {{}, nullptr, inst.self_err[0], -1.0},
      {d.jamming[1], &inst.direct[1], inst.direct_err[1], -1.0},
  };
  for (int i = 0; i < 10; ++i) {
    if (!cap_eaves && i < 4) continue;
    const BoundSpec& s = spec[i];
    const bool self = s.vec == nullptr;
    if (s.eps > 0.0) {
      d.lambda[i] =
          p.add_scalar("lambda" + std::to_string(i + 1), VarKind::NonnegScalar);
      if (self) {
        const int user = (i == 5) ? 1 : 0;
        add_self_block(p, d.signal[user], d.jamming[user], inst.antennas[user],
                       s.eps, d.bound[i], d.lambda[i]);
      } else {
        add_sphere_block(p, s.var, *s.vec, s.eps, d.bound[i],
                         s.dir > 0 ? -1.0 : 1.0, d.lambda[i], s.dir);
      }
    } else if (!self) {
      LinExpr row;
      row.axpy(-s.dir, p.quad_form_expr(s.var, *s.vec));
      row.add(sp(d.bound[i]), s.dir);
      p.add_linear(row, Rel::LessEq);
    }
    // A zero self error needs no row: the bound's own cone already pins it.
  }

  if (!allow_jamming) {
    for (int u = 0; u < 2; ++u)
      p.add_linear(p.trace_expr(d.jamming[u]), Rel::LessEq);
  }
  return d;
}

RobustDesign extract_robust_design(const RobustLmis& lmis,
                                   const Eigen::VectorXd& x) {
  RobustDesign d;
  d.cov = project_design(lmis.problem, lmis.signal, lmis.jamming, x);
  for (int i = 0; i < 10; ++i) {
    d.aux.bound[i] = lmis.bound[i].id >= 0
                         ? lmis.problem.scalar_value(lmis.bound[i], x)
                         : 0.0;
    d.aux.lambda[i] = lmis.lambda[i].id >= 0
                          ? lmis.problem.scalar_value(lmis.lambda[i], x)
                          : 0.0;
  }
  return d;
}

namespace {

bool probe_robust(const SystemInstance& inst, double r1, double r2, double t,
                  bool allow_jamming, const SolverOptions& opts,
                  FeasibilityProbe& out) {
  const RobustLmis lmis = build_robust_lmis(inst, r1, r2, t, allow_jamming);
  out = probe_feasible_resolved(lmis.problem, opts.sdp);
  return out.status != SdpStatus::NumericalFailure;
}

}  // namespace

RobustLeakageResult robust_min_leakage(const SystemInstance& inst, double r1,
                                       double r2, const SolverOptions& opts,
                                       bool allow_jamming) {
  inst.validate();
  if (!(opts.zeta > 0.0))
    throw std::invalid_argument("bisection width must be positive");
  double t_cap = 0.0;
  for (int u = 0; u < 2; ++u) {
    const double gain = inst.eaves[u].norm() + inst.eaves_err[u];
    t_cap += gain * gain * inst.power[u];
  }
  t_cap /= inst.noise_power;

  RobustLeakageResult res;
  FeasibilityProbe top;
  if (!probe_robust(inst, r1, r2, t_cap, allow_jamming, opts, top)) return res;
  if (!top.feasible) {
    res.status = CellStatus::InfeasibleAtCapacity;
    return res;
  }

  // Probes below the feasible anchor only steer the bracket: an unresolved
  // solve cannot certify feasibility and counts as infeasible, while the
  // result stays certified by the stored design at the upper end.
  double u = t_cap;
  Eigen::VectorXd ux = top.x;
  FeasibilityProbe bottom;
  probe_robust(inst, r1, r2, 0.0, allow_jamming, opts, bottom);
  if (bottom.feasible) {
    u = 0.0;
    ux = bottom.x;
  } else {
    double l = 0.0;
    while (u - l > opts.zeta) {
      const double mid = 0.5 * (l + u);
      FeasibilityProbe pm;
      probe_robust(inst, r1, r2, mid, allow_jamming, opts, pm);
      if (pm.feasible) {
        u = mid;
        ux = pm.x;
      } else {
        l = mid;
      }
    }
  }

  const RobustLmis lmis = build_robust_lmis(inst, r1, r2, u, allow_jamming);
  res.status = CellStatus::Solved;
  res.t_min = u;
  res.leakage_upper = std::log2(1.0 + u);
  res.design = extract_robust_design(lmis, ux);
  const RobustAux& aux = res.design.aux;
  const double n0 = inst.noise_power;
  res.rate_lower[0] = std::log2(
      1.0 + clamp0(aux.bound[4]) / (n0 + clamp0(aux.bound[5] + aux.bound[6])));
  res.rate_lower[1] = std::log2(
      1.0 + clamp0(aux.bound[7]) / (n0 + clamp0(aux.bound[8] + aux.bound[9])));
  res.sum_lower =
      clamp0(res.rate_lower[0] + res.rate_lower[1] - res.leakage_upper);
  return res;
}

RobustSweepResult robust_max_sum_secrecy(const SystemInstance& inst,
                                         int k_steps, int l_steps,
                                         const SolverOptions& opts) {
  inst.validate();
  if (k_steps < 1 || l_steps < 1)
    throw std::invalid_argument("grid needs at least one step per axis");
  RobustSweepResult sw;
  sw.caps = capacity_bounds(inst);
  sw.k_steps = sw.caps.direct[0] > 0.0 ? k_steps : 0;
  sw.l_steps = sw.caps.direct[1] > 0.0 ? l_steps : 0;
  sw.cells.resize((sw.k_steps + 1) * (sw.l_steps + 1));

  parallel_for(static_cast<int>(sw.cells.size()), opts.threads, [&](int idx) {
    RobustSweepCell& c = sw.cells[idx];
    c.k = idx / (sw.l_steps + 1);
    c.l = idx % (sw.l_steps + 1);
    c.r1 = sw.k_steps ? sw.caps.direct[0] * c.k / sw.k_steps : 0.0;
    c.r2 = sw.l_steps ? sw.caps.direct[1] * c.l / sw.l_steps : 0.0;
    const RobustLeakageResult lr = robust_min_leakage(inst, c.r1, c.r2, opts);
    c.status = lr.status;
    if (lr.status == CellStatus::Solved) {
      c.leakage_upper = lr.leakage_upper;
      c.rate_lower = lr.rate_lower;
      c.sum_lower = lr.sum_lower;
      c.design = lr.design;
    }
  });

  for (int idx = 0; idx < static_cast<int>(sw.cells.size()); ++idx) {
    const RobustSweepCell& c = sw.cells[idx];
    if (c.status != CellStatus::Solved) continue;
    bool better = false;
    if (sw.best_index < 0 || c.sum_lower > sw.best_sum) {
      better = true;
    } else if (c.sum_lower == sw.best_sum) {
      const RobustSweepCell& b = sw.cells[sw.best_index];
      better =
          c.k + c.l > b.k + b.l || (c.k + c.l == b.k + b.l && c.k > b.k);
    }
    if (better) {
      sw.best_index = idx;
      sw.best_sum = c.sum_lower;
    }
  }
  return sw;
}

std::vector<SweepCell> region_cells(const RobustSweepResult& sweep) {
  std::vector<SweepCell> cells;
  cells.reserve(sweep.cells.size());
  for (const RobustSweepCell& rc : sweep.cells) {
    SweepCell c;
    c.k = rc.k;
    c.l = rc.l;
    c.status = rc.status;
    c.r1 = rc.rate_lower[0];
    c.r2 = rc.rate_lower[1];
    c.leakage = rc.leakage_upper;
    c.sum_secrecy = rc.sum_lower;
    c.design = rc.design.cov;
    cells.push_back(std::move(c));
  }
  return cells;
}

}  // namespace fdsec
