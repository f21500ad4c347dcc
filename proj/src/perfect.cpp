#include "fdsec/perfect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fdsec/parallel.hpp"

namespace fdsec {

DesignLmis build_design_lmis(const SystemInstance& inst, double r1, double r2,
                             double t, bool leakage_as_objective) {
  if (!(r1 >= 0.0) || !(r2 >= 0.0) || !(t >= 0.0))
    throw std::invalid_argument("rate targets and SINR cap must be >= 0");
  DesignLmis d;
  LmiProblem& p = d.problem;
  d.signal[0] = p.add_hermitian("Phi1", inst.antennas[0]);
  d.jamming[0] = p.add_hermitian("Psi1", inst.antennas[0]);
  d.signal[1] = p.add_hermitian("Phi2", inst.antennas[1]);
  d.jamming[1] = p.add_hermitian("Psi2", inst.antennas[1]);

  LinExpr leak;
  leak.constant = -t * inst.noise_power;
  for (int u = 0; u < 2; ++u) {
    leak.axpy(1.0, p.quad_form_expr(d.signal[u], inst.eaves[u]));
    leak.axpy(-t, p.quad_form_expr(d.jamming[u], inst.eaves[u]));
  }
  if (leakage_as_objective) {
    leak.constant = 0.0;
    p.set_objective(leak);
  } else {
    p.add_linear(leak, Rel::LessEq);
  }

  const double gain[2] = {std::exp2(r1) - 1.0, std::exp2(r2) - 1.0};
  for (int u = 0; u < 2; ++u) {
    LinExpr rate;
    rate.constant = gain[u] * inst.noise_power;
    rate.axpy(gain[u], p.quad_form_expr(d.jamming[u], inst.direct[u]));
    rate.axpy(-1.0, p.quad_form_expr(d.signal[u], inst.direct[u]));
    p.add_linear(rate, Rel::LessEq);
  }
  for (int u = 0; u < 2; ++u) {
    LinExpr tr;
    tr.constant = -inst.power[u];
    tr.axpy(1.0, p.trace_expr(d.signal[u]));
    tr.axpy(1.0, p.trace_expr(d.jamming[u]));
    p.add_linear(tr, Rel::LessEq);
  }
  return d;
}

CovarianceDesign design_from_vector(const DesignLmis& lmis,
                                    const Eigen::VectorXd& x) {
  return project_design(lmis.problem, lmis.signal, lmis.jamming, x);
}

CovarianceDesign project_design(const LmiProblem& problem,
                                const std::array<VarRef, 2>& signal,
                                const std::array<VarRef, 2>& jamming,
                                const Eigen::VectorXd& x) {
  auto project = [&](VarRef r) {
    const HermitianMatrix h = problem.value_of(r, x);
    const EigenDecomposition ed = hermitian_eigen(h);
    ComplexMatrix m = ComplexMatrix::Zero(h.dim(), h.dim());
    for (int i = 0; i < ed.values.size(); ++i) {
      if (ed.values(i) > 0.0)
        m += ed.values(i) * (ed.vectors.col(i) * ed.vectors.col(i).adjoint());
    }
    HermitianMatrix out(m);
    out.mark_psd();
    return out;
  };
  CovarianceDesign d;
  for (int u = 0; u < 2; ++u) {
    d.signal[u] = project(signal[u]);
    d.jamming[u] = project(jamming[u]);
  }
  return d;
}

namespace {

// Probes feasibility at t. Returns false when even the fallback probes fail.
bool probe_at(const SystemInstance& inst, double r1, double r2, double t,
              const SolverOptions& opts, FeasibilityProbe& out) {
  const DesignLmis lmis = build_design_lmis(inst, r1, r2, t);
  out = probe_feasible_resolved(lmis.problem, opts.sdp);
  return out.status != SdpStatus::NumericalFailure;
}

}  // namespace

LeakageResult min_leakage_at_rates(const SystemInstance& inst, double r1,
                                   double r2, const SolverOptions& opts) {
  inst.validate();
  if (!(opts.zeta > 0.0))
    throw std::invalid_argument("bisection width must be positive");
  double t_cap = 0.0;
  for (int u = 0; u < 2; ++u)
    t_cap += inst.eaves[u].squaredNorm() * inst.power[u];
  t_cap /= inst.noise_power;

  LeakageResult res;
  FeasibilityProbe top;
  if (!probe_at(inst, r1, r2, t_cap, opts, top)) return res;
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
  probe_at(inst, r1, r2, 0.0, opts, bottom);
  if (bottom.feasible) {
    u = 0.0;
    ux = bottom.x;
  } else {
    double l = 0.0;
    while (u - l > opts.zeta) {
      const double mid = 0.5 * (l + u);
      FeasibilityProbe pm;
      probe_at(inst, r1, r2, mid, opts, pm);
      if (pm.feasible) {
        u = mid;
        ux = pm.x;
      } else {
        l = mid;
      }
    }
  }

  res.status = CellStatus::Solved;
  res.t_min = u;
  res.leakage = std::log2(1.0 + u);
  const DesignLmis lmis = build_design_lmis(inst, r1, r2, u);
  res.design = design_from_vector(lmis, ux);
  return res;
}

SweepResult max_sum_secrecy(const SystemInstance& inst, int k_steps,
                            int l_steps, const SolverOptions& opts) {
  inst.validate();
  if (k_steps < 1 || l_steps < 1)
    throw std::invalid_argument("grid needs at least one step per axis");
  SweepResult sw;
  sw.k_steps = k_steps;
  sw.l_steps = l_steps;
  sw.caps = capacity_bounds(inst);
  sw.cells.resize((k_steps + 1) * (l_steps + 1));

  parallel_for(static_cast<int>(sw.cells.size()), opts.threads, [&](int idx) {
    SweepCell& c = sw.cells[idx];
    c.k = idx / (l_steps + 1);
    c.l = idx % (l_steps + 1);
    c.r1 = sw.caps.direct[0] * c.k / k_steps;
    c.r2 = sw.caps.direct[1] * c.l / l_steps;
    const LeakageResult lr = min_leakage_at_rates(inst, c.r1, c.r2, opts);
    c.status = lr.status;
    if (lr.status == CellStatus::Solved) {
      c.leakage = lr.leakage;
      c.sum_secrecy = std::max(0.0, c.r1 + c.r2 - lr.leakage);
      c.design = lr.design;
    }
  });

  for (int idx = 0; idx < static_cast<int>(sw.cells.size()); ++idx) {
    const SweepCell& c = sw.cells[idx];
    if (c.status != CellStatus::Solved) continue;
    bool better = false;
    if (sw.best_index < 0 || c.sum_secrecy > sw.best_sum) {
      better = true;
    } else if (c.sum_secrecy == sw.best_sum) {
      const SweepCell& b = sw.cells[sw.best_index];
      better = c.k + c.l > b.k + b.l ||
               (c.k + c.l == b.k + b.l && c.k > b.k);
    }
    if (better) {
      sw.best_index = idx;
      sw.best_sum = c.sum_secrecy;
    }
  }
  return sw;
}

namespace {

struct CellBox {
  double a = 0.0;  // rate-1 extent
  double b = 0.0;  // rate-2 extent
  double s = 0.0;  // sum cap
};

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double box_height(const CellBox& c, double x) {
  if (x > c.a) return kNegInf;
  return std::min(c.b, c.s - x);
}

// Piecewise-linear upper boundary y(x) rebuilt from a polygon; the trailing
// vertical drop (repeated x) is ignored.
double polygon_height(const std::vector<RegionPoint>& poly, double x) {
  if (poly.empty()) return kNegInf;
  if (x <= poly.front().r1) return poly.front().r2;
  for (std::size_t i = 0; i + 1 < poly.size(); ++i) {
    const RegionPoint& p = poly[i];
    const RegionPoint& q = poly[i + 1];
    if (q.r1 <= p.r1) continue;
    if (x <= q.r1)
      return p.r2 + (q.r2 - p.r2) * (x - p.r1) / (q.r1 - p.r1);
  }
  return poly.back().r2;
}

double polygon_extent(const std::vector<RegionPoint>& poly) {
  double x = 0.0;
  for (const RegionPoint& p : poly) x = std::max(x, p.r1);
  return x;
}

}  // namespace

std::vector<RegionPoint> region_boundary(const SweepResult& sweep) {
  return region_boundary(sweep.cells);
}

std::vector<RegionPoint> region_boundary(const std::vector<SweepCell>& cells) {
  std::vector<CellBox> boxes;
  for (const SweepCell& c : cells) {
    if (c.status != CellStatus::Solved) continue;
    boxes.push_back({c.r1, c.r2, c.sum_secrecy});
  }
  // Keep only cells no other cell dominates in all three extents.
  std::vector<CellBox> kept;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < boxes.size() && !dominated; ++j) {
      if (i == j) continue;
      const bool covers = boxes[j].a >= boxes[i].a &&
                          boxes[j].b >= boxes[i].b && boxes[j].s >= boxes[i].s;
      const bool identical = boxes[j].a == boxes[i].a &&
                             boxes[j].b == boxes[i].b &&
                             boxes[j].s == boxes[i].s;
      dominated = covers && (!identical || j < i);
    }
    if (!dominated) kept.push_back(boxes[i]);
  }
  if (kept.empty()) return {{0.0, 0.0}};

  double x_max = 0.0;
  for (const CellBox& c : kept) x_max = std::max(x_max, std::min(c.a, c.s));

  std::vector<double> xs = {0.0, x_max};
  for (const CellBox& c : kept) {
    for (double v : {c.a, c.s, c.s - c.b}) {
      if (v > 0.0 && v < x_max) xs.push_back(v);
    }
    for (const CellBox& o : kept) {
      const double v = c.s - o.b;
      if (v > 0.0 && v < x_max) xs.push_back(v);
    }
  }
  std::sort(xs.begin(), xs.end());
  const double min_gap = 1e-12 * std::max(1.0, x_max);
  std::vector<double> grid;
  for (double v : xs) {
    if (grid.empty() || v - grid.back() > min_gap) grid.push_back(v);
  }
  if (grid.back() < x_max) grid.push_back(x_max);

  auto envelope = [&](double x) {
    double best = kNegInf;
    for (const CellBox& c : kept) best = std::max(best, box_height(c, x));
    return std::max(best, 0.0);
  };

  if (grid.size() == 1) {
    std::vector<RegionPoint> poly = {{0.0, envelope(0.0)}};
    if (poly.back().r2 > 0.0) poly.push_back({0.0, 0.0});
    return poly;
  }

  // The breakpoint grid contains every piece crossing and death, so on each
  // interval the envelope is a single flat (y = b) or diagonal (y = s - x)
  // piece; the attaining cell at the midpoint identifies it.
  struct Line {
    bool flat;
    double level;  // b when flat, s when diagonal
    double at(double x) const { return flat ? level : level - x; }
  };
  std::vector<Line> lines(grid.size() - 1);
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double m = 0.5 * (grid[i] + grid[i + 1]);
    double best = kNegInf;
    Line line{true, 0.0};
    for (const CellBox& c : kept) {
      const double y = box_height(c, m);
      if (y > best) {
        best = y;
        line = (c.b <= c.s - m) ? Line{true, c.b} : Line{false, c.s};
      }
    }
    lines[i] = line;
  }

  constexpr double kVertexTol = 1e-12;
  std::vector<RegionPoint> poly;
  poly.push_back({0.0, lines.front().at(0.0)});
  for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
    const double x = grid[i];
    const double y_left = lines[i - 1].at(x);
    const double y_right = lines[i].at(x);
    if (y_left - y_right > kVertexTol) {
      poly.push_back({x, y_left});
      poly.push_back({x, y_right});
    } else if (lines[i - 1].flat != lines[i].flat) {
      poly.push_back({x, y_right});
    }
  }
  poly.push_back({x_max, lines.back().at(x_max)});
  if (poly.back().r2 > 0.0) poly.push_back({x_max, 0.0});
  return poly;
}

bool region_contains(const std::vector<RegionPoint>& outer,
                     const std::vector<RegionPoint>& inner, double slack) {
  if (inner.empty()) return true;
  if (outer.empty()) return false;
  const double x_out = polygon_extent(outer);
  const double x_in = polygon_extent(inner);
  if (x_in > x_out + slack) return false;

  std::vector<double> xs;
  for (const RegionPoint& p : outer) xs.push_back(p.r1);
  for (const RegionPoint& p : inner) xs.push_back(p.r1);
  std::sort(xs.begin(), xs.end());
  std::vector<double> probe;
  for (double v : xs) {
    if (v > x_in) break;
    if (probe.empty() || v > probe.back()) {
      if (!probe.empty()) probe.push_back(0.5 * (probe.back() + v));
      probe.push_back(v);
    }
  }
  for (double x : probe) {
    const double yi = polygon_height(inner, x);
    const double yo = polygon_height(outer, std::min(x, x_out));
    if (yi > yo + slack) return false;
  }
  return true;
}

}  // namespace fdsec
