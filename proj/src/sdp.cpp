#include "fdsec/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fdsec {

namespace {

struct RealBlock {
  int dim = 0;
  Eigen::MatrixXd f0;
  std::vector<std::pair<int, Eigen::MatrixXd>> coeff;  // sorted by parameter
};

// min c^T x  s.t.  f0_j + sum_i x_i F_ji >= 0 per block.
struct RealSdp {
  int nvars = 0;
  Eigen::VectorXd c;
  std::vector<RealBlock> blocks;
};

// Complex dim of each real block, for mapping duals back; 1x1 blocks pass
// through unembedded.
struct BlockMaps {
  std::vector<int> complex_dim;
  std::vector<int> var_block;        // per variable, -1 for free scalars
  std::vector<int> matrix_block;     // per LmiProblem block
  std::vector<std::pair<int, int>> linear_block;  // per constraint, second = -1 unless Eq
};

Eigen::MatrixXd embed_or_pass(const ComplexMatrix& m) {
  if (m.rows() == 1) {
    Eigen::MatrixXd out(1, 1);
    out(0, 0) = m(0, 0).real();
    return out;
  }
  return real_embed(m);
}

RealBlock real_block_of(const MatExpr& e) {
  RealBlock b;
  b.dim = e.dim() == 1 ? 1 : 2 * e.dim();
  b.f0 = embed_or_pass(e.constant());
  for (const auto& [p, c] : e.terms()) {
    b.coeff.emplace_back(p, embed_or_pass(c));
  }
  return b;
}

RealBlock scalar_block_of(const LinExpr& g, double sign) {
  // sign=-1 encodes g <= 0 as [-g] >= 0.
  RealBlock b;
  b.dim = 1;
  b.f0 = Eigen::MatrixXd::Constant(1, 1, sign * g.constant);
  for (const auto& [p, c] : g.terms) {
    b.coeff.emplace_back(p, Eigen::MatrixXd::Constant(1, 1, sign * c));
  }
  return b;
}

RealSdp convert(const LmiProblem& p, BlockMaps& maps) {
  RealSdp sdp;
  sdp.nvars = p.param_count();
  sdp.c = Eigen::VectorXd::Zero(sdp.nvars);
  for (const auto& [idx, v] : p.objective().terms) sdp.c(idx) = v;

  auto push = [&](RealBlock b, int cdim) {
    sdp.blocks.push_back(std::move(b));
    maps.complex_dim.push_back(cdim);
    return static_cast<int>(sdp.blocks.size()) - 1;
  };

  for (const auto& v : p.vars()) {
    if (v.kind == VarKind::FreeScalar) {
      maps.var_block.push_back(-1);
      continue;
    }
    MatExpr e(v.dim);
    for (int q = 0; q < v.param_count; ++q) {
      e.add_term(v.offset + q, LmiProblem::basis_matrix(v.dim, q));
    }
    maps.var_block.push_back(push(real_block_of(e), v.dim));
  }
  for (const auto& blk : p.blocks()) {
    maps.matrix_block.push_back(push(real_block_of(blk), blk.dim()));
  }
  for (const auto& [g, rel] : p.linear()) {
    const int first = push(scalar_block_of(g, -1.0), 1);
    const int second = rel == Rel::Eq ? push(scalar_block_of(g, 1.0), 1) : -1;
    maps.linear_block.emplace_back(first, second);
  }
  return sdp;
}

double min_eig_sym(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

Eigen::MatrixXd block_value(const RealBlock& b, const Eigen::VectorXd& x) {
  Eigen::MatrixXd v = b.f0;
  for (const auto& [i, f] : b.coeff) v += x(i) * f;
  return v;
}

// Relaxation: minimize s with every block shifted by s*I, plus the box s >= -1.
RealSdp phase1_of(const RealSdp& sdp) {
  RealSdp ph = sdp;
  const int s = sdp.nvars;
  ph.nvars = s + 1;
  ph.c = Eigen::VectorXd::Zero(ph.nvars);
  ph.c(s) = 1.0;
  for (auto& b : ph.blocks) {
    b.coeff.emplace_back(s, Eigen::MatrixXd::Identity(b.dim, b.dim));
  }
  RealBlock box;
  box.dim = 1;
  box.f0 = Eigen::MatrixXd::Constant(1, 1, 1.0);
  box.coeff.emplace_back(s, Eigen::MatrixXd::Constant(1, 1, 1.0));
  ph.blocks.push_back(std::move(box));
  return ph;
}

struct IpmState {
  Eigen::VectorXd x;
  std::vector<Eigen::MatrixXd> Z;  // slack per block, kept PD
  std::vector<Eigen::MatrixXd> X;  // cone dual per block, kept PD
};

struct IpmResult {
  bool converged = false;
  bool diverged = false;
  int iterations = 0;
  double gap_rel = 0.0;
};

void init_state(const RealSdp& sdp, const Eigen::VectorXd& x0, double lift,
                IpmState& st) {
  st.x = x0;
  st.Z.clear();
  st.X.clear();
  for (const auto& b : sdp.blocks) {
    Eigen::MatrixXd v = block_value(b, x0);
    v = 0.5 * (v + v.transpose());
    if (lift > 0.0) v += lift * Eigen::MatrixXd::Identity(b.dim, b.dim);
    st.Z.push_back(std::move(v));
    st.X.push_back(Eigen::MatrixXd::Identity(b.dim, b.dim));
  }
}

// Largest alpha in (0, 1] keeping m + alpha*dm PD, scaled by frac.
double cone_step(const Eigen::MatrixXd& m, const Eigen::MatrixXd& dm,
                 double frac) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) return 0.0;
  const Eigen::MatrixXd l = llt.matrixL();
  const Eigen::MatrixXd s =
      l.triangularView<Eigen::Lower>().solve(
          l.triangularView<Eigen::Lower>().solve(dm).transpose());
  const double lam = min_eig_sym(0.5 * (s + s.transpose()));
  if (lam >= 0.0) return 1.0;
  return std::min(1.0, -frac / lam);
}

// NT-scaled predictor-corrector on the linear-matrix-inequality form.
IpmResult run_ipm(const RealSdp& sdp, IpmState& st, const SdpOptions& opts,
                  double gap_tol, double eq_tol, double link_tol) {
  IpmResult res;
  const int n = sdp.nvars;
  const int nb = static_cast<int>(sdp.blocks.size());
  int total_dim = 0;
  for (const auto& b : sdp.blocks) total_dim += b.dim;
  if (n == 0 || nb == 0) {
    res.converged = true;
    return res;
  }
  const double c_scale = 1.0 + sdp.c.cwiseAbs().maxCoeff();

  std::vector<Eigen::MatrixXd> winv(nb), zinv(nb), rd(nb), rmat(nb), dz(nb),
      dx_m(nb);
  int stall = 0;

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    res.iterations = iter;
    // residuals
    Eigen::VectorXd r = sdp.c;
    double link_err = 0.0;
    double mu = 0.0;
    double dobj = 0.0;
    for (int j = 0; j < nb; ++j) {
      const auto& b = sdp.blocks[j];
      for (const auto& [i, f] : b.coeff) {
        r(i) -= (f.array() * st.X[j].array()).sum();
      }
      rd[j] = block_value(b, st.x) - st.Z[j];
      link_err = std::max(link_err, rd[j].cwiseAbs().maxCoeff());
      mu += (st.X[j].array() * st.Z[j].array()).sum();
      dobj -= (b.f0.array() * st.X[j].array()).sum();
    }
    mu /= total_dim;
    const double pobj = sdp.c.dot(st.x);
    const double denom = 1.0 + std::abs(pobj) + std::abs(dobj);
    res.gap_rel = (pobj - dobj) / denom;
    const double eq_err = r.cwiseAbs().maxCoeff() / c_scale;

    if (eq_err <= eq_tol && link_err <= link_tol &&
        (std::abs(res.gap_rel) <= gap_tol || mu / denom <= gap_tol)) {
      res.converged = true;
      return res;
    }
    if (!st.x.allFinite() || st.x.cwiseAbs().maxCoeff() > 1e14 || mu > 1e14) {
      res.diverged = true;
      return res;
    }

    // NT scaling: winv = X^{1/2} (X^{1/2} Z X^{1/2})^{-1/2} X^{1/2}
    bool scale_ok = true;
    for (int j = 0; j < nb; ++j) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ex(st.X[j]);
      if (ex.eigenvalues()(0) <= 0.0) {
        scale_ok = false;
        break;
      }
      const Eigen::MatrixXd xh = ex.operatorSqrt();
      Eigen::MatrixXd e = xh * st.Z[j] * xh;
      e = 0.5 * (e + e.transpose());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ee(e);
      if (ee.eigenvalues()(0) <= 0.0) {
        scale_ok = false;
        break;
      }
      winv[j] = xh * ee.operatorInverseSqrt() * xh;
      winv[j] = 0.5 * (winv[j] + winv[j].transpose());
      Eigen::LLT<Eigen::MatrixXd> lz(st.Z[j]);
      if (lz.info() != Eigen::Success) {
        scale_ok = false;
        break;
      }
      zinv[j] = lz.solve(Eigen::MatrixXd::Identity(st.Z[j].rows(), st.Z[j].cols()));
      zinv[j] = 0.5 * (zinv[j] + zinv[j].transpose());
    }
    if (!scale_ok) {
      res.diverged = true;
      return res;
    }

    // Schur complement M_ik = sum_j <F_ji, Winv_j F_jk Winv_j>
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j < nb; ++j) {
      const auto& cf = sdp.blocks[j].coeff;
      std::vector<Eigen::MatrixXd> g(cf.size());
      for (size_t k = 0; k < cf.size(); ++k) {
        g[k] = winv[j] * cf[k].second * winv[j];
      }
      for (size_t a = 0; a < cf.size(); ++a) {
        for (size_t k = 0; k <= a; ++k) {
          const double v = (cf[a].second.array() * g[k].array()).sum();
          m(cf[a].first, cf[k].first) += v;
          if (cf[a].first != cf[k].first) m(cf[k].first, cf[a].first) += v;
        }
      }
    }

    Eigen::LLT<Eigen::MatrixXd> mllt;
    double ridge = 0.0;
    for (int attempt = 0; attempt < 4; ++attempt) {
      mllt.compute(m + ridge * Eigen::MatrixXd::Identity(n, n));
      if (mllt.info() == Eigen::Success) break;
      ridge = ridge == 0.0 ? 1e-13 * (1.0 + m.trace() / n) : ridge * 100.0;
    }
    if (mllt.info() != Eigen::Success) {
      res.diverged = true;
      return res;
    }

    auto direction = [&](double sigmu, Eigen::VectorXd& dx) {
      Eigen::VectorXd q = -r;
      for (int j = 0; j < nb; ++j) {
        rmat[j] = sigmu * zinv[j] - st.X[j] - winv[j] * rd[j] * winv[j];
        for (const auto& [i, f] : sdp.blocks[j].coeff) {
          q(i) += (f.array() * rmat[j].array()).sum();
        }
      }
      dx = mllt.solve(q);
      for (int j = 0; j < nb; ++j) {
        dz[j] = rd[j];
        for (const auto& [i, f] : sdp.blocks[j].coeff) dz[j] += dx(i) * f;
        dx_m[j] = sigmu * zinv[j] - st.X[j] - winv[j] * dz[j] * winv[j];
        dx_m[j] = 0.5 * (dx_m[j] + dx_m[j].transpose());
      }
    };

    auto step_lengths = [&](double& az, double& ax) {
      az = 1.0;
      ax = 1.0;
      for (int j = 0; j < nb; ++j) {
        az = std::min(az, cone_step(st.Z[j], dz[j], opts.step_fraction));
        ax = std::min(ax, cone_step(st.X[j], dx_m[j], opts.step_fraction));
      }
    };

    Eigen::VectorXd dx;
    direction(0.0, dx);
    double az, ax;
    step_lengths(az, ax);
    double mu_aff = 0.0;
    for (int j = 0; j < nb; ++j) {
      mu_aff += ((st.X[j] + ax * dx_m[j]).array() *
                 (st.Z[j] + az * dz[j]).array())
                    .sum();
    }
    mu_aff = std::max(mu_aff / total_dim, 0.0);
    const double ratio = mu > 0.0 ? mu_aff / mu : 0.0;
    const double sigma = std::clamp(ratio * ratio * ratio, 1e-8, 1.0);

    direction(sigma * mu, dx);
    step_lengths(az, ax);

    st.x += az * dx;
    for (int j = 0; j < nb; ++j) {
      st.Z[j] += az * dz[j];
      st.Z[j] = 0.5 * (st.Z[j] + st.Z[j].transpose());
      st.X[j] += ax * dx_m[j];
      st.X[j] = 0.5 * (st.X[j] + st.X[j].transpose());
    }

    stall = az < 1e-7 && ax < 1e-7 ? stall + 1 : 0;
    if (stall >= 5) {
      res.diverged = true;
      return res;
    }
  }
  res.iterations = opts.max_iterations;
  return res;  // iteration cap: not converged
}

// Strictly feasible start for the relaxation: x = 0, s above every block's
// negated minimum eigenvalue.
Eigen::VectorXd phase1_start(const RealSdp& sdp) {
  double s0 = 1.0;
  for (size_t j = 0; j + 1 < sdp.blocks.size(); ++j) {  // skip the box block
    Eigen::MatrixXd f0 = sdp.blocks[j].f0;
    s0 = std::max(s0, -min_eig_sym(f0) + 1.0);
  }
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(sdp.nvars);
  x0(sdp.nvars - 1) = s0;
  return x0;
}

struct Phase1Outcome {
  IpmResult ipm;
  double margin = std::numeric_limits<double>::quiet_NaN();
  Eigen::VectorXd x;  // original variables only
};

Phase1Outcome run_phase1(const RealSdp& sdp, const SdpOptions& opts) {
  const RealSdp ph = phase1_of(sdp);
  IpmState st;
  init_state(ph, phase1_start(ph), 0.0, st);
  Phase1Outcome out;
  const double tol = std::min(opts.gap_tol, 1e-9);
  out.ipm = run_ipm(ph, st, opts, tol, std::max(tol, 1e-10), opts.feas_tol);
  out.margin = st.x(sdp.nvars);
  out.x = st.x.head(sdp.nvars);
  return out;
}

ComplexMatrix complexify(const Eigen::MatrixXd& xr, int cdim) {
  if (cdim == 1) {
    return ComplexMatrix::Constant(1, 1, xr(0, 0));
  }
  ComplexMatrix out(cdim, cdim);
  out.real() = xr.topLeftCorner(cdim, cdim) + xr.bottomRightCorner(cdim, cdim);
  out.imag() = xr.bottomLeftCorner(cdim, cdim) - xr.topRightCorner(cdim, cdim);
  out = 0.5 * (out + out.adjoint()).eval();
  return out;
}

}  // namespace

double max_constraint_violation(const LmiProblem& p, const Eigen::VectorXd& x) {
  double worst = 0.0;
  for (int vi = 0; vi < static_cast<int>(p.vars().size()); ++vi) {
    const VarDesc& v = p.vars()[vi];
    if (v.kind == VarKind::HermitianPsd) {
      worst = std::max(worst, -min_eigenvalue(p.value_of({vi}, x)));
    } else if (v.kind == VarKind::NonnegScalar) {
      worst = std::max(worst, -x(v.offset));
    }
  }
  for (const auto& b : p.blocks()) {
    worst = std::max(worst, -min_eigenvalue(HermitianMatrix(b.eval(x))));
  }
  for (const auto& [g, rel] : p.linear()) {
    const double val = g.eval(x);
    worst = std::max(worst, rel == Rel::Eq ? std::abs(val) : val);
  }
  return worst;
}

FeasibilityProbe probe_feasible(const LmiProblem& p, const SdpOptions& opts) {
  BlockMaps maps;
  const RealSdp sdp = convert(p, maps);
  FeasibilityProbe probe;
  if (sdp.blocks.empty()) {
    probe.feasible = true;
    probe.margin = -1.0;
    probe.x = Eigen::VectorXd::Zero(sdp.nvars);
    probe.status = SdpStatus::Optimal;
    return probe;
  }
  const Phase1Outcome ph = run_phase1(sdp, opts);
  probe.iterations = ph.ipm.iterations;
  probe.margin = ph.margin;
  probe.x = ph.x;
  if (!ph.ipm.converged) {
    probe.status = SdpStatus::NumericalFailure;
    probe.feasible = false;
    return probe;
  }
  probe.status = SdpStatus::Optimal;
  probe.feasible = ph.margin <= opts.feas_tol;
  return probe;
}

SdpSolution solve_resolved(const LmiProblem& p, const SdpOptions& opts) {
  SdpSolution sol = solve(p, opts);
  if (sol.status == SdpStatus::NumericalFailure) {
    SdpOptions loose = opts;
    loose.feas_tol *= 10.0;
    loose.gap_tol *= 10.0;
    sol = solve(p, loose);
  }
  return sol;
}

FeasibilityProbe probe_feasible_resolved(const LmiProblem& p,
                                         const SdpOptions& opts) {
  FeasibilityProbe probe = probe_feasible(p, opts);
  if (probe.status == SdpStatus::NumericalFailure) {
    SdpOptions loose = opts;
    loose.feas_tol *= 10.0;
    loose.gap_tol *= 10.0;
    probe = probe_feasible(p, loose);
    if (probe.status == SdpStatus::NumericalFailure) return probe;
  }
  if (!probe.feasible && probe.margin <= 100.0 * opts.feas_tol) {
    SdpOptions tight = opts;
    tight.gap_tol = std::min(opts.gap_tol, 1e-11);
    tight.max_iterations = std::max(opts.max_iterations, 400);
    const FeasibilityProbe fine = probe_feasible(p, tight);
    if (fine.status != SdpStatus::NumericalFailure) probe = fine;
  }
  return probe;
}

bool check_feasible(const LmiProblem& p, const SdpOptions& opts) {
  return probe_feasible(p, opts).feasible;
}

SdpSolution solve(const LmiProblem& p, const SdpOptions& opts) {
  BlockMaps maps;
  const RealSdp sdp = convert(p, maps);
  SdpSolution sol;
  sol.x = Eigen::VectorXd::Zero(sdp.nvars);

  if (!sdp.blocks.empty()) {
    Phase1Outcome ph = run_phase1(sdp, opts);
    if (!ph.ipm.converged) {
      sol.status = SdpStatus::NumericalFailure;
      sol.iterations = ph.ipm.iterations;
      return sol;
    }
    if (ph.margin > opts.feas_tol && ph.margin <= 100.0 * opts.feas_tol) {
      // Ambiguous band: the relaxation may have stalled short of a feasible
      // set with no strict interior. Re-resolve before reporting Infeasible.
      SdpOptions tight = opts;
      tight.gap_tol = std::min(opts.gap_tol, 1e-11);
      tight.max_iterations = std::max(opts.max_iterations, 400);
      Phase1Outcome fine = run_phase1(sdp, tight);
      if (fine.ipm.converged) ph = fine;
    }
    if (ph.margin > opts.feas_tol) {
      sol.status = SdpStatus::Infeasible;
      sol.infeasibility_margin = ph.margin;
      sol.iterations = ph.ipm.iterations;
      sol.x = ph.x;
      return sol;
    }
    IpmState st;
    const double lift = std::max(0.0, 1e-6 - std::max(0.0, -ph.margin));
    init_state(sdp, ph.x, lift, st);
    IpmResult main;
    if (sdp.nvars == 0) {
      main.converged = true;
    } else {
      main = run_ipm(sdp, st, opts, opts.gap_tol,
                     std::max(opts.feas_tol, 1e-10), opts.feas_tol);
    }
    sol.iterations = ph.ipm.iterations + main.iterations;
    if (!main.converged) {
      sol.status = SdpStatus::NumericalFailure;
      sol.x = st.x;
      return sol;
    }
    sol.x = st.x;
    sol.duality_gap = main.gap_rel;

    // cone multipliers, mapped back to the complex side
    for (size_t v = 0; v < p.vars().size(); ++v) {
      const int j = maps.var_block[v];
      sol.var_duals.push_back(
          j < 0 ? ComplexMatrix()
                : complexify(st.X[j], maps.complex_dim[j]));
    }
    for (int j : maps.matrix_block) {
      sol.block_duals.push_back(complexify(st.X[j], maps.complex_dim[j]));
    }
    for (const auto& [first, second] : maps.linear_block) {
      double d = st.X[first](0, 0);
      if (second >= 0) d -= st.X[second](0, 0);
      sol.linear_duals.push_back(d);
    }
  }

  sol.objective = p.objective().eval(sol.x);
  sol.max_violation = max_constraint_violation(p, sol.x);
  sol.status = sol.max_violation <= 10.0 * opts.feas_tol
                   ? SdpStatus::Optimal
                   : SdpStatus::NumericalFailure;
  return sol;
}

}  // namespace fdsec
