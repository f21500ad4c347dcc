#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "fdsec/robust.hpp"
#include "test_util.hpp"

using namespace fdsec;
using namespace fdsec::test;

namespace {

SystemInstance scalar_instance(std::complex<double> h21, std::complex<double> h12,
                               std::complex<double> z1, std::complex<double> z2,
                               double power) {
  SystemInstance inst;
  inst.antennas = {1, 1};
  inst.direct[0] = ComplexRowVec(1);
  inst.direct[0] << h21;
  inst.direct[1] = ComplexRowVec(1);
  inst.direct[1] << h12;
  inst.eaves[0] = ComplexRowVec(1);
  inst.eaves[0] << z1;
  inst.eaves[1] = ComplexRowVec(1);
  inst.eaves[1] << z2;
  inst.noise_power = 1.0;
  inst.power = {power, power};
  return inst;
}

double lo2(double mag, double eps) {
  const double d = std::max(0.0, mag - eps);
  return d * d;
}
double hi2(double mag, double eps) {
  const double d = mag + eps;
  return d * d;
}

// Exhaustive minimum of the decoupled worst-case SINR over a simplex grid of
// scalar covariances; +inf when no grid point meets the rate targets.
double grid_min_sinr(const SystemInstance& inst, double r1, double r2,
                     int steps) {
  const double g1 = std::exp2(r1) - 1.0, g2 = std::exp2(r2) - 1.0;
  const double d1 = lo2(std::abs(inst.direct[0](0)), inst.direct_err[0]);
  const double d2 = lo2(std::abs(inst.direct[1](0)), inst.direct_err[1]);
  const double j1 = hi2(std::abs(inst.direct[0](0)), inst.direct_err[0]);
  const double j2 = hi2(std::abs(inst.direct[1](0)), inst.direct_err[1]);
  const double s1 = inst.self_err[1] * inst.self_err[1];  // at receiver of msg 1
  const double s2 = inst.self_err[0] * inst.self_err[0];
  const double eh1 = hi2(std::abs(inst.eaves[0](0)), inst.eaves_err[0]);
  const double eh2 = hi2(std::abs(inst.eaves[1](0)), inst.eaves_err[1]);
  const double el1 = lo2(std::abs(inst.eaves[0](0)), inst.eaves_err[0]);
  const double el2 = lo2(std::abs(inst.eaves[1](0)), inst.eaves_err[1]);
  const double n0 = inst.noise_power;
  double best = std::numeric_limits<double>::infinity();
  for (int a1 = 0; a1 <= steps; ++a1) {
    const double p1 = inst.power[0] * a1 / steps;
    for (int b1 = 0; a1 + b1 <= steps; ++b1) {
      const double q1 = inst.power[0] * b1 / steps;
      for (int a2 = 0; a2 <= steps; ++a2) {
        const double p2 = inst.power[1] * a2 / steps;
        for (int b2 = 0; a2 + b2 <= steps; ++b2) {
          const double q2 = inst.power[1] * b2 / steps;
          if (d1 * p1 < g1 * (n0 + s1 * (p2 + q2) + j1 * q1)) continue;
          if (d2 * p2 < g2 * (n0 + s2 * (p1 + q1) + j2 * q2)) continue;
          const double t = (eh1 * p1 + eh2 * p2) / (n0 + el1 * q1 + el2 * q2);
          best = std::min(best, t);
        }
      }
    }
  }
  return best;
}

}  // namespace

TEST_CASE("robust assembly census") {
  SystemInstance inst = demo_instance(3.0, 0.03);
  const RobustLmis full = build_robust_lmis(inst, 0.4, 0.3, 0.05);
  CHECK(full.problem.vars().size() == 24);
  CHECK(full.problem.blocks().size() == 10);
  for (const MatExpr& b : full.problem.blocks()) CHECK(b.dim() == 3);
  CHECK(full.problem.linear().size() == 5);
  for (int i = 0; i < 10; ++i) CHECK(full.lambda[i].id >= 0);

  SystemInstance nominal = demo_instance(3.0, 0.0);
  const RobustLmis none = build_robust_lmis(nominal, 0.4, 0.3, 0.05);
  CHECK(none.problem.vars().size() == 14);
  CHECK(none.problem.blocks().size() == 0);
  CHECK(none.problem.linear().size() == 13);
  for (int i = 0; i < 10; ++i) CHECK(none.lambda[i].id == -1);

  SystemInstance mixed = demo_instance(3.0, 0.0);
  mixed.eaves_err = {0.1, 0.1};
  const RobustLmis part = build_robust_lmis(mixed, 0.4, 0.3, 0.05);
  CHECK(part.problem.vars().size() == 18);
  CHECK(part.problem.blocks().size() == 4);
  CHECK(part.problem.linear().size() == 9);
  for (int i : {0, 1, 2, 3}) CHECK(part.lambda[i].id >= 0);
  for (int i : {4, 5, 6, 7, 8, 9}) CHECK(part.lambda[i].id == -1);

  const RobustLmis pinned = build_robust_lmis(inst, 0.4, 0.3, 0.05, false);
  CHECK(pinned.problem.linear().size() == 7);
}

TEST_CASE("zero error bound reduces to the perfect-CSI solver") {
  SystemInstance inst = demo_instance();
  SolverOptions opts;
  const double r1 = 0.8 * 1.539831843153863;
  const double r2 = 0.6 * 0.829253249177703;
  const LeakageResult p = min_leakage_at_rates(inst, r1, r2, opts);
  const RobustLeakageResult r = robust_min_leakage(inst, r1, r2, opts);
  REQUIRE(p.status == CellStatus::Solved);
  REQUIRE(r.status == CellStatus::Solved);
  CHECK(p.t_min > 0.0);
  CHECK(std::abs(r.t_min - p.t_min) <= 2 * opts.zeta);
  CHECK(r.rate_lower[0] >= r1 - 1e-6);
  CHECK(r.rate_lower[1] >= r2 - 1e-6);
  CHECK(r.leakage_upper == doctest::Approx(std::log2(1.0 + r.t_min)));
}

TEST_CASE("certificate values satisfy every coupling row") {
  SystemInstance inst = demo_instance(3.0, 0.05);
  const double r1 = 0.5, r2 = 0.3;
  const RobustLeakageResult res = robust_min_leakage(inst, r1, r2);
  REQUIRE(res.status == CellStatus::Solved);
  const auto& b = res.design.aux.bound;
  const double n0 = inst.noise_power;
  CHECK(b[0] + b[1] <= res.t_min * (n0 + b[2] + b[3]) + 1e-6);
  CHECK((std::exp2(r1) - 1.0) * (n0 + b[5] + b[6]) <= b[4] + 1e-6);
  CHECK((std::exp2(r2) - 1.0) * (n0 + b[8] + b[9]) <= b[7] + 1e-6);
  for (int i = 0; i < 10; ++i) {
    CHECK(b[i] >= -1e-7);
    CHECK(res.design.aux.lambda[i] >= -1e-9);
  }
  for (int u = 0; u < 2; ++u) {
    const double tr = res.design.cov.signal[u].mat().trace().real() +
                      res.design.cov.jamming[u].mat().trace().real();
    CHECK(tr <= inst.power[u] + 1e-6);
  }
}

TEST_CASE("sampled worst cases never beat the certificates") {
  SystemInstance inst = demo_instance(3.0, 0.05);
  const RobustLeakageResult res = robust_min_leakage(inst, 0.5, 0.3);
  REQUIRE(res.status == CellStatus::Solved);
  const WorstCaseRates mc = worst_case_rates_mc(inst, res.design.cov, 20000, 77);
  CHECK(mc.message[0] >= res.rate_lower[0] - 1e-6);
  CHECK(mc.message[1] >= res.rate_lower[1] - 1e-6);
  CHECK(mc.leakage <= res.leakage_upper + 1e-6);
}

TEST_CASE("minimum SINR grows with the error bound") {
  SolverOptions opts;
  const double r1 = 0.3, r2 = 0.2;
  const RobustLeakageResult a = robust_min_leakage(demo_instance(3.0, 0.0), r1, r2, opts);
  const RobustLeakageResult c = robust_min_leakage(demo_instance(3.0, 0.02), r1, r2, opts);
  const RobustLeakageResult d = robust_min_leakage(demo_instance(3.0, 0.06), r1, r2, opts);
  REQUIRE(a.status == CellStatus::Solved);
  REQUIRE(c.status == CellStatus::Solved);
  REQUIRE(d.status == CellStatus::Solved);
  CHECK(a.t_min == 0.0);  // below both zero-forcing limits
  CHECK(c.t_min > 1e-6);  // any nonzero signal now leaks into the error ball
  CHECK(d.t_min >= c.t_min - 2 * opts.zeta);
  CHECK(d.t_min > c.t_min);
}

TEST_CASE("single-antenna solver matches an exhaustive grid") {
  SolverOptions opts;
  SystemInstance inst = scalar_instance({0.8, 0.3}, {0.5, -0.2}, {0.11, 0.02},
                                        {-0.04, 0.08}, 2.0);
  inst.direct_err = {0.05, 0.04};
  inst.self_err = {0.03, 0.06};
  inst.eaves_err = {0.02, 0.03};

  SystemInstance loud = scalar_instance({0.8, 0.3}, {0.5, -0.2}, {0.45, 0.1},
                                        {0.3, -0.25}, 2.0);
  loud.direct_err = inst.direct_err;
  loud.self_err = inst.self_err;
  loud.eaves_err = inst.eaves_err;

  struct Case {
    const SystemInstance* inst;
    double r1, r2;
  };
  for (const Case& c : {Case{&inst, 0.6, 0.4}, Case{&loud, 0.5, 0.3}}) {
    const RobustLeakageResult res = robust_min_leakage(*c.inst, c.r1, c.r2, opts);
    REQUIRE(res.status == CellStatus::Solved);
    const double ref = grid_min_sinr(*c.inst, c.r1, c.r2, 80);
    REQUIRE(std::isfinite(ref));
    CHECK(res.t_min <= ref + opts.zeta + 1e-6);
    CHECK(ref - res.t_min <= 0.02);
  }
}

TEST_CASE("no-jamming designs match the closed form and tight sampling") {
  SolverOptions opts;
  SystemInstance inst =
      scalar_instance({0.9, 0.0}, {0.7, 0.0}, {0.25, 0.0}, {0.2, 0.0}, 2.0);
  inst.direct_err = {0.04, 0.03};
  inst.self_err = {0.05, 0.02};
  inst.eaves_err = {0.03, 0.05};
  const double r1 = 0.5, r2 = 0.4;
  const double g1 = std::exp2(r1) - 1.0, g2 = std::exp2(r2) - 1.0;
  const double d1 = lo2(0.9, 0.04), d2 = lo2(0.7, 0.03);
  const double c2 = inst.self_err[1] * inst.self_err[1];
  const double c1 = inst.self_err[0] * inst.self_err[0];
  // Minimal powers solve p1 = g1 (n0 + c2 p2) / d1 and its mirror.
  const double p1 = (g1 / d1) * (1.0 + c2 * g2 / d2) /
                    (1.0 - g1 * g2 * c1 * c2 / (d1 * d2));
  const double p2 = (g2 / d2) * (1.0 + c1 * p1);
  const double t_closed = (hi2(0.25, 0.03) * p1 + hi2(0.2, 0.05) * p2);

  const RobustLeakageResult res = robust_min_leakage(inst, r1, r2, opts, false);
  REQUIRE(res.status == CellStatus::Solved);
  CHECK(std::abs(res.t_min - t_closed) <= opts.zeta + 1e-6);
  CHECK(res.design.cov.jamming[0].mat().trace().real() <= 1e-7);
  CHECK(res.design.cov.jamming[1].mat().trace().real() <= 1e-7);

  // Without jamming the decoupled certificate is the exact worst case, so
  // dense sampling must close the gap to the certified leakage.
  const WorstCaseRates mc = worst_case_rates_mc(inst, res.design.cov, 20000, 5);
  CHECK(mc.leakage <= res.leakage_upper + 1e-6);
  CHECK(mc.leakage >= std::log2(1.0 + t_closed) - 5e-3);
  CHECK(mc.message[0] >= res.rate_lower[0] - 1e-6);
  CHECK(mc.message[1] >= res.rate_lower[1] - 1e-6);
}

TEST_CASE("sweep marks exactly the joint-capacity cells infeasible") {
  SystemInstance inst = demo_instance(3.0, 0.03);
  SolverOptions opts;
  opts.threads = 4;
  const RobustSweepResult sw = robust_max_sum_secrecy(inst, 4, 4, opts);
  REQUIRE(sw.k_steps == 4);
  REQUIRE(sw.l_steps == 4);
  REQUIRE(sw.cells.size() == 25);
  for (const RobustSweepCell& c : sw.cells) {
    const bool capacity_clash = (c.k == 4 && c.l > 0) || (c.l == 4 && c.k > 0);
    if (capacity_clash) {
      CHECK(c.status == CellStatus::InfeasibleAtCapacity);
    } else {
      CHECK(c.status == CellStatus::Solved);
    }
  }
  REQUIRE(sw.best_index >= 0);
  const RobustSweepCell& best = sw.cells[sw.best_index];
  CHECK(sw.best_sum > 1.0);
  CHECK(sw.best_sum == doctest::Approx(best.sum_lower));
  CHECK(sw.cells[0].leakage_upper == 0.0);
}

TEST_CASE("worst-case region collapses an axis with zero capacity") {
  SystemInstance inst = demo_instance(3.0, 0.0);
  inst.direct_err[0] = 1.0;  // exceeds the direct channel norm
  const RobustSweepResult sw = robust_max_sum_secrecy(inst, 3, 3);
  CHECK(sw.k_steps == 0);
  CHECK(sw.l_steps == 3);
  CHECK(sw.cells.size() == 4);
  for (const RobustSweepCell& c : sw.cells) CHECK(c.r1 == 0.0);
  REQUIRE(sw.best_index >= 0);
  CHECK(sw.best_sum > 0.0);
}

TEST_CASE("certified regions nest as the error bound tightens") {
  SolverOptions opts;
  opts.threads = 4;
  const RobustSweepResult tight = robust_max_sum_secrecy(demo_instance(3.0, 0.06), 4, 4, opts);
  const RobustSweepResult loose = robust_max_sum_secrecy(demo_instance(3.0, 0.02), 4, 4, opts);
  const SweepResult exact = max_sum_secrecy(demo_instance(3.0, 0.0), 8, 8, opts);
  const auto poly_tight = region_boundary(region_cells(tight));
  const auto poly_loose = region_boundary(region_cells(loose));
  const auto poly_exact = region_boundary(exact);
  REQUIRE(!poly_tight.empty());
  REQUIRE(!poly_loose.empty());
  CHECK(region_contains(poly_loose, poly_tight, 1e-4));
  CHECK(region_contains(poly_exact, poly_loose, 1e-4));
  CHECK(!region_contains(poly_loose, poly_exact, 1e-4));
}

TEST_CASE("sweep results do not depend on the thread count") {
  SystemInstance inst = demo_instance(3.0, 0.02);
  SolverOptions serial;
  serial.threads = 1;
  SolverOptions parallel;
  parallel.threads = 4;
  const RobustSweepResult a = robust_max_sum_secrecy(inst, 3, 3, serial);
  const RobustSweepResult b = robust_max_sum_secrecy(inst, 3, 3, parallel);
  REQUIRE(a.cells.size() == b.cells.size());
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    CHECK(a.cells[i].status == b.cells[i].status);
    CHECK(a.cells[i].leakage_upper == b.cells[i].leakage_upper);
    CHECK(a.cells[i].rate_lower[0] == b.cells[i].rate_lower[0]);
    CHECK(a.cells[i].rate_lower[1] == b.cells[i].rate_lower[1]);
    CHECK(a.cells[i].sum_lower == b.cells[i].sum_lower);
    for (int u = 0; u < 2; ++u) {
      CHECK((a.cells[i].design.cov.signal[u].mat() -
             b.cells[i].design.cov.signal[u].mat())
                .norm() == 0.0);
    }
  }
  CHECK(a.best_index == b.best_index);
}
