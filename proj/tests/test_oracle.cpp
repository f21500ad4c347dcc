#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "fdsec/oracle.hpp"
#include "fdsec/perfect.hpp"
#include "fdsec/robust.hpp"
#include "test_util.hpp"

using namespace fdsec;
using namespace fdsec::test;

namespace {

SystemInstance scalar_instance() {
  SystemInstance inst;
  inst.antennas = {1, 1};
  inst.direct[0] = ComplexRowVec(1);
  inst.direct[0](0) = {0.9, 0.3};
  inst.direct[1] = ComplexRowVec(1);
  inst.direct[1](0) = {0.5, -0.6};
  inst.eaves[0] = ComplexRowVec(1);
  inst.eaves[0](0) = {0.25, 0.1};
  inst.eaves[1] = ComplexRowVec(1);
  inst.eaves[1](0) = {-0.2, 0.15};
  inst.noise_power = 1.0;
  inst.power = {2.0, 2.0};
  return inst;
}

CovarianceDesign split_beam_design(const SystemInstance& inst) {
  CovarianceDesign d;
  for (int u = 0; u < 2; ++u) {
    const ComplexRowVec& h = inst.direct[u];
    const int m = inst.antennas[u];
    const ComplexMatrix mrt = h.adjoint() * h / h.squaredNorm();
    d.signal[u] = HermitianMatrix((0.5 * inst.power[u] * mrt).eval());
    d.jamming[u] = HermitianMatrix(
        (0.5 * inst.power[u] / m * (ComplexMatrix::Identity(m, m) - mrt))
            .eval());
  }
  return d;
}

}  // namespace

TEST_CASE("zero eavesdropper channels give the capacity sum") {
  SystemInstance inst = scalar_instance();
  inst.eaves[0](0) = 0.0;
  inst.eaves[1](0) = 0.0;
  const CapacityBounds caps = capacity_bounds(inst);
  const ScalarOracleResult res = scalar_sum_secrecy_oracle(inst, 64);
  CHECK(std::abs(res.sum_max - (caps.direct[0] + caps.direct[1])) <= 1e-12);
  for (int u = 0; u < 2; ++u) {
    CHECK(res.best.signal[u] == inst.power[u]);
    CHECK(res.best.jamming[u] == 0.0);
  }
}

TEST_CASE("zero budgets yield zero secrecy") {
  SystemInstance inst = scalar_instance();
  inst.power = {0.0, 0.0};
  const ScalarOracleResult res = scalar_sum_secrecy_oracle(inst, 16);
  CHECK(res.sum_max == 0.0);
  CHECK(res.best.signal[0] == 0.0);
  CHECK(res.best.jamming[1] == 0.0);
}

TEST_CASE("the oracle agrees with the sweep on a scalar instance") {
  SystemInstance inst = scalar_instance();
  SolverOptions opts;
  opts.threads = 4;
  const SweepResult sweep = max_sum_secrecy(inst, 64, 64, opts);
  const ScalarOracleResult oracle = scalar_sum_secrecy_oracle(inst, 96, 4);
  CHECK(std::abs(sweep.best_sum - oracle.sum_max) <= 0.05);
}

TEST_CASE("oracle argument validation") {
  CHECK_THROWS_AS(scalar_sum_secrecy_oracle(demo_instance(), 32),
                  std::invalid_argument);
  CHECK_THROWS_AS(scalar_sum_secrecy_oracle(scalar_instance(), 0),
                  std::invalid_argument);

  SystemInstance wide;
  wide.antennas = {3, 1};
  wide.direct[0] = ComplexRowVec::Constant(3, {0.3, 0.1});
  wide.direct[1] = ComplexRowVec::Constant(1, {0.4, -0.2});
  wide.eaves[0] = ComplexRowVec::Constant(3, {0.05, 0.0});
  wide.eaves[1] = ComplexRowVec::Constant(1, {0.1, 0.05});
  wide.noise_power = 1.0;
  wide.power = {1.0, 1.0};
  CHECK_THROWS_AS(
      adversarial_error_search(wide, CovarianceDesign::Zero(wide), 8),
      std::invalid_argument);
  SystemInstance inst = demo_instance();
  CHECK_THROWS_AS(
      adversarial_error_search(inst, CovarianceDesign::Zero(inst), 0),
      std::invalid_argument);
}

TEST_CASE("perfect knowledge collapses the search to the nominal rates") {
  SystemInstance inst = demo_instance();
  const CovarianceDesign d = split_beam_design(inst);
  const WorstCaseRates w = adversarial_error_search(inst, d, 4);
  CHECK(std::abs(w.message[0] - message_rate(inst, d, 0)) <= 1e-12);
  CHECK(std::abs(w.message[1] - message_rate(inst, d, 1)) <= 1e-12);
  CHECK(std::abs(w.leakage - leakage_rate(inst, d)) <= 1e-12);
}

TEST_CASE("a zero design has nothing to lose") {
  SystemInstance inst = demo_instance(3.0, 0.05);
  const WorstCaseRates w =
      adversarial_error_search(inst, CovarianceDesign::Zero(inst), 6);
  CHECK(w.message[0] == 0.0);
  CHECK(w.message[1] == 0.0);
  CHECK(w.leakage == 0.0);
}

TEST_CASE("certified robust bounds survive the grid adversary") {
  SystemInstance inst = demo_instance(3.0, 0.03);
  const CapacityBounds caps = capacity_bounds(inst);
  const RobustLeakageResult res =
      robust_min_leakage(inst, 0.5 * caps.direct[0], 0.5 * caps.direct[1]);
  REQUIRE(res.status == CellStatus::Solved);
  const WorstCaseRates w =
      adversarial_error_search(inst, res.design.cov, 8, 4);
  CHECK(w.message[0] >= res.rate_lower[0] - 1e-6);
  CHECK(w.message[1] >= res.rate_lower[1] - 1e-6);
  CHECK(w.leakage <= res.leakage_upper + 1e-6);
}

TEST_CASE("phase rotations do not move the oracle") {
  SystemInstance inst = scalar_instance();
  const ScalarOracleResult base = scalar_sum_secrecy_oracle(inst, 48);
  SystemInstance spun = inst;
  spun.direct[0] *= std::polar(1.0, 0.7);
  spun.eaves[1] *= std::polar(1.0, 1.9);
  const ScalarOracleResult rot = scalar_sum_secrecy_oracle(spun, 48);
  CHECK(std::abs(base.sum_max - rot.sum_max) <= 1e-9);

  // Grid-aligned rotations permute the direction set of the search.
  SystemInstance wc = demo_instance(3.0, 0.04);
  const CovarianceDesign d = split_beam_design(wc);
  const int steps = 8;
  const WorstCaseRates w0 = adversarial_error_search(wc, d, steps);
  SystemInstance wc_rot = wc;
  const std::complex<double> phase =
      std::polar(1.0, 2.0 * std::numbers::pi * 3.0 / steps);
  wc_rot.direct[0] *= phase;
  wc_rot.eaves[1] *= phase;
  CovarianceDesign d_rot = d;
  const WorstCaseRates w1 = adversarial_error_search(wc_rot, d_rot, steps);
  CHECK(std::abs(w0.message[0] - w1.message[0]) <= 1e-9);
  CHECK(std::abs(w0.leakage - w1.leakage) <= 1e-9);
}

TEST_CASE("doubling the grid only tightens the extrema") {
  SystemInstance inst = demo_instance(3.0, 0.04);
  const CovarianceDesign d = split_beam_design(inst);
  const WorstCaseRates coarse = adversarial_error_search(inst, d, 4);
  const WorstCaseRates fine = adversarial_error_search(inst, d, 8, 4);
  CHECK(fine.message[0] <= coarse.message[0] + 1e-9);
  CHECK(fine.message[1] <= coarse.message[1] + 1e-9);
  CHECK(fine.leakage >= coarse.leakage - 1e-9);
}
