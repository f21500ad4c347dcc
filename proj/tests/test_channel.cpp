#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fdsec/channel.hpp"
#include "test_util.hpp"

using namespace fdsec;

namespace {

CovarianceDesign aligned_design(const SystemInstance& inst, int user) {
  CovarianceDesign d = CovarianceDesign::Zero(inst);
  const ComplexRowVec& h = inst.direct[user];
  const ComplexMatrix outer =
      inst.power[user] * (h.adjoint() * h) / h.squaredNorm();
  d.signal[user] = HermitianMatrix(outer);
  d.signal[user].mark_psd();
  return d;
}

}  // namespace

TEST_CASE("link capacity bounds match closed forms at two budgets") {
  const CapacityBounds c3 = capacity_bounds(test::demo_instance(3.0));
  CHECK(c3.direct[0] == doctest::Approx(1.539831843153863).epsilon(1e-12));
  CHECK(c3.direct[1] == doctest::Approx(0.829253249177703).epsilon(1e-12));
  CHECK(c3.eaves == doctest::Approx(0.044848500666623).epsilon(1e-12));

  const CapacityBounds c6 = capacity_bounds(test::demo_instance(6.0));
  CHECK(c6.direct[0] == doctest::Approx(2.264889056005420).epsilon(1e-12));
  CHECK(c6.direct[1] == doctest::Approx(1.350412856375037).epsilon(1e-12));
  CHECK(c6.eaves == doctest::Approx(0.088141734547499).epsilon(1e-12));
}

TEST_CASE("capacity bounds account for worst-case channel errors") {
  const CapacityBounds ca = capacity_bounds(test::demo_instance(3.0, 0.02));
  CHECK(ca.direct[0] == doctest::Approx(1.500988896837288).epsilon(1e-12));
  CHECK(ca.direct[1] == doctest::Approx(0.788908138743433).epsilon(1e-12));
  CHECK(ca.eaves == doctest::Approx(0.066716567307486).epsilon(1e-12));

  const CapacityBounds cb = capacity_bounds(test::demo_instance(3.0, 0.06));
  CHECK(cb.direct[0] == doctest::Approx(1.422596868795715).epsilon(1e-12));
  CHECK(cb.direct[1] == doctest::Approx(0.708899505234356).epsilon(1e-12));
  CHECK(cb.eaves == doctest::Approx(0.122233528464576).epsilon(1e-12));

  CHECK(ca.direct[0] < 1.539831843153863);
  CHECK(cb.direct[0] < ca.direct[0]);
  CHECK(cb.eaves > ca.eaves);

  // Error bound at least the channel norm wipes out the direct link.
  const CapacityBounds cz = capacity_bounds(test::demo_instance(3.0, 1.0));
  CHECK(cz.direct[0] == 0.0);
  CHECK(cz.direct[1] == 0.0);
}

TEST_CASE("aligned rank-one signal attains the direct capacity") {
  const SystemInstance inst = test::demo_instance(3.0);
  const CovarianceDesign d = aligned_design(inst, 0);
  CHECK(message_rate(inst, d, 0) ==
        doctest::Approx(1.539831843153863).epsilon(1e-12));
  CHECK(message_rate(inst, d, 1) == 0.0);
  CHECK(leakage_rate(inst, d) ==
        doctest::Approx(0.010300636929437).epsilon(1e-11));
  CHECK(d.total_power() == doctest::Approx(inst.power[0]).epsilon(1e-12));
}

TEST_CASE("jamming alone carries no message") {
  const SystemInstance inst = test::demo_instance(3.0);
  CovarianceDesign d = CovarianceDesign::Zero(inst);
  d.jamming[0] = HermitianMatrix(0.5 * inst.power[0] *
                                 ComplexMatrix::Identity(2, 2));
  d.jamming[0].mark_psd();
  CHECK(message_rate(inst, d, 0) == 0.0);
  CHECK(leakage_rate(inst, d) == 0.0);
  CHECK(d.total_power() == doctest::Approx(inst.power[0]).epsilon(1e-12));
}

TEST_CASE("monte carlo equals deterministic rates under exact csi") {
  const SystemInstance inst = test::demo_instance(3.0);
  const CovarianceDesign d = aligned_design(inst, 0);
  const WorstCaseRates w = worst_case_rates_mc(inst, d, 64, 7);
  CHECK(w.message[0] == message_rate(inst, d, 0));
  CHECK(w.message[1] == message_rate(inst, d, 1));
  CHECK(w.leakage == leakage_rate(inst, d));
}

TEST_CASE("monte carlo worst case brackets the nominal rates") {
  const SystemInstance inst = test::demo_instance(3.0, 0.05);
  CovarianceDesign d = aligned_design(inst, 0);
  const CovarianceDesign d1 = aligned_design(inst, 1);
  d.signal[1] = d1.signal[1];
  const WorstCaseRates w = worst_case_rates_mc(inst, d, 2000, 11);
  CHECK(w.message[0] < message_rate(inst, d, 0));
  CHECK(w.message[1] < message_rate(inst, d, 1));
  CHECK(w.leakage > leakage_rate(inst, d));

  // Sampled extremes respect the closed-form caps.
  const CapacityBounds cb = capacity_bounds(inst);
  CHECK(w.leakage <= cb.eaves + 1e-12);
  CHECK(w.message[0] <=
        std::log2(1.0 + inst.direct[0].squaredNorm() * inst.power[0]) + 1e-12);
}

TEST_CASE("monte carlo is deterministic in samples and seed") {
  const SystemInstance inst = test::demo_instance(3.0, 0.04);
  const CovarianceDesign d = aligned_design(inst, 0);
  const WorstCaseRates a = worst_case_rates_mc(inst, d, 1500, 42);
  const WorstCaseRates b = worst_case_rates_mc(inst, d, 1500, 42);
  CHECK(a.message[0] == b.message[0]);
  CHECK(a.message[1] == b.message[1]);
  CHECK(a.leakage == b.leakage);
  const WorstCaseRates c = worst_case_rates_mc(inst, d, 1500, 43);
  CHECK(a.leakage != c.leakage);
}

TEST_CASE("config parser round trips the shipped instance") {
  const SystemInstance inst =
      load_instance(std::string(FDSEC_CONFIG_DIR) + "/default_2x2.cfg");
  CHECK(inst.antennas[0] == 2);
  CHECK(inst.antennas[1] == 2);
  CHECK((inst.direct[0] - test::demo_h21()).norm() == 0.0);
  CHECK((inst.direct[1] - test::demo_h12()).norm() == 0.0);
  CHECK((inst.eaves[0] - test::demo_z1()).norm() == 0.0);
  CHECK((inst.eaves[1] - test::demo_z2()).norm() == 0.0);
  CHECK(inst.noise_power == 1.0);
  CHECK(inst.power[0] == doctest::Approx(1.995262314968880).epsilon(1e-15));
  CHECK(inst.perfect_csi());

  const std::string text = format_instance(inst);
  std::istringstream in(text);
  const SystemInstance again = parse_instance(in, "round-trip");
  CHECK((again.direct[0] - inst.direct[0]).norm() == 0.0);
  CHECK((again.eaves[1] - inst.eaves[1]).norm() == 0.0);
  CHECK(again.power[0] == doctest::Approx(inst.power[0]).epsilon(1e-14));
  CHECK(again.self_err[0] == inst.self_err[0]);
}

TEST_CASE("config parser handles scalar and named error bounds") {
  std::istringstream in(
      "m1 = 1\nm2 = 1\nh21 = 1+0i\nh12 = 0.5-0.25i\nz1 = 0.1i\nz2 = -0.2\n"
      "n0 = 0.5\np1_db = 0\np2_db = 3\n"
      "eps11 = 0.01\neps22 = 0.02\neps21 = 0.03\neps12 = 0.04\n"
      "eps1 = 0.05\neps2 = 0.06\n");
  const SystemInstance inst = parse_instance(in, "named");
  CHECK(inst.self_err[0] == 0.01);
  CHECK(inst.self_err[1] == 0.02);
  CHECK(inst.direct_err[0] == 0.03);
  CHECK(inst.direct_err[1] == 0.04);
  CHECK(inst.eaves_err[0] == 0.05);
  CHECK(inst.eaves_err[1] == 0.06);
  CHECK(inst.direct[1](0) == std::complex<double>(0.5, -0.25));
  CHECK(inst.eaves[0](0) == std::complex<double>(0.0, 0.1));
  CHECK(inst.eaves[1](0) == std::complex<double>(-0.2, 0.0));
  CHECK_FALSE(inst.perfect_csi());
}

TEST_CASE("config parser reports the offending line") {
  auto expect_fail = [](const std::string& text, const std::string& needle) {
    std::istringstream in(text);
    try {
      parse_instance(in, "cfg");
      FAIL_CHECK("expected parse failure for: " << needle);
    } catch (const std::exception& ex) {
      const std::string msg = ex.what();
      CHECK_MESSAGE(msg.find(needle) != std::string::npos,
                    "message '" << msg << "' lacks '" << needle << "'");
    }
  };
  const std::string base =
      "m1 = 1\nm2 = 1\nh21 = 1\nh12 = 1\nz1 = 0.1\nz2 = 0.1\n"
      "n0 = 1\np1_db = 0\np2_db = 0\n";

  expect_fail("m1 = 1\nm2 1\n", "cfg:2");
  expect_fail(base + "eps = 0\nbogus = 3\n", "unknown key 'bogus'");
  expect_fail(base + "eps = 0\neps = 1\n", "duplicate key 'eps'");
  expect_fail(base + "eps = 0\neps1 = 0.1\n", "conflicts");
  expect_fail(base + "eps1 = 0.1\n", "all six");
  expect_fail(base + "eps = 1+2j\n", "cfg:10");
  expect_fail(base + "eps = -0.1\n", "nonnegative");
  expect_fail("m1 = 2\n" + base.substr(7) + "eps = 0\n",
              "does not match antenna count");
  expect_fail("m1 = 2.5\n" + base.substr(7) + "eps = 0\n",
              "positive integer");
  const std::string no_n0 =
      "m1 = 1\nm2 = 1\nh21 = 1\nh12 = 1\nz1 = 0.1\nz2 = 0.1\n"
      "n0 = 0\np1_db = 0\np2_db = 0\neps = 0\n";
  expect_fail(no_n0, "noise power");
  expect_fail(base.substr(7) + "eps = 0\n", "missing key 'm1'");
}

TEST_CASE("complex entry parser accepts the documented forms") {
  std::istringstream in(
      "m1 = 4\nm2 = 1\n"
      "h21 = 2, -3i, 1e-2+2.5e1i, 1 - i\n"
      "h12 = 1\nz1 = 0.1, 0.1, 0.1, 0.1\nz2 = 0.1\n"
      "n0 = 1\np1_db = 0\np2_db = 0\neps = 0\n");
  const SystemInstance inst = parse_instance(in, "forms");
  CHECK(inst.direct[0](0) == std::complex<double>(2.0, 0.0));
  CHECK(inst.direct[0](1) == std::complex<double>(0.0, -3.0));
  CHECK(inst.direct[0](2) == std::complex<double>(1e-2, 25.0));
  CHECK(inst.direct[0](3) == std::complex<double>(1.0, -1.0));
}
