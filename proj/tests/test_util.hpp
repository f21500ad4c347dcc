#pragma once

#include <random>

#include "fdsec/channel.hpp"
#include "fdsec/linalg.hpp"

namespace fdsec::test {

inline std::complex<double> random_unit_complex(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return {u(rng), u(rng)};
}

inline ComplexRowVec random_row(std::mt19937_64& rng, int n) {
  ComplexRowVec v(n);
  for (int i = 0; i < n; ++i) v(i) = random_unit_complex(rng);
  return v;
}

inline HermitianMatrix random_hermitian(std::mt19937_64& rng, int n) {
  ComplexMatrix a(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) a(r, c) = random_unit_complex(rng);
  }
  return HermitianMatrix(0.5 * (a + a.adjoint()).eval());
}

inline HermitianMatrix random_psd(std::mt19937_64& rng, int n) {
  ComplexMatrix a(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) a(r, c) = random_unit_complex(rng);
  }
  HermitianMatrix h((a * a.adjoint()).eval());
  h.mark_psd();
  return h;
}

// Fixed two-antenna demo channels used across the test suite.
inline ComplexRowVec demo_h12() {
  ComplexRowVec v(2);
  v << std::complex<double>(0.0838, 0.5207), std::complex<double>(0.2226, -0.2482);
  return v;
}
inline ComplexRowVec demo_h21() {
  ComplexRowVec v(2);
  v << std::complex<double>(0.4407, 0.6653), std::complex<double>(0.5650, -0.0015);
  return v;
}
inline ComplexRowVec demo_z1() {
  ComplexRowVec v(2);
  v << std::complex<double>(0.0765, 0.0276), std::complex<double>(-0.0093, 0.0062);
  return v;
}
inline ComplexRowVec demo_z2() {
  ComplexRowVec v(2);
  v << std::complex<double>(-0.0449, 0.0314), std::complex<double>(-0.0396, -0.0672);
  return v;
}

// Demo system at a given symmetric budget (dB) and shared error bound.
inline SystemInstance demo_instance(double power_db = 3.0, double eps = 0.0) {
  SystemInstance inst;
  inst.antennas = {2, 2};
  inst.direct = {demo_h21(), demo_h12()};
  inst.eaves = {demo_z1(), demo_z2()};
  inst.noise_power = 1.0;
  const double p = std::pow(10.0, power_db / 10.0);
  inst.power = {p, p};
  inst.direct_err = {eps, eps};
  inst.self_err = {eps, eps};
  inst.eaves_err = {eps, eps};
  return inst;
}

}  // namespace fdsec::test
