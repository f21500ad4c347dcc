#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>

#include "fdsec/linalg.hpp"

namespace fdsec {

// Two-user full-duplex system overheard by a single-antenna eavesdropper.
// User u transmits to the other user's receiver over direct[u] and leaks over
// eaves[u]. All *_err entries bound the Euclidean norm of the channel
// estimation error; zero means the entry is known exactly.
struct SystemInstance {
  std::array<int, 2> antennas{};          // transmit antennas per user
  std::array<ComplexRowVec, 2> direct{};  // [0] S1->S2, [1] S2->S1
  std::array<ComplexRowVec, 2> eaves{};   // [0] S1->E,  [1] S2->E
  double noise_power = 1.0;
  std::array<double, 2> power{};       // linear transmit budgets
  std::array<double, 2> direct_err{};  // [0] on direct[0], [1] on direct[1]
  std::array<double, 2> self_err{};    // self-interference bound at receiver u
  std::array<double, 2> eaves_err{};   // [0] on eaves[0], [1] on eaves[1]

  bool perfect_csi() const;
  // Throws std::invalid_argument on inconsistent dimensions or bad values.
  void validate() const;
};

// Transmit design for one instance: message and jamming covariances per user.
struct CovarianceDesign {
  std::array<HermitianMatrix, 2> signal;
  std::array<HermitianMatrix, 2> jamming;

  static CovarianceDesign Zero(const SystemInstance& inst);
  double total_power() const;
};

// Achieved rates on the nominal channels, in bits per channel use.
double message_rate(const SystemInstance& inst, const CovarianceDesign& d,
                    int user);
double leakage_rate(const SystemInstance& inst, const CovarianceDesign& d);

struct CapacityBounds {
  std::array<double, 2> direct{};  // per-user message rate caps
  double eaves = 0.0;              // eavesdropper rate cap
};

// Closed-form caps under worst-case channel error norms. With perfect CSI
// these are the point-to-point capacities of the three links.
CapacityBounds capacity_bounds(const SystemInstance& inst);

struct WorstCaseRates {
  std::array<double, 2> message{};  // minimized over sampled errors
  double leakage = 0.0;             // maximized over sampled errors
};

// Monte Carlo probe of a design's robustness: errors drawn uniformly on each
// uncertainty sphere (plus the exact center), jointly per draw. Deterministic
// in (samples, seed) regardless of how callers batch the work.
WorstCaseRates worst_case_rates_mc(const SystemInstance& inst,
                                   const CovarianceDesign& d, int samples,
                                   std::uint64_t seed);

// Text config loader. Format: `key = value` lines, `#` comments, complex
// vector entries `a+bi` separated by commas. Keys: m1 m2 h21 h12 z1 z2 n0
// p1_db p2_db and either `eps` or all of eps11 eps12 eps21 eps22 eps1 eps2.
// Throws std::runtime_error naming the line on any malformed input.
SystemInstance parse_instance(std::istream& in, const std::string& name);
SystemInstance load_instance(const std::string& path);
std::string format_instance(const SystemInstance& inst);

}  // namespace fdsec
