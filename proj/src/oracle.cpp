#include "fdsec/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "fdsec/parallel.hpp"

namespace fdsec {

namespace {

double clamp0(double v) { return v > 0.0 ? v : 0.0; }

double rate_bits(double num, double den) {
  return std::log2(1.0 + clamp0(num) / den);
}

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

struct ScalarPoint {
  double signal = 0.0;
  double jamming = 0.0;
  double rate = 0.0;  // message rate of this split alone
};

// All splits of one budget on the simplex grid, with the message rate that
// depends on nothing else precomputed.
std::vector<ScalarPoint> simplex_points(double budget, double direct_gain,
                                        double n0, int steps) {
  std::vector<ScalarPoint> pts;
  pts.reserve(static_cast<std::size_t>(steps + 1) * (steps + 2) / 2);
  for (int i = 0; i <= steps; ++i) {
    for (int j = 0; i + j <= steps; ++j) {
      ScalarPoint p;
      p.signal = budget * i / steps;
      p.jamming = budget * j / steps;
      p.rate = rate_bits(direct_gain * p.signal, n0 + direct_gain * p.jamming);
      pts.push_back(p);
    }
  }
  return pts;
}

// Points of one error ball: the exact center plus radii {eps/2, eps} swept
// over a uniform direction grid. One antenna walks the phase circle; two
// antennas walk (alpha, theta1, theta2) with alpha on a nested 0..pi/2 grid.
std::vector<ComplexRowVec> ball_points(int dim, double eps, int steps) {
  std::vector<ComplexRowVec> pts;
  pts.push_back(ComplexRowVec::Zero(dim));
  if (eps <= 0.0) return pts;

  std::vector<ComplexRowVec> dirs;
  const double step = 2.0 * std::numbers::pi / steps;
  if (dim == 1) {
    for (int k = 0; k < steps; ++k) {
      ComplexRowVec u(1);
      u(0) = std::polar(1.0, k * step);
      dirs.push_back(u);
    }
  } else {
    for (int a = 0; a <= steps; ++a) {
      const double alpha = 0.5 * std::numbers::pi * a / steps;
      const double c = std::cos(alpha), s = std::sin(alpha);
      for (int k1 = 0; k1 < steps; ++k1) {
        for (int k2 = 0; k2 < steps; ++k2) {
          ComplexRowVec u(2);
          u(0) = c * std::polar(1.0, k1 * step);
          u(1) = s * std::polar(1.0, k2 * step);
          dirs.push_back(u);
        }
      }
    }
  }
  for (double r : {0.5 * eps, eps})
    for (const ComplexRowVec& u : dirs) pts.push_back((r * u).eval());
  return pts;
}

}  // namespace

ScalarOracleResult scalar_sum_secrecy_oracle(const SystemInstance& inst,
                                             int power_grid_steps,
                                             int threads) {
  require(inst.antennas[0] == 1 && inst.antennas[1] == 1,
          "scalar oracle needs single-antenna users");
  for (int u = 0; u < 2; ++u) {
    require(inst.direct[u].size() == 1 && inst.eaves[u].size() == 1,
            "channel vector size mismatch");
    require(std::isfinite(inst.power[u]) && inst.power[u] >= 0.0,
            "power budget must be nonnegative");
  }
  require(std::isfinite(inst.noise_power) && inst.noise_power > 0.0,
          "noise power must be positive");
  require(power_grid_steps >= 1, "grid needs at least one step");

  const double n0 = inst.noise_power;
  const double gd0 = std::norm(inst.direct[0](0));
  const double gd1 = std::norm(inst.direct[1](0));
  const double ge0 = std::norm(inst.eaves[0](0));
  const double ge1 = std::norm(inst.eaves[1](0));

  const std::vector<ScalarPoint> user0 =
      simplex_points(inst.power[0], gd0, n0, power_grid_steps);
  const std::vector<ScalarPoint> user1 =
      simplex_points(inst.power[1], gd1, n0, power_grid_steps);

  struct Slot {
    double value = -1.0;
    std::size_t inner = 0;
  };
  std::vector<Slot> best(user0.size());
  parallel_for(static_cast<int>(user0.size()), threads, [&](int i) {
    const ScalarPoint& a = user0[static_cast<std::size_t>(i)];
    Slot s;
    for (std::size_t j = 0; j < user1.size(); ++j) {
      const ScalarPoint& b = user1[j];
      const double leak = rate_bits(ge0 * a.signal + ge1 * b.signal,
                                    n0 + ge0 * a.jamming + ge1 * b.jamming);
      const double value = a.rate + b.rate - leak;
      if (value > s.value) {
        s.value = value;
        s.inner = j;
      }
    }
    best[static_cast<std::size_t>(i)] = s;
  });

  ScalarOracleResult res;
  std::size_t arg = 0;
  for (std::size_t i = 0; i < best.size(); ++i)
    if (best[i].value > best[arg].value) arg = i;
  res.sum_max = clamp0(best[arg].value);
  res.best.signal = {user0[arg].signal, user1[best[arg].inner].signal};
  res.best.jamming = {user0[arg].jamming, user1[best[arg].inner].jamming};
  return res;
}

WorstCaseRates adversarial_error_search(const SystemInstance& inst,
                                        const CovarianceDesign& d,
                                        int grid_steps_per_dim,
                                        int threads) {
  inst.validate();
  require(inst.antennas[0] <= 2 && inst.antennas[1] <= 2,
          "adversarial search supports at most two antennas per user");
  require(grid_steps_per_dim >= 1, "grid needs at least one step");
  for (int u = 0; u < 2; ++u) {
    require(d.signal[u].dim() == inst.antennas[u] &&
                d.jamming[u].dim() == inst.antennas[u],
            "design dimension mismatch");
  }

  const double n0 = inst.noise_power;
  HermitianMatrix sum0(d.signal[0].mat() + d.jamming[0].mat());
  HermitianMatrix sum1(d.signal[1].mat() + d.jamming[1].mat());
  sum0.mark_psd();
  sum1.mark_psd();

  auto msg = [&](int u, const ComplexRowVec& ed, const ComplexRowVec& es) {
    const ComplexRowVec h = inst.direct[u] + ed;
    const HermitianMatrix& self = (u == 0) ? sum1 : sum0;
    const double num = quadratic_form(h, d.signal[u]);
    const double den = n0 + clamp0(quadratic_form(h, d.jamming[u])) +
                       clamp0(quadratic_form(es, self));
    return rate_bits(num, den);
  };
  auto leak = [&](const ComplexRowVec& e0, const ComplexRowVec& e1) {
    const ComplexRowVec z0 = inst.eaves[0] + e0;
    const ComplexRowVec z1 = inst.eaves[1] + e1;
    const double num =
        quadratic_form(z0, d.signal[0]) + quadratic_form(z1, d.signal[1]);
    const double den = n0 + clamp0(quadratic_form(z0, d.jamming[0])) +
                       clamp0(quadratic_form(z1, d.jamming[1]));
    return rate_bits(num, den);
  };

  // Joint grid over the two balls behind each rate; the center point of each
  // ball keeps single-sided deviations in the scan.
  auto min_msg = [&](int u, const std::vector<ComplexRowVec>& direct_ball,
                     const std::vector<ComplexRowVec>& self_ball) {
    std::vector<double> slot(direct_ball.size());
    parallel_for(static_cast<int>(direct_ball.size()), threads, [&](int i) {
      const ComplexRowVec& ed = direct_ball[static_cast<std::size_t>(i)];
      double lo = msg(u, ed, self_ball[0]);
      for (std::size_t j = 1; j < self_ball.size(); ++j)
        lo = std::min(lo, msg(u, ed, self_ball[j]));
      slot[static_cast<std::size_t>(i)] = lo;
    });
    return *std::min_element(slot.begin(), slot.end());
  };

  const std::vector<ComplexRowVec> ball_d0 =
      ball_points(inst.antennas[0], inst.direct_err[0], grid_steps_per_dim);
  const std::vector<ComplexRowVec> ball_d1 =
      ball_points(inst.antennas[1], inst.direct_err[1], grid_steps_per_dim);
  const std::vector<ComplexRowVec> ball_s0 =
      ball_points(inst.antennas[0], inst.self_err[0], grid_steps_per_dim);
  const std::vector<ComplexRowVec> ball_s1 =
      ball_points(inst.antennas[1], inst.self_err[1], grid_steps_per_dim);
  const std::vector<ComplexRowVec> ball_e0 =
      ball_points(inst.antennas[0], inst.eaves_err[0], grid_steps_per_dim);
  const std::vector<ComplexRowVec> ball_e1 =
      ball_points(inst.antennas[1], inst.eaves_err[1], grid_steps_per_dim);

  WorstCaseRates w;
  w.message[0] = min_msg(0, ball_d0, ball_s1);
  w.message[1] = min_msg(1, ball_d1, ball_s0);

  std::vector<double> slot(ball_e0.size());
  parallel_for(static_cast<int>(ball_e0.size()), threads, [&](int i) {
    const ComplexRowVec& e0 = ball_e0[static_cast<std::size_t>(i)];
    double hi = leak(e0, ball_e1[0]);
    for (std::size_t j = 1; j < ball_e1.size(); ++j)
      hi = std::max(hi, leak(e0, ball_e1[j]));
    slot[static_cast<std::size_t>(i)] = hi;
  });
  w.leakage = *std::max_element(slot.begin(), slot.end());
  return w;
}

}  // namespace fdsec
