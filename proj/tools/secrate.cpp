// Command-line front end: loads an instance config, runs the solver
// pipelines, and writes CSV tables, an SVG region plot, and a run manifest.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fdsec/channel.hpp"
#include "fdsec/kkt.hpp"
#include "fdsec/oracle.hpp"
#include "fdsec/perfect.hpp"
#include "fdsec/power.hpp"
#include "fdsec/robust.hpp"

namespace {

using nlohmann::json;
using namespace fdsec;

constexpr const char* kVersion = "1.0.0";
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Opts {
  std::string config = "configs/default_2x2.cfg";
  std::string grid = "20,20";
  double zeta = 1e-4;
  std::vector<double> eps{0.0, 0.02, 0.06};
  double power_db = std::numeric_limits<double>::quiet_NaN();
  int samples = 2000;
  std::uint64_t seed = 7;
  std::string out = "out";
  std::string format = "both";
  int threads = 1;
  std::vector<double> floors{0.0, 0.2, 0.4, 0.6, 0.8};
  double gamma_eaves = kInf;
};

std::string num9(double v) {
  char b[48];
  std::snprintf(b, sizeof(b), "%.9g", v);
  return b;
}

std::string num3(double v) {
  char b[48];
  std::snprintf(b, sizeof(b), "%.3g", v);
  return b;
}

const char* status_str(CellStatus s) {
  switch (s) {
    case CellStatus::Solved: return "solved";
    case CellStatus::InfeasibleAtCapacity: return "infeasible-at-capacity";
    default: return "numerical-failure";
  }
}

const char* status_str(PowerStatus s) {
  switch (s) {
    case PowerStatus::Solved: return "solved";
    case PowerStatus::Infeasible: return "infeasible";
    default: return "numerical-failure";
  }
}

std::pair<int, int> parse_grid(const std::string& grid) {
  int k = 0, l = 0;
  char extra = 0;
  const int got = std::sscanf(grid.c_str(), "%d,%d%c", &k, &l, &extra);
  if (got == 1) l = k;
  if ((got != 1 && got != 2) || k < 1 || l < 1 || k > 512 || l > 512)
    throw std::runtime_error("--grid expects K or K,L with 1 <= K,L <= 512");
  return {k, l};
}

SystemInstance load_with_overrides(const Opts& o) {
  SystemInstance inst = load_instance(o.config);
  if (!std::isnan(o.power_db)) {
    const double p = std::pow(10.0, o.power_db / 10.0);
    inst.power = {p, p};
    inst.validate();
  }
  return inst;
}

SolverOptions solver_options(const Opts& o) {
  SolverOptions s;
  s.zeta = o.zeta;
  s.threads = o.threads;
  return s;
}

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  out << body;
  if (!out) throw std::runtime_error(path.string() + ": cannot write");
}

// One plotted boundary: the staircase vertices in rate coordinates.
struct Series {
  std::string label;
  std::vector<RegionPoint> pts;
};

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                    "#9467bd", "#ff7f0e", "#8c564b",
                                    "#17becf", "#7f7f7f"};

// The data group carries a scale transform, so polyline vertices are written
// verbatim in rate units and match the boundary CSVs digit for digit.
std::string region_svg(const std::vector<Series>& series) {
  const double w = 640, h = 480, ml = 70, mr = 20, mt = 20, mb = 55;
  const double pw = w - ml - mr, ph = h - mt - mb;
  double xmax = 1e-3, ymax = 1e-3;
  for (const Series& s : series)
    for (const RegionPoint& p : s.pts) {
      xmax = std::max(xmax, p.r1);
      ymax = std::max(ymax, p.r2);
    }
  xmax *= 1.05;
  ymax *= 1.05;
  const double sx = pw / xmax, sy = ph / ymax;

  std::string os;
  os += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" "
        "height=\"480\" viewBox=\"0 0 640 480\">\n";
  os += "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
  os += "<g font-family=\"sans-serif\" font-size=\"13\" fill=\"#222\">\n";

  os += "<rect x=\"" + num9(ml) + "\" y=\"" + num9(mt) + "\" width=\"" +
        num9(pw) + "\" height=\"" + num9(ph) +
        "\" fill=\"none\" stroke=\"#333\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = xmax * i / 5, yv = ymax * i / 5;
    const double px = ml + sx * xv, py = mt + ph - sy * yv;
    os += "<line x1=\"" + num9(px) + "\" y1=\"" + num9(mt + ph) + "\" x2=\"" +
          num9(px) + "\" y2=\"" + num9(mt + ph + 6) +
          "\" stroke=\"#333\"/>\n";
    os += "<text x=\"" + num9(px) + "\" y=\"" + num9(mt + ph + 20) +
          "\" text-anchor=\"middle\">" + num3(xv) + "</text>\n";
    os += "<line x1=\"" + num9(ml - 6) + "\" y1=\"" + num9(py) + "\" x2=\"" +
          num9(ml) + "\" y2=\"" + num9(py) + "\" stroke=\"#333\"/>\n";
    os += "<text x=\"" + num9(ml - 10) + "\" y=\"" + num9(py + 4) +
          "\" text-anchor=\"end\">" + num3(yv) + "</text>\n";
  }
  os += "<text x=\"" + num9(ml + pw / 2) + "\" y=\"" + num9(h - 10) +
        "\" text-anchor=\"middle\">R1 (bits/channel use)</text>\n";
  os += "<text x=\"18\" y=\"" + num9(mt + ph / 2) +
        "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
        num9(mt + ph / 2) + ")\">R2 (bits/channel use)</text>\n";

  os += "<g transform=\"translate(" + num9(ml) + "," + num9(mt + ph) +
        ") scale(" + num9(sx) + ",-" + num9(sy) + ")\">\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    os += "<polyline fill=\"none\" stroke=\"";
    os += kPalette[i % 8];
    os += "\" stroke-width=\"1.5\" vector-effect=\"non-scaling-stroke\" "
          "points=\"";
    for (std::size_t j = 0; j < series[i].pts.size(); ++j) {
      if (j) os += " ";
      os += num9(series[i].pts[j].r1) + "," + num9(series[i].pts[j].r2);
    }
    os += "\"/>\n";
  }
  os += "</g>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const double ly = mt + 14 + 18 * static_cast<double>(i);
    os += "<line x1=\"" + num9(w - mr - 120) + "\" y1=\"" + num9(ly) +
          "\" x2=\"" + num9(w - mr - 92) + "\" y2=\"" + num9(ly) +
          "\" stroke=\"";
    os += kPalette[i % 8];
    os += "\" stroke-width=\"2\"/>\n";
    os += "<text x=\"" + num9(w - mr - 86) + "\" y=\"" + num9(ly + 4) +
          "\">" + series[i].label + "</text>\n";
  }
  os += "</g>\n</svg>\n";
  return os;
}

std::string boundary_csv(const std::vector<RegionPoint>& pts) {
  std::string os = "r1,r2\n";
  for (const RegionPoint& p : pts)
    os += num9(p.r1) + "," + num9(p.r2) + "\n";
  return os;
}

std::string perfect_cells_csv(const SweepResult& sw) {
  std::string os = "k,l,r1,r2,status,leakage,sumSecrecy\n";
  for (const SweepCell& c : sw.cells) {
    os += std::to_string(c.k) + "," + std::to_string(c.l) + "," + num9(c.r1) +
          "," + num9(c.r2) + "," + status_str(c.status) + "," +
          num9(c.leakage) + "," + num9(c.sum_secrecy) + "\n";
  }
  return os;
}

std::string robust_cells_csv(const RobustSweepResult& sw) {
  std::string os =
      "k,l,r1,r2,status,leakageUpper,rateLower1,rateLower2,sumLower\n";
  for (const RobustSweepCell& c : sw.cells) {
    os += std::to_string(c.k) + "," + std::to_string(c.l) + "," + num9(c.r1) +
          "," + num9(c.r2) + "," + status_str(c.status) + "," +
          num9(c.leakage_upper) + "," + num9(c.rate_lower[0]) + "," +
          num9(c.rate_lower[1]) + "," + num9(c.sum_lower) + "\n";
  }
  return os;
}

struct RunContext {
  const Opts& o;
  std::string command;
  std::filesystem::path dir;
  std::vector<std::string> outputs;
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();

  RunContext(const Opts& opts, std::string cmd)
      : o(opts), command(std::move(cmd)), dir(opts.out) {
    std::filesystem::create_directories(dir);
  }

  void emit(const std::string& name, const std::string& body) {
    write_file(dir / name, body);
    outputs.push_back(name);
  }

  void manifest(const SystemInstance& inst, json extra = json::object()) {
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    json j;
    j["tool"] = "secrate";
    j["version"] = kVersion;
    j["command"] = command;
    j["config"] = o.config;
    json p;
    p["grid"] = o.grid;
    p["zeta"] = o.zeta;
    p["eps"] = o.eps;
    if (!std::isnan(o.power_db)) p["power_db"] = o.power_db;
    p["samples"] = o.samples;
    p["seed"] = o.seed;
    p["threads"] = o.threads;
    p["format"] = o.format;
    for (auto& [k, v] : extra.items()) p[k] = v;
    j["parameters"] = p;
    j["instance"] = format_instance(inst);
    j["outputs"] = outputs;
    j["wall_seconds"] = std::round(wall * 1000.0) / 1000.0;
    write_file(dir / "manifest.json", j.dump(2) + "\n");
  }
};

int run_perfect_region(const Opts& o) {
  const auto [k, l] = parse_grid(o.grid);
  const SystemInstance inst = load_with_overrides(o);
  RunContext ctx(o, "perfect-region");
  const SweepResult sw = max_sum_secrecy(inst, k, l, solver_options(o));

  int solved = 0, failed = 0;
  for (const SweepCell& c : sw.cells) {
    solved += c.status == CellStatus::Solved;
    failed += c.status == CellStatus::NumericalFailure;
  }
  const std::vector<RegionPoint> boundary = region_boundary(sw);
  if (o.format != "svg") {
    ctx.emit("perfect_cells.csv", perfect_cells_csv(sw));
    ctx.emit("perfect_boundary.csv", boundary_csv(boundary));
  }
  if (o.format != "csv")
    ctx.emit("region.svg", region_svg({{"nominal", boundary}}));
  ctx.manifest(inst, {{"cells_solved", solved}, {"cells_failed", failed},
                      {"best_sum", sw.best_sum}});
  std::cout << "perfect-region: " << solved << "/" << sw.cells.size()
            << " cells solved, best sum " << num9(sw.best_sum) << "\n";
  if (failed > 0) return 1;
  return solved > 0 ? 0 : 2;
}

int run_robust_region(const Opts& o) {
  const auto [k, l] = parse_grid(o.grid);
  if (o.eps.empty()) throw std::runtime_error("--eps needs at least one value");
  SystemInstance inst = load_with_overrides(o);
  RunContext ctx(o, "robust-region");

  std::vector<Series> series;
  int solved_total = 0, failed = 0;
  for (const double e : o.eps) {
    if (!(e >= 0.0))
      throw std::runtime_error("--eps values must be nonnegative");
    SystemInstance robust = inst;
    robust.direct_err = {e, e};
    robust.self_err = {e, e};
    robust.eaves_err = {e, e};
    robust.validate();
    const RobustSweepResult sw =
        robust_max_sum_secrecy(robust, k, l, solver_options(o));
    int solved = 0;
    for (const RobustSweepCell& c : sw.cells) {
      solved += c.status == CellStatus::Solved;
      failed += c.status == CellStatus::NumericalFailure;
    }
    solved_total += solved;
    const std::vector<RegionPoint> boundary =
        region_boundary(region_cells(sw));
    const std::string stem = "robust_eps" + num9(e);
    if (o.format != "svg") {
      ctx.emit(stem + "_cells.csv", robust_cells_csv(sw));
      ctx.emit(stem + "_boundary.csv", boundary_csv(boundary));
    }
    series.push_back({"eps = " + num9(e), boundary});
    std::cout << "robust-region eps=" << num9(e) << ": " << solved << "/"
              << sw.cells.size() << " cells solved, best sum "
              << num9(sw.best_sum) << "\n";
  }
  if (o.format != "csv") ctx.emit("region.svg", region_svg(series));
  ctx.manifest(inst, {{"cells_solved", solved_total}});
  if (failed > 0) return 1;
  return solved_total > 0 ? 0 : 2;
}

int run_power_min(const Opts& o) {
  if (o.floors.empty())
    throw std::runtime_error("--floors needs at least one value");
  const SystemInstance inst = load_with_overrides(o);
  RunContext ctx(o, "power-min");
  const std::vector<PowerSweepPoint> pts =
      power_vs_sinr_sweep(inst, o.floors, o.gamma_eaves, solver_options(o));

  std::string csv = "gammaS2,gammaS1,gammaE,status,totalPower,margin\n";
  int solved = 0, failed = 0;
  for (const PowerSweepPoint& p : pts) {
    csv += num9(p.floor) + "," + num9(p.floor) + "," +
           (std::isfinite(o.gamma_eaves) ? num9(o.gamma_eaves) : "inf") + "," +
           status_str(p.status) + "," + num9(p.total_power) + "," +
           num9(p.margin) + "\n";
    solved += p.status == PowerStatus::Solved;
    failed += p.status == PowerStatus::NumericalFailure;
    std::cout << "power-min floor=" << num9(p.floor) << ": "
              << status_str(p.status) << ", total " << num9(p.total_power)
              << "\n";
  }
  ctx.emit("power_min.csv", csv);
  ctx.manifest(inst,
               {{"floors", o.floors},
                {"gamma_eaves", std::isfinite(o.gamma_eaves)
                                    ? json(o.gamma_eaves)
                                    : json("unbounded")}});
  if (failed > 0) return 1;
  return solved > 0 ? 0 : 2;
}

int run_verify_kkt(const Opts& o) {
  const auto [k, l] = parse_grid(o.grid);
  const SystemInstance inst = load_with_overrides(o);
  RunContext ctx(o, "verify-kkt");
  const SolverOptions opts = solver_options(o);
  const SweepResult sw = max_sum_secrecy(inst, k, l, opts);
  int solved = 0;
  for (const SweepCell& c : sw.cells) solved += c.status == CellStatus::Solved;

  const std::vector<CellKktReport> reps = verify_sweep(inst, sw, opts);
  const std::string report = format_kkt_report(reps);
  ctx.emit("kkt_report.txt", report);
  std::cout << report;

  int residual_fail = 0, rank_fail = 0;
  for (const CellKktReport& rep : reps) {
    if (!rep.has_duals) continue;
    residual_fail += rep.residuals.max_residual > 1e-6;
    for (const RankReport& r : rep.rank)
      rank_fail += r.verdict == CheckVerdict::Fail;
  }
  ctx.manifest(inst, {{"cells_verified", reps.size()},
                      {"residual_failures", residual_fail},
                      {"rank_failures", rank_fail}});
  if (residual_fail > 0 || rank_fail > 0) return 1;
  return solved > 0 ? 0 : 2;
}

int run_validate(const Opts& o) {
  const SystemInstance inst = load_with_overrides(o);
  RunContext ctx(o, "validate");
  const SolverOptions opts = solver_options(o);
  std::string report = "validation report (config " + o.config + ", samples " +
                       std::to_string(o.samples) + ", seed " +
                       std::to_string(o.seed) + ")\n";
  int fails = 0, infeasible = 0;
  auto line = [&](const char* name, const std::string& result) {
    char b[160];
    std::snprintf(b, sizeof(b), "  %-36s %s\n", name, result.c_str());
    report += b;
    if (result.rfind("FAIL", 0) == 0) ++fails;
    if (result.rfind("infeasible", 0) == 0) ++infeasible;
  };

  if (inst.antennas[0] == 1 && inst.antennas[1] == 1) {
    const SweepResult sw = max_sum_secrecy(inst, 48, 48, opts);
    const ScalarOracleResult oracle = scalar_sum_secrecy_oracle(inst, 96, 1);
    const double gap = std::abs(sw.best_sum - oracle.sum_max);
    line("scalar oracle agreement",
         gap <= 0.05 ? "pass (gap " + num3(gap) + ")"
                     : "FAIL: gap " + num3(gap) + " bits");
  } else {
    line("scalar oracle agreement", "skipped: needs single-antenna users");
  }

  {
    const SweepResult sw = max_sum_secrecy(inst, 10, 10, opts);
    if (sw.best_index < 0) {
      line("exact-knowledge staircase", "infeasible: no solved cells");
    } else {
      const std::vector<RegionPoint> b = region_boundary(sw);
      bool mono = true;
      for (std::size_t i = 1; i < b.size(); ++i)
        mono = mono && b[i].r1 >= b[i - 1].r1 - 1e-12 &&
               b[i].r2 <= b[i - 1].r2 + 1e-12;
      SystemInstance nominal = inst;
      nominal.direct_err = {0.0, 0.0};
      nominal.self_err = {0.0, 0.0};
      nominal.eaves_err = {0.0, 0.0};
      const SweepCell& best =
          sw.cells[static_cast<std::size_t>(sw.best_index)];
      const WorstCaseRates w =
          worst_case_rates_mc(nominal, best.design, o.samples, o.seed);
      const bool rates_ok = w.message[0] >= best.r1 - 1e-6 &&
                            w.message[1] >= best.r2 - 1e-6;
      if (mono && rates_ok)
        line("exact-knowledge staircase", "pass");
      else if (!mono)
        line("exact-knowledge staircase", "FAIL: boundary not monotone");
      else
        line("exact-knowledge staircase",
             "FAIL: best design misses its rate floors");
    }
  }

  {
    const CapacityBounds caps = capacity_bounds(inst);
    if (caps.direct[0] <= 1e-9 || caps.direct[1] <= 1e-9) {
      line("worst-case certificates", "skipped: a link capacity is zero");
    } else {
      const RobustLeakageResult res = robust_min_leakage(
          inst, 0.5 * caps.direct[0], 0.5 * caps.direct[1], opts);
      if (res.status != CellStatus::Solved) {
        line("worst-case certificates",
             "infeasible: midpoint targets unreachable");
      } else {
        const WorstCaseRates mc =
            worst_case_rates_mc(inst, res.design.cov, o.samples, o.seed);
        double slack = std::min({mc.message[0] - res.rate_lower[0],
                                 mc.message[1] - res.rate_lower[1],
                                 res.leakage_upper - mc.leakage});
        if (inst.antennas[0] <= 2 && inst.antennas[1] <= 2) {
          const WorstCaseRates grid =
              adversarial_error_search(inst, res.design.cov, 6, o.threads);
          slack = std::min({slack, grid.message[0] - res.rate_lower[0],
                            grid.message[1] - res.rate_lower[1],
                            res.leakage_upper - grid.leakage});
        }
        line("worst-case certificates",
             slack >= -1e-6 ? "pass (min slack " + num3(slack) + ")"
                            : "FAIL: certificate violated by " + num3(-slack));
      }
    }
  }

  {
    const std::vector<PowerSweepPoint> pts =
        power_vs_sinr_sweep(inst, {0.0, 0.3, 0.6}, kInf, opts);
    bool mono = pts[0].status == PowerStatus::Solved &&
                pts[0].total_power <= 1e-9;
    double prev = 0.0;
    bool any_infeasible = false;
    for (const PowerSweepPoint& p : pts) {
      if (p.status != PowerStatus::Solved) {
        any_infeasible = true;
        continue;
      }
      mono = mono && p.total_power >= prev - 1e-6;
      prev = p.total_power;
    }
    if (!mono)
      line("power floor sweep", "FAIL: total power not monotone");
    else if (any_infeasible)
      line("power floor sweep", "infeasible: a floor exceeds capacity");
    else
      line("power floor sweep", "pass");
  }

  report += fails == 0 && infeasible == 0 ? "all checks pass\n"
            : fails > 0                   ? "checks failed\n"
                                          : "configuration infeasible\n";
  ctx.emit("validation_report.txt", report);
  std::cout << report;
  ctx.manifest(inst, {{"failed_checks", fails}});
  if (fails > 0) return 1;
  return infeasible > 0 ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Secrecy rate regions, worst-case designs, and transmit power "
      "minimization for a two-user full-duplex system with an eavesdropper"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("secrate ") + kVersion);

  Opts o;
  auto add_common = [&](CLI::App* s) {
    s->add_option("--config", o.config, "instance config file")
        ->capture_default_str();
    s->add_option("--grid", o.grid, "rate grid K or K,L")
        ->capture_default_str();
    s->add_option("--zeta", o.zeta, "bisection tolerance on the SINR cap")
        ->capture_default_str();
    s->add_option("--power-db", o.power_db,
                  "override both power budgets (dB)");
    s->add_option("--out", o.out, "output directory")->capture_default_str();
    s->add_option("--format", o.format, "outputs to write")
        ->check(CLI::IsMember({"csv", "svg", "both"}))
        ->capture_default_str();
    s->add_option("--threads", o.threads, "worker threads for sweeps")
        ->check(CLI::Range(1, 64))
        ->capture_default_str();
    s->add_option("--samples", o.samples, "Monte Carlo error draws")
        ->check(CLI::Range(0, 10'000'000))
        ->capture_default_str();
    s->add_option("--seed", o.seed, "Monte Carlo seed")
        ->capture_default_str();
    return s;
  };

  CLI::App* perfect =
      add_common(app.add_subcommand("perfect-region",
                                    "exact-knowledge secrecy rate region"));
  CLI::App* robust = add_common(app.add_subcommand(
      "robust-region", "worst-case regions across error radii"));
  robust->add_option("--eps", o.eps, "error-ball radii, comma separated")
      ->delimiter(',')
      ->capture_default_str();
  CLI::App* power = add_common(app.add_subcommand(
      "power-min", "minimum total power meeting SINR targets"));
  power->add_option("--floors", o.floors, "symmetric SINR floors")
      ->delimiter(',')
      ->capture_default_str();
  power
      ->add_option("--gamma-e", o.gamma_eaves,
                   "worst-case eavesdropper SINR cap")
      ->capture_default_str();
  CLI::App* verify = add_common(app.add_subcommand(
      "verify-kkt", "optimality certificates over the rate grid"));
  CLI::App* validate = add_common(app.add_subcommand(
      "validate", "cross-check solver outputs against references"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (perfect->parsed()) return run_perfect_region(o);
    if (robust->parsed()) return run_robust_region(o);
    if (power->parsed()) return run_power_min(o);
    if (verify->parsed()) return run_verify_kkt(o);
    if (validate->parsed()) return run_validate(o);
  } catch (const std::exception& ex) {
    std::cerr << "secrate: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
