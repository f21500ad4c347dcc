#include "fdsec/channel.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

namespace fdsec {
namespace {

constexpr int kMcShardSize = 1024;

double clamp0(double v) { return v > 0.0 ? v : 0.0; }

double rate_bits(double num, double den) {
  return std::log2(1.0 + clamp0(num) / den);
}

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

ComplexRowVec sphere_sample(int dim, double radius, std::mt19937_64& rng) {
  ComplexRowVec e = ComplexRowVec::Zero(dim);
  if (radius <= 0.0) return e;
  std::normal_distribution<double> gauss(0.0, 1.0);
  double norm2 = 0.0;
  for (int j = 0; j < dim; ++j) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    e(j) = {re, im};
    norm2 += re * re + im * im;
  }
  if (norm2 == 0.0) {
    e(0) = radius;
    return e;
  }
  return e * (radius / std::sqrt(norm2));
}

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("instance: " + what);
}

bool finite_vec(const ComplexRowVec& v) {
  for (int j = 0; j < v.size(); ++j)
    if (!std::isfinite(v(j).real()) || !std::isfinite(v(j).imag())) return false;
  return true;
}

}  // namespace

bool SystemInstance::perfect_csi() const {
  for (int u = 0; u < 2; ++u)
    if (direct_err[u] != 0.0 || self_err[u] != 0.0 || eaves_err[u] != 0.0)
      return false;
  return true;
}

void SystemInstance::validate() const {
  for (int u = 0; u < 2; ++u) {
    require(antennas[u] >= 1, "antenna count must be >= 1");
    require(direct[u].size() == antennas[u],
            "direct channel length does not match antenna count");
    require(eaves[u].size() == antennas[u],
            "eavesdropper channel length does not match antenna count");
    require(finite_vec(direct[u]) && finite_vec(eaves[u]),
            "channel entries must be finite");
    require(std::isfinite(power[u]) && power[u] > 0.0,
            "power budget must be positive");
    for (double e : {direct_err[u], self_err[u], eaves_err[u]})
      require(std::isfinite(e) && e >= 0.0,
              "error bounds must be nonnegative");
  }
  require(std::isfinite(noise_power) && noise_power > 0.0,
          "noise power must be positive");
}

CovarianceDesign CovarianceDesign::Zero(const SystemInstance& inst) {
  CovarianceDesign d;
  for (int u = 0; u < 2; ++u) {
    d.signal[u] = HermitianMatrix::Zero(inst.antennas[u]);
    d.jamming[u] = HermitianMatrix::Zero(inst.antennas[u]);
  }
  return d;
}

double CovarianceDesign::total_power() const {
  double p = 0.0;
  for (int u = 0; u < 2; ++u) p += signal[u].trace() + jamming[u].trace();
  return p;
}

double message_rate(const SystemInstance& inst, const CovarianceDesign& d,
                    int user) {
  const ComplexRowVec& h = inst.direct[user];
  const double num = quadratic_form(h, d.signal[user]);
  const double den =
      inst.noise_power + clamp0(quadratic_form(h, d.jamming[user]));
  return rate_bits(num, den);
}

double leakage_rate(const SystemInstance& inst, const CovarianceDesign& d) {
  double num = 0.0;
  double den = inst.noise_power;
  for (int u = 0; u < 2; ++u) {
    num += quadratic_form(inst.eaves[u], d.signal[u]);
    den += clamp0(quadratic_form(inst.eaves[u], d.jamming[u]));
  }
  return rate_bits(num, den);
}

CapacityBounds capacity_bounds(const SystemInstance& inst) {
  CapacityBounds c;
  double leak = 0.0;
  for (int u = 0; u < 2; ++u) {
    const double gain = clamp0(inst.direct[u].norm() - inst.direct_err[u]);
    c.direct[u] =
        rate_bits(gain * gain * inst.power[u], inst.noise_power);
    const double zg = inst.eaves[u].norm() + inst.eaves_err[u];
    leak += zg * zg * inst.power[u];
  }
  c.eaves = rate_bits(leak, inst.noise_power);
  return c;
}

WorstCaseRates worst_case_rates_mc(const SystemInstance& inst,
                                   const CovarianceDesign& d, int samples,
                                   std::uint64_t seed) {
  const double n0 = inst.noise_power;
  HermitianMatrix sum0(d.signal[0].mat() + d.jamming[0].mat());
  HermitianMatrix sum1(d.signal[1].mat() + d.jamming[1].mat());
  sum0.mark_psd();
  sum1.mark_psd();

  // Receiver of user u's message hears the other user's self-interference.
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

  const ComplexRowVec zero0 = ComplexRowVec::Zero(inst.antennas[0]);
  const ComplexRowVec zero1 = ComplexRowVec::Zero(inst.antennas[1]);
  WorstCaseRates w;
  w.message[0] = msg(0, zero0, zero1);
  w.message[1] = msg(1, zero1, zero0);
  w.leakage = leak(zero0, zero1);

  const int shards = (std::max(samples, 0) + kMcShardSize - 1) / kMcShardSize;
  for (int s = 0; s < shards; ++s) {
    std::mt19937_64 rng(mix64(seed + static_cast<std::uint64_t>(s)));
    const int count =
        std::min(kMcShardSize, samples - s * kMcShardSize);
    for (int i = 0; i < count; ++i) {
      const ComplexRowVec ed0 =
          sphere_sample(inst.antennas[0], inst.direct_err[0], rng);
      const ComplexRowVec es1 =
          sphere_sample(inst.antennas[1], inst.self_err[1], rng);
      const ComplexRowVec ed1 =
          sphere_sample(inst.antennas[1], inst.direct_err[1], rng);
      const ComplexRowVec es0 =
          sphere_sample(inst.antennas[0], inst.self_err[0], rng);
      const ComplexRowVec ez0 =
          sphere_sample(inst.antennas[0], inst.eaves_err[0], rng);
      const ComplexRowVec ez1 =
          sphere_sample(inst.antennas[1], inst.eaves_err[1], rng);
      w.message[0] = std::min({w.message[0], msg(0, ed0, es1),
                               msg(0, ed0, zero1), msg(0, zero0, es1)});
      w.message[1] = std::min({w.message[1], msg(1, ed1, es0),
                               msg(1, ed1, zero0), msg(1, zero1, es0)});
      w.leakage = std::max({w.leakage, leak(ez0, ez1), leak(ez0, zero1),
                            leak(zero0, ez1)});
    }
  }
  return w;
}

namespace {

[[noreturn]] void parse_fail(const std::string& name, int line,
                             const std::string& what) {
  std::ostringstream os;
  os << name << ":" << line << ": " << what;
  throw std::runtime_error(os.str());
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& tok, const std::string& name,
                    int line) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(tok, &pos);
    if (pos != tok.size()) parse_fail(name, line, "trailing junk in number");
    if (!std::isfinite(v)) parse_fail(name, line, "number must be finite");
    return v;
  } catch (const std::invalid_argument&) {
    parse_fail(name, line, "expected a number, got '" + tok + "'");
  } catch (const std::out_of_range&) {
    parse_fail(name, line, "number out of range: '" + tok + "'");
  }
}

// Accepts a, bi, a+bi, a-bi with optional leading sign; no interior spaces.
std::complex<double> parse_complex(std::string tok, const std::string& name,
                                   int line) {
  tok.erase(std::remove_if(tok.begin(), tok.end(),
                           [](char c) { return c == ' ' || c == '\t'; }),
            tok.end());
  if (tok.empty()) parse_fail(name, line, "empty complex entry");
  const bool has_imag = tok.back() == 'i';
  if (!has_imag) return {parse_double(tok, name, line), 0.0};
  tok.pop_back();
  // Split at the last +/- that is not an exponent sign and not leading.
  std::size_t split = std::string::npos;
  for (std::size_t p = tok.size(); p-- > 1;) {
    if ((tok[p] == '+' || tok[p] == '-') &&
        tok[p - 1] != 'e' && tok[p - 1] != 'E') {
      split = p;
      break;
    }
  }
  auto imag_of = [&](std::string s) {
    if (s.empty() || s == "+") return 1.0;
    if (s == "-") return -1.0;
    return parse_double(s, name, line);
  };
  if (split == std::string::npos) return {0.0, imag_of(tok)};
  return {parse_double(tok.substr(0, split), name, line),
          imag_of(tok.substr(split))};
}

ComplexRowVec parse_vector(const std::string& value, const std::string& name,
                           int line) {
  std::vector<std::complex<double>> entries;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = value.find(',', start);
    const std::string tok = trim(value.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start));
    entries.push_back(parse_complex(tok, name, line));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  ComplexRowVec v(entries.size());
  for (std::size_t j = 0; j < entries.size(); ++j) v(j) = entries[j];
  return v;
}

std::string format_complex(std::complex<double> c) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g%+.17gi", c.real(), c.imag());
  return buf;
}

std::string format_vector(const ComplexRowVec& v) {
  std::string out;
  for (int j = 0; j < v.size(); ++j) {
    if (j) out += ", ";
    out += format_complex(v(j));
  }
  return out;
}

}  // namespace

SystemInstance parse_instance(std::istream& in, const std::string& name) {
  std::map<std::string, std::pair<std::string, int>> kv;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      parse_fail(name, line_no, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) parse_fail(name, line_no, "missing key");
    if (value.empty()) parse_fail(name, line_no, "missing value for '" + key + "'");
    if (!kv.emplace(key, std::make_pair(value, line_no)).second)
      parse_fail(name, line_no, "duplicate key '" + key + "'");
  }

  const std::vector<std::string> known = {
      "m1",    "m2",    "h21",   "h12",   "z1",    "z2",   "n0",   "p1_db",
      "p2_db", "eps",   "eps11", "eps12", "eps21", "eps22", "eps1", "eps2"};
  for (const auto& [key, entry] : kv)
    if (std::find(known.begin(), known.end(), key) == known.end())
      parse_fail(name, entry.second, "unknown key '" + key + "'");

  auto get = [&](const std::string& key) -> const std::pair<std::string, int>& {
    const auto it = kv.find(key);
    if (it == kv.end())
      parse_fail(name, line_no ? line_no : 1, "missing key '" + key + "'");
    return it->second;
  };
  auto num = [&](const std::string& key) {
    const auto& [value, ln] = get(key);
    return parse_double(value, name, ln);
  };
  auto vec = [&](const std::string& key) {
    const auto& [value, ln] = get(key);
    return parse_vector(value, name, ln);
  };

  auto integer = [&](const std::string& key) {
    const auto& [value, ln] = get(key);
    const double v = parse_double(value, name, ln);
    if (v != std::floor(v) || v < 1.0 || v > 1024.0)
      parse_fail(name, ln, "'" + key + "' must be a positive integer");
    return static_cast<int>(v);
  };

  SystemInstance inst;
  inst.antennas[0] = integer("m1");
  inst.antennas[1] = integer("m2");
  inst.direct[0] = vec("h21");
  inst.direct[1] = vec("h12");
  inst.eaves[0] = vec("z1");
  inst.eaves[1] = vec("z2");
  inst.noise_power = num("n0");
  inst.power[0] = std::pow(10.0, num("p1_db") / 10.0);
  inst.power[1] = std::pow(10.0, num("p2_db") / 10.0);

  const std::vector<std::string> named = {"eps11", "eps12", "eps21",
                                          "eps22", "eps1",  "eps2"};
  const bool has_shared = kv.count("eps") > 0;
  int named_present = 0;
  for (const auto& key : named) named_present += kv.count(key) > 0;
  if (has_shared && named_present > 0)
    parse_fail(name, get("eps").second,
               "'eps' conflicts with named eps* keys");
  if (!has_shared && named_present != static_cast<int>(named.size()))
    parse_fail(name, line_no ? line_no : 1,
               "need 'eps' or all six of eps11 eps12 eps21 eps22 eps1 eps2");
  if (has_shared) {
    const double e = num("eps");
    inst.direct_err = {e, e};
    inst.self_err = {e, e};
    inst.eaves_err = {e, e};
  } else {
    inst.self_err = {num("eps11"), num("eps22")};
    inst.direct_err = {num("eps21"), num("eps12")};
    inst.eaves_err = {num("eps1"), num("eps2")};
  }

  try {
    inst.validate();
  } catch (const std::invalid_argument& ex) {
    parse_fail(name, line_no ? line_no : 1, ex.what());
  }
  return inst;
}

SystemInstance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open");
  return parse_instance(in, path);
}

std::string format_instance(const SystemInstance& inst) {
  std::ostringstream os;
  char buf[64];
  auto put = [&](const std::string& key, double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    os << key << " = " << buf << "\n";
  };
  os << "m1 = " << inst.antennas[0] << "\n";
  os << "m2 = " << inst.antennas[1] << "\n";
  os << "h21 = " << format_vector(inst.direct[0]) << "\n";
  os << "h12 = " << format_vector(inst.direct[1]) << "\n";
  os << "z1 = " << format_vector(inst.eaves[0]) << "\n";
  os << "z2 = " << format_vector(inst.eaves[1]) << "\n";
  put("n0", inst.noise_power);
  put("p1_db", 10.0 * std::log10(inst.power[0]));
  put("p2_db", 10.0 * std::log10(inst.power[1]));
  put("eps11", inst.self_err[0]);
  put("eps22", inst.self_err[1]);
  put("eps21", inst.direct_err[0]);
  put("eps12", inst.direct_err[1]);
  put("eps1", inst.eaves_err[0]);
  put("eps2", inst.eaves_err[1]);
  return os.str();
}

}  // namespace fdsec
