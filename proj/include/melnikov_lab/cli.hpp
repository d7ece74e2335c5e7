#pragma once

// Command-line front end. Verbs: melnikov-scan, obstruction, zero-find,
// verify, oracle-compare, list. Parameters come from flags, a flat key=value
// config file (--config) and a named preset (--preset), in that precedence.
// Exit codes: 0 success, 2 some point did not converge, 1 error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "melnikov.hpp"
#include "systems/beam.hpp"
#include "systems/duffing.hpp"
#include "systems/pendula.hpp"
#include "systems/registry.hpp"
#include "systems/rigid_body.hpp"
#include "verify.hpp"

#ifndef MELNIKOV_LAB_PRESET_DIR
#define MELNIKOV_LAB_PRESET_DIR "presets"
#endif

namespace mlab::cli {

inline const std::vector<std::string>& tasks() {
  static const std::vector<std::string> t{"melnikov-scan", "obstruction", "zero-find", "verify", "oracle-compare", "list"};
  return t;
}

// keys accepted everywhere
inline const std::vector<std::string>& general_keys() {
  static const std::vector<std::string> k{"system", "out", "format", "tol"};
  return k;
}

inline const std::map<std::string, std::vector<std::string>>& system_keys() {
  static const std::map<std::string, std::vector<std::string>> k{
      {"duffing",
       {"a", "beta", "delta", "omega", "kind", "family", "m", "l", "tau", "window", "kernel", "spacing", "K",
        "zero-tol", "simple-floor", "eps", "shoot-tol"}},
      {"pendula", {"omega0", "I", "theta0", "alpha", "K", "theta-hat", "s1", "s2"}},
      {"rigidbody",
       {"I1", "I2", "I3", "beta0", "beta1", "beta2", "beta3", "T", "forcing1", "forcing2", "forcing3", "axis", "sign",
        "c", "integral", "eps"}},
      {"beam", {"omega1", "omega2", "beta1", "beta2", "c", "case"}},
  };
  return k;
}

inline const std::map<std::string, std::vector<std::string>>& system_tasks() {
  static const std::map<std::string, std::vector<std::string>> t{
      {"duffing", {"melnikov-scan", "obstruction", "zero-find", "verify", "oracle-compare"}},
      {"pendula", {"melnikov-scan", "obstruction", "oracle-compare"}},
      {"rigidbody", {"obstruction", "verify", "oracle-compare"}},
      {"beam", {"obstruction", "oracle-compare"}},
  };
  return t;
}

inline std::vector<std::string> all_keys() {
  std::vector<std::string> keys = general_keys();
  for (const auto& [sys, ks] : system_keys())
    for (const auto& k : ks)
      if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
  return keys;
}

struct Grid {
  double start = 0.0, stop = 0.0;
  int count = 1;

  std::vector<double> points() const {
    if (count == 1) return {start};
    std::vector<double> p;
    for (int i = 0; i < count; ++i) p.push_back(start + (stop - start) * i / (count - 1));
    return p;
  }
};

struct RunConfig {
  std::string task;
  std::string system;
  std::string out;  // empty: standard output
  std::string format = "csv";
  bool json_list = false;
  std::map<std::string, std::string> params;

  bool has(const std::string& k) const { return params.count(k) > 0; }

  std::string text(const std::string& k, const std::string& def) const {
    auto it = params.find(k);
    return it == params.end() ? def : it->second;
  }

  double number(const std::string& k, double def) const {
    auto it = params.find(k);
    if (it == params.end()) return def;
    try {
      std::size_t pos = 0;
      const double v = std::stod(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("key '" + k + "': expected a number, got '" + it->second + "'");
    }
  }

  int integer(const std::string& k, int def) const {
    const double v = number(k, def);
    if (v != std::round(v)) throw ConfigError("key '" + k + "': expected an integer, got '" + text(k, "") + "'");
    return static_cast<int>(v);
  }

  double positive(const std::string& k, double def) const {
    const double v = number(k, def);
    if (!(v > 0.0)) throw ConfigError("key '" + k + "': must be > 0");
    return v;
  }

  // "start:stop:count" (count >= 2), or a single number when scalar_ok
  Grid grid(const std::string& k, const std::string& def, bool scalar_ok = false) const {
    const std::string s = text(k, def);
    Grid g;
    std::vector<std::string> parts;
    std::stringstream ss(s);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    try {
      if (parts.size() == 1 && scalar_ok) {
        g.start = g.stop = std::stod(parts[0]);
        return g;
      }
      if (parts.size() != 3) throw std::invalid_argument("shape");
      g.start = std::stod(parts[0]);
      g.stop = std::stod(parts[1]);
      const double c = std::stod(parts[2]);
      if (c != std::round(c)) throw std::invalid_argument("count");
      g.count = static_cast<int>(c);
    } catch (const std::exception&) {
      throw ConfigError("key '" + k + "': expected start:stop:count" + (scalar_ok ? " or a number" : "") + ", got '" +
                        s + "'");
    }
    if (g.count < 2) throw ConfigError("key '" + k + "': grid count must be >= 2, got " + std::to_string(g.count));
    return g;
  }

  void validate() const {
    if (std::find(tasks().begin(), tasks().end(), task) == tasks().end())
      throw ConfigError("unknown task '" + task + "'");
    if (format != "csv" && format != "json") throw ConfigError("key 'format': must be csv or json");
    if (task == "list") return;
    if (system.empty()) throw ConfigError("key 'system': required");
    const auto sk = system_keys().find(system);
    if (sk == system_keys().end()) throw ConfigError("key 'system': unknown system '" + system + "'");
    const auto& st = system_tasks().at(system);
    if (std::find(st.begin(), st.end(), task) == st.end())
      throw ConfigError("task '" + task + "' is not available for system '" + system + "'");
    for (const auto& [k, v] : params)
      if (std::find(sk->second.begin(), sk->second.end(), k) == sk->second.end() && k != "tol")
        throw ConfigError("key '" + k + "' is not a parameter of system '" + system + "'");
    if (has("tol")) positive("tol", 1.0);
  }
};

// ---- output tables

using Cell = std::variant<double, long, bool, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  bool not_converged = false;
  std::map<std::string, std::string> meta;
};

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string to_csv(const Table& t) {
  std::string s;
  for (std::size_t i = 0; i < t.columns.size(); ++i) s += (i ? "," : "") + t.columns[i];
  s += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) s += ',';
      std::visit(
          [&s](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) s += format_double(v);
            else if constexpr (std::is_same_v<T, long>) s += std::to_string(v);
            else if constexpr (std::is_same_v<T, bool>) s += v ? "true" : "false";
            else s += v;
          },
          row[i]);
    }
    s += '\n';
  }
  return s;
}

inline std::string to_json(const Table& t) {
  nlohmann::ordered_json j;
  for (const auto& [k, v] : t.meta) j[k] = v;
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    nlohmann::ordered_json r;
    for (std::size_t i = 0; i < row.size(); ++i)
      std::visit([&](const auto& v) { r[t.columns[i]] = v; }, row[i]);
    j["rows"].push_back(r);
  }
  return j.dump(2) + "\n";
}

// ---- config files

inline std::map<std::string, std::string> read_kv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value, got '" + line + "'");
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

inline std::string preset_path(const std::string& name) {
  namespace fs = std::filesystem;
  if (fs::exists(name)) return name;
  const char* env = std::getenv("MELNIKOV_LAB_PRESETS");
  for (const std::string dir : {std::string(env ? env : ""), std::string(MELNIKOV_LAB_PRESET_DIR)}) {
    if (dir.empty()) continue;
    const fs::path p = fs::path(dir) / (name + ".cfg");
    if (fs::exists(p)) return p.string();
  }
  throw ConfigError("key 'preset': no preset named '" + name + "'");
}

// ---- system setup from parameters

inline duffing::Config duffing_config(const RunConfig& rc) {
  duffing::Config c;
  c.a = rc.integer("a", 1);
  c.beta = rc.number("beta", 1.0);
  c.delta = rc.number("delta", 1.0);
  c.omega = rc.number("omega", 1.0);
  if (c.a != 1 && c.a != -1) throw ConfigError("key 'a': must be 1 or -1");
  if (!(c.omega > 0.0)) throw ConfigError("key 'omega': must be > 0");
  if (!(c.beta >= 0.0)) throw ConfigError("key 'beta': must be >= 0");
  if (!(c.delta >= 0.0)) throw ConfigError("key 'delta': must be >= 0");
  return c;
}

inline duffing::Family parse_family(const std::string& s) {
  using F = duffing::Family;
  for (F f : {F::q_plus, F::q_minus, F::outer, F::hat, F::hom_plus, F::hom_minus})
    if (s == duffing::to_string(f)) return f;
  throw ConfigError("key 'family': unknown family '" + s + "'");
}

struct DuffingSetup {
  duffing::Config cfg;
  bool homoclinic = true;
  duffing::Family family = duffing::Family::hom_plus;
  int m = 1, l = 1;
  EllipticModulus modulus;
  double orbit_period = 0.0;
  std::function<Vec(double)> orbit;
};

inline DuffingSetup duffing_setup(const RunConfig& rc) {
  DuffingSetup s;
  s.cfg = duffing_config(rc);
  const std::string kind = rc.text("kind", "homoclinic");
  if (kind != "homoclinic" && kind != "subharmonic") throw ConfigError("key 'kind': must be homoclinic or subharmonic");
  s.homoclinic = kind == "homoclinic";
  s.family = parse_family(rc.text("family", s.homoclinic ? "hom+" : (s.cfg.a == 1 ? "q+" : "hat")));
  const bool hom_family = s.family == duffing::Family::hom_plus || s.family == duffing::Family::hom_minus;
  if (s.homoclinic != hom_family) throw ConfigError("key 'family': '" + rc.text("family", "") + "' does not match kind '" + kind + "'");
  if (s.homoclinic && s.cfg.a != 1) throw ConfigError("key 'a': homoclinic orbits need a = 1");
  s.m = rc.integer("m", 1);
  s.l = rc.integer("l", 1);
  if (s.m < 1) throw ConfigError("key 'm': must be >= 1");
  if (s.l < 1) throw ConfigError("key 'l': must be >= 1");
  if (!s.homoclinic) {
    if (std::gcd(s.m, s.l) != 1) throw ConfigError("keys 'm', 'l': must be coprime");
    s.modulus = duffing::resonant_modulus(s.cfg, s.family, s.m, s.l);
    s.orbit_period = duffing::period(s.cfg, s.family, s.modulus);
  }
  s.orbit = duffing::orbit_fn(s.cfg, s.family, s.modulus);
  return s;
}

inline MelnikovCurve duffing_curve(const RunConfig& rc, const DuffingSetup& s, const PerturbedField& f,
                                   const ScalarIntegral& H, const std::vector<double>& taus) {
  MelnikovOptions opt;
  opt.tol = rc.positive("tol", 1e-11);
  if (s.homoclinic) return homoclinic_melnikov(f, H, s.orbit, taus, rc.positive("window", 25.0), opt);
  return subharmonic_melnikov(f, H, s.orbit, s.orbit_period, s.m, s.l, taus, opt);
}

inline rigid_body::Forcing parse_forcing(const std::string& key, const std::string& s, double T) {
  if (s == "zero") return [](double) { return 0.0; };
  if (s == "sin") return rigid_body::zero_mean(T);
  if (s == "one-plus-sin") return rigid_body::one_plus_sin(T);
  if (s == "cos2") return rigid_body::cos_squared(T);
  throw ConfigError("key '" + key + "': forcing must be zero, sin, one-plus-sin or cos2");
}

inline rigid_body::Config rigid_config(const RunConfig& rc) {
  rigid_body::Config c;
  c.inertia = {rc.positive("I1", 1.0), rc.positive("I2", 2.0), rc.positive("I3", 3.0)};
  c.beta = {rc.number("beta0", 0.0), rc.number("beta1", 1.0), rc.number("beta2", 0.0), rc.number("beta3", 0.0)};
  c.T = rc.positive("T", 2.0 * std::numbers::pi);
  for (int j = 1; j <= 3; ++j) {
    const std::string key = "forcing" + std::to_string(j);
    c.v[static_cast<std::size_t>(j - 1)] = parse_forcing(key, rc.text(key, j == 1 ? "one-plus-sin" : "zero"), c.T);
  }
  c.validate();
  return c;
}

inline beam::Config beam_config(const RunConfig& rc) {
  beam::Config c;
  c.omega1 = rc.positive("omega1", 1.0);
  c.omega2 = rc.positive("omega2", std::numbers::sqrt3);
  c.beta1 = rc.positive("beta1", 1.0);
  c.beta2 = rc.positive("beta2", 1.0);
  if (!(c.omega1 < c.omega2)) throw ConfigError("keys 'omega1', 'omega2': need omega1 < omega2");
  return c;
}

inline std::array<int, 3> beam_case(const RunConfig& rc) {
  const std::string s = rc.text("case", "2,3,1");
  std::array<int, 3> c{};
  std::stringstream ss(s);
  std::string part;
  for (int i = 0; i < 3; ++i) {
    if (!std::getline(ss, part, ',')) throw ConfigError("key 'case': expected j,k,l, got '" + s + "'");
    try {
      c[static_cast<std::size_t>(i)] = std::stoi(part);
    } catch (const std::exception&) {
      throw ConfigError("key 'case': expected integers j,k,l, got '" + s + "'");
    }
  }
  if (c[0] < 1 || c[0] > 4 || c[1] < 1 || c[1] > 6 || c[2] < 1 || c[2] > 2)
    throw ConfigError("key 'case': need 1 <= j <= 4, 1 <= k <= 6, 1 <= l <= 2");
  return c;
}

// J_{omega_j, Z_k, gamma_{l,c}} with the closed-form periodic adjoint solution
inline double beam_J(const beam::Config& b, int j, int k, int ell, double c, double tol) {
  const auto f = beam::field(b);
  const double T = beam::orbit_period(b, ell);
  const auto orbit = integrate(f.with_epsilon(0.0), beam::orbit(b, ell, c, 0.0), 0.0, T, tol);
  const auto omega = solve_ave(f, orbit, beam::adjoint_solution(b, j, 0.0), tol);
  return obstruction_cvf_periodic(f, beam::cvfs(b)[static_cast<std::size_t>(k - 1)], omega, orbit, T, tol);
}

inline std::vector<VectorGridPoint> pendula_grid(const RunConfig& rc, double I) {
  std::vector<VectorGridPoint> g;
  for (double th : rc.grid("theta0", "0:6.283185307179586:8").points())
    for (double al : rc.grid("alpha", "0:6.283185307179586:8").points()) g.push_back({I, th, al});
  return g;
}

inline int sign_key(const RunConfig& rc, const std::string& k) {
  const int s = rc.integer(k, 1);
  if (s != 1 && s != -1) throw ConfigError("key '" + k + "': must be 1 or -1");
  return s;
}

// ---- tasks

inline Table task_scan(const RunConfig& rc) {
  Table t;
  if (rc.system == "duffing") {
    const auto s = duffing_setup(rc);
    const auto f = duffing::field(s.cfg);
    const auto H = duffing::hamiltonian(s.cfg);
    const auto curve = duffing_curve(rc, s, f, H, rc.grid("tau", "0:6.283185307179586:64").points());
    t.columns = {"tau", "value", "converged", "tail_estimate"};
    for (std::size_t i = 0; i < curve.size(); ++i) {
      t.rows.push_back({curve.parameters[i][0], curve.scalar(i), static_cast<bool>(curve.converged[i]),
                        curve.tail_estimates[i]});
      if (!curve.converged[i]) t.not_converged = true;
    }
    return t;
  }
  pendula::Config p;
  p.omega0 = rc.positive("omega0", 1.0);
  const double I = rc.positive("I", 1.0);
  const auto f = pendula::field(p);
  MelnikovOptions opt;
  opt.tol = rc.positive("tol", 1e-11);
  const auto grid = pendula_grid(rc, I);
  const auto curve = melnikov_vector(f, pendula::homoclinic_family(p, sign_key(rc, "s1"), sign_key(rc, "s2")),
                                     {pendula::F2()}, grid, rc.integer("K", 8), rc.number("theta-hat", 0.0), opt);
  t.columns = {"I", "theta0", "alpha", "M1", "M2", "converged", "level", "tail_estimate"};
  for (std::size_t i = 0; i < curve.size(); ++i) {
    t.rows.push_back({grid[i].I, grid[i].theta0, grid[i].alpha, curve.values[i](0), curve.values[i](1),
                      static_cast<bool>(curve.converged[i]), static_cast<long>(curve.truncation_levels[i]),
                      curve.tail_estimates[i]});
    if (!curve.converged[i]) t.not_converged = true;
  }
  return t;
}

inline Table task_zero_find(const RunConfig& rc) {
  const auto s = duffing_setup(rc);
  const auto f = duffing::field(s.cfg);
  const auto H = duffing::hamiltonian(s.cfg);
  const auto curve = duffing_curve(rc, s, f, H, rc.grid("tau", "0:6.283185307179586:64").points());
  const auto rep = find_zeros(curve, rc.number("zero-tol", 0.0), rc.number("simple-floor", 0.0));
  Table t;
  t.columns = {"tau", "residual", "derivative", "classification"};
  for (const auto& z : rep.zeros) t.rows.push_back({z.parameter, z.residual, z.derivative, std::string(to_string(z.classification))});
  if (rep.zeros.empty()) t.rows.push_back({std::string{}, std::string{}, std::string{}, std::string("none-on-grid")});
  t.not_converged = !curve.all_converged();
  t.meta["overall"] = to_string(rep.overall());
  return t;
}

inline Table task_obstruction(const RunConfig& rc) {
  Table t;
  const double tol = rc.positive("tol", 1e-11);
  if (rc.system == "duffing") {
    const auto s = duffing_setup(rc);
    const auto f = duffing::field(s.cfg);
    const auto H = duffing::hamiltonian(s.cfg);
    const double tau = rc.grid("tau", "0", true).start;
    if (s.homoclinic) {
      // along (q(t - tau), t), windows from a uniform sequence
      OrbitGuide g{[q = s.orbit, tau](double t) {
                     const Vec x = q(t - tau);
                     Vec y(3);
                     y << x, t;
                     return y;
                   },
                   4.0};
      const auto seq = TimeSequence::uniform(rc.positive("spacing", 4.0), rc.integer("K", 8), tau);
      const auto w = obstruction_homoclinic(f, H, g, seq, std::max(tol, 1e-10));
      t.columns = {"tau", "value", "converged", "level", "tail_estimate"};
      t.rows.push_back({tau, w.scalar(), w.converged, static_cast<long>(w.level), w.tail});
      t.not_converged = !w.converged;
    } else {
      const double v =
          obstruction_periodic(f, H, shifted_planar_guide(s.orbit, tau, 4.0), 0.0, s.m * s.cfg.period(), tol);
      t.columns = {"tau", "value"};
      t.rows.push_back({tau, v});
    }
  } else if (rc.system == "pendula") {
    pendula::Config p;
    p.omega0 = rc.positive("omega0", 1.0);
    const double I = rc.positive("I", 1.0);
    const double th = rc.grid("theta0", "0", true).start, al = rc.grid("alpha", "0", true).start;
    const auto f = pendula::field(p);
    const auto base = pendula::homoclinic_family(p, sign_key(rc, "s1"), sign_key(rc, "s2"))(I, al);
    const OrbitGuide g{[base, th](double t) {
                         Vec s = base(t);
                         s(5) += th;
                         return s;
                       },
                       base.anchor_spacing};
    const auto seq = angle_zero_sequence(f.x0_rhs, base, 5, rc.number("theta-hat", 0.0), rc.integer("K", 8), tol);
    const auto w = obstruction_homoclinic(f, pendula::F2(), g, seq, std::max(tol, 1e-9));
    t.columns = {"I", "theta0", "alpha", "value", "converged", "level", "tail_estimate"};
    t.rows.push_back({I, th, al, w.scalar(), w.converged, static_cast<long>(w.level), w.tail});
    t.not_converged = !w.converged;
  } else if (rc.system == "rigidbody") {
    const auto c = rigid_config(rc);
    const int j = rc.integer("axis", 1), sg = sign_key(rc, "sign");
    if (j < 1 || j > 3) throw ConfigError("key 'axis': must be 1, 2 or 3");
    const double lvl = rc.positive("c", 1.0);
    const std::string which = rc.text("integral", "energy");
    if (which != "energy" && which != "momentum") throw ConfigError("key 'integral': must be energy or momentum");
    const auto F = which == "energy" ? rigid_body::energy(c) : rigid_body::momentum_squared(c);
    const double v = obstruction_periodic(rigid_body::field(c), F, Trajectory::single(0.0, rigid_body::seed(c, j, sg, lvl)),
                                          c.T, tol);
    t.columns = {"axis", "sign", "c", "value"};
    t.rows.push_back({static_cast<long>(j), static_cast<long>(sg), lvl, v});
  } else {
    const auto b = beam_config(rc);
    const auto [j, k, ell] = beam_case(rc);
    const double c = rc.positive("c", 1.0);
    t.columns = {"j", "k", "l", "c", "value"};
    t.rows.push_back({static_cast<long>(j), static_cast<long>(k), static_cast<long>(ell), c, beam_J(b, j, k, ell, c, std::min(tol, 1e-12))});
  }
  return t;
}

inline Table task_oracle_compare(const RunConfig& rc) {
  Table t;
  const double tol = rc.positive("tol", 1e-11);
  if (rc.system == "duffing") {
    const auto s = duffing_setup(rc);
    const auto f = duffing::field(s.cfg);
    const auto H = duffing::hamiltonian(s.cfg);
    const std::string kern = rc.text("kernel", "sech");
    if (kern != "sech" && kern != "csch") throw ConfigError("key 'kernel': must be sech or csch");
    const auto kernel = kern == "sech" ? duffing::HomoclinicKernel::sech : duffing::HomoclinicKernel::csch;
    const auto curve = duffing_curve(rc, s, f, H, rc.grid("tau", "0:6.283185307179586:64").points());
    std::vector<double> oracle;
    double amp = 0.0;
    for (std::size_t i = 0; i < curve.size(); ++i) {
      oracle.push_back(duffing::melnikov_oracle(s.cfg, duffing::oracle_kind(s.family), s.modulus, s.m, s.l,
                                                curve.parameters[i][0], kernel));
      amp = std::max(amp, std::abs(oracle.back()));
    }
    t.columns = {"tau", "numeric", "oracle", "abs_error", "rel_error"};
    for (std::size_t i = 0; i < curve.size(); ++i) {
      const double e = std::abs(curve.scalar(i) - oracle[i]);
      t.rows.push_back({curve.parameters[i][0], curve.scalar(i), oracle[i], e, amp > 0.0 ? e / amp : e});
      if (!curve.converged[i]) t.not_converged = true;
    }
  } else if (rc.system == "pendula") {
    pendula::Config p;
    p.omega0 = rc.positive("omega0", 1.0);
    const double I = rc.positive("I", 1.0);
    const auto grid = pendula_grid(rc, I);
    MelnikovOptions opt;
    opt.tol = tol;
    const auto curve = melnikov_vector(pendula::field(p), pendula::homoclinic_family(p, sign_key(rc, "s1"), sign_key(rc, "s2")),
                                       {pendula::F2()}, grid, rc.integer("K", 8), rc.number("theta-hat", 0.0), opt);
    t.columns = {"theta0", "alpha", "M1", "M1_oracle", "M2", "M2_oracle", "abs_error"};
    for (std::size_t i = 0; i < curve.size(); ++i) {
      const auto& g = grid[i];
      const double o1 = pendula::melnikov_oracle(p, 1, I, g.theta0, g.alpha);
      const double o2 = pendula::melnikov_oracle(p, 2, I, g.theta0, g.alpha);
      const double e = std::max(std::abs(curve.values[i](0) - o1), std::abs(curve.values[i](1) - o2));
      t.rows.push_back({g.theta0, g.alpha, curve.values[i](0), o1, curve.values[i](1), o2, e});
      if (!curve.converged[i]) t.not_converged = true;
    }
  } else if (rc.system == "rigidbody") {
    const auto c = rigid_config(rc);
    const double lvl = rc.positive("c", 1.0);
    const std::string which = rc.text("integral", "energy");
    if (which != "energy" && which != "momentum") throw ConfigError("key 'integral': must be energy or momentum");
    const auto F = which == "energy" ? rigid_body::energy(c) : rigid_body::momentum_squared(c);
    const auto kind = which == "energy" ? rigid_body::Integral::energy : rigid_body::Integral::momentum_squared;
    const auto f = rigid_body::field(c);
    t.columns = {"axis", "sign", "numeric", "oracle", "abs_error"};
    for (int j = 1; j <= 3; ++j)
      for (int sg : {1, -1}) {
        const double v = obstruction_periodic(f, F, Trajectory::single(0.0, rigid_body::seed(c, j, sg, lvl)), c.T, tol);
        const double o = rigid_body::obstruction_oracle(c, j, sg, lvl, kind);
        t.rows.push_back({static_cast<long>(j), static_cast<long>(sg), v, o, std::abs(v - o)});
      }
  } else {
    const auto b = beam_config(rc);
    const auto [j, k, ell] = beam_case(rc);
    const double c = rc.positive("c", 1.0);
    const double v = beam_J(b, j, k, ell, c, std::min(tol, 1e-12));
    const double o = beam::J_oracle(j, k, ell, b.beta(ell), c);
    const double e = std::abs(v - o);
    t.columns = {"j", "k", "l", "numeric", "oracle", "abs_error", "rel_error"};
    t.rows.push_back({static_cast<long>(j), static_cast<long>(k), static_cast<long>(ell), v, o, e,
                      o != 0.0 ? e / std::abs(o) : e});
  }
  return t;
}

inline Table task_verify(const RunConfig& rc) {
  Table t;
  const double tol = rc.positive("tol", 1e-12);
  if (rc.system == "rigidbody") {
    const auto c = rigid_config(rc);
    const double eps = rc.positive("eps", 1e-4);
    const int j = rc.integer("axis", 1), sg = sign_key(rc, "sign");
    if (j < 1 || j > 3) throw ConfigError("key 'axis': must be 1, 2 or 3");
    const auto d = integral_drift(rigid_body::field(c).with_epsilon(eps), rigid_body::energy(c),
                                  rigid_body::seed(c, j, sg, rc.positive("c", 1.0)), c.T, tol);
    t.columns = {"eps", "drift", "predicted", "ratio"};
    t.rows.push_back({eps, d.drift, d.predicted, d.predicted != 0.0 ? d.drift / d.predicted : 0.0});
    return t;
  }
  auto s = duffing_setup(rc);
  if (s.homoclinic) throw ConfigError("key 'kind': verify needs kind=subharmonic (periodic orbits)");
  const auto f = duffing::field(s.cfg);
  const auto H = duffing::hamiltonian(s.cfg);
  const double eps = rc.positive("eps", 1e-3);
  const auto curve = duffing_curve(rc, s, f, H, rc.grid("tau", "0:" + format_double(s.cfg.period()) + ":64").points());
  const auto rep = find_zeros(curve, rc.number("zero-tol", 0.0), rc.number("simple-floor", 0.0));
  double scale = 0.0;
  for (int i = 0; i < 256; ++i) scale = std::max(scale, s.orbit(s.orbit_period * i / 256).norm());
  ShootingOptions so;
  so.tol = rc.positive("shoot-tol", 1e-9);
  so.integrator_tol = tol;
  t.columns = {"tau0", "classification", "converged", "residual", "newton_iters", "distance_to_seed", "bound"};
  std::vector<ZeroEntry> simple;
  for (const auto& z : rep.zeros)
    if (z.classification == ZeroClass::simple) simple.push_back(z);
  std::vector<ShootingResult> results(simple.size());
  parallel_for(simple.size(), [&](std::size_t i) {
    Vec seed(3);
    seed << s.orbit(-simple[i].parameter), 0.0;
    results[i] = shoot_periodic(f.with_epsilon(eps), seed, s.m * s.cfg.period(), so);
  });
  for (std::size_t i = 0; i < simple.size(); ++i) {
    const auto& r = results[i];
    t.rows.push_back({simple[i].parameter, std::string("simple"), r.converged, r.residual,
                      static_cast<long>(r.newton_iters), r.distance_to_seed, 10.0 * eps * scale});
    if (!r.converged) t.not_converged = true;
  }
  t.meta["overall"] = to_string(rep.overall());
  return t;
}

inline std::string list_text() {
  std::string s = "system     families                 parameters\n";
  for (const auto& sys : system_registry()) {
    std::string fam, par;
    for (const auto& f : sys.families) fam += (fam.empty() ? "" : ",") + f;
    for (const auto& p : sys.parameters) par += (par.empty() ? "" : ",") + p;
    char buf[512];
    std::snprintf(buf, sizeof buf, "%-10s %-24s %s\n", sys.id.c_str(), fam.c_str(), par.c_str());
    s += buf;
  }
  return s;
}

inline std::string list_json() {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& sys : system_registry())
    j.push_back({{"id", sys.id},
                 {"description", sys.description},
                 {"families", sys.families},
                 {"parameters", sys.parameters},
                 {"tasks", system_tasks().at(sys.id)}});
  return j.dump(2) + "\n";
}

// Runs a validated config; returns the exit code.
inline int execute(const RunConfig& rc, std::ostream& out) {
  rc.validate();
  std::string text;
  bool not_converged = false;
  if (rc.task == "list") {
    text = rc.json_list || rc.format == "json" ? list_json() : list_text();
  } else {
    Table t;
    if (rc.task == "melnikov-scan") t = task_scan(rc);
    else if (rc.task == "zero-find") t = task_zero_find(rc);
    else if (rc.task == "obstruction") t = task_obstruction(rc);
    else if (rc.task == "oracle-compare") t = task_oracle_compare(rc);
    else t = task_verify(rc);
    t.meta["system"] = rc.system;
    t.meta["task"] = rc.task;
    text = rc.format == "json" ? to_json(t) : to_csv(t);
    not_converged = t.not_converged;
  }
  if (rc.out.empty()) {
    out << text;
  } else {
    std::ofstream f(rc.out, std::ios::binary);
    if (!f) throw ConfigError("key 'out': cannot write '" + rc.out + "'");
    f << text;
  }
  return not_converged ? 2 : 0;
}

// Parses argv into a RunConfig (flags > --config file > --preset).
inline RunConfig parse(int argc, const char* const* argv) {
  CLI::App app{"melnikov-lab: Melnikov functions and obstruction integrals", "melnikov-lab"};
  std::string task, config, preset;
  bool json_flag = false;
  app.add_option("task", task, "melnikov-scan | obstruction | zero-find | verify | oracle-compare | list")->required();
  app.add_option("--config", config, "flat key=value file");
  app.add_option("--preset", preset, "named preset (presets/<name>.cfg) or path");
  app.add_flag("--json", json_flag, "JSON output for list");
  const auto keys = all_keys();
  std::map<std::string, std::string> values;
  for (const auto& k : keys) app.add_option("--" + k, values[k]);
  app.parse(argc, argv);

  std::map<std::string, std::string> merged;
  for (const auto& k : keys)
    if (app.get_option("--" + k)->count() > 0) merged[k] = values[k];
  auto layer = [&](const std::map<std::string, std::string>& kv, const std::string& source) {
    for (const auto& [k, v] : kv) {
      if (std::find(keys.begin(), keys.end(), k) == keys.end())
        throw ConfigError(source + ": unknown key '" + k + "'");
      merged.emplace(k, v);
    }
  };
  if (!config.empty()) layer(read_kv_file(config), config);
  if (!preset.empty()) {
    const auto path = preset_path(preset);
    layer(read_kv_file(path), path);
  }

  RunConfig rc;
  rc.task = task;
  rc.json_list = json_flag;
  for (auto& [k, v] : merged) {
    if (k == "system") rc.system = v;
    else if (k == "out") rc.out = v;
    else if (k == "format") rc.format = v;
    else rc.params[k] = v;
  }
  return rc;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  try {
    return execute(parse(argc, argv), out);
  } catch (const CLI::CallForHelp&) {
    out << "usage: melnikov-lab <task> --system <id> [--key value ...] [--config file] [--preset name]\n"
        << "tasks: melnikov-scan obstruction zero-find verify oracle-compare list\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n"
        << "usage: melnikov-lab <task> --system <id> [--key value ...] [--config file] [--preset name]\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace mlab::cli
