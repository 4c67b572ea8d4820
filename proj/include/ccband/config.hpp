#pragma once

#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>

#include "ccband/potential.hpp"

namespace ccband {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat key=value configuration with dotted sections. Every key has a default;
// unknown keys are rejected. Flags override file values by calling set()
// after load().
class RunConfig {
public:
  // potential block
  std::string potential_kind = "pt_lattice"; // pt_lattice | custom
  double v0 = 0.2;
  double a = 1.0;
  double lambda = 1.0;
  std::string r_coeffs; // custom: "n:re:im;n:re:im;..."
  std::string i_coeffs;

  // numeric block
  int n_trunc = 24;
  int q_points = 101;
  double dt = 0.002;
  double grid_l = 2048.0;
  int grid_m = 16384;
  double t_end = 40.0;
  int n_records = 256;
  int record_every = 50;
  double w = 80.0;
  double gap_tol = -1.0;   // < 0: module default 1e-4 kB^2
  double kappa_tol = 1e-3;
  double tol_lambda = 1e-3;
  long n_quad = 65536;

  void set(std::string const& key, std::string const& value) {
    auto it = setters().find(key);
    if (it == setters().end())
      throw ConfigError("config: unknown key '" + key + "'");
    it->second(*this, value);
  }

  void load(std::string const& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot read " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError("config: line " + std::to_string(lineno) +
                          " is not key=value");
      set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
  }

  void validate() const {
    if (potential_kind != "pt_lattice" && potential_kind != "custom")
      throw ConfigError("config: potential.kind must be pt_lattice or custom");
    if (!(a > 0.0)) throw ConfigError("config: potential.a must be positive");
    if (lambda < 0.0) throw ConfigError("config: potential.lambda must be >= 0");
    if (n_trunc < 1 || q_points < 2 || grid_m < 2 || n_records < 1 ||
        record_every < 1)
      throw ConfigError("config: counts must be positive");
    if (!(dt > 0.0) || !(t_end > 0.0) || !(grid_l > 0.0) || !(w > 0.0))
      throw ConfigError("config: sizes and steps must be positive");
    if (!(kappa_tol > 0.0) || !(tol_lambda > 0.0))
      throw ConfigError("config: tolerances must be positive");
    if (n_quad < 64) throw ConfigError("config: numeric.n_quad must be >= 64");
  }

  PotentialFamily make_potential() const {
    validate();
    if (potential_kind == "pt_lattice")
      return PotentialFamily::pt_lattice(v0, a, lambda);
    return PotentialFamily(a, parse_coeffs(r_coeffs), parse_coeffs(i_coeffs),
                           lambda);
  }

  std::string show() const {
    std::ostringstream os;
    os << "potential.kind = " << potential_kind << "\n"
       << "potential.v0 = " << v0 << "\n"
       << "potential.a = " << a << "\n"
       << "potential.lambda = " << lambda << "\n"
       << "potential.r_coeffs = " << r_coeffs << "\n"
       << "potential.i_coeffs = " << i_coeffs << "\n"
       << "numeric.n_trunc = " << n_trunc << "\n"
       << "numeric.q_points = " << q_points << "\n"
       << "numeric.dt = " << dt << "\n"
       << "numeric.grid_l = " << grid_l << "\n"
       << "numeric.grid_m = " << grid_m << "\n"
       << "numeric.t_end = " << t_end << "\n"
       << "numeric.n_records = " << n_records << "\n"
       << "numeric.record_every = " << record_every << "\n"
       << "numeric.w = " << w << "\n"
       << "numeric.gap_tol = " << gap_tol << "\n"
       << "numeric.kappa_tol = " << kappa_tol << "\n"
       << "numeric.tol_lambda = " << tol_lambda << "\n"
       << "numeric.n_quad = " << n_quad << "\n";
    return os.str();
  }

  static CoeffMap parse_coeffs(std::string const& text) {
    CoeffMap c;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ';')) {
      item = trim(item);
      if (item.empty()) continue;
      int n;
      double re, im;
      char c1, c2;
      std::istringstream fields(item);
      if (!(fields >> n >> c1 >> re >> c2 >> im) || c1 != ':' || c2 != ':')
        throw ConfigError("config: bad coefficient entry '" + item +
                          "' (want n:re:im)");
      c[n] = cplx(re, im);
    }
    return c;
  }

private:
  static std::string trim(std::string s) {
    auto issp = [](unsigned char ch) { return std::isspace(ch); };
    while (!s.empty() && issp(s.front())) s.erase(s.begin());
    while (!s.empty() && issp(s.back())) s.pop_back();
    return s;
  }

  template <class T>
  static void parse_into(T& out, std::string const& key, std::string const& v) {
    std::istringstream in(v);
    in >> out;
    if (in.fail() || !(in >> std::ws).eof())
      throw ConfigError("config: bad value for " + key + ": '" + v + "'");
  }

  using Setter = std::function<void(RunConfig&, std::string const&)>;
  static std::map<std::string, Setter> const& setters() {
    static const std::map<std::string, Setter> s = {
        {"potential.kind", [](RunConfig& c, auto const& v) { c.potential_kind = v; }},
        {"potential.v0", [](RunConfig& c, auto const& v) { parse_into(c.v0, "potential.v0", v); }},
        {"potential.a", [](RunConfig& c, auto const& v) { parse_into(c.a, "potential.a", v); }},
        {"potential.lambda", [](RunConfig& c, auto const& v) { parse_into(c.lambda, "potential.lambda", v); }},
        {"potential.r_coeffs", [](RunConfig& c, auto const& v) { c.r_coeffs = v; }},
        {"potential.i_coeffs", [](RunConfig& c, auto const& v) { c.i_coeffs = v; }},
        {"numeric.n_trunc", [](RunConfig& c, auto const& v) { parse_into(c.n_trunc, "numeric.n_trunc", v); }},
        {"numeric.q_points", [](RunConfig& c, auto const& v) { parse_into(c.q_points, "numeric.q_points", v); }},
        {"numeric.dt", [](RunConfig& c, auto const& v) { parse_into(c.dt, "numeric.dt", v); }},
        {"numeric.grid_l", [](RunConfig& c, auto const& v) { parse_into(c.grid_l, "numeric.grid_l", v); }},
        {"numeric.grid_m", [](RunConfig& c, auto const& v) { parse_into(c.grid_m, "numeric.grid_m", v); }},
        {"numeric.t_end", [](RunConfig& c, auto const& v) { parse_into(c.t_end, "numeric.t_end", v); }},
        {"numeric.n_records", [](RunConfig& c, auto const& v) { parse_into(c.n_records, "numeric.n_records", v); }},
        {"numeric.record_every", [](RunConfig& c, auto const& v) { parse_into(c.record_every, "numeric.record_every", v); }},
        {"numeric.w", [](RunConfig& c, auto const& v) { parse_into(c.w, "numeric.w", v); }},
        {"numeric.gap_tol", [](RunConfig& c, auto const& v) { parse_into(c.gap_tol, "numeric.gap_tol", v); }},
        {"numeric.kappa_tol", [](RunConfig& c, auto const& v) { parse_into(c.kappa_tol, "numeric.kappa_tol", v); }},
        {"numeric.tol_lambda", [](RunConfig& c, auto const& v) { parse_into(c.tol_lambda, "numeric.tol_lambda", v); }},
        {"numeric.n_quad", [](RunConfig& c, auto const& v) { parse_into(c.n_quad, "numeric.n_quad", v); }},
    };
    return s;
  }
};

} // namespace ccband
