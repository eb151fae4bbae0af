#include "sscd/config.hpp"

#include <fstream>
#include <sstream>

namespace sscd {

void RunConfig::validate() const {
  if (n_theta < 8 || n_phi < 8 || n_phi % 2 != 0)
    throw ConfigError("grid: need n_theta >= 8 and even n_phi >= 8");
  if (!(picard_tol > 0) || !(ds > 0)) throw ConfigError("tolerances must be positive");
  if (!(epsilon >= 0) || !(gamma > 0)) throw ConfigError("need epsilon >= 0, gamma > 0");
  if (!(v_bar > 0) || !(v_min_factor > 0) || v_min_factor >= 1)
    throw ConfigError("need v_bar > 0 and 0 < v_min_factor < 1");
}

namespace {

double to_double(const std::string& v, const std::string& key) {
  try {
    std::size_t n = 0;
    double d = std::stod(v, &n);
    while (n < v.size() && std::isspace(static_cast<unsigned char>(v[n]))) ++n;
    if (n != v.size()) throw std::invalid_argument("trailing");
    return d;
  } catch (...) {
    throw ConfigError("config: bad numeric value for " + key + ": '" + v + "'");
  }
}

int to_int(const std::string& v, const std::string& key) {
  double d = to_double(v, key);
  return int(d);
}

std::string strip(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

}  // namespace

void apply_key(RunConfig& c, const std::string& key, const std::string& value) {
  if (key == "grid.n_theta") c.n_theta = to_int(value, key);
  else if (key == "grid.n_phi") c.n_phi = to_int(value, key);
  else if (key == "seed.epsilon") c.epsilon = to_double(value, key);
  else if (key == "seed.gamma") c.gamma = to_double(value, key);
  else if (key == "seed.r_const") c.r_const = to_double(value, key);
  else if (key == "seed.z_amplitude") c.z_amplitude = to_double(value, key);
  else if (key == "seed.z_band") c.z_band = to_int(value, key);
  else if (key == "solver.picard_tol") c.picard_tol = to_double(value, key);
  else if (key == "solver.picard_max_iter") c.picard_max_iter = to_int(value, key);
  else if (key == "solver.ds") c.ds = to_double(value, key);
  else if (key == "chardata.v_bar") c.v_bar = to_double(value, key);
  else if (key == "chardata.v_min_factor") c.v_min_factor = to_double(value, key);
  else if (key == "chardata.vhat_max") c.vhat_max = to_double(value, key);
  else if (key == "run.out_dir") c.out_dir = strip(value);
  else if (key == "run.reference_mode") c.reference_mode = to_int(value, key) != 0;
  else if (key == "sweep.epsilon") {
    c.sweep_epsilon.clear();
    std::istringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
      std::string t = strip(item);
      if (!t.empty()) c.sweep_epsilon.push_back(to_double(t, key));
    }
  } else {
    throw ConfigError("config: unknown key '" + key + "'");
  }
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  RunConfig c;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = strip(line);
    if (t.empty() || t[0] == '#') continue;
    auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(lineno) + " has no '='");
    apply_key(c, strip(t.substr(0, eq)), strip(t.substr(eq + 1)));
  }
  return c;
}

}  // namespace sscd
