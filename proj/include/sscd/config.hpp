#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sscd {

struct RunConfig {
  int n_theta = 48;
  int n_phi = 96;
  double epsilon = 1e-2;
  double gamma = 0.1;
  double r_const = 0.0;
  double z_amplitude = 0.0;
  int z_band = 2;
  double picard_tol = 1e-12;
  int picard_max_iter = 200;
  double v_bar = 0.1;
  double v_min_factor = 1e-6;   // v_min = v_bar * factor
  double ds = 0.01;
  double vhat_max = -1.0;       // <0: use vhat(v_bar)
  std::vector<double> sweep_epsilon;
  std::string out_dir = "out";
  bool reference_mode = false;
  bool check_acceptance = false;

  void validate() const;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// "key = value" per line; '#' comments; dotted keys, e.g. seed.epsilon = 1e-2.
RunConfig parse_config_file(const std::string& path);
void apply_key(RunConfig& c, const std::string& key, const std::string& value);

}  // namespace sscd
