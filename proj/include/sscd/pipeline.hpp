#pragma once

#include <nlohmann/json_fwd.hpp>

#include "sscd/config.hpp"
#include "sscd/diagnostics.hpp"
#include "sscd/io.hpp"
#include "sscd/seed.hpp"

namespace sscd {

double slope_loglog(const std::vector<double>& x, const std::vector<double>& y);

struct RunArtifacts {
  RunConfig config;
  double kappa = 0.0;
  ConstraintReport constraint;
  AsymptoticReport asymptotics;
  MassReport mass;
  ShearReport shear;
  SelfSimilarReport selfsim;
  double eta_h2 = 0.0;
  double trchi_minus2_h2 = 0.0;
  double chihat_vbar_norm = 0.0;
  double outgoing_ray_residual = 0.0;
  double outgoing_ode_residual = 0.0;
  double outgoing_volume_drift = 0.0;
};

// seed -> constraint -> chardata -> diagnostics, writing artifacts under
// config.out_dir; returns the collected numbers for the report.
RunArtifacts run_pipeline(const RunConfig& config);

struct SweepResult {
  std::vector<double> epsilons;
  std::vector<RunArtifacts> runs;
  double kappa_slope = 0.0;
  double divb_slope = 0.0;
  double e_slope = 0.0;
  double mass_slope = 0.0;
};

SweepResult run_sweep(const RunConfig& base);

nlohmann::json report_json(const RunArtifacts& a);
nlohmann::json report_json(const SweepResult& s);
void emit_report(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace sscd
