#include "sscd/pipeline.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

namespace sscd {

double slope_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("slope_loglog: need matching samples");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = int(x.size());
  for (int i = 0; i < n; ++i) {
    double lx = std::log(x[i]), ly = std::log(std::max(y[i], 1e-300));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

RunArtifacts run_pipeline(const RunConfig& config) {
  config.validate();
  RunArtifacts art;
  art.config = config;
  GridPtr grid = SphereGrid::make(config.n_theta, config.n_phi);

  std::optional<ZSpec> z;
  if (config.z_amplitude != 0.0) z = ZSpec{config.z_amplitude, config.z_band};
  SeedData seed = make_seed(config.epsilon, config.gamma, config.r_const, grid, z);
  HProfile h = make_h_profile(seed);

  RegularTuple tuple = picard_regular_tuple(seed, h, config.picard_tol,
                                            config.picard_max_iter);
  if (!tuple.converged)
    throw ConstraintError("run_pipeline: Picard iteration did not converge");
  art.kappa = tuple.kappa;
  art.constraint = verify_kappa_constraint(tuple);
  art.asymptotics = asymptotic_diagnostics(tuple, seed, h);
  art.selfsim = self_similar_relations(tuple, -1.0);

  namespace fs = std::filesystem;
  fs::path out(config.out_dir);
  fs::create_directories(out);
  save_tuple(out / "tuple", tuple);
  {
    std::vector<const ArrayXXd*> comps{&tuple.div_b.v};
    write_field_csv(out / "div_b.csv", *grid, comps);
    std::vector<const ArrayXXd*> bc{&tuple.b.c1, &tuple.b.c2};
    write_field_csv(out / "b.csv", *grid, bc);
  }

  CharDataBundle bundle;
  if (config.epsilon > 0.0) {
    double v_min = config.v_bar * config.v_min_factor;
    bundle = build_chardata(tuple, config.v_bar, v_min, config.ds);
    save_chardata(out / "chardata", bundle, *grid);
    art.eta_h2 = sobolev_norm(bundle.eta_tri, 2);
    ScalarField xm2(grid);
    xm2.v = bundle.trchi_tri.v - 2.0;
    art.trchi_minus2_h2 = sobolev_norm(xm2, 2);
    art.chihat_vbar_norm = l2_norm(bundle.chihat.f.front());
    art.outgoing_ray_residual = bundle.outgoing.ray_residual;
    art.outgoing_ode_residual = bundle.outgoing.ode_residual;
    art.outgoing_volume_drift = bundle.outgoing.volume_form_drift;
    art.mass = hawking_mass_v0(tuple, bundle.eta_tri, bundle.trchi_tri, -1.0);
  } else {
    // zero seed: all characteristic data trivial
    OneForm eta(grid);
    ScalarField trchi = ScalarField::constant(grid, 2.0);
    art.mass = hawking_mass_v0(tuple, eta, trchi, -1.0);
  }
  art.shear = shear_profile_v0(tuple, seed, -1.0);
  return art;
}

SweepResult run_sweep(const RunConfig& base) {
  if (base.sweep_epsilon.empty())
    throw ConfigError("run_sweep: sweep.epsilon list is empty");
  SweepResult s;
  std::vector<double> dk, dd, de, dm;
  for (double eps : base.sweep_epsilon) {
    RunConfig c = base;
    c.epsilon = eps;
    c.out_dir = base.out_dir + "/eps_" + std::to_string(eps);
    RunArtifacts a = run_pipeline(c);
    s.epsilons.push_back(eps);
    dk.push_back(a.asymptotics.kappa_deviation);
    dd.push_back(a.asymptotics.divb_profile_sup_dev);
    de.push_back(a.asymptotics.e_h3);
    dm.push_back(a.mass.mass);
    s.runs.push_back(std::move(a));
  }
  s.kappa_slope = slope_loglog(s.epsilons, dk);
  s.divb_slope = slope_loglog(s.epsilons, dd);
  s.e_slope = slope_loglog(s.epsilons, de);
  s.mass_slope = slope_loglog(s.epsilons, dm);
  return s;
}

namespace {

nlohmann::json config_json(const RunConfig& c) {
  return {{"grid", {{"n_theta", c.n_theta}, {"n_phi", c.n_phi}}},
          {"seed",
           {{"epsilon", c.epsilon},
            {"gamma", c.gamma},
            {"r_const", c.r_const},
            {"z_amplitude", c.z_amplitude}}},
          {"solver", {{"picard_tol", c.picard_tol}, {"ds", c.ds}}},
          {"chardata", {{"v_bar", c.v_bar}, {"v_min_factor", c.v_min_factor}}},
          {"reference_mode", c.reference_mode}};
}

}  // namespace

nlohmann::json report_json(const RunArtifacts& a) {
  nlohmann::json j;
  j["config"] = config_json(a.config);
  j["kappa"] = a.kappa;
  j["constraint"] = {{"l2_residual", a.constraint.l2_residual},
                     {"sup_residual", a.constraint.sup_residual},
                     {"alt_l2_residual", a.constraint.alt_l2_residual},
                     {"agreement", a.constraint.agreement}};
  j["asymptotics"] = {{"kappa_prediction", a.asymptotics.kappa_prediction},
                      {"kappa_deviation", a.asymptotics.kappa_deviation},
                      {"divb_profile_sup_dev", a.asymptotics.divb_profile_sup_dev},
                      {"divb_max", a.asymptotics.divb_max},
                      {"divb_lower_bound_margin", a.asymptotics.divb_lower_bound_margin},
                      {"e_h3", a.asymptotics.e_h3},
                      {"div_consistency", a.asymptotics.div_consistency}};
  j["mass"] = {{"mass", a.mass.mass},
               {"integral_rho_check", a.mass.integral_rho_check},
               {"area_radius", a.mass.area_radius},
               {"mass_over_sqrt_area", a.mass.mass_over_sqrt_area}};
  j["shear"] = {{"sup", a.shear.sup},
                {"ratio_min", a.shear.ratio_min},
                {"ratio_max", a.shear.ratio_max},
                {"support_area", a.shear.support_area}};
  j["selfsim"] = {{"trchib_residual", a.selfsim.trchib_residual},
                  {"omegab_residual", a.selfsim.omegab_residual},
                  {"shear_residual", a.selfsim.shear_residual}};
  j["chardata"] = {{"eta_h2", a.eta_h2},
                   {"trchi_minus2_h2", a.trchi_minus2_h2},
                   {"chihat_vbar_norm", a.chihat_vbar_norm},
                   {"outgoing_ray_residual", a.outgoing_ray_residual},
                   {"outgoing_ode_residual", a.outgoing_ode_residual},
                   {"outgoing_volume_drift", a.outgoing_volume_drift}};
  return j;
}

nlohmann::json report_json(const SweepResult& s) {
  nlohmann::json j;
  j["epsilons"] = s.epsilons;
  j["slopes"] = {{"kappa", s.kappa_slope},
                 {"divb_profile", s.divb_slope},
                 {"e_correction", s.e_slope},
                 {"mass", s.mass_slope}};
  j["runs"] = nlohmann::json::array();
  for (const auto& r : s.runs) j["runs"].push_back(report_json(r));
  return j;
}

void emit_report(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << j.dump(2) << "\n";
}

}  // namespace sscd
