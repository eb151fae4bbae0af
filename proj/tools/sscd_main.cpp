#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <iostream>

#include "sscd/pipeline.hpp"

using namespace sscd;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitAcceptance = 4;

struct Cli {
  std::string config_path;
  std::string grid_spec;
  std::string sweep_spec;
  double epsilon = -1.0;
  double gamma = -1.0;
  std::string out_dir;
  bool reference = false;
  bool check = false;
};

RunConfig build_config(const Cli& cli) {
  RunConfig c;
  if (!cli.config_path.empty()) c = parse_config_file(cli.config_path);
  if (cli.epsilon >= 0) c.epsilon = cli.epsilon;
  if (cli.gamma > 0) c.gamma = cli.gamma;
  if (!cli.grid_spec.empty()) {
    auto x = cli.grid_spec.find('x');
    if (x == std::string::npos) throw ConfigError("--grid expects NxM");
    c.n_theta = std::stoi(cli.grid_spec.substr(0, x));
    c.n_phi = std::stoi(cli.grid_spec.substr(x + 1));
  }
  if (!cli.sweep_spec.empty()) apply_key(c, "sweep.epsilon", cli.sweep_spec);
  if (!cli.out_dir.empty()) c.out_dir = cli.out_dir;
  c.reference_mode = cli.reference;
  c.check_acceptance = cli.check;
  c.validate();
  return c;
}

int cmd_seed(const RunConfig& c) {
  GridPtr g = SphereGrid::make(c.n_theta, c.n_phi);
  std::optional<ZSpec> z;
  if (c.z_amplitude != 0.0) z = ZSpec{c.z_amplitude, c.z_band};
  SeedData s = make_seed(c.epsilon, c.gamma, c.r_const, g, z);
  HProfile h = make_h_profile(s);
  std::filesystem::path out(c.out_dir);
  std::filesystem::create_directories(out);
  write_field_csv(out / "a_profile.csv", *g, {&s.a_field.v});
  write_field_csv(out / "h_profile.csv", *g, {&h.h.v});
  write_field_binary(out / "b_check.sgrd", s.b_check, 1);
  nlohmann::json j{{"epsilon", c.epsilon},
                   {"gamma", c.gamma},
                   {"integral_a2sin", s.quad.a2sin_total()},
                   {"h_y0", h.y0}};
  emit_report(out / "seed.json", j);
  std::cout << "seed: written to " << out << "\n";
  return kExitOk;
}

int cmd_run(const RunConfig& c, bool full) {
  RunArtifacts a = run_pipeline(c);
  nlohmann::json j = report_json(a);
  emit_report(std::filesystem::path(c.out_dir) / "report.json", j);
  std::cout << "kappa = " << a.kappa << ", constraint residual = "
            << a.constraint.l2_residual << ", mass = " << a.mass.mass << "\n";
  if (c.check_acceptance) {
    bool ok = a.constraint.l2_residual <= 1e-10 && a.constraint.agreement <= 1e-9;
    if (full) ok = ok && a.outgoing_ray_residual <= 1e-7;
    if (!ok) {
      std::cout << "acceptance thresholds violated\n";
      return kExitAcceptance;
    }
  }
  return kExitOk;
}

int cmd_sweep(const RunConfig& c) {
  SweepResult s = run_sweep(c);
  nlohmann::json j = report_json(s);
  emit_report(std::filesystem::path(c.out_dir) / "sweep.json", j);
  std::cout << "slopes: kappa " << s.kappa_slope << ", div b " << s.divb_slope
            << ", e " << s.e_slope << ", mass " << s.mass_slope << "\n";
  if (c.check_acceptance &&
      (s.kappa_slope < 2.5 || s.divb_slope < 2.5 || s.e_slope < 2.5 ||
       std::abs(s.mass_slope - 2.0) > 0.2))
    return kExitAcceptance;
  return kExitOk;
}

int cmd_diagnose(const RunConfig& c) {
  auto checks = check_signature_corpus(builtin_signature_corpus());
  int bad = 0;
  for (const auto& eq : checks)
    if (!eq.pass) {
      ++bad;
      std::cout << "signature FAIL: " << eq.name << "\n";
    }
  std::cout << "signature corpus: " << (checks.size() - bad) << "/" << checks.size()
            << " pass\n";
  GridPtr g = SphereGrid::make(c.n_theta, c.n_phi);
  IdentityReport ir = tensor_identity_suite(g, 100);
  std::cout << "tensor identities: pair " << ir.pair_identity_max << ", contraction "
            << ir.contraction_max << ", specialization " << ir.specialization_max
            << "\n";
  bool ok = bad == 0 && ir.pair_identity_max < 1e-9 && ir.contraction_max < 1e-9;
  return ok ? kExitOk : kExitAcceptance;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kappa-self-similar characteristic data pipeline"};
  app.require_subcommand(1);
  app.fallthrough();
  Cli cli;
  app.add_option("--config", cli.config_path, "config file (key = value)");
  app.add_option("--epsilon", cli.epsilon, "seed amplitude");
  app.add_option("--gamma", cli.gamma, "bump width");
  app.add_option("--grid", cli.grid_spec, "grid NxM (theta x phi)");
  app.add_option("--out", cli.out_dir, "output directory");
  app.add_option("--sweep-epsilon", cli.sweep_spec, "comma-separated epsilon list");
  app.add_flag("--reference-mode", cli.reference, "single-threaded deterministic mode");
  app.add_flag("--check", cli.check, "exit 4 when acceptance thresholds fail");

  auto* seed = app.add_subcommand("seed", "construct seed data and profiles");
  auto* constraint = app.add_subcommand("constraint", "run the constraint solve");
  auto* chardata = app.add_subcommand("chardata", "full characteristic-data pipeline");
  auto* diagnose = app.add_subcommand("diagnose", "signature corpus and identities");
  auto* all = app.add_subcommand("all", "entire pipeline (alias of chardata)");
  auto* sweep = app.add_subcommand("sweep", "epsilon sweep with slope fits");

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig c = build_config(cli);
    if (seed->parsed()) return cmd_seed(c);
    if (constraint->parsed()) {
      RunConfig c2 = c;
      c2.epsilon = c.epsilon;
      return cmd_run(c2, /*full=*/false);
    }
    if (chardata->parsed() || all->parsed()) return cmd_run(c, /*full=*/true);
    if (diagnose->parsed()) return cmd_diagnose(c);
    if (sweep->parsed()) return cmd_sweep(c);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const SeedError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const TransportError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const ConstraintError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  }
  return kExitOk;
}
