#include "sscd/io.hpp"

#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

namespace sscd {

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
         (std::uint32_t(b[3]) << 24);
}

void put_f64(std::ostream& os, double v) {
  std::uint64_t u;
  std::memcpy(&u, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((u >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t u = 0;
  for (int i = 0; i < 8; ++i) u |= std::uint64_t(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &u, 8);
  return v;
}

}  // namespace

void write_field_binary(const std::filesystem::path& p, const SphereGrid& g, int rank,
                        const std::vector<const ArrayXXd*>& comps) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  os.write("SGRD", 4);
  put_u32(os, 1);
  put_u32(os, g.n_theta);
  put_u32(os, g.n_phi);
  put_u32(os, rank);
  put_u32(os, std::uint32_t(comps.size()));
  for (const ArrayXXd* c : comps)
    for (int i = 0; i < g.n_theta; ++i)
      for (int j = 0; j < g.n_phi; ++j) put_f64(os, (*c)(i, j));
}

LoadedField read_field_binary(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + p.string());
  char magic[4];
  is.read(magic, 4);
  if (std::memcmp(magic, "SGRD", 4) != 0)
    throw std::runtime_error(p.string() + ": bad magic");
  std::uint32_t ver = get_u32(is);
  if (ver != 1) throw std::runtime_error(p.string() + ": unsupported version");
  LoadedField f;
  f.n_theta = int(get_u32(is));
  f.n_phi = int(get_u32(is));
  f.rank = int(get_u32(is));
  int nc = int(get_u32(is));
  f.comps.resize(nc);
  for (auto& c : f.comps) {
    c.resize(f.n_theta, f.n_phi);
    for (int i = 0; i < f.n_theta; ++i)
      for (int j = 0; j < f.n_phi; ++j) c(i, j) = get_f64(is);
  }
  if (!is) throw std::runtime_error(p.string() + ": truncated payload");
  return f;
}

void write_field_binary(const std::filesystem::path& p, const ScalarField& f) {
  write_field_binary(p, f.grid(), 0, {&f.v});
}

void write_field_binary(const std::filesystem::path& p, const PairField& f, int rank) {
  write_field_binary(p, f.grid(), rank, {&f.c1, &f.c2});
}

void write_field_csv(const std::filesystem::path& p, const SphereGrid& g,
                     const std::vector<const ArrayXXd*>& comps) {
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  os.precision(17);
  os << "theta,phi";
  for (std::size_t c = 0; c < comps.size(); ++c) os << ",c" << c;
  os << "\n";
  for (int i = 0; i < g.n_theta; ++i)
    for (int j = 0; j < g.n_phi; ++j) {
      os << g.theta[i] << "," << g.phi[j];
      for (const ArrayXXd* c : comps) os << "," << (*c)(i, j);
      os << "\n";
    }
}

void save_tuple(const std::filesystem::path& dir, const RegularTuple& t) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  write_field_binary(dir / "b.sgrd", t.b, 1);
  write_field_binary(dir / "div_b.sgrd", t.div_b);
  write_field_binary(dir / "nhat_b.sgrd", t.nhat_b, 2);
  write_field_binary(dir / "f_potential.sgrd", t.f_potential);
  write_field_binary(dir / "e_correction.sgrd", t.e_correction, 1);
  write_field_binary(dir / "phi.sgrd", t.metric.phi);
  write_field_binary(dir / "log_lapse.sgrd", t.metric.log_lapse);
  nlohmann::json j;
  j["kappa"] = t.kappa;
  j["residual"] = t.residual;
  j["converged"] = t.converged;
  j["iteration_trace"] = t.iteration_trace;
  j["ia_grid"] = t.ia_grid;
  j["ia_exact"] = t.ia_exact;
  j["affine_slope"] = t.affine_slope;
  std::ofstream os(dir / "tuple.json");
  os << j.dump(2) << "\n";
}

RegularTuple load_tuple(const std::filesystem::path& dir, GridPtr grid) {
  auto rd_scalar = [&](const char* n) {
    LoadedField f = read_field_binary(dir / n);
    return ScalarField(grid, f.comps.at(0));
  };
  RegularTuple t;
  t.metric = ConformalMetric(grid);
  t.metric.phi = rd_scalar("phi.sgrd");
  t.metric.log_lapse = rd_scalar("log_lapse.sgrd");
  LoadedField b = read_field_binary(dir / "b.sgrd");
  t.b = VectorField(grid);
  t.b.c1 = b.comps.at(0);
  t.b.c2 = b.comps.at(1);
  t.div_b = rd_scalar("div_b.sgrd");
  LoadedField m = read_field_binary(dir / "nhat_b.sgrd");
  t.nhat_b = SymTF2Field(grid);
  t.nhat_b.c1 = m.comps.at(0);
  t.nhat_b.c2 = m.comps.at(1);
  t.f_potential = rd_scalar("f_potential.sgrd");
  LoadedField e = read_field_binary(dir / "e_correction.sgrd");
  t.e_correction = VectorField(grid);
  t.e_correction.c1 = e.comps.at(0);
  t.e_correction.c2 = e.comps.at(1);
  std::ifstream is(dir / "tuple.json");
  nlohmann::json j;
  is >> j;
  t.kappa = j.at("kappa").get<double>();
  t.residual = j.at("residual").get<double>();
  t.converged = j.at("converged").get<bool>();
  t.iteration_trace = j.at("iteration_trace").get<std::vector<double>>();
  t.ia_grid = j.at("ia_grid").get<double>();
  t.ia_exact = j.at("ia_exact").get<double>();
  t.affine_slope = j.at("affine_slope").get<double>();
  t.lie_b_logOmega = lie(t.b, t.metric.log_lapse);
  return t;
}

void save_chardata(const std::filesystem::path& dir, const CharDataBundle& b,
                   const SphereGrid& g) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  write_field_binary(dir / "eta_tri.sgrd", b.eta_tri, 1);
  write_field_binary(dir / "trchi_tri.sgrd", b.trchi_tri);
  nlohmann::json j;
  j["kappa"] = b.kappa;
  j["v_bar"] = b.v_bar;
  j["ladder_v"] = b.chihat.v;
  j["chihat_l2"] = b.chihat.l2_history;
  j["outgoing"] = {{"vhat_max", b.outgoing.vhat_max},
                   {"ray_residual", b.outgoing.ray_residual},
                   {"ode_residual", b.outgoing.ode_residual},
                   {"volume_form_drift", b.outgoing.volume_form_drift}};
  for (std::size_t k = 0; k < b.chihat.v.size(); ++k) {
    char name[64];
    std::snprintf(name, sizeof name, "chihat_%03zu.sgrd", k);
    write_field_binary(dir / name, b.chihat.f[k], 2);
  }
  write_field_binary(dir / "chihat_stationary.sgrd", b.chihat.stationary, 2);
  std::ofstream os(dir / "manifest.json");
  os << j.dump(2) << "\n";
  (void)g;
}

}  // namespace sscd
