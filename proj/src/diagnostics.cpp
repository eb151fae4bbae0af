#include "sscd/diagnostics.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace sscd {

namespace {

const std::map<std::string, Signature>& symbol_table() {
  static const std::map<std::string, Signature> tab = {
      {"trchi", {-1, 0}},  {"hatchi", {-1, 0}}, {"omega", {-1, 0}},
      {"eta", {0, 0}},     {"etab", {0, 0}},    {"zeta", {0, 0}},
      {"trchib", {1, 0}},  {"hatchib", {1, 0}}, {"omegab", {1, 0}},
      {"alpha", {-2, 0}},  {"beta", {-1, 0}},   {"rho", {0, 0}},
      {"sigma", {0, 0}},   {"betab", {1, 0}},   {"alphab", {2, 0}},
      {"rhoch", {0, 0}},   {"sigch", {0, 0}},   {"K", {0, 0}},
      {"Omega", {0, 0}},   {"gmetric", {0, 0}}, {"phi", {0, 1}},
  };
  return tab;
}

struct Parser {
  const std::string& s;
  std::size_t pos = 0;
  explicit Parser(const std::string& str) : s(str) {}

  void skip() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }
  bool eat(char c) {
    skip();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }
  std::string ident() {
    skip();
    std::size_t b = pos;
    while (pos < s.size() &&
           (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
      ++pos;
    if (b == pos) throw CorpusError("corpus parse error near: " + s.substr(pos, 12));
    return s.substr(b, pos - b);
  }

  Signature expr();  // product of factors
  Signature factor();
};

Signature Parser::factor() {
  std::string name = ident();
  skip();
  if (pos < s.size() && s[pos] == '(') {
    ++pos;
    Signature inner = expr();
    if (!eat(')')) throw CorpusError("corpus: missing ')' in " + s);
    if (name == "n3") return {inner.cst + 1, inner.coef};
    if (name == "n4") return {inner.cst - 1, inner.coef};
    if (name == "d" || name == "star") return inner;
    throw CorpusError("corpus: unknown operator '" + name + "'");
  }
  auto it = symbol_table().find(name);
  if (it == symbol_table().end())
    throw CorpusError("corpus: unknown symbol '" + name + "'");
  return it->second;
}

Signature Parser::expr() {
  Signature sig = factor();
  while (true) {
    skip();
    if (pos < s.size() && s[pos] == '*') {
      ++pos;
      Signature f = factor();
      sig.cst += f.cst;
      sig.coef += f.coef;
    } else {
      return sig;
    }
  }
}

Signature parse_term(const std::string& text) {
  Parser p(text);
  Signature sig = p.expr();
  p.skip();
  if (p.pos != text.size())
    throw CorpusError("corpus: trailing characters in term '" + text + "'");
  return sig;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string strip(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

}  // namespace

std::vector<EquationCheck> check_signature_corpus(const std::string& corpus_text) {
  std::vector<EquationCheck> out;
  std::istringstream in(corpus_text);
  std::string line;
  while (std::getline(in, line)) {
    std::string t = strip(line);
    if (t.empty() || t[0] == '#') continue;
    auto colon = t.find(':');
    auto equals = t.find('=');
    if (colon == std::string::npos || equals == std::string::npos || equals < colon)
      throw CorpusError("corpus: malformed record '" + t + "'");
    EquationCheck eq;
    eq.name = strip(t.substr(0, colon));
    std::string lhs = strip(t.substr(colon + 1, equals - colon - 1));
    eq.lhs = {lhs, parse_term(lhs)};
    eq.pass = true;
    for (const std::string& term : split(t.substr(equals + 1), ';')) {
      std::string tt = strip(term);
      if (tt.empty()) continue;
      TermCheck tc{tt, parse_term(tt)};
      if (!(tc.sig == eq.lhs.sig)) eq.pass = false;
      eq.terms.push_back(tc);
    }
    out.push_back(std::move(eq));
  }
  return out;
}

std::string load_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::string& builtin_signature_corpus() {
  static const std::string corpus = R"(# Double-null equation catalogue: one record per line,
# "name : lhs = term ; term ; ...".  n3/n4 raise/lower the signature, d and
# star preserve it; phi stands for a generic tensor of free signature.
4trchi   : n4(trchi)   = trchi*trchi ; hatchi*hatchi ; omega*trchi
4hatchi  : n4(hatchi)  = trchi*hatchi ; alpha ; omega*hatchi
3truchi  : n3(trchib)  = trchib*trchib ; hatchib*hatchib ; omegab*trchib
3hatuchi : n3(hatchib) = trchib*hatchib ; alphab ; omegab*hatchib
3hatchi  : n3(hatchi)  = trchib*hatchi ; omegab*hatchi ; d(eta) ; eta*eta ; trchi*hatchib
3trchi   : n3(trchi)   = trchi*trchib ; rho ; omegab*trchi ; d(eta) ; eta*eta ; hatchi*hatchib
4hatuchi : n4(hatchib) = trchi*hatchib ; omega*hatchib ; d(etab) ; etab*etab ; trchib*hatchi
4truchi  : n4(trchib)  = trchi*trchib ; rho ; omega*trchib ; d(etab) ; etab*etab ; hatchi*hatchib
4eta     : n4(eta)     = hatchi*eta ; hatchi*etab ; trchi*eta ; trchi*etab ; beta
3ueta    : n3(etab)    = hatchib*etab ; hatchib*eta ; trchib*etab ; trchib*eta ; betab
curleta  : d(eta)      = sigma ; hatchib*hatchi
curlueta : d(etab)     = sigma ; hatchib*hatchi
4uomega  : n4(omegab)  = rho ; omegab*omega ; eta*eta ; eta*etab
3omega   : n3(omega)   = rho ; omegab*omega ; etab*etab ; eta*etab
gauss    : K           = rho ; hatchi*hatchib ; trchi*trchib
tcod1    : d(hatchi)   = d(trchi) ; beta ; trchi*zeta ; zeta*hatchi
tcod2    : d(hatchib)  = d(trchib) ; betab ; trchib*zeta ; zeta*hatchib
3alpha   : n3(alpha)   = trchib*alpha ; d(beta) ; omegab*alpha ; hatchi*rho ; star(hatchi)*sigma ; zeta*beta ; eta*beta
4beta    : n4(beta)    = trchi*beta ; d(alpha) ; omega*beta ; zeta*alpha ; etab*alpha
3beta    : n3(beta)    = trchib*beta ; d(rho) ; omegab*beta ; star(d(sigma)) ; hatchi*betab ; eta*rho ; star(eta)*sigma
4sigma   : n4(sigma)   = trchi*sigma ; d(star(beta)) ; hatchib*alpha ; zeta*beta ; etab*beta
3sigma   : n3(sigma)   = trchib*sigma ; d(star(betab)) ; hatchi*alphab ; zeta*betab ; eta*betab
4rho     : n4(rho)     = trchi*rho ; d(beta) ; hatchib*alpha ; zeta*beta ; etab*beta
3rho     : n3(rho)     = trchib*rho ; d(betab) ; hatchi*alphab ; zeta*betab ; eta*betab
4undbeta : n4(betab)   = trchi*betab ; d(rho) ; omega*betab ; star(d(sigma)) ; hatchib*beta ; etab*rho ; star(etab)*sigma
3undbeta : n3(betab)   = trchib*betab ; d(alphab) ; omegab*betab ; zeta*alphab ; eta*alphab
4undalpha: n4(alphab)  = trchi*alphab ; d(betab) ; omega*alphab ; hatchib*rho ; star(hatchib)*sigma ; zeta*betab ; etab*betab
ren1     : n3(beta)    = trchib*beta ; d(rhoch) ; star(d(sigch)) ; omegab*beta ; hatchi*betab ; eta*rhoch ; star(eta)*sigch ; d(hatchi*hatchib) ; star(d(hatchi*hatchib)) ; eta*hatchi*hatchib ; star(eta)*hatchi*hatchib
ren2     : n4(sigch)   = trchi*sigch ; d(star(beta)) ; zeta*beta ; etab*beta ; hatchi*d(etab) ; hatchi*etab*etab
ren3     : n4(rhoch)   = trchi*rhoch ; d(beta) ; zeta*beta ; etab*beta ; hatchi*d(etab) ; hatchi*etab*etab ; trchib*hatchi*hatchi
ren4     : n3(sigch)   = trchib*sigch ; d(star(betab)) ; zeta*betab ; eta*betab ; hatchib*d(eta) ; hatchib*eta*eta
ren5     : n3(rhoch)   = trchib*rhoch ; d(betab) ; zeta*betab ; eta*betab ; hatchib*d(eta) ; hatchib*eta*eta ; trchi*hatchib*hatchib
ren6     : n4(betab)   = trchi*betab ; d(rhoch) ; star(d(sigch)) ; omega*betab ; hatchib*beta ; etab*rhoch ; star(etab)*sigch ; d(hatchib*hatchi) ; star(d(hatchib*hatchi)) ; etab*hatchib*hatchi ; star(etab)*hatchib*hatchi
com1     : Omega*d(n4(phi)) = Omega*star(beta)*phi ; Omega*hatchi*etab*phi ; Omega*trchi*etab*phi ; Omega*hatchi*d(phi) ; Omega*trchi*d(phi)
com2     : Omega*d(n3(phi)) = Omega*star(betab)*phi ; Omega*hatchib*eta*phi ; Omega*trchib*eta*phi ; Omega*hatchib*d(phi) ; Omega*trchib*d(phi)
)";
  return corpus;
}

// ---- Hawking mass ----

MassReport hawking_mass_v0(const RegularTuple& t, const OneForm& eta_tri,
                           const ScalarField& trchi_tri, double u) {
  if (!(u < 0.0)) throw std::invalid_argument("hawking_mass_v0: u must be negative");
  MassReport rep;
  rep.kappa = t.kappa;
  rep.u = u;
  const ConformalMetric& m = t.metric;
  GridPtr gp = t.grid();
  double lambda = -u;

  // Right side of the mass identity at u = -1 fields:
  //   Rbar = int [ 1/2 <eta, grad(div b)>_g - 1/2 |eta|_g^2 (-2 + div b)
  //                + 1/16 trchi |nhat b|^2 ] dVol_g.
  OneForm gD = grad(t.div_b);
  ScalarField term1 = dot(eta_tri, gD, m);
  ScalarField eta2 = dot(eta_tri, eta_tri, m);
  ArrayXXd m2 = 2.0 * (t.nhat_b.c1.square() + t.nhat_b.c2.square());
  ScalarField integrand(gp);
  integrand.v = 0.5 * term1.v - 0.5 * eta2.v * (-2.0 + t.div_b.v) +
                (1.0 / 16.0) * trchi_tri.v * m2;
  double Rbar = integrate(integrand, m);

  // Weighted integral W = int (1 + (u/2) div b) rho_check dVol = -Rbar at any
  // scale (u-independence of the identity).  One fixed-point pass corrects the
  // (u/2) div b weight using the uniform weighted estimate of rho_check.
  double W = -Rbar;
  double A1 = area(m);
  ScalarField rho_est(gp);
  rho_est.v = W / (A1 * (1.0 - 0.5 * t.div_b.v));
  ScalarField corr(gp);
  corr.v = t.div_b.v * rho_est.v;
  double Jbar = integrate(corr, m);
  double Ibar = W + 0.5 * Jbar;  // int rho_check (u-independent normalization)

  rep.integral_rho_check = -Ibar;
  rep.area_radius = lambda * std::sqrt(A1 / (4.0 * M_PI));
  rep.mass = rep.area_radius / (8.0 * M_PI) * rep.integral_rho_check;
  rep.mass_over_sqrt_area = rep.mass / std::sqrt(lambda * lambda * A1);
  return rep;
}

ShearReport shear_profile_v0(const RegularTuple& t, const SeedData& seed, double u) {
  if (!(u < 0.0)) throw std::invalid_argument("shear_profile_v0: u must be negative");
  ShearReport rep;
  double lambda = -u;
  GridPtr gp = t.grid();
  rep.shear = SymTF2Field(gp);
  rep.shear.c1 = 0.5 * t.nhat_b.c1 / lambda;
  rep.shear.c2 = 0.5 * t.nhat_b.c2 / lambda;
  ArrayXXd mag = (2.0 * (rep.shear.c1.square() + rep.shear.c2.square())).sqrt();
  rep.sup = mag.maxCoeff();
  const SphereGrid& g = *gp;
  double eps = seed.epsilon;
  double supp = 0.0;
  for (int i = 0; i < g.n_theta; ++i) {
    double a = seed.a_field.v(i, 0);
    if (std::abs(a) >= 0.5) {
      for (int j = 0; j < g.n_phi; ++j) {
        double ratio = mag(i, j) * lambda / (eps / std::sqrt(2.0) * std::abs(a));
        rep.ratio_min = std::min(rep.ratio_min, ratio);
        rep.ratio_max = std::max(rep.ratio_max, ratio);
      }
    } else {
      supp += g.w[i] * 2.0 * M_PI;
    }
  }
  rep.support_area = supp;
  return rep;
}

// ---- tensor identities ----

namespace {

// one-form components of mu . (theta . nu): (theta.nu)_B = g^{AC} th_A nu_CB
OneForm contract(const SymTF2Field& mu, const OneForm& th, const SymTF2Field& nu,
                 const ConformalMetric& m) {
  ArrayXXd iconf = (-2.0 * m.phi.v).exp();
  ArrayXXd tn1 = iconf * (th.c1 * nu.c1 + th.c2 * nu.c2);        // (th.nu)_1
  ArrayXXd tn2 = iconf * (th.c1 * nu.c2 - th.c2 * nu.c1);        // (th.nu)_2
  OneForm out(mu.grid_ptr());
  out.c1 = iconf * (mu.c1 * tn1 + mu.c2 * tn2);
  out.c2 = iconf * (mu.c2 * tn1 - mu.c1 * tn2);
  return out;
}

ScalarField wedge(const SymTF2Field& mu, const SymTF2Field& nu, const ConformalMetric& m) {
  ScalarField out(mu.grid_ptr());
  out.v = 2.0 * (mu.c1 * nu.c2 - mu.c2 * nu.c1) * (-4.0 * m.phi.v).exp();
  return out;
}

OneForm star(const OneForm& w) {
  OneForm out(w.grid_ptr());
  out.c1 = w.c2;
  out.c2 = -w.c1;
  return out;
}

}  // namespace

IdentityReport tensor_identity_suite(GridPtr grid, int trials, std::uint64_t seed) {
  IdentityReport rep;
  rep.trials = trials;
  for (int k = 0; k < trials; ++k) {
    std::uint64_t s = seed + 977u * k;
    ConformalMetric m(grid);
    if (k % 3 != 0) {
      ScalarField phi = random_scalar(grid, 4, s ^ 0x51ull);
      m.phi.v = 0.08 * phi.v / (1.0 + phi.v.abs().maxCoeff());
    }
    SymTF2Field mu = random_symtf(grid, 6, s);
    SymTF2Field nu = random_symtf(grid, 6, s ^ 0x7eadull);
    OneForm th = random_oneform(grid, 6, s ^ 0xf00dull);
    // unit-normalize: the identities are homogeneous, and unit fields keep the
    // pole-amplified roundoff of the stacked derivatives at the 1e-10 level
    auto nrm2 = [&](SymTF2Field& f) {
      double n = l2_norm(f);
      if (n > 0) {
        f.c1 /= n;
        f.c2 /= n;
      }
    };
    nrm2(mu);
    nrm2(nu);
    double nth = l2_norm(th);
    if (nth > 0) {
      th.c1 /= nth;
      th.c2 /= nth;
    }

    // identity 1: (grad(mu.nu) + star grad(mu wedge nu))/2 = mu div nu + (nu.grad).mu
    ScalarField mn = dot(mu, nu, m);
    ScalarField wn = wedge(mu, nu, m);
    OneForm lhs(grid);
    OneForm g1 = grad(mn), g2 = star(grad(wn));
    lhs.c1 = 0.5 * (g1.c1 + g2.c1);
    lhs.c2 = 0.5 * (g1.c2 + g2.c2);

    ArrayXXd iconf = (-2.0 * m.phi.v).exp();
    TensorField dnu = covd_conformal(as_tensor(nu), m.phi);
    TensorField dmu = covd_conformal(as_tensor(mu), m.phi);
    // (div nu)_c = e^{-2phi} sum_b (dnu)_{b,b,c}
    ArrayXXd divnu1 = iconf * (dnu.comp(0b000) + dnu.comp(0b011));
    ArrayXXd divnu2 = iconf * (dnu.comp(0b100) + dnu.comp(0b111));
    OneForm rhs(grid);
    // mu_A^B (div nu)_B = e^{-2phi} mu_ab (div nu)_b
    rhs.c1 = iconf * (mu.c1 * divnu1 + mu.c2 * divnu2);
    rhs.c2 = iconf * (mu.c2 * divnu1 - mu.c1 * divnu2);
    // (nu . grad) . mu = nu^{BC} nab_B mu_{CA} = e^{-4phi} nu_bc (dmu)_{b,c,a}
    ArrayXXd i2 = iconf * iconf;
    auto dm = [&](int b, int c, int a) { return dmu.comp(((a << 1) | (c)) << 1 | b); };
    // careful with bit layout: dmu comp = ((tensor idx) << 1) | deriv, tensor
    // idx bits: pos0 = first (C), pos1 = second (A)
    auto dmu_c = [&](int B, int C, int A) {
      int tidx = C | (A << 1);
      return dmu.comp((tidx << 1) | B);
    };
    (void)dm;
    ArrayXXd r1 = ArrayXXd::Zero(mu.c1.rows(), mu.c1.cols());
    ArrayXXd r2 = r1;
    auto nu_full = [&](int b, int c) -> ArrayXXd {
      if (b == 0 && c == 0) return nu.c1;
      if (b == 1 && c == 1) return ArrayXXd(-nu.c1);
      return nu.c2;
    };
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c) {
        r1 += nu_full(b, c) * dmu_c(b, c, 0);
        r2 += nu_full(b, c) * dmu_c(b, c, 1);
      }
    rhs.c1 += i2 * r1;
    rhs.c2 += i2 * r2;

    // first-derivative identity: L2 residual against the natural H1 scales
    double n1 = 1.0 + sobolev_norm(mu, 1) * sobolev_norm(nu, 1);
    OneForm diff(grid);
    diff.c1 = lhs.c1 - rhs.c1;
    diff.c2 = lhs.c2 - rhs.c2;
    double e1 = l2_norm(diff) / n1;
    rep.pair_identity_max = std::max(rep.pair_identity_max, e1);

    // identity 2: mu.(th.nu) - nu.(th.mu) = star(th) (mu wedge nu)
    OneForm a1 = contract(mu, th, nu, m);
    OneForm a2 = contract(nu, th, mu, m);
    OneForm st = star(th);
    ScalarField w2 = wedge(mu, nu, m);
    double e2 = std::max(sup_norm(a1.c1 - a2.c1 - st.c1 * w2.v),
                         sup_norm(a1.c2 - a2.c2 - st.c2 * w2.v));
    // identity 3: mu.(th.nu) + nu.(th.mu) = th (mu . nu)
    double e3 = std::max(sup_norm(a1.c1 + a2.c1 - th.c1 * mn.v),
                         sup_norm(a1.c2 + a2.c2 - th.c2 * mn.v));
    rep.contraction_max = std::max(rep.contraction_max, std::max(e2, e3));

    // specialization mu == nu: wedge side vanishes; grad(|mu|^2)/2 identity
    if (k % 5 == 0) {
      ScalarField mm = dot(mu, mu, m);
      OneForm lhs2 = grad(mm);
      lhs2.c1 *= 0.5;
      lhs2.c2 *= 0.5;
      TensorField dmu2 = covd_conformal(as_tensor(mu), m.phi);
      ArrayXXd dv1 = iconf * (dmu2.comp(0b000) + dmu2.comp(0b011));
      ArrayXXd dv2 = iconf * (dmu2.comp(0b100) + dmu2.comp(0b111));
      OneForm rhs2(grid);
      rhs2.c1 = iconf * (mu.c1 * dv1 + mu.c2 * dv2);
      rhs2.c2 = iconf * (mu.c2 * dv1 - mu.c1 * dv2);
      ArrayXXd q1 = ArrayXXd::Zero(mu.c1.rows(), mu.c1.cols());
      ArrayXXd q2 = q1;
      auto mu_full = [&](int b, int c) -> ArrayXXd {
        if (b == 0 && c == 0) return mu.c1;
        if (b == 1 && c == 1) return ArrayXXd(-mu.c1);
        return mu.c2;
      };
      for (int b = 0; b < 2; ++b)
        for (int c = 0; c < 2; ++c) {
          auto dmu_cc = [&](int B, int C, int A) {
            int tidx = C | (A << 1);
            return dmu2.comp((tidx << 1) | B);
          };
          q1 += mu_full(b, c) * dmu_cc(b, c, 0);
          q2 += mu_full(b, c) * dmu_cc(b, c, 1);
        }
      rhs2.c1 += i2 * q1;
      rhs2.c2 += i2 * q2;
      OneForm diff2(grid);
      diff2.c1 = lhs2.c1 - rhs2.c1;
      diff2.c2 = lhs2.c2 - rhs2.c2;
      double h1m = sobolev_norm(mu, 1);
      double e4 = l2_norm(diff2) / (1.0 + h1m * h1m);
      rep.specialization_max = std::max(rep.specialization_max, e4);
    }
  }
  return rep;
}

SelfSimilarReport self_similar_relations(const RegularTuple& t, double u) {
  SelfSimilarReport rep;
  GridPtr gp = t.grid();
  double lambda = -u;
  // route A: Om trchib from the stored divergence; route B: assembled from the
  // self-similar scalings of the same stored data (independent arithmetic).
  ArrayXXd routeA = (2.0 / u) + t.div_b.v / lambda;
  ArrayXXd routeB = (t.div_b.v - 2.0) / lambda;
  rep.trchib_residual = sup_norm(routeA - routeB);

  // route A recomputes L_b log Omega with the Lie-derivative primitive; route B
  // uses the tuple's stored field; both scale self-similarly to u.
  ScalarField lbl = lie(t.b, t.metric.log_lapse);
  ArrayXXd omA = -t.kappa / (2.0 * u) - 0.5 * lbl.v / lambda;
  ArrayXXd omB = (t.kappa / 2.0 - 0.5 * t.lie_b_logOmega.v) / lambda;
  rep.omegab_residual = sup_norm(omA - omB);

  // shear: stored canonical M against the spectral recompute (discretization
  // consistency diagnostic; not held to the identity tolerance).
  SymTF2Field M2 = nhat_otimes(t.b, t.metric);
  rep.shear_residual = 0.5 * std::max(sup_norm(t.nhat_b.c1 - M2.c1),
                                      sup_norm(t.nhat_b.c2 - M2.c2));
  (void)gp;
  return rep;
}

}  // namespace sscd
