#pragma once

#include <map>
#include <string>
#include <vector>

#include "sscd/chardata.hpp"
#include "sscd/constraint.hpp"

namespace sscd {

// ---- signature homogeneity checker for the double-null equation catalogue ----

// Signatures are affine in a free parameter p (used by the commutation records,
// whose generic tensor carries an arbitrary signature): s = cst + coef * p.
struct Signature {
  int cst = 0;
  int coef = 0;
  bool operator==(const Signature& o) const = default;
};

struct TermCheck {
  std::string text;
  Signature sig;
};

struct EquationCheck {
  std::string name;
  TermCheck lhs;
  std::vector<TermCheck> terms;
  bool pass = false;
};

struct CorpusError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Parses the declarative corpus (one equation per line:
// "name : lhs = term ; term ; ...", factors joined by '*', operators
// n3(.), n4(.), d(.), star(.)) and checks summand-wise signature homogeneity.
std::vector<EquationCheck> check_signature_corpus(const std::string& corpus_text);
std::string load_text_file(const std::string& path);
// The built-in catalogue (null structure, Bianchi, renormalized Bianchi,
// commutation records).
const std::string& builtin_signature_corpus();

// ---- Hawking mass at v = 0 ----

struct MassReport {
  double kappa = 0.0;
  double u = -1.0;
  double integral_rho_check = 0.0;  // int (-rho_check) over S^2_{u,0}
  double mass = 0.0;
  double area_radius = 0.0;
  double mass_over_sqrt_area = 0.0;
};

MassReport hawking_mass_v0(const RegularTuple& t, const OneForm& eta_tri,
                           const ScalarField& trchi_tri, double u);

// ---- shear along v = 0 ----

struct ShearReport {
  SymTF2Field shear;         // Omega hatchi_bar at scale u: (1/2) S / (-u)
  double sup = 0.0;
  double ratio_min = 1e300;  // |shear| (-u) / ((eps/sqrt2)|a|) over {|a| >= 1/2}
  double ratio_max = 0.0;
  double support_area = 0.0; // area of {|a| <= 1/2}
};

ShearReport shear_profile_v0(const RegularTuple& t, const SeedData& seed, double u);

// ---- appendix tensor identities ----

struct IdentityReport {
  double pair_identity_max = 0.0;     // grad(mu.nu) / wedge identity
  double contraction_max = 0.0;       // 1-form contraction identities
  double specialization_max = 0.0;    // mu == nu case
  int trials = 0;
};

IdentityReport tensor_identity_suite(GridPtr grid, int trials = 100,
                                     std::uint64_t seed = 20260810);

// ---- self-similar relation residuals at v = 0 (defining substitutions) ----

struct SelfSimilarReport {
  double trchib_residual = 0.0;  // two assemblies of Om trchib = 2/u + div b
  double omegab_residual = 0.0;  // Om omb + (L_b logOm)/2 + kappa/(2u)
  double shear_residual = 0.0;   // Om hatchib vs S/2
};

SelfSimilarReport self_similar_relations(const RegularTuple& t, double u);

}  // namespace sscd
