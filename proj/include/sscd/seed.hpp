#pragma once

#include <array>
#include <optional>

#include "sscd/calculus.hpp"
#include "sscd/field.hpp"

namespace sscd {

// Analytic bump profile: a(theta) is 0 on [0,gamma] u [pi-gamma,pi], 1 on
// [2 gamma, pi-2 gamma], with C^4 polynomial transitions (degree-9 smoothstep,
// four vanishing derivatives at the joins) so that |a^(k)| <= C_k gamma^{-k}
// for k <= 4.
class BumpProfile {
public:
  explicit BumpProfile(double gamma);
  double gamma() const { return gamma_; }
  double value(double theta) const;
  double deriv(double theta, int k) const;  // k = 0..4, analytic
private:
  double gamma_;
};

// Accurate quadratures of the seed profile (composite Gauss-Legendre on the
// analytic pieces; exact to roundoff since the integrands are piecewise smooth).
class SeedQuadrature {
public:
  explicit SeedQuadrature(const BumpProfile& a);
  // A(theta) = int_0^theta a^2(x) sin(x) dx
  double a2sin_cumulative(double theta) const;
  // I_a = int_0^pi a^2 sin dtheta
  double a2sin_total() const { return total_; }
  // B(theta) = int_{pi/2}^theta a(x)/sin(x) dx
  double a_over_sin(double theta) const;

private:
  const BumpProfile* a_;
  std::array<double, 6> brk_;
  std::array<double, 5> cum_;
  double total_;
  double piece_integral(double lo, double hi, bool a2sin) const;
};

struct ZSpec {
  // Optional divergence-free perturbation: amplitude * curl-type field of a
  // single (l=band, m=band) harmonic; divergence-free by construction.
  double amplitude = 0.0;
  int band = 2;
};

struct SeedData {
  double epsilon = 0.0;
  double gamma = 0.0;
  double r_const = 0.0;
  GridPtr grid;

  BumpProfile a;
  SeedQuadrature quad;

  ScalarField a_field;       // a(theta) samples
  VectorField b_tilde;       // azimuthal profile field (B(theta)+r) d_phi
  VectorField z;             // divergence-free perturbation (may be zero)
  VectorField b_check;       // eps * b_tilde + z

  // Analytic first-order data of the seed (exact where closed forms exist):
  ScalarField div_b_check;           // = div z (b_tilde is divergence-free)
  SymTF2Field nhat_b_tilde;          // exactly a(theta) in the 12-slot
  SymTF2Field nhat_b_check;          // eps * that + spectral z part

  SeedData(double eps, double gam, GridPtr g);
};

struct SeedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Construct a seed; enforces the parameter ordering eps <= slack * gamma^3
// (the default slack admits the reference point eps = 1e-2, gamma = 0.1).
SeedData make_seed(double epsilon, double gamma, double r_const, GridPtr grid,
                   const std::optional<ZSpec>& z = std::nullopt,
                   double ordering_slack = 10.0);

struct HProfile {
  GridPtr grid;
  ScalarField h;          // samples
  double y0 = 0.0;        // interior zero
  double integral_a2 = 0.0;

  // analytic evaluations
  double value(double theta) const;
  double sin_h_deriv(double theta, int k) const;  // d^k/dtheta^k (sin h), k<=3 via FD of closed form pieces

  const SeedData* seed = nullptr;
};

HProfile make_h_profile(const SeedData& seed);

// h-related analytic fields used by the constraint construction:
// the exact divergence profile  (1/sin) d/dtheta (sin h) = a^2/2 - I_a/4
ScalarField h_divergence_field(const HProfile& h);
// canonical nhat_otimes(h d_theta): 11-component -(2 h cot + I_a/4 - a^2/2)
SymTF2Field nhat_h_dtheta(const HProfile& h);

}  // namespace sscd
