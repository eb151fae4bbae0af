#include "sscd/seed.hpp"

#include <cmath>

namespace sscd {

namespace {

// Degree-9 smoothstep: s(0)=0, s(1)=1, with s', s'', s''', s'''' = 0 at both
// ends (so the glued bump is C^4 with polynomial pieces).
double smooth9(double t, int k) {
  static const double c[5] = {126.0, -420.0, 540.0, -315.0, 70.0};  // t^5..t^9
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return k == 0 ? 1.0 : 0.0;
  double out = 0.0;
  for (int j = 0; j < 5; ++j) {
    int p = 5 + j;
    if (p - k < 0) continue;
    double fac = 1.0;
    for (int i = 0; i < k; ++i) fac *= (p - i);
    out += c[j] * fac * std::pow(t, p - k);
  }
  return out;
}

const int kQuadPts = 48;
void gl_cache(ArrayXd& x, ArrayXd& w) {
  static ArrayXd xs, ws;
  if (xs.size() == 0) gauss_legendre(kQuadPts, xs, ws);
  x = xs;
  w = ws;
}

}  // namespace

BumpProfile::BumpProfile(double gamma) : gamma_(gamma) {
  if (!(gamma > 0.0 && gamma <= 0.3))
    throw SeedError("BumpProfile: gamma must lie in (0, 0.3]");
}

double BumpProfile::value(double theta) const { return deriv(theta, 0); }

double BumpProfile::deriv(double theta, int k) const {
  const double g = gamma_;
  // rising transition on [g, 2g], falling on [pi-2g, pi-g]
  if (theta < g || theta > M_PI - g) return 0.0;
  if (theta <= 2 * g) {
    double scale = std::pow(1.0 / g, k);
    return smooth9((theta - g) / g, k) * scale;
  }
  if (theta >= M_PI - 2 * g) {
    double scale = std::pow(-1.0 / g, k);
    return smooth9((M_PI - g - theta) / g, k) * scale * (k == 0 ? 1.0 : 1.0);
  }
  return k == 0 ? 1.0 : 0.0;
}

SeedQuadrature::SeedQuadrature(const BumpProfile& a) : a_(&a) {
  double g = a.gamma();
  brk_ = {0.0, g, 2 * g, M_PI - 2 * g, M_PI - g, M_PI};
  double acc = 0.0;
  for (int i = 0; i < 5; ++i) {
    cum_[i] = acc;
    acc += piece_integral(brk_[i], brk_[i + 1], true);
  }
  total_ = acc;
}

double SeedQuadrature::piece_integral(double lo, double hi, bool a2sin) const {
  if (hi <= lo) return 0.0;
  ArrayXd x, w;
  gl_cache(x, w);
  double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  double s = 0.0;
  for (int i = 0; i < x.size(); ++i) {
    double t = mid + half * x[i];
    double av = a_->value(t);
    s += w[i] * (a2sin ? av * av * std::sin(t) : av / std::sin(t));
  }
  return half * s;
}

double SeedQuadrature::a2sin_cumulative(double theta) const {
  if (theta <= 0.0) return 0.0;
  if (theta >= M_PI) return total_;
  int i = 0;
  while (i < 4 && theta > brk_[i + 1]) ++i;
  return cum_[i] + piece_integral(brk_[i], theta, true);
}

double SeedQuadrature::a_over_sin(double theta) const {
  // int_{pi/2}^theta a/sin; integrand vanishes outside [gamma, pi-gamma]
  double g = a_->gamma();
  double lo = std::min(theta, M_PI / 2), hi = std::max(theta, M_PI / 2);
  lo = std::max(lo, g);
  hi = std::min(hi, M_PI - g);
  if (hi <= lo) return 0.0;
  // split at interior breakpoints for exactness
  double s = 0.0;
  double pts[4] = {lo, std::clamp(2 * a_->gamma(), lo, hi),
                   std::clamp(M_PI - 2 * a_->gamma(), lo, hi), hi};
  for (int i = 0; i < 3; ++i) s += piece_integral(pts[i], pts[i + 1], false);
  return theta >= M_PI / 2 ? s : -s;
}

SeedData::SeedData(double eps, double gam, GridPtr g)
    : epsilon(eps),
      gamma(gam),
      grid(g),
      a(gam),
      quad(a),
      a_field(g),
      b_tilde(g),
      z(g),
      b_check(g),
      div_b_check(g),
      nhat_b_tilde(g),
      nhat_b_check(g) {}

SeedData make_seed(double epsilon, double gamma, double r_const, GridPtr grid,
                   const std::optional<ZSpec>& zspec, double ordering_slack) {
  if (epsilon < 0.0) throw SeedError("make_seed: epsilon must be >= 0");
  if (epsilon > ordering_slack * gamma * gamma * gamma)
    throw SeedError("make_seed: parameter ordering violated (need eps <= gamma^3)");
  if (std::abs(r_const) > std::max(epsilon, 1e-12) * 1.5 && epsilon > 0)
    throw SeedError("make_seed: |r| must be O(eps)");
  SeedData s(epsilon, gamma, grid);
  s.r_const = r_const;
  const SphereGrid& g = *grid;

  ArrayXd aprof(g.n_theta), Bprof(g.n_theta);
  for (int i = 0; i < g.n_theta; ++i) {
    aprof[i] = s.a.value(g.theta[i]);
    Bprof[i] = s.quad.a_over_sin(g.theta[i]) + r_const;
  }
  s.a_field = ScalarField::from_profile(grid, aprof);
  // b_tilde = (B + r) d_phi: dyad components (0, sin * (B + r))
  s.b_tilde.c2.colwise() = (g.sin_t * Bprof);
  // exact: nhat(b_tilde) has 12-component a(theta), 11-component 0
  s.nhat_b_tilde.c2.colwise() = aprof;

  if (zspec && zspec->amplitude != 0.0) {
    // divergence-free: z = *grad(psi) for psi a single (l=m=band) harmonic,
    // scaled so ||z||_{L2} = amplitude.
    int m = zspec->band;
    ScalarField psi(grid);
    ArrayXd prof = ArrayXd::Ones(g.n_theta);
    for (int i = 0; i < m; ++i) prof *= g.sin_t;
    psi.v = prof.matrix() * (m * g.phi).cos().matrix().transpose();
    OneForm gp = grad(psi);
    s.z.c1 = gp.c2;
    s.z.c2 = -gp.c1;
    double nz = l2_norm(s.z);
    if (nz > 0) {
      s.z.c1 *= zspec->amplitude / nz;
      s.z.c2 *= zspec->amplitude / nz;
    }
    ConformalMetric round = ConformalMetric::round(grid);
    ScalarField dz = divergence(s.z, round);
    if (l2_norm(dz) > 1e-10 * (1.0 + l2_norm(s.z)))
      throw SeedError("make_seed: z_spec is not divergence-free");
    s.div_b_check = dz;  // records the (tiny) discrete divergence of z
    SymTF2Field nz2 = nhat_otimes(s.z, round);
    s.nhat_b_check.c1 = epsilon * s.nhat_b_tilde.c1 + nz2.c1;
    s.nhat_b_check.c2 = epsilon * s.nhat_b_tilde.c2 + nz2.c2;
  } else {
    s.nhat_b_check.c1 = epsilon * s.nhat_b_tilde.c1;
    s.nhat_b_check.c2 = epsilon * s.nhat_b_tilde.c2;
  }
  s.b_check.c1 = epsilon * s.b_tilde.c1 + s.z.c1;
  s.b_check.c2 = epsilon * s.b_tilde.c2 + s.z.c2;
  return s;
}

double HProfile::value(double theta) const {
  const SeedQuadrature& q = seed->quad;
  double Ia = integral_a2;
  if (theta <= 0.0 || theta >= M_PI) return 0.0;
  double st = std::sin(theta);
  if (st < 1e-300) return 0.0;
  return (q.a2sin_cumulative(theta) - Ia * (1.0 - std::cos(theta)) / 2.0) / (2.0 * st);
}

double HProfile::sin_h_deriv(double theta, int k) const {
  // sin h = A(theta)/2 - I_a (1-cos)/4; derivatives are analytic:
  // d/dth (sin h) = a^2 sin / 2 - I_a sin / 4, and further derivatives of the
  // right side are closed-form in a and its derivatives.
  const SeedData& s = *seed;
  double Ia = integral_a2;
  double st = std::sin(theta), ct = std::cos(theta);
  switch (k) {
    case 0:
      return s.quad.a2sin_cumulative(theta) / 2.0 - Ia * (1.0 - ct) / 4.0;
    case 1:
      return s.a.value(theta) * s.a.value(theta) * st / 2.0 - Ia * st / 4.0;
    case 2: {
      double a = s.a.value(theta), a1 = s.a.deriv(theta, 1);
      return (2.0 * a * a1 * st + a * a * ct) / 2.0 - Ia * ct / 4.0;
    }
    case 3: {
      double a = s.a.value(theta), a1 = s.a.deriv(theta, 1), a2 = s.a.deriv(theta, 2);
      double d = (2.0 * a1 * a1 + 2.0 * a * a2) * st + 4.0 * a * a1 * ct - a * a * st;
      return d / 2.0 + Ia * st / 4.0;
    }
    default:
      throw SeedError("HProfile::sin_h_deriv: k <= 3 supported");
  }
}

HProfile make_h_profile(const SeedData& seed) {
  HProfile h;
  h.grid = seed.grid;
  h.seed = &seed;
  h.integral_a2 = seed.quad.a2sin_total();
  ArrayXd prof(seed.grid->n_theta);
  HProfile tmp = h;  // for value() we need integral/seed set first
  for (int i = 0; i < seed.grid->n_theta; ++i) prof[i] = h.value(seed.grid->theta[i]);
  h.h = ScalarField::from_profile(seed.grid, prof);
  // interior zero of sin h: A(theta) = I_a (1 - cos)/2, bisect on [gamma, pi-gamma]
  double lo = seed.gamma, hi = M_PI - seed.gamma;
  auto sh = [&](double t) { return h.sin_h_deriv(t, 0); };
  double flo = sh(lo), fhi = sh(hi);
  if (flo == 0.0) {
    h.y0 = lo;
  } else {
    for (int it = 0; it < 200; ++it) {
      double mid = 0.5 * (lo + hi);
      double fm = sh(mid);
      if ((fm < 0) == (flo < 0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
        fhi = fm;
      }
      if (hi - lo < 1e-14) break;
    }
    h.y0 = 0.5 * (lo + hi);
  }
  (void)fhi;
  return h;
}

ScalarField h_divergence_field(const HProfile& h) {
  const SeedData& s = *h.seed;
  ArrayXd prof(s.grid->n_theta);
  for (int i = 0; i < s.grid->n_theta; ++i) {
    double a = s.a.value(s.grid->theta[i]);
    prof[i] = 0.5 * a * a - h.integral_a2 / 4.0;
  }
  return ScalarField::from_profile(s.grid, prof);
}

SymTF2Field nhat_h_dtheta(const HProfile& h) {
  const SeedData& s = *h.seed;
  const SphereGrid& g = *s.grid;
  SymTF2Field out(s.grid);
  ArrayXd prof(g.n_theta);
  for (int i = 0; i < g.n_theta; ++i) {
    double th = g.theta[i];
    double a = s.a.value(th);
    double c = 2.0 * h.value(th) * (std::cos(th) / std::sin(th)) + h.integral_a2 / 4.0 -
               0.5 * a * a;
    prof[i] = -c;  // 11-component; 22 = +c
  }
  out.c1.colwise() = prof;
  return out;
}

}  // namespace sscd
