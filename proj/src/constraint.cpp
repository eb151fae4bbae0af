#include "sscd/constraint.hpp"

#include <cmath>

#include "sscd/modes.hpp"

namespace sscd {

namespace {

// Poisson solve Lap_round f = rhs with mean-zero f; rhs must have zero mean.
ScalarField poisson_round(const ScalarField& rhs) {
  const SphereGrid& g = rhs.grid();
  const int n = g.n_theta, nm = g.n_modes();
  MatrixXcd rm = to_modes(g, rhs.v);
  MatrixXcd um(n, nm);
  for (int m = 0; m < nm; ++m) {
    int s0 = m & 1;             // parity of scalar mode m
    int s1 = (m + 1) & 1;       // parity after one derivative
    MatrixXcd lap = (g.Dt[s1] * g.Dt[s0]).cast<std::complex<double>>();
    lap += (g.cot_t.matrix().asDiagonal() * g.Dt[s0]).cast<std::complex<double>>();
    if (m > 0) {
      ArrayXd msq = -double(m) * double(m) / (g.sin_t * g.sin_t);
      lap += MatrixXcd(msq.cast<std::complex<double>>().matrix().asDiagonal());
      um.col(m) = lap.partialPivLu().solve(rm.col(m).eval());
    } else {
      // bordered system pins the mean to zero
      MatrixXcd sys = MatrixXcd::Zero(n + 1, n + 1);
      sys.topLeftCorner(n, n) = lap;
      sys.block(0, n, n, 1).setOnes();
      sys.block(n, 0, 1, n) = g.w.cast<std::complex<double>>().matrix().transpose();
      Eigen::VectorXcd rhsv(n + 1);
      rhsv.head(n) = rm.col(0);
      rhsv[n] = 0.0;
      um.col(0) = sys.partialPivLu().solve(rhsv).head(n);
    }
  }
  return ScalarField(rhs.grid_ptr(), from_modes(g, um));
}

ArrayXd h_samples(const HProfile& h) { return h.h.v.col(0); }

}  // namespace

RegularTuple picard_regular_tuple(const SeedData& seed, const HProfile& h,
                                  double tol, int max_iter) {
  GridPtr gp = seed.grid;
  const SphereGrid& g = *gp;
  const double eps = seed.epsilon;

  RegularTuple t;
  t.metric = ConformalMetric::round(gp);
  t.b = VectorField(gp);
  t.f_potential = ScalarField(gp);
  t.div_b = ScalarField(gp);
  t.nhat_b = SymTF2Field(gp);
  t.e_correction = VectorField(gp);
  t.lie_b_logOmega = ScalarField(gp);
  t.ia_exact = seed.quad.a2sin_total();
  t.ia_grid = g.integrate_profile(seed.a_field.v.col(0) * seed.a_field.v.col(0));

  // analytic profile P = a^2/2 - Ia_grid/4 (exactly zero grid mean)
  ArrayXd P = 0.5 * seed.a_field.v.col(0) * seed.a_field.v.col(0) - t.ia_grid / 4.0;
  SymTF2Field nhat_h = nhat_h_dtheta(h);

  ScalarField D(gp);
  double kappa = 0.0;
  ScalarField f3(gp);
  VectorField e(gp);
  SymTF2Field M = seed.nhat_b_check;  // M(b_0) with f_0 = 0
  VectorField b = seed.b_check;

  ConformalMetric round = ConformalMetric::round(gp);
  ScalarField one = ScalarField::constant(gp, 1.0);

  int it = 0;
  double change = 0.0;
  for (it = 1; it <= max_iter; ++it) {
    // D - L_b D = rhs, solved as c u + L_X u = rhs with X = -b (the advection
    // enters the constraint with a minus sign)
    AffineTransportProblem pr;
    pr.c = 1.0;
    VectorField mb(gp);
    mb.c1 = -b.c1;
    mb.c2 = -b.c2;
    pr.X = make_advection(mb);
    pr.h0 = ScalarField(gp);
    ScalarField rhs0(gp);
    rhs0.v = 0.5 * D.v.square() + 0.5 * (M.c1.square() + M.c2.square()) +
             2.0 * kappa * D.v;
    ScalarField D0, w;
    try {
      D0 = solve_affine_transport(pr, rhs0);
      ScalarField neg4 = ScalarField::constant(gp, -4.0);
      w = solve_affine_transport(pr, neg4);
    } catch (const TransportError& err) {
      throw ConstraintError("picard_regular_tuple: transport solve failed at iterate " +
                            std::to_string(it) + ": " + err.what());
    }
    double i0 = integrate_round(D0);
    double iw = integrate_round(w);
    t.affine_slope = iw / (4.0 * M_PI);
    double kap_new = -i0 / iw;
    ScalarField Dn(gp);
    Dn.v = D0.v + kap_new * w.v;

    // split off the analytic leading profile and rebuild the correction
    ScalarField D3(gp);
    D3.v = Dn.v;
    D3.v.colwise() -= eps * eps * P;
    f3 = poisson_round(D3);
    OneForm gf3 = grad(f3);
    e.c1 = gf3.c1;
    e.c2 = gf3.c2;

    ScalarField diff(gp);
    diff.v = Dn.v - D.v;
    change = sobolev_norm(diff, 2);
    D = Dn;
    kappa = kap_new;

    // b_i = b_check + eps^2 h d_theta + e ;  M likewise with analytic pieces
    b.c1 = seed.b_check.c1 + e.c1;
    b.c1.colwise() += eps * eps * h_samples(h);
    b.c2 = seed.b_check.c2 + e.c2;
    SymTF2Field Me = nhat_otimes(e, round);
    M.c1 = seed.nhat_b_check.c1 + eps * eps * nhat_h.c1 + Me.c1;
    M.c2 = seed.nhat_b_check.c2 + eps * eps * nhat_h.c2 + Me.c2;

    t.iteration_trace.push_back(change);
    if (change <= tol && it >= 2) {
      t.converged = true;
      break;
    }
  }

  t.b = b;
  t.kappa = kappa;
  t.div_b = D;
  t.nhat_b = M;
  t.e_correction = e;
  // f = eps^2 f_h + f3 with f_h' = h; accumulate f_h by quadrature of h
  {
    ArrayXd fh(g.n_theta);
    double acc = 0.0;
    double prev = 0.0;
    ArrayXd xs, ws;
    gauss_legendre(24, xs, ws);
    for (int i = 0; i < g.n_theta; ++i) {
      double lo = prev, hi = g.theta[i];
      double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
      double s = 0.0;
      for (int k = 0; k < xs.size(); ++k) s += ws[k] * h.value(mid + half * xs[k]);
      acc += half * s;
      fh[i] = acc;
      prev = hi;
    }
    ScalarField fhf = ScalarField::from_profile(gp, fh);
    double mean = integrate_round(fhf) / (4.0 * M_PI);
    t.f_potential.v = eps * eps * (fhf.v - mean) + f3.v;
  }

  ConstraintReport rep = verify_kappa_constraint(t);
  t.residual = rep.l2_residual;
  return t;
}

namespace {

// residual of the kappa-constraint in the form (rayconstr):
// D - L_b D - D^2/2 - |M|^2/4 + 4k - 2kD + 2 (L_b logOm) D - 4 L_b logOm
ScalarField rayconstr_residual(const RegularTuple& t) {
  GridPtr gp = t.grid();
  ScalarField out(gp);
  ScalarField lbD = lie(t.b, t.div_b);
  ArrayXXd m2 = 0.5 * (t.nhat_b.c1.square() + t.nhat_b.c2.square());
  out.v = t.div_b.v - lbD.v - 0.5 * t.div_b.v.square() - m2 + 4.0 * t.kappa -
          2.0 * t.kappa * t.div_b.v + 2.0 * t.lie_b_logOmega.v * t.div_b.v -
          4.0 * t.lie_b_logOmega.v;
  return out;
}

// residual of the e3-Raychaudhuri restriction at (u, v) = (-1, 0):
// (d_u + L_b)(Om trchib) + (Om trchib)^2/2 + |Om hatchib|^2 + 4 (Om omb)(Om trchib)
// with the v=0 substitutions  Om trchib = -2 + D,  Om hatchib = S/2,
// Om omb = kappa/2 - (L_b logOm)/2,  d_u(Om trchib)|_{u=-1} = D - 2.
ScalarField raychaudhuri_residual_v0(const RegularTuple& t) {
  GridPtr gp = t.grid();
  ScalarField trchib(gp);
  trchib.v = t.div_b.v - 2.0;
  ScalarField lb = lie(t.b, trchib);
  ArrayXXd shear2 = 0.25 * 2.0 * (t.nhat_b.c1.square() + t.nhat_b.c2.square());
  ArrayXXd omb = 0.5 * t.kappa - 0.5 * t.lie_b_logOmega.v;
  ScalarField out(gp);
  out.v = (t.div_b.v - 2.0) + lb.v + 0.5 * trchib.v.square() + shear2 +
          4.0 * omb * trchib.v;
  return out;
}

}  // namespace

ConstraintReport verify_kappa_constraint(const RegularTuple& t) {
  ConstraintReport rep;
  ScalarField r1 = rayconstr_residual(t);
  ScalarField r2 = raychaudhuri_residual_v0(t);
  rep.l2_residual = l2_norm(r1);
  rep.sup_residual = sup_norm(r1.v);
  rep.alt_l2_residual = l2_norm(r2);
  ScalarField sum(t.grid());
  sum.v = r1.v + r2.v;  // the two forms are algebraic negations of each other
  rep.agreement = l2_norm(sum);
  return rep;
}

AsymptoticReport asymptotic_diagnostics(const RegularTuple& t, const SeedData& seed,
                                        const HProfile& h) {
  AsymptoticReport r;
  const SphereGrid& g = *t.grid();
  const double eps = seed.epsilon;
  r.kappa = t.kappa;
  r.kappa_prediction = eps * eps / 16.0 * t.ia_grid;
  r.kappa_deviation = std::abs(t.kappa - r.kappa_prediction);

  ArrayXd P = 0.5 * seed.a_field.v.col(0) * seed.a_field.v.col(0) - t.ia_grid / 4.0;
  ArrayXXd dev = t.div_b.v;
  dev.colwise() -= eps * eps * P;
  r.divb_profile_sup_dev = dev.abs().maxCoeff();

  r.divb_max = t.div_b.v.maxCoeff();
  double bound = seed.gamma * seed.gamma * eps * eps + std::pow(eps, 2.5);
  r.divb_lower_bound_margin = bound - r.divb_max;

  r.e_h3 = sobolev_norm(t.e_correction, 3, /*homogeneous=*/true);

  ConformalMetric round = ConformalMetric::round(t.grid());
  ScalarField div_spec = divergence(t.b, t.metric);
  ScalarField diff(t.grid());
  diff.v = div_spec.v - t.div_b.v;
  r.div_consistency = l2_norm(diff);
  (void)round;
  (void)h;
  return r;
}

RegularTuple assemble_external_tuple(const ConformalMetric& m, const VectorField& b,
                                     double kappa) {
  RegularTuple t;
  t.metric = m;
  t.b = b;
  t.kappa = kappa;
  t.div_b = divergence(b, m);
  t.nhat_b = nhat_otimes(b, m);
  t.e_correction = VectorField(m.grid_ptr());
  t.f_potential = ScalarField(m.grid_ptr());
  t.lie_b_logOmega = lie(b, m.log_lapse);
  t.converged = true;
  return t;
}

}  // namespace sscd
