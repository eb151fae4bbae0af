#include "sscd/chardata.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace sscd {

namespace {

// Monotone cubic (Fritsch-Carlson) interpolation of the chi-hat family in the
// variable s = log(v_bar / v), applied nodewise to the two TF components.
class FamilyInterp {
public:
  FamilyInterp(const EvolutionResult& fam, double v_bar) {
    for (std::size_t k = 0; k < fam.v.size(); ++k) s_.push_back(std::log(v_bar / fam.v[k]));
    vals_ = &fam.f;
    const int K = int(s_.size());
    d1_.resize(K);
    d2_.resize(K);
    auto comp_d = [&](auto get) {
      // secants
      std::vector<ArrayXXd> del(K - 1);
      for (int k = 0; k + 1 < K; ++k)
        del[k] = (get(k + 1) - get(k)) / (s_[k + 1] - s_[k]);
      std::vector<ArrayXXd> d(K);
      d[0] = del[0];
      d[K - 1] = del[K - 2];
      for (int k = 1; k + 1 < K; ++k) {
        // weighted harmonic-mean slope where secants agree in sign, else 0
        ArrayXXd prod = del[k - 1] * del[k];
        double w1 = 2.0 * (s_[k + 1] - s_[k]) + (s_[k] - s_[k - 1]);
        double w2 = (s_[k + 1] - s_[k]) + 2.0 * (s_[k] - s_[k - 1]);
        ArrayXXd hm = (w1 + w2) / (w1 / del[k - 1] + w2 / del[k]);
        d[k] = (prod > 0.0).select(hm, 0.0);
      }
      return d;
    };
    d1_ = comp_d([&](int k) -> const ArrayXXd& { return (*vals_)[k].c1; });
    d2_ = comp_d([&](int k) -> const ArrayXXd& { return (*vals_)[k].c2; });
  }

  void eval(double s, ArrayXXd& c1, ArrayXXd& c2) const {
    const int K = int(s_.size());
    if (s <= s_.front()) {
      c1 = (*vals_).front().c1;
      c2 = (*vals_).front().c2;
      return;
    }
    if (s >= s_.back()) {
      c1 = (*vals_).back().c1;
      c2 = (*vals_).back().c2;
      return;
    }
    int k = int(std::upper_bound(s_.begin(), s_.end(), s) - s_.begin()) - 1;
    double h = s_[k + 1] - s_[k];
    double u = (s - s_[k]) / h;
    double h00 = (1 + 2 * u) * (1 - u) * (1 - u);
    double h10 = u * (1 - u) * (1 - u);
    double h01 = u * u * (3 - 2 * u);
    double h11 = u * u * (u - 1);
    c1 = h00 * (*vals_)[k].c1 + h * h10 * d1_[k] + h01 * (*vals_)[k + 1].c1 +
         h * h11 * d1_[k + 1];
    c2 = h00 * (*vals_)[k].c2 + h * h10 * d2_[k] + h01 * (*vals_)[k + 1].c2 +
         h * h11 * d2_[k + 1];
  }

private:
  std::vector<double> s_;
  const std::vector<SymTF2Field>* vals_;
  std::vector<ArrayXXd> d1_, d2_;
};

}  // namespace

OneForm compute_eta_triangle(const RegularTuple& t, SolverReport* rep) {
  GridPtr gp = t.grid();
  // (-2 - div b) eta - L_b eta = -2 grad(L_b logOm) + div_g(S) - grad(div b)/2
  AffineTransportProblem p;
  p.c = -2.0;
  VectorField mb(gp);
  mb.c1 = -t.b.c1;
  mb.c2 = -t.b.c2;
  p.X = make_advection(mb);
  p.h0 = ScalarField(gp);
  p.h0.v = -t.div_b.v;

  // S = g-lowered nabla-hat-otimes b = e^{2 phi} M; div_g S via the conformal engine
  SymTF2Field S(gp);
  ArrayXXd conf = (2.0 * t.metric.phi.v).exp();
  S.c1 = conf * t.nhat_b.c1;
  S.c2 = conf * t.nhat_b.c2;
  TensorField dS = covd_conformal(as_tensor(S), t.metric.phi);
  OneForm divS(gp);
  ArrayXXd iconf = (-2.0 * t.metric.phi.v).exp();
  // (div S)_a = g^{BC} nab_B S_{Ca} = e^{-2phi} sum_b (dS)_{b,b,a}
  divS.c1 = iconf * (dS.comp(0b000) + dS.comp(0b011));
  divS.c2 = iconf * (dS.comp(0b100) + dS.comp(0b111));

  OneForm G(gp);
  OneForm grad_lie = grad(t.lie_b_logOmega);
  OneForm grad_div = grad(t.div_b);
  G.c1 = -2.0 * grad_lie.c1 + divS.c1 - 0.5 * grad_div.c1;
  G.c2 = -2.0 * grad_lie.c2 + divS.c2 - 0.5 * grad_div.c2;
  return solve_affine_transport(p, G, rep);
}

ScalarField compute_trchi_triangle(const RegularTuple& t, const OneForm& eta_tri,
                                   SolverReport* rep) {
  GridPtr gp = t.grid();
  AffineTransportProblem p;
  p.c = -1.0;
  p.X = make_advection(t.b);
  p.h0 = ScalarField(gp);
  p.h0.v = t.div_b.v - 2.0 * t.kappa + 2.0 * t.lie_b_logOmega.v;

  ScalarField K = gauss_curvature(t.metric);
  // div_g eta
  TensorField de = covd_conformal(as_tensor(eta_tri), t.metric.phi);
  ArrayXXd iconf = (-2.0 * t.metric.phi.v).exp();
  ArrayXXd div_eta = iconf * (de.comp(0b00) + de.comp(0b11));
  ScalarField eta2 = dot(eta_tri, eta_tri, t.metric);

  ScalarField F(gp);
  F.v = -2.0 * K.v + 2.0 * div_eta + 2.0 * eta2.v;
  return solve_affine_transport(p, F, rep);
}

SymTF2Field chihat_rhs(const RegularTuple& t, const OneForm& eta_tri,
                       const ScalarField& trchi_tri) {
  GridPtr gp = t.grid();
  SymTF2Field H = nhat_otimes_oneform(eta_tri, t.metric);
  // eta hat-otimes eta (conformal weights cancel in the dyad)
  H.c1 += eta_tri.c1.square() - eta_tri.c2.square();
  H.c2 += 2.0 * eta_tri.c1 * eta_tri.c2;
  ArrayXXd conf = (2.0 * t.metric.phi.v).exp();
  H.c1 -= 0.5 * trchi_tri.v * conf * t.nhat_b.c1;
  H.c2 -= 0.5 * trchi_tri.v * conf * t.nhat_b.c2;
  return H;
}

namespace {

KappaSingularProblem problem_from_tuple(const RegularTuple& t) {
  KappaSingularProblem p;
  p.co.b = make_advection(t.b);
  p.co.div_b = t.div_b;
  p.co.metric = t.metric;
  p.co.lapse_term = ScalarField(t.grid());
  p.co.lapse_term.v = 2.0 * t.lie_b_logOmega.v;
  p.kappa = t.kappa;
  p.include_lapse_term = true;
  return p;
}

}  // namespace

EvolutionResult compute_chihat_evolution(const RegularTuple& t, const OneForm& eta_tri,
                                         const ScalarField& trchi_tri, double v_bar,
                                         double v_min, double ds) {
  SymTF2Field H = chihat_rhs(t, eta_tri, trchi_tri);
  SymTF2Field zero(t.grid());
  return solve_kappa_singular_evolution(problem_from_tuple(t), H, zero, v_bar, v_min, ds);
}

OutgoingData build_outgoing_data(const RegularTuple& t, const ScalarField& trchi_tri,
                                 const EvolutionResult& family, double v_bar,
                                 double vhat_max, int n_steps, int n_store) {
  GridPtr gp = t.grid();
  const SphereGrid& g = *gp;
  HatVMap map(t.kappa);
  FamilyInterp interp(family, v_bar);

  ArrayXXd Om2 = (2.0 * t.metric.log_lapse.v).exp();
  ArrayXXd Om4 = Om2.square();
  ArrayXXd Om1 = Om2.sqrt();
  ArrayXXd conf0 = (2.0 * t.metric.phi.v).exp();

  struct State {
    ArrayXXd g11, g12, g22, phi, psi;
  };
  State y{conf0, ArrayXXd::Zero(g.n_theta, g.n_phi), conf0, 
          ArrayXXd::Zero(g.n_theta, g.n_phi), 0.5 * Om2 * trchi_tri.v};
  ArrayXXd det0 = y.g11 * y.g22 - y.g12.square();

  ArrayXXd T1(g.n_theta, g.n_phi), T2(g.n_theta, g.n_phi);
  auto rhs = [&](const State& s, double vhat, State& out) {
    double v = vhat <= 0.0 ? 0.0 : map.from_hat(vhat);
    double sv = v <= 0.0 ? 1e300 : std::log(v_bar / v);
    interp.eval(sv, T1, T2);
    ArrayXXd det = s.g11 * s.g22 - s.g12.square();
    ArrayXXd tr = (s.g22 * T1 - 2.0 * s.g12 * T2 - s.g11 * T1) / det;
    ArrayXXd R11 = T1 - 0.5 * tr * s.g11;
    ArrayXXd R12 = T2 - 0.5 * tr * s.g12;
    ArrayXXd R22 = -T1 - 0.5 * tr * s.g22;
    ArrayXXd fac = 2.0 * Om2 * (-2.0 * s.phi).exp();
    out.g11 = fac * R11;
    out.g12 = fac * R12;
    out.g22 = fac * R22;
    out.phi = s.psi;
    ArrayXXd i11 = s.g22 / det, i12 = -s.g12 / det, i22 = s.g11 / det;
    ArrayXXd Ru11 = i11 * R11 + i12 * R12;
    ArrayXXd Ru12 = i11 * R12 + i12 * R22;
    ArrayXXd Ru21 = i12 * R11 + i22 * R12;
    ArrayXXd Ru22 = i12 * R12 + i22 * R22;
    ArrayXXd R2 = Ru11 * Ru11 + 2.0 * Ru12 * Ru21 + Ru22 * Ru22;
    out.psi = -s.psi.square() - 0.5 * Om4 * (-4.0 * s.phi).exp() * R2;
  };

  State k1, k2, k3, k4, tmp;
  auto step = [&](double vh, double h) {
    auto add = [](State& o, const State& a, double c, const State& b) {
      o.g11 = a.g11 + c * b.g11;
      o.g12 = a.g12 + c * b.g12;
      o.g22 = a.g22 + c * b.g22;
      o.phi = a.phi + c * b.phi;
      o.psi = a.psi + c * b.psi;
    };
    rhs(y, vh, k1);
    add(tmp, y, 0.5 * h, k1);
    rhs(tmp, vh + 0.5 * h, k2);
    add(tmp, y, 0.5 * h, k2);
    rhs(tmp, vh + 0.5 * h, k3);
    add(tmp, y, h, k3);
    rhs(tmp, vh + h, k4);
    y.g11 += h / 6.0 * (k1.g11 + 2 * k2.g11 + 2 * k3.g11 + k4.g11);
    y.g12 += h / 6.0 * (k1.g12 + 2 * k2.g12 + 2 * k3.g12 + k4.g12);
    y.g22 += h / 6.0 * (k1.g22 + 2 * k2.g22 + 2 * k3.g22 + k4.g22);
    y.phi += h / 6.0 * (k1.phi + 2 * k2.phi + 2 * k3.phi + k4.phi);
    y.psi += h / 6.0 * (k1.psi + 2 * k2.psi + 2 * k3.psi + k4.psi);
    if (!y.phi.isFinite().all() || !y.psi.isFinite().all())
      throw OutgoingError("build_outgoing_data: conformal factor blow-up", vh + h);
    // project back onto the constant-volume-form normalization of ghat
    ArrayXXd det = y.g11 * y.g22 - y.g12.square();
    ArrayXXd scl = (det0 / det).sqrt();
    y.g11 *= scl;
    y.g12 *= scl;
    y.g22 *= scl;
  };

  // Geometric ladder in vhat (uniform in tau = log vhat): the chi-hat family is
  // smooth in log v but only Hoelder in v / vhat near 0, so residual
  // reconstruction by finite differences must work in tau.  The ladder covers
  // the range where the family is defined, [vhat(v_min), vhat_max].
  const int per_octave = 32;
  double vhat_lo = map.to_hat(family.v.back());
  int n_octaves = std::max(1, int(std::floor(std::log2(vhat_max / vhat_lo))));
  const int K = per_octave * n_octaves + 1;
  const double dtau = std::log(2.0) / per_octave;
  std::vector<double> lad(K);
  for (int k = 0; k < K; ++k) lad[k] = vhat_max * std::exp(-dtau * (K - 1 - k));
  // head segment [0, lad[0]]
  const int head_sub = 8, seg_sub = 4;

  OutgoingData out;
  out.vhat_max = vhat_max;

  // family knot positions in tau = log vhat (the monotone-cubic interpolant is
  // only C^1 there, so finite-difference windows must not straddle them)
  std::vector<double> knot_tau;
  for (double vk : family.v) {
    double sk = std::log(v_bar / vk);
    knot_tau.push_back((1.0 - 2.0 * t.kappa) * (std::log(v_bar) - sk) -
                       std::log(1.0 - 2.0 * t.kappa));
  }
  auto window_clean = [&](double tau_c) {
    for (double tk : knot_tau)
      if (std::abs(tk - tau_c) < 3.5 * dtau) return false;
    return true;
  };

  // sliding-window residual evaluation over the tau-uniform ladder
  std::vector<State> win;
  std::vector<double> win_vhat;
  double rray = 0.0, rode = 0.0;
  auto d_tau = [&](auto get, int c) {
    // 6th-order centered derivative w.r.t. tau at window position c
    return ArrayXXd((-get(c - 3) + 9.0 * get(c - 2) - 45.0 * get(c - 1) +
                     45.0 * get(c + 1) - 9.0 * get(c + 2) + get(c + 3)) /
                    (60.0 * dtau));
  };
  auto eval_resid = [&](int c) {
    // reconstruct trchi, hatchi from gout = e^{2 phi} ghat at window center
    auto gout = [&](int i, int comp) -> ArrayXXd {
      const State& s = win[i];
      ArrayXXd e2 = (2.0 * s.phi).exp();
      if (comp == 0) return ArrayXXd(e2 * s.g11);
      if (comp == 1) return ArrayXXd(e2 * s.g12);
      return ArrayXXd(e2 * s.g22);
    };
    double vh = win_vhat[c];
    // d/dvhat = (1/vhat) d/dtau
    ArrayXXd d11 = d_tau([&](int i) { return gout(i, 0); }, c) / vh;
    ArrayXXd d12 = d_tau([&](int i) { return gout(i, 1); }, c) / vh;
    ArrayXXd d22 = d_tau([&](int i) { return gout(i, 2); }, c) / vh;
    ArrayXXd o11 = gout(c, 0), o12 = gout(c, 1), o22 = gout(c, 2);
    ArrayXXd det = o11 * o22 - o12.square();
    ArrayXXd i11 = o22 / det, i12 = -o12 / det, i22 = o11 / det;
    ArrayXXd trchi = 0.5 * (i11 * d11 + 2.0 * i12 * d12 + i22 * d22) / Om1;
    ArrayXXd h11 = 0.5 * (d11 / Om1 - trchi * o11);
    ArrayXXd h12 = 0.5 * (d12 / Om1 - trchi * o12);
    ArrayXXd h22 = 0.5 * (d22 / Om1 - trchi * o22);
    ArrayXXd hu11 = i11 * h11 + i12 * h12, hu12 = i11 * h12 + i12 * h22;
    ArrayXXd hu21 = i12 * h11 + i22 * h12, hu22 = i12 * h12 + i22 * h22;
    ArrayXXd h2 = hu11 * hu11 + 2.0 * hu12 * hu21 + hu22 * hu22;
    // d trchi / dvhat via the psi-route: trchi = 2 psi / Om1:
    // use FD of psi in tau for the independent reconstruction
    ArrayXXd dpsi = d_tau([&](int i) -> ArrayXXd { return win[i].psi; }, c) / vh;
    ArrayXXd dtr = 2.0 * dpsi / Om1;
    ArrayXXd res = dtr / Om1 + 0.5 * trchi.square() + h2;
    double rb = res.abs().maxCoeff();
    if (rb > rray && std::getenv("SSCD_DEBUG_RESID"))
      std::fprintf(stderr, "ray resid %.3e at vhat=%.6e\n", rb, vh);
    rray = std::max(rray, rb);
    // phi-ODE residual: dpsi + psi^2 + (Om^4/2) e^{-4 phi} |R_tf|^2_ghat = 0
    double v = map.from_hat(vh);
    interp.eval(std::log(v_bar / v), T1, T2);
    const State& s = win[c];
    ArrayXXd deth = s.g11 * s.g22 - s.g12.square();
    ArrayXXd trT = (s.g22 * T1 - 2.0 * s.g12 * T2 - s.g11 * T1) / deth;
    ArrayXXd R11 = T1 - 0.5 * trT * s.g11;
    ArrayXXd R12 = T2 - 0.5 * trT * s.g12;
    ArrayXXd R22 = -T1 - 0.5 * trT * s.g22;
    ArrayXXd j11 = s.g22 / deth, j12 = -s.g12 / deth, j22 = s.g11 / deth;
    ArrayXXd Ru11 = j11 * R11 + j12 * R12, Ru12 = j11 * R12 + j12 * R22;
    ArrayXXd Ru21 = j12 * R11 + j22 * R12, Ru22 = j12 * R12 + j22 * R22;
    ArrayXXd R2 = Ru11 * Ru11 + 2.0 * Ru12 * Ru21 + Ru22 * Ru22;
    ArrayXXd rode_f = dpsi + s.psi.square() + 0.5 * Om4 * (-4.0 * s.phi).exp() * R2;
    double rr = rode_f.abs().maxCoeff();
    if (rr > rode) {
      rode = rr;
      if (std::getenv("SSCD_DEBUG_RESID"))
        std::fprintf(stderr, "ode resid %.3e at vhat=%.6e (res ray %.3e)\n", rr, vh,
                     res.abs().maxCoeff());
    }
  };

  // integrate head segment with uniform substeps
  {
    double h = lad[0] / head_sub;
    for (int k = 0; k < head_sub; ++k) step(k * h, h);
  }
  win.push_back(y);
  win_vhat.push_back(lad[0]);
  for (int j = 1; j < K; ++j) {
    double seg = lad[j] - lad[j - 1];
    double h = seg / seg_sub;
    for (int k = 0; k < seg_sub; ++k) step(lad[j - 1] + k * h, h);
    win.push_back(y);
    win_vhat.push_back(lad[j]);
    if (int(win.size()) > 7) {
      win.erase(win.begin());
      win_vhat.erase(win_vhat.begin());
    }
    // evaluate where the vhat-FD is well conditioned (values of psi are O(1),
    // so below ~1e-3 vhat_max the stencil runs out of mantissa; the
    // step-halving check below covers the full range instead)
    if (int(win.size()) == 7 && win_vhat[3] >= 1e-3 * vhat_max &&
        window_clean(std::log(win_vhat[3])))
      eval_resid(3);
    // store a coarse subladder for output
    if (j % per_octave == 0 || j == K - 1) {
      out.vhat.push_back(lad[j]);
      out.ghat.push_back(Sym2Sample{y.g11, y.g12, y.g22});
      out.phi.push_back(y.phi);
      out.dphi.push_back(y.psi);
    }
  }
  out.ray_residual = rray;
  out.ode_residual = rode;

  // full-range integration check: repeat with halved steps and compare at the
  // stored ladder points
  {
    State y_fine{conf0, ArrayXXd::Zero(g.n_theta, g.n_phi), conf0,
                 ArrayXXd::Zero(g.n_theta, g.n_phi), 0.5 * Om2 * trchi_tri.v};
    std::swap(y, y_fine);
    double h = lad[0] / (2 * head_sub);
    for (int k = 0; k < 2 * head_sub; ++k) step(k * h, h);
    std::size_t idx = 0;
    double ierr = 0.0;
    for (int j = 1; j < K; ++j) {
      double seg = lad[j] - lad[j - 1];
      double hh = seg / (2 * seg_sub);
      for (int k = 0; k < 2 * seg_sub; ++k) step(lad[j - 1] + k * hh, hh);
      if ((j % per_octave == 0 || j == K - 1) && idx < out.ghat.size()) {
        ierr = std::max(ierr, sup_norm(y.phi - out.phi[idx]));
        ierr = std::max(ierr, sup_norm(y.psi - out.dphi[idx]));
        ierr = std::max(ierr, sup_norm(y.g11 - out.ghat[idx].g11));
        ++idx;
      }
    }
    out.integration_error = ierr;
    std::swap(y, y_fine);
  }

  double drift = 0.0;
  for (const auto& smp : out.ghat) {
    ArrayXXd det = smp.g11 * smp.g22 - smp.g12.square();
    drift = std::max(drift, ((det - det0) / det0).abs().maxCoeff());
  }
  out.volume_form_drift = drift;
  (void)n_steps;
  (void)n_store;
  return out;
}

CharDataBundle build_chardata(const RegularTuple& t, double v_bar, double v_min,
                              double ds) {
  CharDataBundle b;
  b.v_bar = v_bar;
  b.kappa = t.kappa;
  b.eta_tri = compute_eta_triangle(t);
  b.trchi_tri = compute_trchi_triangle(t, b.eta_tri);
  b.chihat = compute_chihat_evolution(t, b.eta_tri, b.trchi_tri, v_bar, v_min, ds);
  HatVMap map(t.kappa);
  b.outgoing = build_outgoing_data(t, b.trchi_tri, b.chihat, v_bar, map.to_hat(v_bar));
  return b;
}

}  // namespace sscd
