#include "sscd/calculus.hpp"

#include <cmath>
#include <random>

#include "sscd/modes.hpp"

namespace sscd {

namespace {

// slot j of a rank-k multi-index (position 0 = first index)
inline int slot(int idx, int j) { return (idx >> j) & 1; }
inline int with_slot(int idx, int j, int v) {
  return (idx & ~(1 << j)) | (v << j);
}

}  // namespace

TensorField as_tensor(const ScalarField& f) {
  TensorField t(f.grid_ptr(), 0);
  t.comp(0) = f.v;
  return t;
}

TensorField as_tensor(const PairField& f) {
  TensorField t(f.grid_ptr(), 1);
  t.comp(0) = f.c1;
  t.comp(1) = f.c2;
  return t;
}

TensorField as_tensor(const SymTF2Field& f) {
  TensorField t(f.grid_ptr(), 2);
  t.comp(0) = f.c1;         // 11
  t.comp(1) = f.c2;         // 21
  t.comp(2) = f.c2;         // 12
  t.comp(3) = -f.c1;        // 22
  return t;
}

TensorField covd_round(const TensorField& t) {
  const SphereGrid& g = t.grid();
  const int k = t.rank();
  TensorField out(t.grid_ptr(), k + 1);
  const ArrayXd& cot = g.cot_t;
  for (int idx = 0; idx < t.n_comps(); ++idx) {
    // a = e1 row: plain theta derivative
    out.comp((idx << 1) | 0) = dtheta(g, t.comp(idx), k);
    // a = e2 row: (1/sin) dphi + connection terms
    ArrayXXd v = dphi_over_sin(g, t.comp(idx));
    for (int j = 0; j < k; ++j) {
      if (slot(idx, j) == 0)
        v -= t.comp(with_slot(idx, j, 1)).colwise() * cot;
      else
        v += t.comp(with_slot(idx, j, 0)).colwise() * cot;
    }
    out.comp((idx << 1) | 1) = v;
  }
  return out;
}

TensorField covd_conformal(const TensorField& t, const ScalarField& phi) {
  TensorField out = covd_round(t);
  if ((phi.v == 0.0).all()) return out;
  const SphereGrid& g = t.grid();
  const int k = t.rank();
  OneForm p = grad(phi);
  const ArrayXXd* pc[2] = {&p.c1, &p.c2};
  for (int a = 0; a < 2; ++a) {
    for (int idx = 0; idx < t.n_comps(); ++idx) {
      ArrayXXd corr = ArrayXXd::Zero(g.n_theta, g.n_phi);
      for (int j = 0; j < k; ++j) {
        int i = slot(idx, j);
        corr += *pc[i] * t.comp(with_slot(idx, j, a));
        corr += *pc[a] * t.comp(idx);
        if (a == i)
          corr -= (*pc[0]) * t.comp(with_slot(idx, j, 0)) +
                  (*pc[1]) * t.comp(with_slot(idx, j, 1));
      }
      out.comp((idx << 1) | a) -= corr;
    }
  }
  return out;
}

OneForm grad(const ScalarField& f) {
  const SphereGrid& g = f.grid();
  OneForm w(f.grid_ptr());
  w.c1 = dtheta(g, f.v, 0);
  w.c2 = dphi_over_sin(g, f.v);
  return w;
}

double mean_zero_check(const ScalarField& f) {
  return f.grid().integrate(f.v) / (4.0 * M_PI);
}

ScalarField divergence(const VectorField& X, const ConformalMetric& m) {
  require_same_grid(X.grid(), m.grid(), "divergence");
  TensorField d = covd_round(as_tensor(X));
  ScalarField out(X.grid_ptr());
  out.v = d.comp(0b00) + d.comp(0b11);
  if (!m.is_round()) out.v += 2.0 * lie(X, m.phi).v;
  return out;
}

ScalarField curl(const OneForm& w, const ConformalMetric& m) {
  require_same_grid(w.grid(), m.grid(), "curl");
  TensorField d = covd_round(as_tensor(w));
  ScalarField out(w.grid_ptr());
  // eps^{AB} nab_A w_B, round part; conformal inverse volume factor
  out.v = d.comp(0b10) - d.comp(0b01);  // (nab w)_{1,2} - (nab w)_{2,1}
  if (!m.is_round()) out.v *= (-2.0 * m.phi.v).exp();
  return out;
}

SymTF2Field nhat_otimes(const VectorField& X, const ConformalMetric& m) {
  require_same_grid(X.grid(), m.grid(), "nhat_otimes");
  TensorField d = covd_round(as_tensor(X));
  SymTF2Field out(X.grid_ptr());
  out.c1 = d.comp(0b00) - d.comp(0b11);
  out.c2 = d.comp(0b10) + d.comp(0b01);
  return out;
}

SymTF2Field nhat_otimes_oneform(const OneForm& psi, const ConformalMetric& m) {
  require_same_grid(psi.grid(), m.grid(), "nhat_otimes_oneform");
  TensorField d = covd_conformal(as_tensor(psi), m.phi);
  SymTF2Field out(psi.grid_ptr());
  out.c1 = d.comp(0b00) - d.comp(0b11);
  out.c2 = d.comp(0b10) + d.comp(0b01);
  return out;
}

ScalarField lie(const VectorField& X, const ScalarField& f) {
  require_same_grid(X.grid(), f.grid(), "lie");
  const SphereGrid& g = f.grid();
  ScalarField out(f.grid_ptr());
  out.v = X.c1 * dtheta(g, f.v, 0) + X.c2 * dphi_over_sin(g, f.v);
  return out;
}

OneForm lie(const VectorField& X, const OneForm& w) {
  require_same_grid(X.grid(), w.grid(), "lie");
  TensorField dw = covd_round(as_tensor(w));
  TensorField dX = covd_round(as_tensor(X));
  OneForm out(w.grid_ptr());
  out.c1 = X.c1 * dw.comp(0b00) + X.c2 * dw.comp(0b01)  // X^b (nab w)_{b,1}
           + w.c1 * dX.comp(0b00) + w.c2 * dX.comp(0b10);
  out.c2 = X.c1 * dw.comp(0b10) + X.c2 * dw.comp(0b11)
           + w.c1 * dX.comp(0b01) + w.c2 * dX.comp(0b11);
  return out;
}

TensorField lie(const VectorField& X, const SymTF2Field& f) {
  require_same_grid(X.grid(), f.grid(), "lie");
  TensorField tf = as_tensor(f);
  TensorField df = covd_round(tf);
  TensorField dX = covd_round(as_tensor(X));
  TensorField out(f.grid_ptr(), 2);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      int ab = a | (b << 1);
      ArrayXXd v = X.c1 * df.comp((ab << 1) | 0) + X.c2 * df.comp((ab << 1) | 1);
      for (int c = 0; c < 2; ++c) {
        v += tf.comp(c | (b << 1)) * dX.comp((c << 1) | a);
        v += tf.comp(a | (c << 1)) * dX.comp((c << 1) | b);
      }
      out.comp(ab) = v;
    }
  return out;
}

SymTF2Field lie_tf(const VectorField& X, const SymTF2Field& f) {
  TensorField t = lie(X, f);
  SymTF2Field out(f.grid_ptr());
  out.c1 = 0.5 * (t.comp(0b00) - t.comp(0b11));
  out.c2 = 0.5 * (t.comp(0b01) + t.comp(0b10));
  return out;
}

ScalarField laplacian_round(const ScalarField& f) {
  TensorField d2 = covd_round(covd_round(as_tensor(f)));
  ScalarField out(f.grid_ptr());
  out.v = d2.comp(0b00) + d2.comp(0b11);
  return out;
}

ScalarField gauss_curvature(const ConformalMetric& m) {
  ScalarField out(m.grid_ptr());
  out.v = (1.0 - laplacian_round(m.phi).v) * (-2.0 * m.phi.v).exp();
  return out;
}

double integrate(const ScalarField& f, const ConformalMetric& m) {
  require_same_grid(f.grid(), m.grid(), "integrate");
  if (m.is_round()) return f.grid().integrate(f.v);
  return f.grid().integrate(f.v * (2.0 * m.phi.v).exp());
}

double integrate_round(const ScalarField& f) { return f.grid().integrate(f.v); }

double area(const ConformalMetric& m) {
  return m.grid().integrate((2.0 * m.phi.v).exp());
}

ScalarField dot(const OneForm& a, const OneForm& b, const ConformalMetric& m) {
  ScalarField out(a.grid_ptr());
  out.v = a.c1 * b.c1 + a.c2 * b.c2;
  if (!m.is_round()) out.v *= (-2.0 * m.phi.v).exp();
  return out;
}

ScalarField dot(const SymTF2Field& a, const SymTF2Field& b, const ConformalMetric& m) {
  ScalarField out(a.grid_ptr());
  out.v = 2.0 * (a.c1 * b.c1 + a.c2 * b.c2);
  if (!m.is_round()) out.v *= (-4.0 * m.phi.v).exp();
  return out;
}

double l2_pair(const SymTF2Field& a, const SymTF2Field& b, const ConformalMetric& m) {
  ArrayXXd v = 2.0 * (a.c1 * b.c1 + a.c2 * b.c2);
  if (!m.is_round()) v *= (-2.0 * m.phi.v).exp();
  return a.grid().integrate(v);
}

double l2_norm(const TensorField& t) {
  ArrayXXd s = ArrayXXd::Zero(t.grid().n_theta, t.grid().n_phi);
  for (int i = 0; i < t.n_comps(); ++i) s += t.comp(i).square();
  return std::sqrt(t.grid().integrate(s));
}

double l2_norm(const ScalarField& f) { return std::sqrt(f.grid().integrate(f.v.square())); }

double l2_norm(const PairField& f) {
  return std::sqrt(f.grid().integrate(f.c1.square() + f.c2.square()));
}

double sobolev_norm(const TensorField& t, int order, bool homogeneous) {
  if (order < 0 || order > 6)
    throw std::invalid_argument("sobolev_norm: order out of supported range");
  double total = 0.0;
  TensorField cur = t;
  for (int i = 0; i <= order; ++i) {
    if (i > 0) cur = covd_round(cur);
    if (!homogeneous || i == order) total += l2_norm(cur);
  }
  return total;
}

double sobolev_norm(const ScalarField& f, int order, bool homogeneous) {
  return sobolev_norm(as_tensor(f), order, homogeneous);
}

double sobolev_norm(const PairField& f, int order, bool homogeneous) {
  return sobolev_norm(as_tensor(f), order, homogeneous);
}

double sup_norm(const ArrayXXd& a) { return a.abs().maxCoeff(); }

namespace {

double unit_uniform(std::mt19937_64& rng) {
  return double(rng() >> 11) * 0x1p-53;
}

ScalarField random_scalar_impl(GridPtr g, int bandlimit, std::mt19937_64& rng) {
  ScalarField f(g);
  const SphereGrid& gr = *g;
  for (int m = 0; m <= std::min(bandlimit, gr.n_modes() - 2); ++m) {
    int maxdeg = bandlimit - m;
    ArrayXd prof = ArrayXd::Zero(gr.n_theta);
    ArrayXd xp = ArrayXd::Ones(gr.n_theta);
    for (int d = 0; d <= maxdeg; ++d) {
      prof += (2.0 * unit_uniform(rng) - 1.0) * xp;
      xp *= gr.x;
    }
    for (int i = 0; i < m; ++i) prof *= gr.sin_t;
    double ca = 2.0 * unit_uniform(rng) - 1.0;
    double cb = (m == 0) ? 0.0 : 2.0 * unit_uniform(rng) - 1.0;
    ArrayXd az = ca * (m * gr.phi).cos() + cb * (m * gr.phi).sin();
    f.v += (prof.matrix() * az.matrix().transpose()).array();
  }
  return f;
}

}  // namespace

ScalarField random_scalar(GridPtr g, int bandlimit, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return random_scalar_impl(g, bandlimit, rng);
}

OneForm random_oneform(GridPtr g, int bandlimit, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  ScalarField s1 = random_scalar_impl(g, bandlimit, rng);
  ScalarField s2 = random_scalar_impl(g, bandlimit, rng);
  OneForm g1 = grad(s1), g2 = grad(s2);
  OneForm out(g);
  // grad + star grad spans generic one-forms
  out.c1 = g1.c1 + g2.c2;
  out.c2 = g1.c2 - g2.c1;
  return out;
}

VectorField random_vector(GridPtr g, int bandlimit, std::uint64_t seed) {
  OneForm w = random_oneform(g, bandlimit, seed);
  VectorField out(g);
  out.c1 = w.c1;
  out.c2 = w.c2;
  return out;
}

SymTF2Field random_symtf(GridPtr g, int bandlimit, std::uint64_t seed) {
  VectorField X = random_vector(g, bandlimit, seed ^ 0xc2b2ae3d27d4eb4full);
  return nhat_otimes(X, ConformalMetric::round(g));
}

}  // namespace sscd
