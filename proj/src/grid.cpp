#include "sscd/grid.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

namespace sscd {

void gauss_legendre(int n, ArrayXd& nodes, ArrayXd& weights) {
  if (n < 2) throw std::invalid_argument("gauss_legendre: n must be >= 2");
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Tricomi-style initial guess, then Newton on P_n.
    double t = M_PI * (i + 0.75) / (n + 0.5);
    double z = std::cos(t);
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 0; k < n; ++k) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k + 1.0) * z * p1 - k * p2) / (k + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    nodes[n - 1 - i] = z;  // ascending
    weights[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
  }
}

GridPtr SphereGrid::make(int n_theta, int n_phi) {
  if (n_theta < 4 || n_phi < 4 || (n_phi % 2) != 0)
    throw std::invalid_argument("SphereGrid: need n_theta>=4 and even n_phi>=4");
  auto g = std::make_shared<SphereGrid>();
  g->n_theta = n_theta;
  g->n_phi = n_phi;

  ArrayXd xr, wr;
  gauss_legendre(n_theta, xr, wr);
  // theta ascending <=> x descending
  g->theta.resize(n_theta);
  g->x.resize(n_theta);
  g->w.resize(n_theta);
  for (int i = 0; i < n_theta; ++i) {
    g->x[i] = xr[n_theta - 1 - i];
    g->w[i] = wr[n_theta - 1 - i];
    g->theta[i] = std::acos(g->x[i]);
  }
  g->sin_t = g->theta.sin();
  g->cos_t = g->theta.cos();
  g->cot_t = g->cos_t / g->sin_t;

  g->phi.resize(n_phi);
  for (int j = 0; j < n_phi; ++j) g->phi[j] = 2.0 * M_PI * j / n_phi;

  // Barycentric weights for Gauss-Legendre nodes: lambda_i ~ (-1)^i sqrt((1-x_i^2) w_i).
  ArrayXd lam(n_theta);
  for (int i = 0; i < n_theta; ++i) {
    double s = std::sqrt((1.0 - g->x[i] * g->x[i]) * g->w[i]);
    lam[i] = (i % 2 == 0) ? s : -s;
  }
  MatrixXd D(n_theta, n_theta);
  for (int i = 0; i < n_theta; ++i) {
    double rowsum = 0.0;
    for (int j = 0; j < n_theta; ++j) {
      if (i == j) continue;
      double v = (lam[j] / lam[i]) / (g->x[i] - g->x[j]);
      D(i, j) = v;
      rowsum += v;
    }
    D(i, i) = -rowsum;
  }
  g->Dx = D;

  // d/dtheta = -sin * d/dx on parity-0 components.
  g->Dt[0] = (-g->sin_t).matrix().asDiagonal() * D;
  // F = sin * G  =>  dF/dtheta = x G - sin^2 G'.
  MatrixXd inner = MatrixXd(g->x.matrix().asDiagonal()) -
                   MatrixXd((g->sin_t * g->sin_t).matrix().asDiagonal()) * D;
  g->Dt[1] = inner * g->sin_t.inverse().matrix().asDiagonal();

  const int nm = g->n_modes();
  g->fwd_dft.resize(nm, n_phi);
  g->inv_dft.resize(n_phi, nm);
  const std::complex<double> I(0.0, 1.0);
  for (int m = 0; m < nm; ++m)
    for (int j = 0; j < n_phi; ++j)
      g->fwd_dft(m, j) = std::exp(-I * (m * g->phi[j])) / double(n_phi);
  for (int j = 0; j < n_phi; ++j)
    for (int m = 0; m < nm; ++m) {
      double fac = (m == 0 || m == n_phi / 2) ? 1.0 : 2.0;
      g->inv_dft(j, m) = fac * std::exp(I * (m * g->phi[j]));
    }
  return g;
}

}  // namespace sscd
