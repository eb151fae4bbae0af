#pragma once

#include <Eigen/Dense>
#include <memory>

namespace sscd {

using Eigen::ArrayXd;
using Eigen::ArrayXXd;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Collocation grid on S^2: Gauss-Legendre nodes in x = cos(theta) (no points at
// the poles), uniform azimuthal nodes. theta is stored ascending in (0,pi).
//
// All theta-differentiation is barycentric-spectral on the Legendre nodes in x,
// with the usual parity split: a component of azimuthal mode m and tensor rank r
// behaves like sin(theta)^sigma * (smooth in x) with sigma = (m + r) mod 2, so
// we differentiate either the plain interpolant (sigma = 0) or the interpolant
// of F / sin(theta) (sigma = 1).
class SphereGrid {
public:
  int n_theta = 0;
  int n_phi = 0;

  ArrayXd theta;       // ascending, strictly inside (0,pi)
  ArrayXd x;           // cos(theta), aligned with theta (descending)
  ArrayXd w;           // Gauss-Legendre weights for integration dx, aligned
  ArrayXd sin_t, cos_t, cot_t;
  ArrayXd phi;         // uniform in [0,2pi)

  MatrixXd Dx;         // d/dx at the nodes (barycentric)
  MatrixXd Dt[2];      // d/dtheta for parity sigma = 0,1

  // Dense real DFT matrices along phi (complex modes m = 0..n_phi/2).
  MatrixXcd fwd_dft;   // (n_modes x n_phi), includes 1/n_phi
  MatrixXcd inv_dft;   // (n_phi x n_modes), with conjugate-symmetry weights

  static std::shared_ptr<const SphereGrid> make(int n_theta, int n_phi);

  int n_modes() const { return n_phi / 2 + 1; }

  // Integral over S^2 with the round measure sin(theta) dtheta dphi.
  double integrate(const ArrayXXd& f) const {
    return (2.0 * M_PI / n_phi) * (f.colwise() * w).sum();
  }

  // Quadrature of an axisymmetric profile: int_0^pi p(theta) sin dtheta.
  double integrate_profile(const ArrayXd& p) const { return (w * p).sum(); }

  bool same_as(const SphereGrid& o) const {
    return n_theta == o.n_theta && n_phi == o.n_phi;
  }
};

using GridPtr = std::shared_ptr<const SphereGrid>;

// Gauss-Legendre nodes/weights on [-1,1], ascending nodes.
void gauss_legendre(int n, ArrayXd& nodes, ArrayXd& weights);

}  // namespace sscd
