#include "sscd/modes.hpp"

namespace sscd {

MatrixXcd to_modes(const SphereGrid& g, const ArrayXXd& f) {
  return f.matrix() * g.fwd_dft.transpose();
}

ArrayXXd from_modes(const SphereGrid& g, const MatrixXcd& fm) {
  return (fm * g.inv_dft.transpose()).real().array();
}

MatrixXcd dtheta_modes(const SphereGrid& g, const MatrixXcd& fm, int rank) {
  MatrixXcd out(fm.rows(), fm.cols());
  for (int m = 0; m < fm.cols(); ++m) {
    int sigma = (m + rank) & 1;
    out.col(m) = g.Dt[sigma] * fm.col(m);
  }
  return out;
}

ArrayXXd dtheta(const SphereGrid& g, const ArrayXXd& f, int rank) {
  return from_modes(g, dtheta_modes(g, to_modes(g, f), rank));
}

ArrayXXd dphi_over_sin(const SphereGrid& g, const ArrayXXd& f) {
  MatrixXcd fm = to_modes(g, f);
  const std::complex<double> I(0.0, 1.0);
  for (int m = 0; m < fm.cols(); ++m) fm.col(m) *= I * double(m);
  MatrixXcd scaled = g.sin_t.inverse().matrix().asDiagonal() * fm;
  return from_modes(g, scaled);
}

}  // namespace sscd
