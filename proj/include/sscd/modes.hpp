#pragma once

#include "sscd/field.hpp"

namespace sscd {

// Azimuthal Fourier representation of one component array: a complex matrix of
// shape (n_theta x n_modes), column m holding the e^{i m phi} coefficient.
MatrixXcd to_modes(const SphereGrid& g, const ArrayXXd& f);
ArrayXXd from_modes(const SphereGrid& g, const MatrixXcd& fm);

// d/dtheta of a rank-`rank` component array, using the parity split by mode.
ArrayXXd dtheta(const SphereGrid& g, const ArrayXXd& f, int rank);
// (1/sin) d/dphi of a component array.
ArrayXXd dphi_over_sin(const SphereGrid& g, const ArrayXXd& f);

// Mode-space versions (column m of a (n_theta x n_modes) matrix).
MatrixXcd dtheta_modes(const SphereGrid& g, const MatrixXcd& fm, int rank);

}  // namespace sscd
