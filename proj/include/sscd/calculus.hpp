#pragma once

#include <cstdint>

#include "sscd/field.hpp"

namespace sscd {

// ---- generic covariant derivative engine (round dyad components) ----

// Round covariant derivative: rank k -> rank k+1, new index first.
TensorField covd_round(const TensorField& t);
// Covariant derivative of g = e^{2 phi} g_round (Christoffel correction only;
// components stay in the round dyad).
TensorField covd_conformal(const TensorField& t, const ScalarField& phi);

TensorField as_tensor(const ScalarField& f);
TensorField as_tensor(const PairField& f);
TensorField as_tensor(const SymTF2Field& f);  // expands f22 = -f11, f21 = f12

// ---- first-order operators of the conformal calculus ----

OneForm grad(const ScalarField& f);  // lowered gradient (metric-free in dyad)
double mean_zero_check(const ScalarField& f);

// div_g X = div_round X + 2 L_X phi (conformal divergence of a vector field).
ScalarField divergence(const VectorField& X, const ConformalMetric& m);
// curl_g of a one-form: e^{-2 phi} curl_round.
ScalarField curl(const OneForm& w, const ConformalMetric& m);

// Canonical representation of the conformal shear operator on vector fields:
// M_ab = (nab X)_ab + (nab X)_ba - delta_ab div_round X  (round dyad).
// This object satisfies |nabla_hat_otimes X|_g = |M|_round for every conformal
// metric, and the mixed contraction used by the kappa-singular operator is
// (nabla_hat_otimes b)^C_(A f_B)C = delta^{CD} M_D(A f_B)C.
SymTF2Field nhat_otimes(const VectorField& X, const ConformalMetric& m);

// (nabla_hat otimes psi)_AB for a one-form, w.r.t. the conformal metric:
// nab_A psi_B + nab_B psi_A - (div_g psi) g_AB, returned in round dyad
// components of the (0,2) tensor.
SymTF2Field nhat_otimes_oneform(const OneForm& psi, const ConformalMetric& m);

// Lie derivatives along a vector field (metric-free).
ScalarField lie(const VectorField& X, const ScalarField& f);
OneForm lie(const VectorField& X, const OneForm& w);
// Lie derivative of a symmetric TF tensor; the result is symmetric but not
// trace-free, returned as rank-2 TensorField.
TensorField lie(const VectorField& X, const SymTF2Field& f);
// TF-projected version (round/conformal TF part), for operator building.
SymTF2Field lie_tf(const VectorField& X, const SymTF2Field& f);

// Gauss curvature of g = e^{2 phi} g_round: K = e^{-2 phi} (1 - Lap_round phi).
ScalarField gauss_curvature(const ConformalMetric& m);

ScalarField laplacian_round(const ScalarField& f);

// ---- integrals, inner products, norms ----

double integrate(const ScalarField& f, const ConformalMetric& m);
double integrate_round(const ScalarField& f);
double area(const ConformalMetric& m);

// Pointwise g-inner products (conformal weights included).
ScalarField dot(const OneForm& a, const OneForm& b, const ConformalMetric& m);
ScalarField dot(const SymTF2Field& a, const SymTF2Field& b, const ConformalMetric& m);
// L^2(g) pairing of SymTF fields: int <a,b>_g dVol_g.
double l2_pair(const SymTF2Field& a, const SymTF2Field& b, const ConformalMetric& m);

// L2 norms over the round sphere of generic fields.
double l2_norm(const TensorField& t);
double l2_norm(const ScalarField& f);
double l2_norm(const PairField& f);

// Sobolev norm built from round covariant derivatives:
// ||u||_{H^j} = sum_{i<=j} ||nab^i u||_{L2(round)}.  homogeneous = top term only.
double sobolev_norm(const TensorField& t, int order, bool homogeneous = false);
double sobolev_norm(const ScalarField& f, int order, bool homogeneous = false);
double sobolev_norm(const PairField& f, int order, bool homogeneous = false);

double sup_norm(const ArrayXXd& a);

// ---- reproducible band-limited test fields ----

ScalarField random_scalar(GridPtr g, int bandlimit, std::uint64_t seed);
OneForm random_oneform(GridPtr g, int bandlimit, std::uint64_t seed);
VectorField random_vector(GridPtr g, int bandlimit, std::uint64_t seed);
SymTF2Field random_symtf(GridPtr g, int bandlimit, std::uint64_t seed);

}  // namespace sscd
