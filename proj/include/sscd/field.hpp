#pragma once

#include <stdexcept>
#include <vector>

#include "sscd/grid.hpp"

namespace sscd {

// Tensor fields are sampled in the fixed orthonormal round dyad
//   e1 = d/dtheta,  e2 = (1/sin theta) d/dphi.
// A rank-k field stores 2^k component arrays of shape (n_theta x n_phi),
// indexed by the bit pattern of its dyad indices (bit 0 = first index, ...).
class TensorField {
public:
  TensorField() = default;
  TensorField(GridPtr g, int rank)
      : grid_(std::move(g)), rank_(rank), comps_(std::size_t(1) << rank) {
    for (auto& c : comps_) c = ArrayXXd::Zero(grid_->n_theta, grid_->n_phi);
  }

  const SphereGrid& grid() const { return *grid_; }
  GridPtr grid_ptr() const { return grid_; }
  int rank() const { return rank_; }
  int n_comps() const { return int(comps_.size()); }

  ArrayXXd& comp(int idx) { return comps_[idx]; }
  const ArrayXXd& comp(int idx) const { return comps_[idx]; }

  bool finite() const {
    for (const auto& c : comps_)
      if (!c.isFinite().all()) return false;
    return true;
  }

private:
  GridPtr grid_;
  int rank_ = 0;
  std::vector<ArrayXXd> comps_;
};

class ScalarField {
  GridPtr grid_;

public:
  ScalarField() = default;
  explicit ScalarField(GridPtr g)
      : grid_(std::move(g)), v(ArrayXXd::Zero(grid_->n_theta, grid_->n_phi)) {}
  ScalarField(GridPtr g, ArrayXXd vals) : grid_(std::move(g)), v(std::move(vals)) {}
  static ScalarField constant(GridPtr g, double c) {
    ScalarField f(g);
    f.v.setConstant(c);
    return f;
  }
  // Axisymmetric field from a theta profile.
  static ScalarField from_profile(GridPtr g, const ArrayXd& p) {
    ScalarField f(g);
    f.v.colwise() = p;
    return f;
  }
  const SphereGrid& grid() const { return *grid_; }
  GridPtr grid_ptr() const { return grid_; }
  bool finite() const { return v.isFinite().all(); }

  ArrayXXd v;
};

// One-forms and vectors share dyad components (indices raised/lowered with the
// round metric are trivial in the orthonormal dyad); we keep distinct types for
// interface clarity.
struct PairField {
private:
  GridPtr grid_;

public:
  PairField() = default;
  explicit PairField(GridPtr g)
      : grid_(std::move(g)),
        c1(ArrayXXd::Zero(grid_->n_theta, grid_->n_phi)),
        c2(ArrayXXd::Zero(grid_->n_theta, grid_->n_phi)) {}
  const SphereGrid& grid() const { return *grid_; }
  GridPtr grid_ptr() const { return grid_; }
  bool finite() const { return c1.isFinite().all() && c2.isFinite().all(); }

  ArrayXXd c1, c2;
};

struct OneForm : PairField {
  using PairField::PairField;
};
struct VectorField : PairField {
  using PairField::PairField;
};

// Symmetric trace-free (0,2) tensor: stores f_11 and f_12; f_22 = -f_11 and
// f_21 = f_12 are implicit (trace-freeness w.r.t. the round metric coincides
// with trace-freeness w.r.t. any conformal metric e^{2phi} g_round).
struct SymTF2Field : PairField {
  using PairField::PairField;
  const ArrayXXd& c11() const { return c1; }
  const ArrayXXd& c12() const { return c2; }
  ArrayXXd& c11() { return c1; }
  ArrayXXd& c12() { return c2; }
};

// Conformal-to-round metric data: g = e^{2 phi} g_round, plus log of the lapse.
struct ConformalMetric {
  ConformalMetric() = default;
  explicit ConformalMetric(GridPtr g)
      : phi(ScalarField(g)), log_lapse(ScalarField(g)) {}
  static ConformalMetric round(GridPtr g) { return ConformalMetric(g); }

  bool is_round() const { return (phi.v == 0.0).all(); }
  bool unit_lapse() const { return (log_lapse.v == 0.0).all(); }
  const SphereGrid& grid() const { return phi.grid(); }
  GridPtr grid_ptr() const { return phi.grid_ptr(); }

  ScalarField phi;
  ScalarField log_lapse;
};

inline void require_same_grid(const SphereGrid& a, const SphereGrid& b,
                              const char* where) {
  if (!a.same_as(b)) throw std::invalid_argument(std::string(where) + ": grid mismatch");
}

}  // namespace sscd
