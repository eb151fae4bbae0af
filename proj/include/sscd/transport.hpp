#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sscd/calculus.hpp"
#include "sscd/field.hpp"

namespace sscd {

struct SolverReport {
  double residual = 0.0;        // L2 residual of the solved equation
  double rhs_norm = 0.0;
  double condition_estimate = 0.0;  // max over mode blocks
  int iterations = 0;           // defect-correction sweeps
  bool converged = false;
};

// Coefficient data shared by the transport operators: an advection field with
// axisymmetric dyad profiles plus an optional non-axisymmetric remainder.
struct AdvectionField {
  VectorField X;       // full samples
  bool axisym = true;  // true if X is azimuthally symmetric to roundoff
};

AdvectionField make_advection(const VectorField& X);

// c u + L_X u + h0 u + h2 . u = F   (h2 acts on one-forms via contraction).
struct AffineTransportProblem {
  double c = 1.0;
  AdvectionField X;
  ScalarField h0;                    // scalar zeroth-order coefficient
  std::optional<SymTF2Field> h2;     // optional contraction coefficient (rank>=1)
  // smallness certificate sup|nab X| + sup|h|; solver refuses if > |c|/4
  double smallness() const;
};

struct TransportError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

ScalarField solve_affine_transport(const AffineTransportProblem& p, const ScalarField& F,
                                   SolverReport* rep = nullptr);
OneForm solve_affine_transport(const AffineTransportProblem& p, const OneForm& F,
                               SolverReport* rep = nullptr);

// Applies (for residual checks): c u + L_X u + h0 u (+ h2.u).
ScalarField apply_affine(const AffineTransportProblem& p, const ScalarField& u);
OneForm apply_affine(const AffineTransportProblem& p, const OneForm& u);

// ---- kappa-singular operator ----

// Coefficients of scrL f = L_b f - (nhat b)^C_(A f_B)C - (div b / 2) f on
// trace-free symmetric tensors.  In the reduced (f11, f12) representation the
// mixed contraction term is pure trace, so scrL = TF(L_b f) - (div b / 2) f.
struct ScrLCoeffs {
  AdvectionField b;
  ScalarField div_b;        // divergence w.r.t. the tuple metric
  ConformalMetric metric;   // supplies phi (and log-lapse for the lapse term)
  ScalarField lapse_term;   // 2 L_b log(Omega) samples (0 when Omega == 1)
};

struct KappaSingularProblem {
  ScrLCoeffs co;
  double kappa = 0.0;
  bool include_lapse_term = true;
};

// Raw (unskewed) application of scrL; independent of the assembled solve path.
SymTF2Field apply_scrL_raw(const ScrLCoeffs& co, const SymTF2Field& f);

// Production scrL: the mode-block operator skew-symmetrized w.r.t. the
// L2(g)-inner product, so that <scrL f, h> + <f, scrL h> = 0 holds exactly at
// the discrete level (the anti-symmetry is the structural fact the solver
// relies on).  Falls back to the raw apply when the coefficients are not
// axisymmetric.
class ScrLOperator {
public:
  explicit ScrLOperator(const ScrLCoeffs& co);

  SymTF2Field apply(const SymTF2Field& f) const;          // skewed scrL
  SymTF2Field apply_shifted(const KappaSingularProblem& p, const SymTF2Field& f) const;

  // Solve (scrL - 2 kappa + lapse_term) f = H.
  SymTF2Field solve(const KappaSingularProblem& p, const SymTF2Field& H,
                    SolverReport* rep = nullptr) const;
  // Same, with +q Lap_g added to the operator (elliptic regularization).
  SymTF2Field solve_q(const KappaSingularProblem& p, const SymTF2Field& H, double q,
                      SolverReport* rep = nullptr) const;

  const ScrLCoeffs& coeffs() const { return co_; }
  bool axisym() const { return axisym_; }

private:
  ScrLCoeffs co_;
  bool axisym_ = true;
  std::vector<MatrixXcd> blocks_;     // skewed scrL per mode, 2*nt x 2*nt
  std::vector<Eigen::VectorXd> winv_; // inverse inner-product weights per node
  MatrixXcd lap_block(int m) const;   // assembled conformal Laplacian block
};

SymTF2Field solve_kappa_singular(const KappaSingularProblem& p, const SymTF2Field& H,
                                 SolverReport* rep = nullptr);

// ---- kappa-singular evolution:  v d_v f + scrL f - 2 kappa f + lapse f = H ----

struct EvolutionResult {
  std::vector<double> v;               // geometric ladder, descending from v_bar
  std::vector<SymTF2Field> f;          // stored samples
  std::vector<double> l2_history;      // ||f|| at each stored sample
  SymTF2Field stationary;              // solution of the stationary equation
  double ds = 0.0;
  int steps = 0;
};

EvolutionResult solve_kappa_singular_evolution(const KappaSingularProblem& p,
                                               const SymTF2Field& H,
                                               const SymTF2Field& final_data,
                                               double v_bar, double v_min,
                                               double ds = 0.01);

}  // namespace sscd
