#pragma once

#include "sscd/constraint.hpp"
#include "sscd/transport.hpp"

namespace sscd {

// hat-v coordinate map: vhat = v^{1-2k}/(1-2k), with dv/dvhat = v^{2k}.
struct HatVMap {
  double kappa = 0.0;
  explicit HatVMap(double k) : kappa(k) {
    if (!(k >= 0.0 && 2.0 * k < 1.0))
      throw std::invalid_argument("HatVMap: need 0 <= 2 kappa < 1");
  }
  double to_hat(double v) const { return std::pow(v, 1.0 - 2.0 * kappa) / (1.0 - 2.0 * kappa); }
  double from_hat(double vhat) const {
    return std::pow((1.0 - 2.0 * kappa) * vhat, 1.0 / (1.0 - 2.0 * kappa));
  }
  double dv_dvhat(double v) const { return std::pow(v, 2.0 * kappa); }
};

OneForm compute_eta_triangle(const RegularTuple& t, SolverReport* rep = nullptr);

ScalarField compute_trchi_triangle(const RegularTuple& t, const OneForm& eta_tri,
                                   SolverReport* rep = nullptr);

// Right-hand side of the chi-hat evolution:
// nabla_hat_otimes eta + eta hat-otimes eta - (trchi_tri / 2) * (nhat b)_lowered.
SymTF2Field chihat_rhs(const RegularTuple& t, const OneForm& eta_tri,
                       const ScalarField& trchi_tri);

EvolutionResult compute_chihat_evolution(const RegularTuple& t, const OneForm& eta_tri,
                                         const ScalarField& trchi_tri, double v_bar,
                                         double v_min, double ds = 0.01);

// Full sym-2 metric sample (not trace-free): round-dyad components.
struct Sym2Sample {
  ArrayXXd g11, g12, g22;
};

struct OutgoingData {
  std::vector<double> vhat;               // uniform ladder, 0 .. vhat_max
  std::vector<Sym2Sample> ghat;           // unimodular factor, det == det g(0)
  std::vector<ArrayXXd> phi;              // conformal exponent phi_out
  std::vector<ArrayXXd> dphi;             // d phi_out / d vhat
  double vhat_max = 0.0;
  double ray_residual = 0.0;              // sup of the outgoing Raychaudhuri residual
  double ode_residual = 0.0;              // sup of the phi-ODE residual (FD check)
  double volume_form_drift = 0.0;         // sup |det ghat - det g(0)| / det g(0)
  double integration_error = 0.0;         // step-halving (Richardson) check
};

struct OutgoingError : std::runtime_error {
  double blowup_vhat = 0.0;
  OutgoingError(const std::string& w, double v) : std::runtime_error(w), blowup_vhat(v) {}
};

OutgoingData build_outgoing_data(const RegularTuple& t, const ScalarField& trchi_tri,
                                 const EvolutionResult& family, double v_bar,
                                 double vhat_max, int n_steps = 4096, int n_store = 257);

struct CharDataBundle {
  OneForm eta_tri;
  ScalarField trchi_tri;
  EvolutionResult chihat;
  OutgoingData outgoing;
  double v_bar = 0.0;
  double kappa = 0.0;
};

CharDataBundle build_chardata(const RegularTuple& t, double v_bar, double v_min,
                              double ds = 0.01);

}  // namespace sscd
