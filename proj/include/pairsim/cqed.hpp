#pragma once

#include <vector>

#include "pairsim/lindblad.hpp"
#include "pairsim/state.hpp"
#include "pairsim/types.hpp"

namespace pairsim {

// Two high-Q cavities coupled through a driven three-level anharmonic
// oscillator (levels g, e, f), plus an optional auxiliary two-level system
// used to cancel the cavity self-Kerr. This module validates the reduction
// chain full model -> Schrieffer-Wolff effective Hamiltonian -> adiabatic
// elimination of the lossy ancilla onto the pair jump operator.
struct CqedParams {
  int n_max = 3;  // cavity occupation cutoff (pair operators need n_max >= 2)

  Complex g1{0.1, 0.0};  // (a_L^2 - a_R^2) |e><g| coupling
  Complex g2{0.1, 0.0};  // (a_L+^2 + a_R+^2) |f><e| coupling
  Complex g3{0.1, 0.0};  // (a_L^2 + a_R^2) |1><0| coupling (TLS branch)
  double delta1 = 2.0;   // detuning of |e>
  double delta2 = 2.0;   // detuning of |1>

  double chi = 0.0;              // cavity self-Kerr  -chi a+^2 a^2 per cavity
  double chi_cavity_osc = 0.0;   // cross-Kerr  -chi (n_L+n_R)(P_e + 2 P_f)
  double chi_cavity_tls = 0.0;   // cross-Kerr  -chi (n_L+n_R) P_1
  double kappa_f = 1.0;          // population decay rate of |f> -> |g> (and |1> -> |0>)
  bool include_tls = false;

  int cavity_dim() const { return n_max + 1; }
  // Factor order: cavity L, cavity R, oscillator (dim 3: g,e,f), then the
  // TLS (dim 2: 0,1) when enabled. Factor 0 is the slowest index.
  TensorSpace space() const;
  FockSpace cavities() const { return FockSpace(2, n_max, false); }

  void validate() const;  // kappa_f > 0, detunings > 0, n_max >= 2, chis >= 0

  double coupling_scale() const;     // max enabled |g|
  double detuning_ratio() const;     // min enabled detuning / coupling_scale
  double elimination_ratio() const;  // kappa_f / (coupling_scale^2 / min detuning)
};

// Post-rotating-wave model: Kerr terms, detuning penalties, the three
// two-photon couplings, and the ancilla decay channels (rate kappa_f/2 per
// channel under the 2 l rho l+ convention, so populations decay at kappa_f).
LindbladModel build_full_model(const CqedParams& p);

// Two-cavity model after eliminating the ancillas: quartic Hamiltonian
// terms plus the pair jump at rate 2 |g1 g2|^2 / (delta1^2 kappa_f).
LindbladModel build_effective_model(const CqedParams& p);

// Parameter point at which every quartic term of the effective Hamiltonian
// cancels: chi = 2 |g1|^2 / delta1 with the TLS branch tuned so that
// |g3|^2 / delta2 = |g1|^2 / delta1. Enables the TLS.
CqedParams kerr_cancellation_params(CqedParams base);

struct SchriefferWolffReport {
  double residual = 0.0;           // max-norm deviation on the {g,f} block
  double gg_block_residual = 0.0;  // deviation of the |g><g| block alone
  double hierarchy = 0.0;          // detuning_ratio()
  bool hierarchy_ok = false;       // hierarchy >= 10
};

// Conjugates the full Hamiltonian by the exact exponential of the
// second-order generator and compares the {g,f} (x |0> when the TLS is on)
// block against the effective two-by-two block Hamiltonian. The residual
// shrinks like g^3/delta^2.
SchriefferWolffReport schrieffer_wolff_check(const CqedParams& p);

struct ReductionReport {
  std::vector<double> times;
  std::vector<double> distances;        // trace distance full-vs-effective per time
  double max_trace_distance = 0.0;
  double max_excited_population = 0.0;   // peak <P_e + P_f> in the full model
  double mean_excited_population = 0.0;  // grid average of the same
};

// Evolves the full model from rho0 (x) |g><g| ((x) |0><0|), partial-traces to
// the cavities, and compares against the effective model evolved from rho0.
ReductionReport reduction_error(const CqedParams& p, const std::vector<double>& t_grid,
                                const DensityMatrix& rho0_cavities, double rtol = 1e-8);

}  // namespace pairsim
