#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pairsim/lindblad.hpp"
#include "pairsim/model_spec.hpp"
#include "pairsim/state.hpp"

namespace pairsim {

// H_eff = H − i Σ_j κ_j l†_j l_j; the anti-Hermitian part drains norm at the
// total jump rate, which is what the waiting-time sampler integrates.
LatticeOperator effective_hamiltonian(const LindbladModel& model);

// What to record along a trajectory. Correlator conventions match the
// dark-state module: Single = <a†_i a_j>, Pair = <a†²_i a²_j>; reported values
// are real parts, normalized by the running squared norm.
struct ObservableSpec {
  enum class Kind {
    SiteOccupation,    // <n_i>
    SiteParity,        // <(-1)^{n_i}>
    DefectDensity,     // (1/L) Σ_j <(1-(-1)^{n_j})/2>
    SingleCorrelator,  // Re <a†_i a_j>
    PairCorrelator,    // Re <a†²_i a²_j>
    TotalNumber,       // <Σ n_j>
    Operator,          // Re <O> for an explicit operator (dense backends only)
    FidelityTo,        // |<target|ψ>|²/<ψ|ψ> (dense backends only)
  };
  Kind kind = Kind::SiteOccupation;
  int i = 0;
  int j = 0;
  LatticeOperator op;  // Kind::Operator
  StateVector target;  // Kind::FidelityTo
  std::string label;

  static ObservableSpec occupation(int site);
  static ObservableSpec parity(int site);
  static ObservableSpec defect_density();
  static ObservableSpec single_correlator(int i, int j);
  static ObservableSpec pair_correlator(int i, int j);
  static ObservableSpec total_occupation();
  static ObservableSpec operator_expectation(LatticeOperator op, std::string label);
  static ObservableSpec fidelity_to(StateVector target, std::string label);
};

struct TrajectoryConfig {
  double dt = 1e-3;
  double t_final = 1.0;
  std::size_t n_traj = 1;
  std::uint64_t seed = 0;
  int measure_stride = 1;  // record observables every k-th step (plus t = 0)
  std::vector<ObservableSpec> observables;
  bool jump_log = false;
  int threads = 1;

  // `max_rate_norm` is max_j κ_j·‖l†_j l_j‖_∞ for the model at hand; the step
  // must satisfy dt ≤ 0.05 / max_rate_norm so that per-step jump probability
  // stays in the first-order regime.
  void validate(double max_rate_norm) const;
};

struct JumpEvent {
  double t = 0.0;   // end of the step that triggered the jump
  int channel = 0;  // index into the model's channel list
};

struct TrajectoryResult {
  std::vector<double> times;
  std::vector<std::vector<double>> values;  // [observable][time]
  std::vector<JumpEvent> jumps;             // filled when cfg.jump_log
  std::size_t num_jumps = 0;
};

struct ObservableSeries {
  std::vector<double> times;
  std::vector<std::string> labels;
  std::vector<std::vector<double>> mean;     // [observable][time]
  std::vector<std::vector<double>> stderr_;  // [observable][time]; +inf at n_traj = 1
  std::size_t n_traj = 0;
};

// Single quantum trajectory of the model's unraveling: propagate under H_eff,
// jump when the squared norm falls below a uniform threshold, channel chosen
// with probability ∝ κ_j‖l_j ψ‖². The RNG stream is stream_seed(cfg.seed,
// traj_index), and the draw sequence is: one threshold at the start, then per
// jump one channel draw plus one fresh threshold — nothing else, so backends
// sharing this driver consume randomness identically.
TrajectoryResult run_trajectory(const LindbladModel& model, const StateVector& psi0,
                                const TrajectoryConfig& cfg, std::size_t traj_index = 0);

// Same contract, propagating with a second-order even/odd bond splitting of
// exp(−i H_eff dt) built from the bond model's generators (the gate sequence a
// matrix-product-state backend applies, embedded densely).
TrajectoryResult run_trajectory(const BondModel& model, const StateVector& psi0,
                                const TrajectoryConfig& cfg, std::size_t traj_index = 0);

ObservableSeries run_ensemble(const LindbladModel& model, const StateVector& psi0,
                              const TrajectoryConfig& cfg);
ObservableSeries run_ensemble(const BondModel& model, const StateVector& psi0,
                              const TrajectoryConfig& cfg);

// Time for each observable to first reach `level` × its saturation value
// (mean of the final decade of samples; throws ConvergenceError when the
// series has not saturated).
std::vector<double> equilibrium_times(const ObservableSeries& series, double level = 0.8);

// Max κ_j·‖l†_j l_j‖_∞ — the rate scale TrajectoryConfig::validate needs.
double max_rate_norm(const LindbladModel& model);
double max_rate_norm(const BondModel& model);

}  // namespace pairsim
