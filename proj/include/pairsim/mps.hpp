#pragma once

#include <string>
#include <vector>

#include "pairsim/fock.hpp"
#include "pairsim/model_spec.hpp"
#include "pairsim/rng.hpp"
#include "pairsim/state.hpp"
#include "pairsim/trajectory.hpp"

namespace pairsim {

// Matrix-product state in mixed-canonical form. The tensor at site j is stored
// as a (χ_left·d) × χ_right matrix with row index α·d + n; tensors left of the
// canonical center are left-isometries, those right of it right-isometries, so
// the Frobenius norm of the center tensor is the state norm.
struct MpsState {
  std::vector<DenseMatrix> site_tensors;
  std::vector<int> phys_dims;
  int canonical_center = 0;
  int chi_max = 64;
  double svd_cutoff = 1e-10;          // discard threshold on relative squared weight
  double cumulative_truncation = 0.0; // summed relative discarded weight

  int num_sites() const { return static_cast<int>(site_tensors.size()); }
  int bond_dim(int bond) const;             // dimension between sites bond and bond+1
  std::vector<int> bond_dims() const;       // interior bonds, length num_sites()-1
  double squared_norm() const;               // ‖center tensor‖_F², valid in canonical form
  double norm() const;
  void validate() const;                     // shapes chain up, boundary bonds are 1
};

struct TwoSiteGate {
  DenseMatrix matrix;  // (d_left·d_right) square, row/col index n_left·d_right + n_right
  std::string label;
  bool unitary = false;  // unitary gates restore the pre-gate norm after truncation
};

MpsState from_product_state(const std::vector<int>& occupations, const FockSpace& space,
                            int chi_max = 64, double svd_cutoff = 1e-10);
// Exact sweep of singular value decompositions over a dense vector (truncating
// only where chi_max/svd_cutoff demand it); center lands on the last site.
MpsState from_dense(const StateVector& psi, int chi_max = 64, double svd_cutoff = 1e-10);
StateVector to_dense(const MpsState& state, const FockSpace& space);

// Move the canonical center to `site` by QR sweeps; no truncation.
void move_center(MpsState& state, int site);

// Max deviation from the isometry conditions away from the center — the
// canonical-form health check.
double isometry_defect(const MpsState& state);

// Contract a two-site gate into bond `bond` and refactorize by SVD, keeping at
// most chi_max singular values and discarding relative squared weight at most
// svd_cutoff (recorded in cumulative_truncation). Moves the center to the
// bond as needed; afterwards the center sits on site bond+1.
void apply_two_site(MpsState& state, const TwoSiteGate& gate, int bond);
void apply_two_site(MpsState& state, const TwoSiteGate& gate, int bond, int chi_max,
                    double svd_cutoff);

// Expectation ⟨ψ|O|ψ⟩/⟨ψ|ψ⟩ by transfer contraction (cost linear in |i−j|).
// Supports the site/correlator observable kinds; Operator and FidelityTo are
// dense-backend-only and throw here.
Complex measure(MpsState& state, const ObservableSpec& spec);

// The trajectory engine over MPS states: the bond model's even/odd/even gate
// split with the shared waiting-time jump rule. One engine = one trajectory.
class MpsTebdEngine {
 public:
  MpsTebdEngine(const BondModel& model, const MpsState& psi0, const TrajectoryConfig& cfg);

  double advance();                              // one dt step; returns squared norm
  void channel_weights(std::vector<double>& w);  // κ_c‖l_c ψ‖² in model channel order
  void apply_jump(int channel);                  // apply the channel gate, renormalize
  void measure(std::vector<double>& out);

  const MpsState& state() const { return state_; }
  MpsState& state() { return state_; }

 private:
  const BondModel* model_;
  MpsState state_;
  std::vector<std::pair<int, TwoSiteGate>> sweep_;  // (bond, gate) in application order
  std::vector<BondChannel> channels_;               // rate > 0, in model channel order
  std::vector<ObservableSpec> observables_;
};

// One waiting-time step: advance dt, and if the squared norm undercuts
// `survival_threshold`, pick a channel (∝ κ‖lψ‖²), apply it, renormalize, and
// redraw the threshold. Returns the channel index or -1. The draw order per
// jump (one channel uniform, one fresh threshold) matches the shared driver.
int tebd_trajectory_step(MpsTebdEngine& engine, Rng& rng, double& survival_threshold);

TrajectoryResult run_trajectory(const BondModel& model, const MpsState& psi0,
                                const TrajectoryConfig& cfg, std::size_t traj_index = 0);
ObservableSeries run_ensemble(const BondModel& model, const MpsState& psi0,
                              const TrajectoryConfig& cfg);

}  // namespace pairsim
