#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "pairsim/fock.hpp"
#include "pairsim/state.hpp"

namespace pairsim {

// dρ/dt = −i[H, ρ] + Σ_j κ_j (2 l_j ρ l†_j − l†_j l_j ρ − ρ l†_j l_j).
// Under this convention a channel (l, κ) empties state ψ at rate 2κ‖lψ‖².
struct LindbladModel {
  LatticeOperator H;  // Hermitian; may be an all-zero matrix
  std::vector<std::pair<LatticeOperator, double>> jumps;

  const TensorSpace& space() const { return H.space; }
  std::size_t dimension() const { return H.space.dimension(); }
  void validate() const;  // shared space, κ ≥ 0, H flagged Hermitian
};

// Model with H = 0 on the given space.
LindbladModel empty_model(const TensorSpace& space);

DenseMatrix liouvillian_apply(const LindbladModel& model, const DenseMatrix& rho);

struct EvolveReport {
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
  double max_trace_drift = 0.0;
  double worst_negative_eigenvalue = 0.0;  // most negative eigenvalue seen at outputs
  std::vector<std::string> warnings;
};

// Adaptive embedded Runge–Kutta integration of the master equation, reporting
// the state at each grid time. Output states are Hermitized, clamped to the
// positive cone (with a warning when the violation exceeds 1e−7) and
// trace-renormalized; the pre-clamp trace drift is recorded in the report.
std::vector<DensityMatrix> evolve(const LindbladModel& model, const DensityMatrix& rho0,
                                  const std::vector<double>& t_grid, double rtol,
                                  EvolveReport* report = nullptr);

// Dense null space of the Liouvillian superoperator. One element: the unique
// steady state (Hermitized, trace 1, validated). Several: a basis of the
// stationary subspace, Hermitized and orthonormalized in the Frobenius sense
// (trace-normalized where the trace is nonzero). The superoperator is a dense
// D²×D² matrix, so D is capped.
std::vector<DensityMatrix> steady_state(const LindbladModel& model,
                                        std::size_t max_dimension = 64,
                                        double null_tol = 1e-9);

std::vector<Complex> observables(const DensityMatrix& rho,
                                 const std::vector<LatticeOperator>& ops);

// Trace out all factors not listed in `keep` (sorted, distinct, non-empty).
DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& keep);

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);
double fidelity(const DensityMatrix& rho, const StateVector& psi);  // <ψ|ρ|ψ>
double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma);
double purity(const DensityMatrix& rho);  // tr ρ²

// ---- invariant-subspace (sector) restriction ----------------------------------
// The pair and healing channels conserve total photon number, so the dynamics
// block-diagonalizes over number sectors; restricting to the initial state's
// sector is exact and shrinks D dramatically.

struct SectorBasis {
  TensorSpace full;
  std::vector<std::size_t> indices;  // ascending full-space basis indices
  std::size_t dimension() const { return indices.size(); }
  TensorSpace reduced() const { return TensorSpace({static_cast<int>(indices.size())}); }
};

// Basis states with the given total occupation; pass parities (one ±1 per site)
// to further filter by the per-site parity pattern.
SectorBasis number_sector(const FockSpace& space, int total);
SectorBasis number_sector(const FockSpace& space, int total, const std::vector<int>& parities);

// P O P on the sector. Throws if O maps the sector outside itself (leakage
// above `leak_tol`), which would make the restriction unphysical.
LatticeOperator restrict_operator(const LatticeOperator& op, const SectorBasis& sector,
                                  double leak_tol = 1e-12);
LindbladModel restrict_model(const LindbladModel& model, const SectorBasis& sector,
                             double leak_tol = 1e-12);
StateVector restrict_vector(const StateVector& psi, const SectorBasis& sector,
                            double leak_tol = 1e-12);
StateVector expand_vector(const StateVector& reduced, const SectorBasis& sector);
DensityMatrix restrict_density(const DensityMatrix& rho, const SectorBasis& sector,
                               double leak_tol = 1e-12);
DensityMatrix expand_density(const DensityMatrix& reduced, const SectorBasis& sector);

}  // namespace pairsim
