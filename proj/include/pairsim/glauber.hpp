#pragma once

#include <cstdint>
#include <vector>

#include "pairsim/rng.hpp"
#include "pairsim/types.hpp"

namespace pairsim {

// Classical single-spin-flip kinetics for the defect (domain-wall) picture of
// the pair-dissipative chain: defects live on bonds, m_b = (1 − σ_b σ_{b+1})/2.

enum class RateMode {
  Exact,    // hop Γ/2 per direction, pair annihilation Γ, pair production Γh
  Glauber,  // kinetic-Ising form w_j = (Γ/2)[1 − (γ/2) σ_j (σ_{j−1}+σ_{j+1})]
};

struct RateTable {
  RateMode mode = RateMode::Exact;
  double base_rate = 1.0;  // Γ, the hop/annihilation scale
  double h = 0.0;          // dimensionless pair-production parameter

  // kinetic-Ising weight γ = (1−h)/(1+h); γ → 1 recovers the exact rates
  double gamma() const { return (1.0 - h) / (1.0 + h); }
  void validate() const;  // base_rate > 0, h ≥ 0
};

struct SpinConfig {
  std::vector<std::int8_t> spins;  // ±1
  bool periodic = true;

  int num_sites() const { return static_cast<int>(spins.size()); }
  int num_bonds() const { return periodic ? num_sites() : num_sites() - 1; }
  int defect_count() const;
  double defect_density() const;      // defects / num_bonds
  std::vector<int> defect_bonds() const;
  void validate() const;              // entries ±1, length ≥ 3
};

SpinConfig all_up(int num_sites, bool periodic = true);
SpinConfig random_config(int num_sites, Rng& rng, bool periodic = true);
// Chain with domain walls exactly at the listed bonds. A ring needs an even
// number of walls to close; an odd list on a periodic chain throws.
SpinConfig from_defects(int num_sites, const std::vector<int>& bonds, bool periodic = true);

// Rate for flipping spin j. On an open chain the two boundary spins are frozen
// (rate 0), which realizes fixed boundary conditions; interior triples then
// match the quantum chain whose end sites have a single neighbor each.
double flip_rate(const SpinConfig& config, int j, const RateTable& table);

enum class InitKind { Random, AllUp, FromDefects };

struct KmcConfig {
  RateTable table;
  int num_sites = 100;
  bool periodic = true;
  double t_final = 100.0;
  InitKind init = InitKind::Random;
  std::vector<int> defect_bonds;  // used by InitKind::FromDefects

  // Observation grid: explicit sample_times win when non-empty; otherwise a
  // logarithmic grid {0, t_min … t_final} (grid_points log-spaced samples), or
  // a linear grid {0 … t_final} when log_grid is off.
  std::vector<double> sample_times;
  bool log_grid = true;
  double t_min = 0.1;
  int grid_points = 61;

  std::size_t n_hist = 1;
  std::uint64_t seed = 0;
  int threads = 1;

  std::vector<double> grid() const;
  void validate() const;
};

struct RunResult {
  std::vector<double> times;
  std::vector<double> mean;     // defect density, one entry per time
  std::vector<double> stderr_;  // zeros for a single history
  std::size_t n_hist = 0;
  std::vector<std::uint64_t> seeds;  // per-history RNG streams
};

// One rejection-free event-driven history: exponential waiting times from the
// total rate, site choice proportional to its rate, rate updates confined to
// the flipped site and its neighbors. When the total rate reaches zero the
// configuration is absorbing and the remaining grid holds its density.
RunResult kmc_run(const KmcConfig& config, std::uint64_t history_index = 0);

// Mean and standard error over n_hist independent histories on stream seeds
// derived from (seed, history index); reduction order is fixed so the result
// is identical for every thread count.
RunResult kmc_ensemble(const KmcConfig& config);

struct PowerLawFit {
  double exponent = 0.0;
  double stderr_ = 0.0;
  double r2 = 0.0;
};

// Weighted least squares of log density against log time inside [t_lo, t_hi];
// weights come from the per-point standard errors when all are positive.
PowerLawFit fit_power_exponent(const RunResult& result, double t_lo, double t_hi);

struct SteadyRelaxation {
  double steady_density = 0.0;
  double steady_density_analytic = 0.0;  // √h/(1+√h)
  double relaxation_time = 0.0;
  double relaxation_time_analytic = 0.0;  // (1+h)/(4Γh)
};

// Steady density = mean over the final decade of the run (which must vary by
// less than 2%); relaxation time from an exponential fit of the excess
// density m(t) − m_s over the band where the excess sits between 2% and 50%
// of its initial value.
SteadyRelaxation steady_and_relaxation(const RunResult& result, const RateTable& table);

struct IsingOracle {
  double gamma = 0.0;
  double coupling = 0.0;               // J/(k_B T) from γ = tanh(2 J/k_B T)
  double neighbor_correlation = 0.0;   // ⟨σ_j σ_{j+1}⟩ = tanh(J/k_B T)
  double steady_density = 0.0;         // (1 − ⟨σσ⟩)/2 = √h/(1+√h)
  bool infinite_coupling = false;      // h = 0: zero-temperature limit
};

// Closed-form equilibrium of the glauber-mode rates.
IsingOracle ising_oracle(const RateTable& table);

}  // namespace pairsim
