#pragma once

#include <vector>

#include "pairsim/fock.hpp"
#include "pairsim/state.hpp"

namespace pairsim {

// Specification of an exact steady state of the pair-dissipation channels:
// n_pairs applications of the smeared pair-raising operator
//   A† = Σ_j a†²_j (n_j + 1)^{-1}
// onto the vacuum, decorated afterwards by an even number of single-photon
// (odd site parity) defects a'†_d = a†_d (n_d + 1)^{-1}, one per listed site.
struct DarkStateSpec {
  int num_sites = 0;
  int n_pairs = 0;
  std::vector<int> defects;  // distinct sites, even count
  int n_max = 0;
  bool periodic = false;

  FockSpace space() const { return FockSpace(num_sites, n_max, periodic); }
};

// A† as a sparse operator on the full lattice. Requires local_dim >= 3.
LatticeOperator pair_creation_operator(const FockSpace& space);

// Normalized dark state. Construction works on exact occupation lists without a
// cutoff; if any contributing amplitude would need an occupation above n_max the
// state is not representable and CutoffOverflowError is thrown (never silently
// truncated).
StateVector dark_state(const DarkStateSpec& spec);
StateVector dark_state(const FockSpace& space, int n_pairs,
                       const std::vector<int>& defects = {});

// max over bonds b of ||l_b |state>||_2 with unit-rate pair jumps.
double dark_residual(const StateVector& state, const FockSpace& space);

enum class CorrelatorOrder { Single, Pair };

// Single: <a†_i a_j> (i = j gives <n_i>). Pair: <a†²_i a²_j> (i = j gives
// <n_i(n_i-1)>). The lattice geometry is read off the state's tensor space.
Complex correlator(const StateVector& state, int i, int j, CorrelatorOrder order);

// Per-site measurement profiles of a normalized pure state.
RealVector occupation_profile(const StateVector& state);
RealVector parity_profile(const StateVector& state);         // <(-1)^n_j>
RealVector defect_profile(const StateVector& state);         // <(1-(-1)^n_j)/2>
RealMatrix pair_correlator_matrix(const StateVector& state);  // Re <a†²_i a²_j>

}  // namespace pairsim
