#include "pairsim/darkstate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>

namespace pairsim {

namespace {

using Occ = std::vector<int>;
using AmpMap = std::map<Occ, Complex>;

// Apply A† = Σ_j a†²_j (n_j+1)^{-1} exactly, with no occupation cap. The largest
// occupation that appears is tracked by the caller.
AmpMap apply_pair_raise_exact(const AmpMap& in) {
  AmpMap out;
  for (const auto& [occ, v] : in) {
    for (std::size_t j = 0; j < occ.size(); ++j) {
      const int n = occ[j];
      Occ o = occ;
      o[j] = n + 2;
      out[o] += v * std::sqrt(static_cast<double>(n + 2) / static_cast<double>(n + 1));
    }
  }
  return out;
}

AmpMap apply_defect_raise_exact(const AmpMap& in, std::size_t site) {
  AmpMap out;
  for (const auto& [occ, v] : in) {
    const int n = occ[site];
    Occ o = occ;
    o[site] = n + 1;
    out[o] += v / std::sqrt(static_cast<double>(n + 1));
  }
  return out;
}

int max_occupation(const AmpMap& m) {
  int top = 0;
  for (const auto& [occ, v] : m)
    for (int n : occ) top = std::max(top, n);
  return top;
}

void validate_spec(const DarkStateSpec& spec) {
  if (spec.num_sites < 2) throw ValidationError("dark_state: need at least 2 sites");
  if (spec.n_pairs < 0) throw ValidationError("dark_state: n_pairs must be non-negative");
  if (spec.n_max < 2) throw ValidationError("dark_state: n_max must be at least 2");
  if (spec.defects.size() % 2 != 0)
    throw ValidationError("dark_state: defects must come in pairs (even count)");
  std::set<int> seen;
  for (int d : spec.defects) {
    if (d < 0 || d >= spec.num_sites)
      throw ValidationError("dark_state: defect site " + std::to_string(d) + " out of range");
    if (!seen.insert(d).second)
      throw ValidationError("dark_state: duplicate defect site " + std::to_string(d));
  }
  const long photons = 2L * spec.n_pairs + static_cast<long>(spec.defects.size());
  if (photons > static_cast<long>(spec.num_sites) * spec.n_max)
    throw CutoffOverflowError("dark_state: " + std::to_string(photons) +
                              " photons cannot fit " + std::to_string(spec.num_sites) +
                              " sites at cutoff " + std::to_string(spec.n_max));
}

}  // namespace

LatticeOperator pair_creation_operator(const FockSpace& space) {
  const auto block = site_dark_pair_raise(space.local_dim());
  LatticeOperator out = embed(block, 0, space);
  for (int j = 1; j < space.num_sites; ++j) out = out + embed(block, j, space);
  out.label = "pair_creation";
  out.hermitian = false;
  return out;
}

StateVector dark_state(const DarkStateSpec& spec) {
  validate_spec(spec);

  AmpMap amp;
  amp[Occ(static_cast<std::size_t>(spec.num_sites), 0)] = Complex(1.0, 0.0);
  for (int k = 0; k < spec.n_pairs; ++k) amp = apply_pair_raise_exact(amp);
  for (int d : spec.defects) amp = apply_defect_raise_exact(amp, static_cast<std::size_t>(d));

  const int top = max_occupation(amp);
  if (top > spec.n_max)
    throw CutoffOverflowError("dark_state: construction reaches occupation " +
                              std::to_string(top) + " above cutoff " +
                              std::to_string(spec.n_max));

  const FockSpace space = spec.space();
  StateVector psi = zero_state(space.tensor());
  for (const auto& [occ, v] : amp)
    psi.amplitudes[static_cast<Eigen::Index>(space.index_of(occ))] = v;
  return psi.normalized();
}

StateVector dark_state(const FockSpace& space, int n_pairs, const std::vector<int>& defects) {
  DarkStateSpec spec;
  spec.num_sites = space.num_sites;
  spec.n_pairs = n_pairs;
  spec.defects = defects;
  spec.n_max = space.n_max;
  spec.periodic = space.periodic;
  return dark_state(spec);
}

double dark_residual(const StateVector& state, const FockSpace& space) {
  if (!(state.space == space.tensor()))
    throw ValidationError("dark_residual: state does not live on the given lattice");
  double worst = 0.0;
  for (int b = 0; b < space.num_bonds(); ++b)
    worst = std::max(worst, apply(pair_jump(b, space), state).norm());
  return worst;
}

namespace {

Complex two_point(const StateVector& state, const SiteOperator& raise_op,
                  const SiteOperator& lower_op, const SiteOperator& diag_op, int i, int j) {
  const TensorSpace& ts = state.space;
  if (i < 0 || j < 0 || i >= static_cast<int>(ts.dims.size()) ||
      j >= static_cast<int>(ts.dims.size()))
    throw ValidationError("correlator: site index out of range");
  LatticeOperator op = (i == j) ? embed(diag_op, i, ts)
                                : embed_product({{raise_op, i}, {lower_op, j}}, ts);
  return expectation(op, state);
}

}  // namespace

Complex correlator(const StateVector& state, int i, int j, CorrelatorOrder order) {
  const int d = state.space.dims.empty() ? 0 : state.space.dims[0];
  for (int dim : state.space.dims)
    if (dim != d) throw ValidationError("correlator: heterogeneous local dimensions");
  if (order == CorrelatorOrder::Single)
    return two_point(state, site_creation(d), site_annihilation(d), site_number(d), i, j);
  return two_point(state, site_pair_raise(d), site_pair_lower(d), site_kerr(d), i, j);
}

RealVector occupation_profile(const StateVector& state) {
  const int num_sites = static_cast<int>(state.space.dims.size());
  RealVector out(num_sites);
  for (int j = 0; j < num_sites; ++j)
    out[j] = expectation(embed(site_number(state.space.dims[static_cast<std::size_t>(j)]), j,
                               state.space),
                         state)
                 .real();
  return out;
}

RealVector parity_profile(const StateVector& state) {
  const int num_sites = static_cast<int>(state.space.dims.size());
  RealVector out(num_sites);
  for (int j = 0; j < num_sites; ++j)
    out[j] = expectation(embed(site_parity(state.space.dims[static_cast<std::size_t>(j)]), j,
                               state.space),
                         state)
                 .real();
  return out;
}

RealVector defect_profile(const StateVector& state) {
  RealVector p = parity_profile(state);
  return (1.0 - p.array()) / 2.0;
}

RealMatrix pair_correlator_matrix(const StateVector& state) {
  const int num_sites = static_cast<int>(state.space.dims.size());
  RealMatrix out(num_sites, num_sites);
  for (int i = 0; i < num_sites; ++i)
    for (int j = 0; j < num_sites; ++j)
      out(i, j) = correlator(state, i, j, CorrelatorOrder::Pair).real();
  return out;
}

}  // namespace pairsim
