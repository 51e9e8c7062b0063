#include "pairsim/mps.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <utility>

#include <unsupported/Eigen/MatrixFunctions>

#if defined(PAIRSIM_USE_LAPACKE)
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>
#endif

#include "pairsim/detail/mcwf_driver.hpp"

namespace pairsim {

namespace {

// Thin SVD, LAPACK divide-and-conquer when available (much faster than
// Eigen's fallback at the bond dimensions TEBD reaches), Eigen otherwise.
void thin_svd(const DenseMatrix& m, DenseMatrix& u, RealVector& sigma, DenseMatrix& vdag) {
  const Eigen::Index rows = m.rows();
  const Eigen::Index cols = m.cols();
  const Eigen::Index k = std::min(rows, cols);
#if defined(PAIRSIM_USE_LAPACKE)
  DenseMatrix a = m;  // zgesdd destroys its input
  u.resize(rows, k);
  sigma.resize(k);
  vdag.resize(k, cols);
  const lapack_int info = LAPACKE_zgesdd(
      LAPACK_COL_MAJOR, 'S', static_cast<lapack_int>(rows), static_cast<lapack_int>(cols),
      a.data(), static_cast<lapack_int>(rows), sigma.data(), u.data(),
      static_cast<lapack_int>(rows), vdag.data(), static_cast<lapack_int>(k));
  if (info == 0) return;
#endif
  Eigen::BDCSVD<DenseMatrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  u = svd.matrixU();
  sigma = svd.singularValues();
  vdag = svd.matrixV().adjoint();
}

// (χl·d)×χr tensor (row α·d+n)  →  χl×(d·χr) matrix (column n·χr+β).
DenseMatrix fold_left(const DenseMatrix& t, int d) {
  const Eigen::Index chi_left = t.rows() / d;
  const Eigen::Index chi_right = t.cols();
  DenseMatrix folded(chi_left, d * chi_right);
  for (Eigen::Index a = 0; a < chi_left; ++a)
    for (int n = 0; n < d; ++n)
      folded.block(a, n * chi_right, 1, chi_right) = t.row(a * d + n);
  return folded;
}

// Inverse of fold_left for a χl×(d·χr) matrix.
DenseMatrix unfold_left(const DenseMatrix& m, Eigen::Index chi_left, int d,
                        Eigen::Index chi_right) {
  DenseMatrix t(chi_left * d, chi_right);
  for (Eigen::Index a = 0; a < chi_left; ++a)
    for (int n = 0; n < d; ++n)
      t.row(a * d + n) = m.block(a, n * chi_right, 1, chi_right);
  return t;
}

// The χl×χr slice of a site tensor at fixed physical index n.
DenseMatrix phys_block(const DenseMatrix& t, int d, int n) {
  const Eigen::Index chi_left = t.rows() / d;
  DenseMatrix block(chi_left, t.cols());
  for (Eigen::Index a = 0; a < chi_left; ++a) block.row(a) = t.row(a * d + n);
  return block;
}

void thin_qr(const DenseMatrix& m, DenseMatrix& q, DenseMatrix& r) {
  const Eigen::Index k = std::min(m.rows(), m.cols());
  Eigen::HouseholderQR<DenseMatrix> qr(m);
  q = qr.householderQ() * DenseMatrix::Identity(m.rows(), k);
  r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
}

void shift_center_right(MpsState& state) {
  const int c = state.canonical_center;
  DenseMatrix q, r;
  thin_qr(state.site_tensors[static_cast<std::size_t>(c)], q, r);
  state.site_tensors[static_cast<std::size_t>(c)] = std::move(q);
  const int d_next = state.phys_dims[static_cast<std::size_t>(c) + 1];
  DenseMatrix& next = state.site_tensors[static_cast<std::size_t>(c) + 1];
  next = unfold_left(r * fold_left(next, d_next), r.rows(), d_next, next.cols());
  state.canonical_center = c + 1;
}

void shift_center_left(MpsState& state) {
  const int c = state.canonical_center;
  DenseMatrix& t = state.site_tensors[static_cast<std::size_t>(c)];
  const int d = state.phys_dims[static_cast<std::size_t>(c)];
  const Eigen::Index chi_right = t.cols();
  DenseMatrix q, r;
  thin_qr(fold_left(t, d).adjoint(), q, r);
  t = unfold_left(q.adjoint(), q.cols(), d, chi_right);
  state.site_tensors[static_cast<std::size_t>(c) - 1] *= r.adjoint();
  state.canonical_center = c - 1;
}

// Smallest kept count whose discarded squared weight stays within
// cutoff·total, clipped by chi_max; accumulates the realized relative loss.
Eigen::Index truncation_rank(const RealVector& sigma, int chi_max, double svd_cutoff,
                             double& cumulative_truncation) {
  const Eigen::Index full = sigma.size();
  const double total = sigma.squaredNorm();
  Eigen::Index keep = full;
  if (total > 0.0) {
    double tail = 0.0;
    while (keep > 1) {
      const double candidate = tail + sigma(keep - 1) * sigma(keep - 1);
      if (candidate > svd_cutoff * total) break;
      tail = candidate;
      --keep;
    }
  }
  if (keep > chi_max) keep = chi_max;
  if (keep < 1) keep = 1;
  if (total > 0.0) {
    double discarded = 0.0;
    for (Eigen::Index i = keep; i < full; ++i) discarded += sigma(i) * sigma(i);
    cumulative_truncation += discarded / total;
  }
  return keep;
}

DenseMatrix scaled_rows(const RealVector& sigma, const DenseMatrix& vdag, Eigen::Index keep) {
  DenseMatrix w = vdag.topRows(keep);
  for (Eigen::Index i = 0; i < keep; ++i) w.row(i) *= sigma(i);
  return w;
}

int checked_site(const MpsState& state, int site, const char* what) {
  if (site < 0 || site >= state.num_sites())
    throw ValidationError(std::string("mps: ") + what + " site out of range");
  return site;
}

// ⟨O⟩ at one site, unnormalized; expects the center at `site`.
Complex one_point_raw(const MpsState& state, int site, const DenseMatrix& op) {
  const DenseMatrix& t = state.site_tensors[static_cast<std::size_t>(site)];
  const int d = state.phys_dims[static_cast<std::size_t>(site)];
  Complex value = 0.0;
  for (int n_out = 0; n_out < d; ++n_out)
    for (int n_in = 0; n_in < d; ++n_in) {
      const Complex coeff = op(n_out, n_in);
      if (coeff == Complex(0.0)) continue;
      value += coeff *
               phys_block(t, d, n_out).conjugate().cwiseProduct(phys_block(t, d, n_in)).sum();
    }
  return value;
}

Complex one_point(MpsState& state, int site, const DenseMatrix& op) {
  move_center(state, site);
  return one_point_raw(state, site, op) / state.squared_norm();
}

// ⟨A_p B_q⟩ for p < q by transfer contraction with the center parked at p.
Complex two_point(MpsState& state, int p, int q, const DenseMatrix& op_p,
                  const DenseMatrix& op_q) {
  move_center(state, p);
  const auto block_at = [&](int site, int n) {
    return phys_block(state.site_tensors[static_cast<std::size_t>(site)],
                      state.phys_dims[static_cast<std::size_t>(site)], n);
  };

  const int d_p = state.phys_dims[static_cast<std::size_t>(p)];
  const Eigen::Index chi = state.site_tensors[static_cast<std::size_t>(p)].cols();
  DenseMatrix env = DenseMatrix::Zero(chi, chi);
  for (int n_out = 0; n_out < d_p; ++n_out)
    for (int n_in = 0; n_in < d_p; ++n_in) {
      const Complex coeff = op_p(n_out, n_in);
      if (coeff == Complex(0.0)) continue;
      env.noalias() += coeff * (block_at(p, n_out).adjoint() * block_at(p, n_in));
    }

  for (int site = p + 1; site < q; ++site) {
    const int d = state.phys_dims[static_cast<std::size_t>(site)];
    const Eigen::Index chi_next = state.site_tensors[static_cast<std::size_t>(site)].cols();
    DenseMatrix carried = DenseMatrix::Zero(chi_next, chi_next);
    for (int n = 0; n < d; ++n) {
      const DenseMatrix block = block_at(site, n);
      carried.noalias() += block.adjoint() * env * block;
    }
    env.swap(carried);
  }

  const int d_q = state.phys_dims[static_cast<std::size_t>(q)];
  Complex value = 0.0;
  for (int n_out = 0; n_out < d_q; ++n_out)
    for (int n_in = 0; n_in < d_q; ++n_in) {
      const Complex coeff = op_q(n_out, n_in);
      if (coeff == Complex(0.0)) continue;
      value += coeff * (block_at(q, n_out).adjoint() * env * block_at(q, n_in)).trace();
    }
  return value / state.squared_norm();
}

}  // namespace

int MpsState::bond_dim(int bond) const {
  if (bond < 0 || bond + 1 >= num_sites())
    throw ValidationError("mps: bond index out of range");
  return static_cast<int>(site_tensors[static_cast<std::size_t>(bond)].cols());
}

std::vector<int> MpsState::bond_dims() const {
  std::vector<int> dims;
  for (int b = 0; b + 1 < num_sites(); ++b) dims.push_back(bond_dim(b));
  return dims;
}

double MpsState::squared_norm() const {
  return site_tensors[static_cast<std::size_t>(canonical_center)].squaredNorm();
}

double MpsState::norm() const { return std::sqrt(squared_norm()); }

void MpsState::validate() const {
  if (site_tensors.empty()) throw ValidationError("mps: state has no site tensors");
  if (phys_dims.size() != site_tensors.size())
    throw ValidationError("mps: physical dimension list does not match the tensor count");
  if (chi_max < 1) throw ValidationError("mps: chi_max must be at least 1");
  if (!(svd_cutoff >= 0.0) || svd_cutoff >= 1.0)
    throw ValidationError("mps: svd_cutoff must lie in [0, 1)");
  if (canonical_center < 0 || canonical_center >= num_sites())
    throw ValidationError("mps: canonical center out of range");
  Eigen::Index left = 1;
  for (std::size_t j = 0; j < site_tensors.size(); ++j) {
    const int d = phys_dims[j];
    if (d < 1) throw ValidationError("mps: physical dimension must be positive");
    if (site_tensors[j].rows() != left * d)
      throw ValidationError("mps: site tensor rows do not chain with the previous bond");
    left = site_tensors[j].cols();
    if (left < 1) throw ValidationError("mps: bond dimension must be positive");
  }
  if (left != 1) throw ValidationError("mps: right boundary bond must have dimension 1");
}

MpsState from_product_state(const std::vector<int>& occupations, const FockSpace& space,
                            int chi_max, double svd_cutoff) {
  if (static_cast<int>(occupations.size()) != space.num_sites)
    throw ValidationError("mps: occupation list does not match the chain length");
  const int d = space.n_max + 1;
  MpsState state;
  state.chi_max = chi_max;
  state.svd_cutoff = svd_cutoff;
  for (const int n : occupations) {
    if (n < 0 || n > space.n_max)
      throw ValidationError("mps: occupation outside the local cutoff");
    DenseMatrix t = DenseMatrix::Zero(d, 1);
    t(n, 0) = 1.0;
    state.site_tensors.push_back(std::move(t));
    state.phys_dims.push_back(d);
  }
  state.canonical_center = 0;
  state.validate();
  return state;
}

MpsState from_dense(const StateVector& psi, int chi_max, double svd_cutoff) {
  const std::vector<int>& dims = psi.space.dims;
  if (dims.empty()) throw ValidationError("mps: state space has no tensor factors");
  if (psi.amplitudes.size() != static_cast<Eigen::Index>(psi.space.dimension()))
    throw ValidationError("mps: amplitude count does not match the space dimension");
  MpsState state;
  state.phys_dims = dims;
  state.chi_max = chi_max;
  state.svd_cutoff = svd_cutoff;

  const int num_sites = static_cast<int>(dims.size());
  Eigen::Index cols = psi.amplitudes.size() / dims[0];
  // factor 0 is the slowest index, so the first split reads the amplitudes
  // row-major
  using RowMajorMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  DenseMatrix m =
      Eigen::Map<const RowMajorMatrix>(psi.amplitudes.data(), dims[0], cols);

  DenseMatrix u, vdag;
  RealVector sigma;
  for (int j = 0; j + 1 < num_sites; ++j) {
    thin_svd(m, u, sigma, vdag);
    const Eigen::Index keep =
        truncation_rank(sigma, chi_max, svd_cutoff, state.cumulative_truncation);
    state.site_tensors.push_back(u.leftCols(keep));
    const int d_next = dims[static_cast<std::size_t>(j) + 1];
    cols /= d_next;
    m = unfold_left(scaled_rows(sigma, vdag, keep), keep, d_next, cols);
  }
  state.site_tensors.push_back(std::move(m));
  state.canonical_center = num_sites - 1;
  state.validate();
  return state;
}

StateVector to_dense(const MpsState& state, const FockSpace& space) {
  state.validate();
  if (!(space.tensor().dims == state.phys_dims))
    throw ValidationError("mps: target space does not match the state's local dimensions");
  DenseMatrix v = state.site_tensors[0];
  Eigen::Index block_rows = state.phys_dims[0];
  for (int j = 1; j < state.num_sites(); ++j) {
    const int d = state.phys_dims[static_cast<std::size_t>(j)];
    const DenseMatrix& t = state.site_tensors[static_cast<std::size_t>(j)];
    v = unfold_left(v * fold_left(t, d), block_rows, d, t.cols());
    block_rows *= d;
  }
  StateVector out = zero_state(space.tensor());
  out.amplitudes = v.col(0);
  return out;
}

void move_center(MpsState& state, int site) {
  checked_site(state, site, "center target");
  while (state.canonical_center < site) shift_center_right(state);
  while (state.canonical_center > site) shift_center_left(state);
}

double isometry_defect(const MpsState& state) {
  state.validate();
  double worst = 0.0;
  for (int j = 0; j < state.num_sites(); ++j) {
    if (j == state.canonical_center) continue;
    const DenseMatrix& t = state.site_tensors[static_cast<std::size_t>(j)];
    DenseMatrix gram;
    if (j < state.canonical_center) {
      gram = t.adjoint() * t;
    } else {
      const DenseMatrix folded = fold_left(t, state.phys_dims[static_cast<std::size_t>(j)]);
      gram = folded * folded.adjoint();
    }
    gram -= DenseMatrix::Identity(gram.rows(), gram.cols());
    worst = std::max(worst, gram.cwiseAbs().maxCoeff());
  }
  return worst;
}

void apply_two_site(MpsState& state, const TwoSiteGate& gate, int bond) {
  apply_two_site(state, gate, bond, state.chi_max, state.svd_cutoff);
}

void apply_two_site(MpsState& state, const TwoSiteGate& gate, int bond, int chi_max,
                    double svd_cutoff) {
  if (bond < 0 || bond + 1 >= state.num_sites())
    throw ValidationError("mps: gate bond out of range");
  if (chi_max < 1) throw ValidationError("mps: chi_max must be at least 1");
  if (!(svd_cutoff >= 0.0) || svd_cutoff >= 1.0)
    throw ValidationError("mps: svd_cutoff must lie in [0, 1)");
  const int d1 = state.phys_dims[static_cast<std::size_t>(bond)];
  const int d2 = state.phys_dims[static_cast<std::size_t>(bond) + 1];
  if (gate.matrix.rows() != d1 * d2 || gate.matrix.cols() != d1 * d2)
    throw ValidationError("mps: gate dimension does not match the bond's local dimensions");

  if (state.canonical_center < bond)
    move_center(state, bond);
  else if (state.canonical_center > bond + 1)
    move_center(state, bond + 1);

  const DenseMatrix& t_left = state.site_tensors[static_cast<std::size_t>(bond)];
  const DenseMatrix& t_right = state.site_tensors[static_cast<std::size_t>(bond) + 1];
  const Eigen::Index chi_l = t_left.rows() / d1;
  const Eigen::Index chi_r = t_right.cols();

  // two-site block, (χl·d1)×(d2·χr) with row α·d1+n1 and column n2·χr+β
  DenseMatrix theta_flat = t_left * fold_left(t_right, d2);
  const double pre_sq = theta_flat.squaredNorm();

  // regroup physical indices to the rows so the gate acts as one product
  DenseMatrix theta_perm(d1 * d2, chi_l * chi_r);
  for (Eigen::Index a = 0; a < chi_l; ++a)
    for (int n1 = 0; n1 < d1; ++n1)
      for (int n2 = 0; n2 < d2; ++n2)
        theta_perm.block(n1 * d2 + n2, a * chi_r, 1, chi_r) =
            theta_flat.block(a * d1 + n1, n2 * chi_r, 1, chi_r);

  theta_perm = gate.matrix * theta_perm;

  for (Eigen::Index a = 0; a < chi_l; ++a)
    for (int n1 = 0; n1 < d1; ++n1)
      for (int n2 = 0; n2 < d2; ++n2)
        theta_flat.block(a * d1 + n1, n2 * chi_r, 1, chi_r) =
            theta_perm.block(n1 * d2 + n2, a * chi_r, 1, chi_r);

  DenseMatrix u, vdag;
  RealVector sigma;
  thin_svd(theta_flat, u, sigma, vdag);
  const Eigen::Index keep =
      truncation_rank(sigma, chi_max, svd_cutoff, state.cumulative_truncation);
  DenseMatrix w = scaled_rows(sigma, vdag, keep);
  if (gate.unitary) {
    // a unitary gate cannot change the norm, so charge any truncation loss
    // back to the kept weight
    const double kept_sq = sigma.head(keep).squaredNorm();
    if (kept_sq > 0.0) w *= std::sqrt(pre_sq / kept_sq);
  }
  state.site_tensors[static_cast<std::size_t>(bond)] = u.leftCols(keep);
  state.site_tensors[static_cast<std::size_t>(bond) + 1] = unfold_left(w, keep, d2, chi_r);
  state.canonical_center = bond + 1;
}

Complex measure(MpsState& state, const ObservableSpec& spec) {
  const auto dim_at = [&](int site) {
    return state.phys_dims[static_cast<std::size_t>(checked_site(state, site, "observable"))];
  };
  switch (spec.kind) {
    case ObservableSpec::Kind::SiteOccupation:
      return one_point(state, spec.i, site_number(dim_at(spec.i)).matrix);
    case ObservableSpec::Kind::SiteParity:
      return one_point(state, spec.i, site_parity(dim_at(spec.i)).matrix);
    case ObservableSpec::Kind::DefectDensity: {
      Complex total = 0.0;
      for (int j = 0; j < state.num_sites(); ++j)
        total += one_point(state, j, site_defect_projector(dim_at(j)).matrix);
      return total / static_cast<double>(state.num_sites());
    }
    case ObservableSpec::Kind::TotalNumber: {
      Complex total = 0.0;
      for (int j = 0; j < state.num_sites(); ++j)
        total += one_point(state, j, site_number(dim_at(j)).matrix);
      return total;
    }
    case ObservableSpec::Kind::SingleCorrelator: {
      if (spec.i == spec.j) return one_point(state, spec.i, site_number(dim_at(spec.i)).matrix);
      const DenseMatrix raise = site_creation(dim_at(spec.i)).matrix;
      const DenseMatrix lower = site_annihilation(dim_at(spec.j)).matrix;
      return spec.i < spec.j ? two_point(state, spec.i, spec.j, raise, lower)
                             : two_point(state, spec.j, spec.i, lower, raise);
    }
    case ObservableSpec::Kind::PairCorrelator: {
      if (spec.i == spec.j) return one_point(state, spec.i, site_kerr(dim_at(spec.i)).matrix);
      const DenseMatrix raise = site_pair_raise(dim_at(spec.i)).matrix;
      const DenseMatrix lower = site_pair_lower(dim_at(spec.j)).matrix;
      return spec.i < spec.j ? two_point(state, spec.i, spec.j, raise, lower)
                             : two_point(state, spec.j, spec.i, lower, raise);
    }
    case ObservableSpec::Kind::Operator:
    case ObservableSpec::Kind::FidelityTo:
      throw ValidationError(
          "mps: Operator and FidelityTo observables are dense-backend only");
  }
  throw ValidationError("mps: unknown observable kind");
}

MpsTebdEngine::MpsTebdEngine(const BondModel& model, const MpsState& psi0,
                             const TrajectoryConfig& cfg)
    : model_(&model), state_(psi0), observables_(cfg.observables) {
  for (const auto& spec : observables_)
    if (spec.kind == ObservableSpec::Kind::Operator ||
        spec.kind == ObservableSpec::Kind::FidelityTo)
      throw ValidationError(
          "mps: Operator and FidelityTo observables are dense-backend only");

  const auto add_gates = [&](int parity, double step) {
    for (int b = parity; b < model.num_bonds(); b += 2) {
      TwoSiteGate gate;
      gate.matrix = (Complex(0.0, -1.0) * step * model.effective_bond_generator(b)).exp();
      gate.label = "propagator";
      gate.unitary = false;  // decay under the effective generator is physical
      sweep_.emplace_back(b, std::move(gate));
    }
  };
  add_gates(0, cfg.dt / 2.0);  // even bonds, half step
  add_gates(1, cfg.dt);        // odd bonds, full step
  add_gates(0, cfg.dt / 2.0);  // even bonds, half step

  for (const auto& ch : model.channels) {
    if (ch.rate == 0.0) continue;  // channel indexing matches the dense backend
    channels_.push_back(ch);
  }
}

double MpsTebdEngine::advance() {
  for (const auto& [bond, gate] : sweep_) apply_two_site(state_, gate, bond);
  return state_.squared_norm();
}

// The two-site block with orthonormal environments carries the full state, so
// ‖l·θ‖_F² is exactly ⟨ψ|l†l|ψ⟩ on the unnormalized state.
void MpsTebdEngine::channel_weights(std::vector<double>& w) {
  w.resize(channels_.size());
  int cached_bond = -1;
  DenseMatrix theta;
  for (std::size_t c = 0; c < channels_.size(); ++c) {
    const BondChannel& ch = channels_[c];
    if (ch.bond != cached_bond) {
      if (state_.canonical_center < ch.bond)
        move_center(state_, ch.bond);
      else if (state_.canonical_center > ch.bond + 1)
        move_center(state_, ch.bond + 1);
      const int d1 = state_.phys_dims[static_cast<std::size_t>(ch.bond)];
      const int d2 = state_.phys_dims[static_cast<std::size_t>(ch.bond) + 1];
      const DenseMatrix& t_left = state_.site_tensors[static_cast<std::size_t>(ch.bond)];
      const DenseMatrix& t_right = state_.site_tensors[static_cast<std::size_t>(ch.bond) + 1];
      const Eigen::Index chi_l = t_left.rows() / d1;
      const Eigen::Index chi_r = t_right.cols();
      const DenseMatrix theta_flat = t_left * fold_left(t_right, d2);
      theta.resize(d1 * d2, chi_l * chi_r);
      for (Eigen::Index a = 0; a < chi_l; ++a)
        for (int n1 = 0; n1 < d1; ++n1)
          for (int n2 = 0; n2 < d2; ++n2)
            theta.block(n1 * d2 + n2, a * chi_r, 1, chi_r) =
                theta_flat.block(a * d1 + n1, n2 * chi_r, 1, chi_r);
      cached_bond = ch.bond;
    }
    w[c] = ch.rate * (ch.op * theta).squaredNorm();
  }
}

void MpsTebdEngine::apply_jump(int channel) {
  const BondChannel& ch = channels_.at(static_cast<std::size_t>(channel));
  TwoSiteGate gate;
  gate.matrix = ch.op;
  gate.label = ch.label;
  gate.unitary = false;
  apply_two_site(state_, gate, ch.bond);
  const double nrm = state_.norm();
  if (!(nrm > 0.0)) throw ConvergenceError("mps: jump channel annihilated the state");
  state_.site_tensors[static_cast<std::size_t>(state_.canonical_center)] /= nrm;
}

void MpsTebdEngine::measure(std::vector<double>& out) {
  out.resize(observables_.size());
  for (std::size_t o = 0; o < observables_.size(); ++o)
    out[o] = pairsim::measure(state_, observables_[o]).real();
}

int tebd_trajectory_step(MpsTebdEngine& engine, Rng& rng, double& survival_threshold) {
  const double squared_norm = engine.advance();
  if (!(squared_norm < survival_threshold)) return -1;
  std::vector<double> weights;
  engine.channel_weights(weights);
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  detail::require_jumpable(total, squared_norm);
  const int channel = detail::select_channel(weights, total, rng.uniform());
  engine.apply_jump(channel);
  survival_threshold = rng.uniform_pos();
  return channel;
}

namespace {

void check_mps_initial(const BondModel& model, const MpsState& psi0) {
  psi0.validate();
  if (!(psi0.phys_dims == model.space.tensor().dims))
    throw ValidationError("trajectory: initial state lives on a different space");
  if (std::abs(psi0.norm() - 1.0) > 1e-9)
    throw ValidationError("trajectory: initial state must be normalized");
}

}  // namespace

TrajectoryResult run_trajectory(const BondModel& model, const MpsState& psi0,
                                const TrajectoryConfig& cfg, std::size_t traj_index) {
  model.validate();
  check_mps_initial(model, psi0);
  cfg.validate(max_rate_norm(model));
  MpsTebdEngine engine(model, psi0, cfg);
  return detail::mcwf_drive(engine, cfg, cfg.observables.size(), traj_index);
}

ObservableSeries run_ensemble(const BondModel& model, const MpsState& psi0,
                              const TrajectoryConfig& cfg) {
  model.validate();
  check_mps_initial(model, psi0);
  cfg.validate(max_rate_norm(model));
  TrajectoryConfig local = cfg;
  local.jump_log = false;
  return detail::ensemble_collect(cfg, [&](std::size_t idx) {
    MpsTebdEngine engine(model, psi0, local);
    return detail::mcwf_drive(engine, local, local.observables.size(), idx).values;
  });
}

}  // namespace pairsim
