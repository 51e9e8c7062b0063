#include "pairsim/cqed.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "pairsim/fock.hpp"

namespace pairsim {

namespace {

constexpr int kOscFactor = 2;  // three-level ancilla position in the factor list
constexpr int kTlsFactor = 3;

SiteOperator level_transition(int dim, int to, int from) {
  DenseMatrix m = DenseMatrix::Zero(dim, dim);
  m(to, from) = 1.0;
  return {m, "|" + std::to_string(to) + "><" + std::to_string(from) + "|"};
}

SiteOperator level_projector(int dim, int level) { return level_transition(dim, level, level); }

// a_L^2 - a_R^2 (minus_sign) or a_L^2 + a_R^2 embedded in `space`
LatticeOperator pair_drain(const TensorSpace& space, int d, bool minus_sign) {
  const LatticeOperator left = embed(site_pair_lower(d), 0, space);
  const LatticeOperator right = embed(site_pair_lower(d), 1, space);
  return minus_sign ? left - right : left + right;
}

LatticeOperator cavity_occupation_sum(const TensorSpace& space, int d) {
  return embed(site_number(d), 0, space) + embed(site_number(d), 1, space);
}

void mark_hermitian(LatticeOperator& op) {
  const double asym = max_norm_diff(op, op.adjoint());
  const double scale = std::max(max_abs(op.matrix), 1.0);
  if (asym > 1e-12 * scale)
    throw Error("cqed: assembled Hamiltonian is not Hermitian");
  op.hermitian = true;
}

// A + A^dagger
LatticeOperator with_adjoint(const LatticeOperator& a) { return a + a.adjoint(); }

}  // namespace

TensorSpace CqedParams::space() const {
  std::vector<int> dims{cavity_dim(), cavity_dim(), 3};
  if (include_tls) dims.push_back(2);
  return TensorSpace(dims);
}

void CqedParams::validate() const {
  if (n_max < 2)
    throw ValidationError("cqed: pair operators need a cavity cutoff n_max >= 2");
  if (!(kappa_f > 0.0))
    throw ValidationError("cqed: the ancilla decay rate kappa_f must be positive");
  if (!(delta1 > 0.0))
    throw ValidationError("cqed: the oscillator detuning delta1 must be positive");
  if (include_tls && !(delta2 > 0.0))
    throw ValidationError("cqed: the TLS detuning delta2 must be positive");
  if (chi < 0.0 || chi_cavity_osc < 0.0 || chi_cavity_tls < 0.0)
    throw ValidationError("cqed: Kerr coefficients must be non-negative");
}

double CqedParams::coupling_scale() const {
  double g = std::max(std::abs(g1), std::abs(g2));
  if (include_tls) g = std::max(g, std::abs(g3));
  return g;
}

double CqedParams::detuning_ratio() const {
  const double delta = include_tls ? std::min(delta1, delta2) : delta1;
  const double g = coupling_scale();
  return g > 0.0 ? delta / g : std::numeric_limits<double>::infinity();
}

double CqedParams::elimination_ratio() const {
  const double delta = include_tls ? std::min(delta1, delta2) : delta1;
  const double g = coupling_scale();
  return g > 0.0 ? kappa_f * delta / (g * g) : std::numeric_limits<double>::infinity();
}

LindbladModel build_full_model(const CqedParams& p) {
  p.validate();
  const TensorSpace space = p.space();
  const int d = p.cavity_dim();

  const LatticeOperator occupation = cavity_occupation_sum(space, d);
  const LatticeOperator drain_minus = pair_drain(space, d, true);
  const LatticeOperator drain_plus = pair_drain(space, d, false);

  // Level energies are measured from |g> (x) |0>: the two-photon g -> f
  // transition is resonant while the intermediate |e> sits delta1 BELOW the
  // working manifold (and the TLS excited state delta2 below).  Detuning
  // downwards makes every second-order light shift positive, so the
  // drive-induced quartics carry a + sign and a non-negative hardware Kerr
  // coefficient chi can cancel them.
  LatticeOperator h =
      Complex(-p.chi, 0.0) * (embed(site_kerr(d), 0, space) + embed(site_kerr(d), 1, space));
  h = h + Complex(-p.delta1, 0.0) * embed(level_projector(3, 1), kOscFactor, space);
  h = h + Complex(-p.chi_cavity_osc, 0.0) *
              (occupation * (embed(level_projector(3, 1), kOscFactor, space) +
                             Complex(2.0, 0.0) * embed(level_projector(3, 2), kOscFactor, space)));
  h = h + with_adjoint(Complex(p.g1.real(), p.g1.imag()) *
                       (drain_minus * embed(level_transition(3, 1, 0), kOscFactor, space)));
  h = h + with_adjoint(Complex(p.g2.real(), p.g2.imag()) *
                       (drain_plus.adjoint() * embed(level_transition(3, 2, 1), kOscFactor, space)));
  if (p.include_tls) {
    h = h + Complex(-p.delta2, 0.0) * embed(level_projector(2, 1), kTlsFactor, space);
    h = h + Complex(-p.chi_cavity_tls, 0.0) *
                (occupation * embed(level_projector(2, 1), kTlsFactor, space));
    h = h + with_adjoint(Complex(p.g3.real(), p.g3.imag()) *
                         (drain_plus * embed(level_transition(2, 1, 0), kTlsFactor, space)));
  }
  mark_hermitian(h);
  h.label = "cqed full";

  LindbladModel model;
  model.H = std::move(h);
  // Population decay at kappa_f means channel rate kappa_f/2 under the
  // 2 l rho l+ convention.
  model.jumps.emplace_back(embed(level_transition(3, 0, 2), kOscFactor, space), p.kappa_f / 2.0);
  if (p.include_tls)
    model.jumps.emplace_back(embed(level_transition(2, 0, 1), kTlsFactor, space), p.kappa_f / 2.0);
  model.validate();
  return model;
}

LindbladModel build_effective_model(const CqedParams& p) {
  p.validate();
  const TensorSpace space = p.cavities().tensor();
  const int d = p.cavity_dim();

  const double c1 = std::norm(p.g1) / p.delta1;
  const LatticeOperator drain_minus = pair_drain(space, d, true);
  LatticeOperator h =
      Complex(-p.chi, 0.0) * (embed(site_kerr(d), 0, space) + embed(site_kerr(d), 1, space));
  h = h + Complex(c1, 0.0) * (drain_minus.adjoint() * drain_minus);
  if (p.include_tls) {
    const double c3 = std::norm(p.g3) / p.delta2;
    const LatticeOperator drain_plus = pair_drain(space, d, false);
    h = h + Complex(c3, 0.0) * (drain_plus.adjoint() * drain_plus);
  }
  mark_hermitian(h);
  h.label = "cqed effective";

  LindbladModel model;
  model.H = std::move(h);
  const double rate = 2.0 * std::norm(p.g1 * p.g2) / (p.delta1 * p.delta1 * p.kappa_f);
  model.jumps.emplace_back(pair_jump(0, p.cavities()), rate);
  model.validate();
  return model;
}

CqedParams kerr_cancellation_params(CqedParams base) {
  base.include_tls = true;
  base.validate();
  const double c1 = std::norm(base.g1) / base.delta1;
  base.chi = 2.0 * c1;
  base.g3 = Complex(std::sqrt(c1 * base.delta2), 0.0);
  return base;
}

SchriefferWolffReport schrieffer_wolff_check(const CqedParams& p) {
  p.validate();
  const TensorSpace space = p.space();
  const int d = p.cavity_dim();
  const LindbladModel full = build_full_model(p);

  const LatticeOperator drain_minus = pair_drain(space, d, true);
  const LatticeOperator drain_plus = pair_drain(space, d, false);

  // Anti-Hermitian generator removing the couplings at first order:
  // s_ab = h_ab / (E_b - E_a), with the intermediates detuned BELOW the
  // working manifold (E_e = -delta1, E_f^tls = -delta2) as in the full model.
  LatticeOperator s = Complex(1.0 / p.delta1, 0.0) *
                      (Complex(p.g1.real(), p.g1.imag()) *
                       (drain_minus * embed(level_transition(3, 1, 0), kOscFactor, space)));
  LatticeOperator s2 = Complex(-1.0 / p.delta1, 0.0) *
                       (Complex(p.g2.real(), p.g2.imag()) *
                        (drain_plus.adjoint() * embed(level_transition(3, 2, 1), kOscFactor, space)));
  s = s + s2;
  if (p.include_tls) {
    LatticeOperator s3 = Complex(1.0 / p.delta2, 0.0) *
                         (Complex(p.g3.real(), p.g3.imag()) *
                          (drain_plus * embed(level_transition(2, 1, 0), kTlsFactor, space)));
    s = s + s3;
  }
  s = s - s.adjoint();

  const DenseMatrix s_dense = DenseMatrix(s.matrix);
  const DenseMatrix u = (-s_dense).exp();  // unitary since s is anti-Hermitian
  const DenseMatrix transformed = u * DenseMatrix(full.H.matrix) * u.adjoint();

  // Effective block Hamiltonian: |g1|^2/delta1 T-+T- on |g><g|,
  // |g2|^2/delta1 T++T+ on |f><f|, (g1 g2/delta1) T++ T- on |f><g| (+ h.c.),
  // plus the Kerr terms that survive the projection (the |f> cross-Kerr keeps
  // its sign from the full model; the |e> projector drops out of the block).
  const double c1 = std::norm(p.g1) / p.delta1;
  const double c2 = std::norm(p.g2) / p.delta1;
  const Complex c12 = p.g1 * p.g2 / p.delta1;
  const LatticeOperator proj_g = embed(level_projector(3, 0), kOscFactor, space);
  const LatticeOperator proj_f = embed(level_projector(3, 2), kOscFactor, space);
  LatticeOperator target = Complex(c1, 0.0) * (drain_minus.adjoint() * drain_minus) * proj_g;
  target = target + Complex(c2, 0.0) * (drain_plus.adjoint() * drain_plus) * proj_f;
  target = target + with_adjoint(c12 * (drain_plus.adjoint() * drain_minus *
                                        embed(level_transition(3, 2, 0), kOscFactor, space)));
  target =
      target + Complex(-p.chi, 0.0) * ((embed(site_kerr(d), 0, space) +
                                        embed(site_kerr(d), 1, space)) *
                                       (proj_g + proj_f));
  target = target + Complex(-2.0 * p.chi_cavity_osc, 0.0) *
                        (cavity_occupation_sum(space, d) * proj_f);
  if (p.include_tls) {
    const double c3 = std::norm(p.g3) / p.delta2;
    target = target + Complex(c3, 0.0) * ((drain_plus.adjoint() * drain_plus) * (proj_g + proj_f));
  }

  // restrict both sides to the {g,f} (x |0>) block
  LatticeOperator block = proj_g + proj_f;
  if (p.include_tls) block = block * embed(level_projector(2, 0), kTlsFactor, space);
  const DenseMatrix block_dense = DenseMatrix(block.matrix);
  const DenseMatrix target_dense = DenseMatrix(target.matrix);
  const DenseMatrix gproj = DenseMatrix((p.include_tls
                                             ? proj_g * embed(level_projector(2, 0), kTlsFactor,
                                                              space)
                                             : proj_g)
                                            .matrix);

  const DenseMatrix diff = block_dense * (transformed - target_dense) * block_dense;
  const DenseMatrix diff_gg = gproj * (transformed - target_dense) * gproj;

  SchriefferWolffReport report;
  report.residual = diff.cwiseAbs().maxCoeff();
  report.gg_block_residual = diff_gg.cwiseAbs().maxCoeff();
  report.hierarchy = p.detuning_ratio();
  report.hierarchy_ok = report.hierarchy >= 10.0;
  return report;
}

ReductionReport reduction_error(const CqedParams& p, const std::vector<double>& t_grid,
                                const DensityMatrix& rho0_cavities, double rtol) {
  p.validate();
  if (t_grid.empty()) throw ValidationError("cqed: the reduction needs a non-empty time grid");
  const TensorSpace cavity_space = p.cavities().tensor();
  if (!(rho0_cavities.space == cavity_space))
    throw ValidationError("cqed: the initial state must live on the two-cavity space");
  const TensorSpace space = p.space();
  if (space.dimension() > 400)
    throw ValidationError("cqed: full-model dimension exceeds the dense budget of 400");
  rho0_cavities.validate();

  const LindbladModel full = build_full_model(p);
  const LindbladModel effective = build_effective_model(p);

  // ancillas start in their ground levels
  DenseMatrix ancilla = DenseMatrix::Zero(3, 3);
  ancilla(0, 0) = 1.0;
  DenseMatrix rho_full = Eigen::kroneckerProduct(rho0_cavities.rho, ancilla).eval();
  if (p.include_tls) {
    DenseMatrix tls = DenseMatrix::Zero(2, 2);
    tls(0, 0) = 1.0;
    rho_full = Eigen::kroneckerProduct(rho_full, tls).eval();
  }

  const std::vector<DensityMatrix> full_states =
      evolve(full, DensityMatrix{rho_full, space}, t_grid, rtol);
  const std::vector<DensityMatrix> effective_states =
      evolve(effective, rho0_cavities, t_grid, rtol);

  LatticeOperator excited = embed(level_projector(3, 1), kOscFactor, space) +
                            embed(level_projector(3, 2), kOscFactor, space);
  if (p.include_tls) excited = excited + embed(level_projector(2, 1), kTlsFactor, space);

  ReductionReport report;
  report.times = t_grid;
  report.distances.reserve(t_grid.size());
  double population_sum = 0.0;
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    const DensityMatrix reduced = partial_trace(full_states[i], {0, 1});
    const double dist = trace_distance(reduced, effective_states[i]);
    report.distances.push_back(dist);
    report.max_trace_distance = std::max(report.max_trace_distance, dist);
    const double population = observables(full_states[i], {excited})[0].real();
    report.max_excited_population = std::max(report.max_excited_population, population);
    population_sum += population;
  }
  report.mean_excited_population = population_sum / static_cast<double>(t_grid.size());
  return report;
}

}  // namespace pairsim
