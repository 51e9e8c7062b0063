#include "pairsim/lindblad.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <limits>

namespace pairsim {

void LindbladModel::validate() const {
  if (!H.hermitian) throw ValidationError("lindblad model: Hamiltonian must be flagged Hermitian");
  const Eigen::Index d = static_cast<Eigen::Index>(H.space.dimension());
  if (H.matrix.rows() != d || H.matrix.cols() != d)
    throw ValidationError("lindblad model: Hamiltonian dimension mismatch");
  for (const auto& [l, rate] : jumps) {
    if (!(l.space == H.space))
      throw ValidationError("lindblad model: jump operator lives on a different space");
    if (rate < 0.0) throw ValidationError("lindblad model: negative jump rate");
  }
}

LindbladModel empty_model(const TensorSpace& space) {
  LindbladModel model;
  model.H.space = space;
  model.H.matrix =
      SparseMatrix(static_cast<Eigen::Index>(space.dimension()),
                   static_cast<Eigen::Index>(space.dimension()));
  model.H.hermitian = true;
  model.H.label = "zero";
  return model;
}

namespace {

// Precomputed operators for the right-hand side of the master equation.
struct RhsCache {
  const LindbladModel* model;
  std::vector<SparseMatrix> ldag_l;  // l†l per jump

  explicit RhsCache(const LindbladModel& m) : model(&m) {
    m.validate();
    ldag_l.reserve(m.jumps.size());
    for (const auto& [l, rate] : m.jumps) {
      SparseMatrix p = SparseMatrix(l.matrix.adjoint()) * l.matrix;
      p.makeCompressed();
      ldag_l.push_back(std::move(p));
    }
  }

  DenseMatrix apply(const DenseMatrix& rho) const {
    const Complex i_unit(0.0, 1.0);
    DenseMatrix out = DenseMatrix::Zero(rho.rows(), rho.cols());
    if (model->H.matrix.nonZeros() > 0)
      out.noalias() -= i_unit * (model->H.matrix * rho - rho * model->H.matrix);
    for (std::size_t j = 0; j < model->jumps.size(); ++j) {
      const auto& [l, rate] = model->jumps[j];
      if (rate == 0.0) continue;
      const DenseMatrix l_rho = l.matrix * rho;
      out.noalias() += (2.0 * rate) * (l_rho * SparseMatrix(l.matrix.adjoint()));
      out.noalias() -= rate * (ldag_l[j] * rho);
      out.noalias() -= rate * (rho * ldag_l[j]);
    }
    return out;
  }
};

}  // namespace

DenseMatrix liouvillian_apply(const LindbladModel& model, const DenseMatrix& rho) {
  if (rho.rows() != static_cast<Eigen::Index>(model.dimension()) || rho.rows() != rho.cols())
    throw ValidationError("liouvillian: density matrix dimension mismatch");
  return RhsCache(model).apply(rho);
}

namespace {

double error_norm(const DenseMatrix& err, const DenseMatrix& y0, const DenseMatrix& y1,
                  double atol, double rtol) {
  double acc = 0.0;
  for (Eigen::Index c = 0; c < err.cols(); ++c)
    for (Eigen::Index r = 0; r < err.rows(); ++r) {
      const double scale =
          atol + rtol * std::max(std::abs(y0(r, c)), std::abs(y1(r, c)));
      const double e = std::abs(err(r, c)) / scale;
      acc += e * e;
    }
  return std::sqrt(acc / static_cast<double>(err.size()));
}

// Dormand–Prince 5(4) coefficients.
constexpr double kA21 = 1.0 / 5;
constexpr double kA31 = 3.0 / 40, kA32 = 9.0 / 40;
constexpr double kA41 = 44.0 / 45, kA42 = -56.0 / 15, kA43 = 32.0 / 9;
constexpr double kA51 = 19372.0 / 6561, kA52 = -25360.0 / 2187, kA53 = 64448.0 / 6561,
                 kA54 = -212.0 / 729;
constexpr double kA61 = 9017.0 / 3168, kA62 = -355.0 / 33, kA63 = 46732.0 / 5247,
                 kA64 = 49.0 / 176, kA65 = -5103.0 / 18656;
constexpr double kB1 = 35.0 / 384, kB3 = 500.0 / 1113, kB4 = 125.0 / 192,
                 kB5 = -2187.0 / 6784, kB6 = 11.0 / 84;
constexpr double kE1 = 5179.0 / 57600, kE3 = 7571.0 / 16695, kE4 = 393.0 / 640,
                 kE5 = -92097.0 / 339200, kE6 = 187.0 / 2100, kE7 = 1.0 / 40;

DensityMatrix finalize_output(DenseMatrix rho, const TensorSpace& space, EvolveReport& report) {
  rho = 0.5 * (rho + rho.adjoint().eval());
  const double trace_drift = std::abs(rho.trace().real() - 1.0) + std::abs(rho.trace().imag());
  report.max_trace_drift = std::max(report.max_trace_drift, trace_drift);

  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(rho);
  RealVector evals = es.eigenvalues();
  const double most_negative = evals.minCoeff();
  report.worst_negative_eigenvalue = std::min(report.worst_negative_eigenvalue, most_negative);
  if (most_negative < -1e-7)
    report.warnings.push_back("positivity violation " + std::to_string(most_negative) +
                              " clamped at output");
  if (most_negative < 0.0) {
    for (Eigen::Index i = 0; i < evals.size(); ++i) evals[i] = std::max(evals[i], 0.0);
    rho = es.eigenvectors() * evals.asDiagonal() * es.eigenvectors().adjoint();
  }
  const double tr = rho.trace().real();
  if (tr <= 0.0) throw ConvergenceError("evolve: state trace collapsed to zero");
  rho /= tr;
  return DensityMatrix{std::move(rho), space};
}

}  // namespace

std::vector<DensityMatrix> evolve(const LindbladModel& model, const DensityMatrix& rho0,
                                  const std::vector<double>& t_grid, double rtol,
                                  EvolveReport* report) {
  if (!(rho0.space == model.space()))
    throw ValidationError("evolve: initial state lives on a different space");
  if (rtol <= 0.0 || rtol > 1e-3) throw ValidationError("evolve: rtol must be in (0, 1e-3]");
  if (t_grid.empty()) throw ValidationError("evolve: empty time grid");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (t_grid[i] < 0.0) throw ValidationError("evolve: negative time");
    if (i > 0 && t_grid[i] <= t_grid[i - 1])
      throw ValidationError("evolve: time grid must be strictly increasing");
  }
  rho0.validate();

  EvolveReport local_report;
  EvolveReport& rep = report ? *report : local_report;

  RhsCache rhs(model);
  const double atol = rtol * 1e-2;
  const double t_end = t_grid.back();
  const double dt_floor = std::max(t_end, 1.0) * 1e-13;

  DenseMatrix y = rho0.rho;
  double t = 0.0;
  DenseMatrix k1 = rhs.apply(y);
  double dt = std::min(0.1, t_end > 0 ? t_end * 1e-3 : 0.1) /
              (1.0 + k1.cwiseAbs().maxCoeff());

  std::vector<DensityMatrix> out;
  out.reserve(t_grid.size());
  std::size_t next_output = 0;
  while (next_output < t_grid.size() && t_grid[next_output] <= t) {
    out.push_back(finalize_output(y, model.space(), rep));
    ++next_output;
  }

  DenseMatrix k2, k3, k4, k5, k6, k7, y5, err;
  while (next_output < t_grid.size()) {
    const double t_target = t_grid[next_output];
    bool clipped = false;
    double step = dt;
    if (t + step >= t_target) {
      step = t_target - t;
      clipped = true;
    }
    if (step < dt_floor) throw ConvergenceError("evolve: step size underflow (stiff system?)");

    k2 = rhs.apply(y + step * (kA21 * k1));
    k3 = rhs.apply(y + step * (kA31 * k1 + kA32 * k2));
    k4 = rhs.apply(y + step * (kA41 * k1 + kA42 * k2 + kA43 * k3));
    k5 = rhs.apply(y + step * (kA51 * k1 + kA52 * k2 + kA53 * k3 + kA54 * k4));
    k6 = rhs.apply(y + step * (kA61 * k1 + kA62 * k2 + kA63 * k3 + kA64 * k4 + kA65 * k5));
    y5 = y + step * (kB1 * k1 + kB3 * k3 + kB4 * k4 + kB5 * k5 + kB6 * k6);
    k7 = rhs.apply(y5);
    err = y + step * (kE1 * k1 + kE3 * k3 + kE4 * k4 + kE5 * k5 + kE6 * k6 + kE7 * k7) - y5;

    const double e = error_norm(err, y, y5, atol, rtol);
    const double factor =
        std::clamp(0.9 * std::pow(std::max(e, 1e-10), -0.2), 0.2, 5.0);
    if (e <= 1.0) {
      t += step;
      y.swap(y5);
      k1.swap(k7);  // first-same-as-last
      ++rep.accepted_steps;
      if (clipped) {
        out.push_back(finalize_output(y, model.space(), rep));
        ++next_output;
        // keep the controller's step: the clip was a grid artifact, not an
        // accuracy decision
        dt = std::max(dt, step * factor);
      } else {
        dt = std::max(step * factor, dt_floor);
      }
    } else {
      ++rep.rejected_steps;
      dt = std::max(step * factor, dt_floor);
    }
  }
  return out;
}

std::vector<DensityMatrix> steady_state(const LindbladModel& model, std::size_t max_dimension,
                                        double null_tol) {
  model.validate();
  const std::size_t d = model.dimension();
  if (d > max_dimension)
    throw ValidationError("steady_state: dimension " + std::to_string(d) +
                          " above the dense-superoperator cap " + std::to_string(max_dimension));

  const Eigen::Index dd = static_cast<Eigen::Index>(d);
  SparseMatrix ident(dd, dd);
  ident.setIdentity();

  SparseMatrix super(dd * dd, dd * dd);
  const Complex i_unit(0.0, 1.0);
  if (model.H.matrix.nonZeros() > 0) {
    SparseMatrix h_t = SparseMatrix(model.H.matrix.transpose());
    super = super - i_unit * SparseMatrix(Eigen::kroneckerProduct(ident, model.H.matrix)) +
            i_unit * SparseMatrix(Eigen::kroneckerProduct(h_t, ident));
  }
  for (const auto& [l, rate] : model.jumps) {
    if (rate == 0.0) continue;
    SparseMatrix l_conj = SparseMatrix(l.matrix.conjugate());
    SparseMatrix ll = SparseMatrix(l.matrix.adjoint()) * l.matrix;
    SparseMatrix ll_t = SparseMatrix(ll.transpose());
    super = super + (2.0 * rate) * SparseMatrix(Eigen::kroneckerProduct(l_conj, l.matrix)) -
            rate * SparseMatrix(Eigen::kroneckerProduct(ident, ll)) -
            rate * SparseMatrix(Eigen::kroneckerProduct(ll_t, ident));
  }

  Eigen::BDCSVD<DenseMatrix> svd(DenseMatrix(super), Eigen::ComputeFullV);
  const auto& sigma = svd.singularValues();
  const double cut = null_tol * std::max(1.0, sigma.size() > 0 ? sigma[0] : 0.0);
  std::vector<DenseMatrix> raw;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (sigma[i] <= cut) {
      DenseVector v = svd.matrixV().col(i);
      raw.push_back(Eigen::Map<DenseMatrix>(v.data(), dd, dd));
    }
  }
  if (raw.empty())
    throw ConvergenceError("steady_state: no null vector found (tolerance too tight?)");

  if (raw.size() == 1) {
    DenseMatrix rho = 0.5 * (raw[0] + raw[0].adjoint().eval());
    Complex tr = rho.trace();
    if (std::abs(tr) < 1e-12) {
      // the Hermitian part vanished against the phase; retry the skew part
      rho = Complex(0.0, 0.5) * (raw[0] - raw[0].adjoint().eval());
      tr = rho.trace();
    }
    if (std::abs(tr) < 1e-12)
      throw ConvergenceError("steady_state: null vector has zero trace");
    rho /= tr;
    DensityMatrix out{std::move(rho), model.space()};
    out.validate(1e-7, 1e-7);
    return {out};
  }

  // Degenerate stationary subspace: return a Hermitian, Frobenius-orthonormal
  // basis assembled from the Hermitian and skew parts of the null vectors.
  std::vector<DenseMatrix> candidates;
  for (const auto& m : raw) {
    candidates.push_back(0.5 * (m + m.adjoint().eval()));
    candidates.push_back(Complex(0.0, 0.5) * (m - m.adjoint().eval()));
  }
  std::vector<DenseMatrix> basis;
  for (DenseMatrix c : candidates) {
    for (const auto& b : basis) {
      const Complex proj = (b.adjoint() * c).trace();
      c -= proj.real() * b;  // real span of Hermitian matrices
    }
    const double nrm = c.norm();
    if (nrm > 1e-8) basis.push_back(c / nrm);
    if (basis.size() == raw.size()) break;
  }
  std::vector<DensityMatrix> out;
  for (auto& b : basis) {
    const double tr = b.trace().real();
    if (std::abs(tr) > 1e-9) b /= tr;
    out.push_back(DensityMatrix{std::move(b), model.space()});
  }
  return out;
}

std::vector<Complex> observables(const DensityMatrix& rho,
                                 const std::vector<LatticeOperator>& ops) {
  std::vector<Complex> out;
  out.reserve(ops.size());
  for (const auto& op : ops) {
    if (!(op.space == rho.space))
      throw ValidationError("observables: operator lives on a different space");
    Complex acc(0.0, 0.0);
    for (int r = 0; r < op.matrix.outerSize(); ++r)
      for (SparseMatrix::InnerIterator it(op.matrix, r); it; ++it)
        acc += it.value() * rho.rho(it.col(), it.row());
    out.push_back(acc);
  }
  return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& keep) {
  const TensorSpace& full = rho.space;
  const int nf = full.num_factors();
  if (keep.empty()) throw ValidationError("partial_trace: keep set must be non-empty");
  std::vector<int> sorted_keep = keep;
  std::sort(sorted_keep.begin(), sorted_keep.end());
  if (std::unique(sorted_keep.begin(), sorted_keep.end()) != sorted_keep.end())
    throw ValidationError("partial_trace: duplicate site in keep set");
  for (int s : sorted_keep)
    if (s < 0 || s >= nf) throw ValidationError("partial_trace: site out of range");

  std::vector<int> traced;
  for (int s = 0; s < nf; ++s)
    if (!std::binary_search(sorted_keep.begin(), sorted_keep.end(), s)) traced.push_back(s);

  std::vector<int> keep_dims;
  for (int s : sorted_keep) keep_dims.push_back(full.dims[static_cast<std::size_t>(s)]);
  const TensorSpace reduced(keep_dims.empty() ? std::vector<int>{1} : keep_dims);

  // Enumerate base offsets: full-space index contribution of every kept-digit
  // combination, and of every traced-digit combination.
  auto offsets_for = [&](const std::vector<int>& sites) {
    std::vector<std::size_t> offs{0};
    for (int s : sites) {
      const int dim = full.dims[static_cast<std::size_t>(s)];
      const std::size_t stride = full.stride(s);
      std::vector<std::size_t> next;
      next.reserve(offs.size() * static_cast<std::size_t>(dim));
      for (std::size_t base : offs)
        for (int v = 0; v < dim; ++v) next.push_back(base + stride * static_cast<std::size_t>(v));
      offs = std::move(next);
    }
    return offs;
  };
  const auto keep_offs = offsets_for(sorted_keep);   // ordered like `reduced` indices
  const auto trace_offs = offsets_for(traced);

  DenseMatrix out = DenseMatrix::Zero(static_cast<Eigen::Index>(keep_offs.size()),
                                      static_cast<Eigen::Index>(keep_offs.size()));
  for (std::size_t r = 0; r < keep_offs.size(); ++r)
    for (std::size_t c = 0; c < keep_offs.size(); ++c) {
      Complex acc(0.0, 0.0);
      for (std::size_t t : trace_offs)
        acc += rho.rho(static_cast<Eigen::Index>(keep_offs[r] + t),
                       static_cast<Eigen::Index>(keep_offs[c] + t));
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = acc;
    }
  return DensityMatrix{std::move(out), reduced};
}

namespace {

DenseMatrix matrix_sqrt_psd(const DenseMatrix& m) {
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(m);
  RealVector evals = es.eigenvalues();
  for (Eigen::Index i = 0; i < evals.size(); ++i) evals[i] = std::sqrt(std::max(evals[i], 0.0));
  return es.eigenvectors() * evals.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (!(rho.space == sigma.space)) throw ValidationError("fidelity: space mismatch");
  const DenseMatrix sr = matrix_sqrt_psd(0.5 * (rho.rho + rho.rho.adjoint().eval()));
  const DenseMatrix inner = sr * (0.5 * (sigma.rho + sigma.rho.adjoint().eval())) * sr;
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(inner);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    acc += std::sqrt(std::max(es.eigenvalues()[i], 0.0));
  return acc * acc;
}

double fidelity(const DensityMatrix& rho, const StateVector& psi) {
  if (!(rho.space == psi.space)) throw ValidationError("fidelity: space mismatch");
  const Complex val = psi.amplitudes.dot(rho.rho * psi.amplitudes);
  return std::max(val.real(), 0.0);
}

double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (!(rho.space == sigma.space)) throw ValidationError("trace_distance: space mismatch");
  DenseMatrix diff = rho.rho - sigma.rho;
  diff = 0.5 * (diff + diff.adjoint().eval());
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(diff);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

double purity(const DensityMatrix& rho) { return (rho.rho * rho.rho).trace().real(); }

SectorBasis number_sector(const FockSpace& space, int total) {
  return number_sector(space, total, {});
}

SectorBasis number_sector(const FockSpace& space, int total, const std::vector<int>& parities) {
  if (total < 0) throw ValidationError("sector: negative photon number");
  if (!parities.empty() && static_cast<int>(parities.size()) != space.num_sites)
    throw ValidationError("sector: parity pattern must list one sign per site");
  for (int p : parities)
    if (p != 1 && p != -1) throw ValidationError("sector: parities must be +1 or -1");

  SectorBasis sector;
  sector.full = space.tensor();
  std::vector<int> occ;
  for (std::size_t idx = 0; idx < space.dimension(); ++idx) {
    sector.full.digits_of(idx, occ);
    int sum = 0;
    for (int n : occ) sum += n;
    if (sum != total) continue;
    bool ok = true;
    for (std::size_t j = 0; j < parities.size() && ok; ++j)
      ok = ((occ[j] % 2 == 0) ? 1 : -1) == parities[j];
    if (ok) sector.indices.push_back(idx);
  }
  if (sector.indices.empty()) throw ValidationError("sector: empty sector");
  return sector;
}

LatticeOperator restrict_operator(const LatticeOperator& op, const SectorBasis& sector,
                                  double leak_tol) {
  if (!(op.space == sector.full))
    throw ValidationError("sector restriction: operator lives on a different space");
  std::vector<Eigen::Index> reduced_of(sector.full.dimension(),
                                       static_cast<Eigen::Index>(-1));
  for (std::size_t i = 0; i < sector.indices.size(); ++i)
    reduced_of[sector.indices[i]] = static_cast<Eigen::Index>(i);

  double leak = 0.0;
  std::vector<Eigen::Triplet<Complex>> trips;
  for (int r = 0; r < op.matrix.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(op.matrix, r); it; ++it) {
      const Eigen::Index rr = reduced_of[static_cast<std::size_t>(it.row())];
      const Eigen::Index cc = reduced_of[static_cast<std::size_t>(it.col())];
      if (cc >= 0 && rr >= 0)
        trips.emplace_back(static_cast<int>(rr), static_cast<int>(cc), it.value());
      else if (cc >= 0 && rr < 0)
        leak = std::max(leak, std::abs(it.value()));  // maps the sector outside
    }
  if (leak > leak_tol)
    throw ValidationError("sector restriction: operator leaks out of the sector (max element " +
                          std::to_string(leak) + ")");

  LatticeOperator out;
  out.space = sector.reduced();
  out.matrix = SparseMatrix(static_cast<Eigen::Index>(sector.dimension()),
                            static_cast<Eigen::Index>(sector.dimension()));
  out.matrix.setFromTriplets(trips.begin(), trips.end());
  out.matrix.makeCompressed();
  out.support = {0};
  out.hermitian = op.hermitian;
  out.label = op.label.empty() ? op.label : op.label + "|sector";
  return out;
}

LindbladModel restrict_model(const LindbladModel& model, const SectorBasis& sector,
                             double leak_tol) {
  LindbladModel out;
  out.H = restrict_operator(model.H, sector, leak_tol);
  out.H.hermitian = true;
  for (const auto& [l, rate] : model.jumps)
    out.jumps.emplace_back(restrict_operator(l, sector, leak_tol), rate);
  out.validate();
  return out;
}

StateVector restrict_vector(const StateVector& psi, const SectorBasis& sector, double leak_tol) {
  if (!(psi.space == sector.full))
    throw ValidationError("sector restriction: state lives on a different space");
  StateVector out = zero_state(sector.reduced());
  double kept = 0.0;
  for (std::size_t i = 0; i < sector.indices.size(); ++i) {
    const Complex v = psi.amplitudes[static_cast<Eigen::Index>(sector.indices[i])];
    out.amplitudes[static_cast<Eigen::Index>(i)] = v;
    kept += std::norm(v);
  }
  if (std::abs(kept - psi.squared_norm()) > leak_tol * std::max(1.0, psi.squared_norm()))
    throw ValidationError("sector restriction: state has weight outside the sector");
  return out;
}

StateVector expand_vector(const StateVector& reduced, const SectorBasis& sector) {
  if (reduced.amplitudes.size() != static_cast<Eigen::Index>(sector.dimension()))
    throw ValidationError("sector expansion: dimension mismatch");
  StateVector out = zero_state(sector.full);
  for (std::size_t i = 0; i < sector.indices.size(); ++i)
    out.amplitudes[static_cast<Eigen::Index>(sector.indices[i])] =
        reduced.amplitudes[static_cast<Eigen::Index>(i)];
  return out;
}

DensityMatrix restrict_density(const DensityMatrix& rho, const SectorBasis& sector,
                               double leak_tol) {
  if (!(rho.space == sector.full))
    throw ValidationError("sector restriction: state lives on a different space");
  const Eigen::Index k = static_cast<Eigen::Index>(sector.dimension());
  DenseMatrix out(k, k);
  for (Eigen::Index r = 0; r < k; ++r)
    for (Eigen::Index c = 0; c < k; ++c)
      out(r, c) = rho.rho(static_cast<Eigen::Index>(sector.indices[static_cast<std::size_t>(r)]),
                          static_cast<Eigen::Index>(sector.indices[static_cast<std::size_t>(c)]));
  const double dropped = rho.rho.norm() * rho.rho.norm() - out.norm() * out.norm();
  if (dropped > leak_tol * std::max(1.0, rho.rho.norm() * rho.rho.norm()))
    throw ValidationError("sector restriction: density matrix has weight outside the sector");
  return DensityMatrix{std::move(out), sector.reduced()};
}

DensityMatrix expand_density(const DensityMatrix& reduced, const SectorBasis& sector) {
  if (reduced.rho.rows() != static_cast<Eigen::Index>(sector.dimension()))
    throw ValidationError("sector expansion: dimension mismatch");
  const Eigen::Index full_dim = static_cast<Eigen::Index>(sector.full.dimension());
  DenseMatrix out = DenseMatrix::Zero(full_dim, full_dim);
  for (std::size_t r = 0; r < sector.indices.size(); ++r)
    for (std::size_t c = 0; c < sector.indices.size(); ++c)
      out(static_cast<Eigen::Index>(sector.indices[r]),
          static_cast<Eigen::Index>(sector.indices[c])) =
          reduced.rho(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  return DensityMatrix{std::move(out), sector.full};
}

}  // namespace pairsim
