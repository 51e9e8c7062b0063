#include "pairsim/trajectory.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <utility>

#include "pairsim/detail/mcwf_driver.hpp"
#include "pairsim/stats.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pairsim {

LatticeOperator effective_hamiltonian(const LindbladModel& model) {
  model.validate();
  LatticeOperator h_eff = model.H;
  for (const auto& [l, rate] : model.jumps) {
    if (rate == 0.0) continue;
    LatticeOperator ll = l.adjoint() * l;
    h_eff = h_eff - Complex(0.0, rate) * ll;
  }
  h_eff.hermitian = false;
  h_eff.label = "H_eff";
  return h_eff;
}

ObservableSpec ObservableSpec::occupation(int site) {
  ObservableSpec s;
  s.kind = Kind::SiteOccupation;
  s.i = s.j = site;
  s.label = "n[" + std::to_string(site) + "]";
  return s;
}
ObservableSpec ObservableSpec::parity(int site) {
  ObservableSpec s;
  s.kind = Kind::SiteParity;
  s.i = s.j = site;
  s.label = "parity[" + std::to_string(site) + "]";
  return s;
}
ObservableSpec ObservableSpec::defect_density() {
  ObservableSpec s;
  s.kind = Kind::DefectDensity;
  s.label = "defect_density";
  return s;
}
ObservableSpec ObservableSpec::single_correlator(int i, int j) {
  ObservableSpec s;
  s.kind = Kind::SingleCorrelator;
  s.i = i;
  s.j = j;
  s.label = "g1[" + std::to_string(i) + "," + std::to_string(j) + "]";
  return s;
}
ObservableSpec ObservableSpec::pair_correlator(int i, int j) {
  ObservableSpec s;
  s.kind = Kind::PairCorrelator;
  s.i = i;
  s.j = j;
  s.label = "g2[" + std::to_string(i) + "," + std::to_string(j) + "]";
  return s;
}
ObservableSpec ObservableSpec::total_occupation() {
  ObservableSpec s;
  s.kind = Kind::TotalNumber;
  s.label = "N_total";
  return s;
}
ObservableSpec ObservableSpec::operator_expectation(LatticeOperator op, std::string label) {
  ObservableSpec s;
  s.kind = Kind::Operator;
  s.op = std::move(op);
  s.label = std::move(label);
  return s;
}
ObservableSpec ObservableSpec::fidelity_to(StateVector target, std::string label) {
  ObservableSpec s;
  s.kind = Kind::FidelityTo;
  s.target = std::move(target);
  s.label = std::move(label);
  return s;
}

void TrajectoryConfig::validate(double rate_norm) const {
  if (dt <= 0.0) throw ValidationError("trajectory: dt must be positive");
  if (t_final < dt) throw ValidationError("trajectory: t_final must cover at least one step");
  if (n_traj < 1) throw ValidationError("trajectory: n_traj must be at least 1");
  if (measure_stride < 1) throw ValidationError("trajectory: measure_stride must be at least 1");
  if (threads < 1) throw ValidationError("trajectory: threads must be at least 1");
  if (rate_norm > 0.0 && dt > 0.05 / rate_norm * (1.0 + 1e-12))
    throw ValidationError(
        "trajectory: dt too coarse for the jump rates (need dt <= 0.05/" +
        std::to_string(rate_norm) + " = " + std::to_string(0.05 / rate_norm) + ")");
}

namespace {

double sparse_inf_norm(const SparseMatrix& m) {
  double worst = 0.0;
  for (int r = 0; r < m.outerSize(); ++r) {
    double row = 0.0;
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) row += std::abs(it.value());
    worst = std::max(worst, row);
  }
  return worst;
}

// Dense-backend form of one observable: an operator expectation or a target
// overlap, both normalized by the running squared norm.
struct PreparedObservable {
  bool is_fidelity = false;
  SparseMatrix op;
  DenseVector target;
};

std::vector<PreparedObservable> prepare_observables(const std::vector<ObservableSpec>& specs,
                                                    const TensorSpace& space) {
  std::vector<PreparedObservable> out;
  out.reserve(specs.size());
  for (const auto& spec : specs) {
    PreparedObservable p;
    const auto site_dim = [&](int site) {
      if (site < 0 || site >= space.num_factors())
        throw ValidationError("observable: site out of range");
      return space.dims[static_cast<std::size_t>(site)];
    };
    switch (spec.kind) {
      case ObservableSpec::Kind::SiteOccupation:
        p.op = embed(site_number(site_dim(spec.i)), spec.i, space).matrix;
        break;
      case ObservableSpec::Kind::SiteParity:
        p.op = embed(site_parity(site_dim(spec.i)), spec.i, space).matrix;
        break;
      case ObservableSpec::Kind::DefectDensity: {
        LatticeOperator acc = embed(site_defect_projector(site_dim(0)), 0, space);
        for (int j = 1; j < space.num_factors(); ++j)
          acc = acc + embed(site_defect_projector(site_dim(j)), j, space);
        p.op = (Complex(1.0 / space.num_factors(), 0.0) * acc).matrix;
        break;
      }
      case ObservableSpec::Kind::SingleCorrelator:
        p.op = spec.i == spec.j
                   ? embed(site_number(site_dim(spec.i)), spec.i, space).matrix
                   : embed_product({{site_creation(site_dim(spec.i)), spec.i},
                                    {site_annihilation(site_dim(spec.j)), spec.j}},
                                   space)
                         .matrix;
        break;
      case ObservableSpec::Kind::PairCorrelator:
        p.op = spec.i == spec.j
                   ? embed(site_kerr(site_dim(spec.i)), spec.i, space).matrix
                   : embed_product({{site_pair_raise(site_dim(spec.i)), spec.i},
                                    {site_pair_lower(site_dim(spec.j)), spec.j}},
                                   space)
                         .matrix;
        break;
      case ObservableSpec::Kind::TotalNumber: {
        LatticeOperator acc = embed(site_number(site_dim(0)), 0, space);
        for (int j = 1; j < space.num_factors(); ++j)
          acc = acc + embed(site_number(site_dim(j)), j, space);
        p.op = acc.matrix;
        break;
      }
      case ObservableSpec::Kind::Operator:
        if (!(spec.op.space == space))
          throw ValidationError("observable: operator lives on a different space");
        p.op = spec.op.matrix;
        break;
      case ObservableSpec::Kind::FidelityTo:
        if (!(spec.target.space == space))
          throw ValidationError("observable: fidelity target lives on a different space");
        p.is_fidelity = true;
        p.target = spec.target.amplitudes;
        break;
    }
    out.push_back(std::move(p));
  }
  return out;
}

void measure_dense(const std::vector<PreparedObservable>& prepared, const DenseVector& psi,
                   std::vector<double>& out) {
  const double sq = psi.squaredNorm();
  for (std::size_t o = 0; o < prepared.size(); ++o) {
    const auto& p = prepared[o];
    if (p.is_fidelity)
      out[o] = std::norm(p.target.dot(psi)) / sq;
    else
      out[o] = psi.dot(p.op * psi).real() / sq;
  }
}

// Full-matrix propagator backend: one dense D×D exponential applied per step.
class DenseExpEngine {
 public:
  DenseExpEngine(const LindbladModel& model, const StateVector& psi0,
                 const TrajectoryConfig& cfg)
      : psi_(psi0.amplitudes), prepared_(prepare_observables(cfg.observables, model.space())) {
    const DenseMatrix h_eff(effective_hamiltonian(model).matrix);
    propagator_ = (Complex(0.0, -1.0) * cfg.dt * h_eff).exp();
    for (const auto& [l, rate] : model.jumps) {
      if (rate == 0.0) continue;
      channels_.emplace_back(l.matrix, rate);
    }
  }

  double advance() {
    scratch_.noalias() = propagator_ * psi_;
    psi_.swap(scratch_);
    return psi_.squaredNorm();
  }

  void channel_weights(std::vector<double>& w) {
    w.resize(channels_.size());
    for (std::size_t c = 0; c < channels_.size(); ++c)
      w[c] = channels_[c].second * (channels_[c].first * psi_).squaredNorm();
  }

  void apply_jump(int channel) {
    scratch_.noalias() = channels_[static_cast<std::size_t>(channel)].first * psi_;
    psi_ = scratch_ / scratch_.norm();
  }

  void measure(std::vector<double>& out) { measure_dense(prepared_, psi_, out); }

 private:
  DenseVector psi_;
  DenseVector scratch_;
  DenseMatrix propagator_;
  std::vector<std::pair<SparseMatrix, double>> channels_;
  std::vector<PreparedObservable> prepared_;
};

// Gate-based backend: the same second-order even/odd bond splitting a
// matrix-product-state engine sweeps, with every gate and channel embedded as
// a sparse full-space matrix. Exists so gate-level backends can be validated
// against an exact reference that consumes randomness identically.
class DenseTrotterEngine {
 public:
  DenseTrotterEngine(const BondModel& model, const StateVector& psi0,
                     const TrajectoryConfig& cfg)
      : psi_(psi0.amplitudes),
        prepared_(prepare_observables(cfg.observables, model.space.tensor())) {
    const auto add_gates = [&](int parity, double step) {
      for (int b = parity; b < model.num_bonds(); b += 2) {
        const DenseMatrix gate =
            (Complex(0.0, -1.0) * step * model.effective_bond_generator(b)).exp();
        gates_.push_back(embed_two_site(gate, b, model.space).matrix);
      }
    };
    add_gates(0, cfg.dt / 2.0);  // even bonds, half step
    add_gates(1, cfg.dt);        // odd bonds, full step
    add_gates(0, cfg.dt / 2.0);  // even bonds, half step
    for (const auto& ch : model.channels) {
      if (ch.rate == 0.0) continue;
      channels_.emplace_back(embed_two_site(ch.op, ch.bond, model.space).matrix, ch.rate);
    }
  }

  double advance() {
    for (const auto& gate : gates_) {
      scratch_.noalias() = gate * psi_;
      psi_.swap(scratch_);
    }
    return psi_.squaredNorm();
  }

  void channel_weights(std::vector<double>& w) {
    w.resize(channels_.size());
    for (std::size_t c = 0; c < channels_.size(); ++c)
      w[c] = channels_[c].second * (channels_[c].first * psi_).squaredNorm();
  }

  void apply_jump(int channel) {
    scratch_.noalias() = channels_[static_cast<std::size_t>(channel)].first * psi_;
    psi_ = scratch_ / scratch_.norm();
  }

  void measure(std::vector<double>& out) { measure_dense(prepared_, psi_, out); }

 private:
  DenseVector psi_;
  DenseVector scratch_;
  std::vector<SparseMatrix> gates_;
  std::vector<std::pair<SparseMatrix, double>> channels_;
  std::vector<PreparedObservable> prepared_;
};

void check_initial_state(const StateVector& psi0, const TensorSpace& space) {
  if (!(psi0.space == space))
    throw ValidationError("trajectory: initial state lives on a different space");
  if (std::abs(psi0.norm() - 1.0) > 1e-9)
    throw ValidationError("trajectory: initial state must be normalized");
}

template <class Model, class Engine>
TrajectoryResult run_one(const Model& model, const StateVector& psi0,
                         const TrajectoryConfig& cfg, std::size_t traj_index) {
  Engine engine(model, psi0, cfg);
  return detail::mcwf_drive(engine, cfg, cfg.observables.size(), traj_index);
}

template <class Model>
ObservableSeries ensemble_impl(const Model& model, const StateVector& psi0,
                               const TrajectoryConfig& cfg) {
  cfg.validate(max_rate_norm(model));
  TrajectoryConfig local = cfg;
  local.jump_log = false;
  return detail::ensemble_collect(cfg, [&](std::size_t idx) {
    return run_trajectory(model, psi0, local, idx).values;
  });
}

}  // namespace

double max_rate_norm(const LindbladModel& model) {
  double worst = 0.0;
  for (const auto& [l, rate] : model.jumps) {
    if (rate == 0.0) continue;
    SparseMatrix ll = SparseMatrix(l.matrix.adjoint()) * l.matrix;
    worst = std::max(worst, rate * sparse_inf_norm(ll));
  }
  return worst;
}

double max_rate_norm(const BondModel& model) {
  double worst = 0.0;
  for (const auto& ch : model.channels) {
    if (ch.rate == 0.0) continue;
    const DenseMatrix ll = ch.op.adjoint() * ch.op;
    worst = std::max(worst, ch.rate * ll.cwiseAbs().rowwise().sum().maxCoeff());
  }
  return worst;
}

TrajectoryResult run_trajectory(const LindbladModel& model, const StateVector& psi0,
                                const TrajectoryConfig& cfg, std::size_t traj_index) {
  model.validate();
  check_initial_state(psi0, model.space());
  cfg.validate(max_rate_norm(model));
  return run_one<LindbladModel, DenseExpEngine>(model, psi0, cfg, traj_index);
}

TrajectoryResult run_trajectory(const BondModel& model, const StateVector& psi0,
                                const TrajectoryConfig& cfg, std::size_t traj_index) {
  model.validate();
  check_initial_state(psi0, model.space.tensor());
  cfg.validate(max_rate_norm(model));
  return run_one<BondModel, DenseTrotterEngine>(model, psi0, cfg, traj_index);
}

ObservableSeries run_ensemble(const LindbladModel& model, const StateVector& psi0,
                              const TrajectoryConfig& cfg) {
  model.validate();
  check_initial_state(psi0, model.space());
  return ensemble_impl(model, psi0, cfg);
}

ObservableSeries run_ensemble(const BondModel& model, const StateVector& psi0,
                              const TrajectoryConfig& cfg) {
  model.validate();
  check_initial_state(psi0, model.space.tensor());
  return ensemble_impl(model, psi0, cfg);
}

std::vector<double> equilibrium_times(const ObservableSeries& series, double level) {
  std::vector<double> out;
  out.reserve(series.mean.size());
  for (const auto& values : series.mean)
    out.push_back(equilibrium_time(series.times, values, level));
  return out;
}

}  // namespace pairsim
