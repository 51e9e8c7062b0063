// Compares the serial (threads = 1) ensemble runners against their OpenMP
// counterparts.  The parallel path must reproduce the serial results bit for
// bit — each trajectory owns a counter-derived RNG stream and the reduction
// runs in a fixed order — so any difference is a bug, not noise.  Prints the
// wall times side by side and exits nonzero on a mismatch.
#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pairsim/glauber.hpp"
#include "pairsim/model_spec.hpp"
#include "pairsim/mps.hpp"
#include "pairsim/state.hpp"
#include "pairsim/trajectory.hpp"

namespace {

using pairsim::ObservableSeries;

struct Timing {
  double serial_s = 0.0;
  double parallel_s = 0.0;
};

template <typename F>
double timed(F&& body) {
  const auto start = std::chrono::steady_clock::now();
  body();
  const auto stop = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(stop - start).count();
}

bool same_series(const ObservableSeries& a, const ObservableSeries& b) {
  return a.times == b.times && a.labels == b.labels && a.mean == b.mean &&
         a.stderr_ == b.stderr_ && a.n_traj == b.n_traj;
}

bool report(const char* name, const Timing& t, bool equal) {
  std::printf("%-22s serial %8.3f s   4 threads %8.3f s   speedup %5.2fx   %s\n", name,
              t.serial_s, t.parallel_s, t.serial_s / t.parallel_s,
              equal ? "results identical" : "RESULTS DIFFER");
  return equal;
}

bool bench_dense_trajectories() {
  pairsim::PairModelSpec spec;
  spec.num_sites = 3;
  spec.n_max = 2;
  spec.kappa = 1.0;
  const pairsim::LindbladModel model = pairsim::build_dense_model(spec);
  const pairsim::StateVector psi0 = pairsim::basis_state(spec.space(), {2, 0, 2});

  pairsim::TrajectoryConfig cfg;
  cfg.dt = 2e-3;
  cfg.t_final = 2.0;
  cfg.n_traj = 64;
  cfg.measure_stride = 100;
  cfg.seed = 17;
  cfg.observables = {pairsim::ObservableSpec::defect_density(),
                     pairsim::ObservableSpec::total_occupation()};

  ObservableSeries serial, parallel;
  Timing t;
  cfg.threads = 1;
  t.serial_s = timed([&] { serial = pairsim::run_ensemble(model, psi0, cfg); });
  cfg.threads = 4;
  t.parallel_s = timed([&] { parallel = pairsim::run_ensemble(model, psi0, cfg); });
  return report("dense trajectories", t, same_series(serial, parallel));
}

bool bench_mps_trajectories() {
  pairsim::PairModelSpec spec;
  spec.num_sites = 6;
  spec.n_max = 2;
  spec.kappa = 1.0;
  const pairsim::BondModel model = pairsim::build_bond_model(spec);
  const pairsim::MpsState psi0 =
      pairsim::from_product_state({2, 0, 2, 0, 2, 0}, spec.space(), 16);

  pairsim::TrajectoryConfig cfg;
  cfg.dt = 3e-3;
  cfg.t_final = 1.0;
  cfg.n_traj = 16;
  cfg.measure_stride = 100;
  cfg.seed = 29;
  cfg.observables = {pairsim::ObservableSpec::defect_density()};

  ObservableSeries serial, parallel;
  Timing t;
  cfg.threads = 1;
  t.serial_s = timed([&] { serial = pairsim::run_ensemble(model, psi0, cfg); });
  cfg.threads = 4;
  t.parallel_s = timed([&] { parallel = pairsim::run_ensemble(model, psi0, cfg); });
  return report("matrix-product states", t, same_series(serial, parallel));
}

bool bench_kmc() {
  pairsim::KmcConfig cfg;
  cfg.table.mode = pairsim::RateMode::Exact;
  cfg.table.base_rate = 1.0;
  cfg.table.h = 0.0;
  cfg.num_sites = 200;
  cfg.periodic = true;
  cfg.t_final = 100.0;
  cfg.n_hist = 512;
  cfg.seed = 41;

  pairsim::RunResult serial, parallel;
  Timing t;
  cfg.threads = 1;
  t.serial_s = timed([&] { serial = pairsim::kmc_ensemble(cfg); });
  cfg.threads = 4;
  t.parallel_s = timed([&] { parallel = pairsim::kmc_ensemble(cfg); });
  const bool equal = serial.times == parallel.times && serial.mean == parallel.mean &&
                     serial.stderr_ == parallel.stderr_ && serial.n_hist == parallel.n_hist;
  return report("kinetic Monte Carlo", t, equal);
}

}  // namespace

int main() {
  Eigen::setNbThreads(1);  // keep the comparison about our own parallelism
  bool ok = true;
  ok &= bench_dense_trajectories();
  ok &= bench_kmc();
  ok &= bench_mps_trajectories();
  return ok ? 0 : 1;
}
