#pragma once

#include <cmath>
#include <exception>
#include <numeric>
#include <utility>
#include <vector>

#include "pairsim/rng.hpp"
#include "pairsim/stats.hpp"
#include "pairsim/trajectory.hpp"
#include "pairsim/types.hpp"

namespace pairsim::detail {

// Measurement grid shared by every backend: t = 0 plus every
// `measure_stride`-th step end.
inline std::vector<double> measurement_grid(const TrajectoryConfig& cfg, long long n_steps) {
  std::vector<double> times{0.0};
  for (long long s = cfg.measure_stride; s <= n_steps; s += cfg.measure_stride)
    times.push_back(static_cast<double>(s) * cfg.dt);
  return times;
}

inline long long step_count(const TrajectoryConfig& cfg) {
  const long long n = std::llround(cfg.t_final / cfg.dt);
  return n < 1 ? 1 : n;
}

// Cumulative-weight walk; `u01` uniform in [0,1). The caller has already
// verified the total is positive.
inline int select_channel(const std::vector<double>& weights, double total, double u01) {
  const double u = u01 * total;
  double running = 0.0;
  int channel = static_cast<int>(weights.size()) - 1;
  for (std::size_t c = 0; c < weights.size(); ++c) {
    running += weights[c];
    if (u < running) {
      channel = static_cast<int>(c);
      break;
    }
  }
  return channel;
}

inline void require_jumpable(double total_weight, double squared_norm) {
  if (!(total_weight > 1e-14 * std::max(squared_norm, 1e-300)))
    throw ConvergenceError(
        "trajectory: jump triggered but every channel weight vanishes "
        "(threshold/step inconsistency)");
}

// Waiting-time Monte-Carlo-wavefunction loop over an abstract state engine.
//
// Engine contract:
//   double advance();                              // one dt step under H_eff → squared norm
//   void channel_weights(std::vector<double>&);    // κ_c‖l_c ψ‖² in channel order
//   void apply_jump(int channel);                  // apply l_c and renormalize
//   void measure(std::vector<double>& out);        // one entry per observable
//
// The RNG draw order is part of the cross-backend contract: one survival
// threshold up front, then exactly one channel draw and one fresh threshold
// per jump. Nothing else may consume randomness, so two engines that agree on
// the arithmetic see identical jump sequences for the same (seed, index).
template <class Engine>
TrajectoryResult mcwf_drive(Engine& engine, const TrajectoryConfig& cfg,
                            std::size_t num_observables, std::size_t traj_index) {
  Rng rng(stream_seed(cfg.seed, traj_index));
  const long long n_steps = step_count(cfg);

  TrajectoryResult result;
  result.times = measurement_grid(cfg, n_steps);
  result.values.assign(num_observables, {});
  for (auto& series : result.values) series.reserve(result.times.size());

  std::vector<double> sample(num_observables);
  auto record = [&] {
    engine.measure(sample);
    for (std::size_t o = 0; o < num_observables; ++o) result.values[o].push_back(sample[o]);
  };
  record();  // t = 0

  double threshold = rng.uniform_pos();
  std::vector<double> weights;
  for (long long step = 1; step <= n_steps; ++step) {
    const double squared_norm = engine.advance();
    if (squared_norm < threshold) {
      engine.channel_weights(weights);
      const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
      require_jumpable(total, squared_norm);
      const int channel = select_channel(weights, total, rng.uniform());
      engine.apply_jump(channel);
      ++result.num_jumps;
      if (cfg.jump_log) result.jumps.push_back({static_cast<double>(step) * cfg.dt, channel});
      threshold = rng.uniform_pos();
    }
    if (step % cfg.measure_stride == 0) record();
  }
  return result;
}

inline std::string label_of(const ObservableSpec& spec) {
  return spec.label.empty() ? "observable" : spec.label;
}

// Run cfg.n_traj independent trajectories through `run_one(index) -> values`
// and reduce mean/stderr in fixed index order, so the result is bit-identical
// for every thread count. OpenMP-parallel when cfg.threads > 1.
template <class RunOne>
ObservableSeries ensemble_collect(const TrajectoryConfig& cfg, RunOne&& run_one) {
  ObservableSeries series;
  series.n_traj = cfg.n_traj;
  series.times = measurement_grid(cfg, step_count(cfg));
  for (const auto& spec : cfg.observables) series.labels.push_back(label_of(spec));

  std::vector<std::vector<std::vector<double>>> slots(cfg.n_traj);
  std::vector<std::exception_ptr> failures(cfg.n_traj);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(cfg.threads) if (cfg.threads > 1)
#endif
  for (long long idx = 0; idx < static_cast<long long>(cfg.n_traj); ++idx) {
    try {
      slots[static_cast<std::size_t>(idx)] = run_one(static_cast<std::size_t>(idx));
    } catch (...) {
      failures[static_cast<std::size_t>(idx)] = std::current_exception();
    }
  }
  for (const auto& failure : failures)
    if (failure) std::rethrow_exception(failure);

  const std::size_t n_obs = cfg.observables.size();
  const std::size_t n_times = series.times.size();
  series.mean.assign(n_obs, std::vector<double>(n_times, 0.0));
  series.stderr_.assign(n_obs, std::vector<double>(n_times, 0.0));
  std::vector<double> samples(cfg.n_traj);
  for (std::size_t o = 0; o < n_obs; ++o)
    for (std::size_t t = 0; t < n_times; ++t) {
      for (std::size_t k = 0; k < cfg.n_traj; ++k) samples[k] = slots[k][o][t];
      const MeanStderr ms = mean_stderr(samples);
      series.mean[o][t] = ms.mean;
      series.stderr_[o][t] = ms.stderr_;
    }
  return series;
}

}  // namespace pairsim::detail
