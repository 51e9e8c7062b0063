#include "pairsim/glauber.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <string>

#include "pairsim/stats.hpp"

namespace pairsim {

namespace {

int wrap(int j, int num_sites) { return (j % num_sites + num_sites) % num_sites; }

// Unchecked rate kernel shared by the public flip_rate and the event loop.
double rate_of(const SpinConfig& config, int j, const RateTable& table) {
  const int num_sites = config.num_sites();
  if (!config.periodic && (j == 0 || j == num_sites - 1)) return 0.0;  // frozen boundary
  const int left = config.spins[static_cast<std::size_t>(wrap(j - 1, num_sites))];
  const int right = config.spins[static_cast<std::size_t>(wrap(j + 1, num_sites))];
  const int alignment = config.spins[static_cast<std::size_t>(j)] * (left + right);
  if (table.mode == RateMode::Glauber)
    return 0.5 * table.base_rate * (1.0 - 0.5 * table.gamma() * alignment);
  if (alignment == 2) return table.base_rate * table.h;  // aligned: pair production
  if (alignment == 0) return 0.5 * table.base_rate;      // domain-wall hop
  return table.base_rate;                                // anti-aligned: pair annihilation
}

int bond_defect(const SpinConfig& config, int bond) {
  const int num_sites = config.num_sites();
  const int a = config.spins[static_cast<std::size_t>(bond)];
  const int b = config.spins[static_cast<std::size_t>(wrap(bond + 1, num_sites))];
  return (1 - a * b) / 2;
}

}  // namespace

void RateTable::validate() const {
  if (!(base_rate > 0.0)) throw ValidationError("glauber: base rate must be positive");
  if (!(h >= 0.0)) throw ValidationError("glauber: production parameter h must be non-negative");
}

int SpinConfig::defect_count() const {
  int count = 0;
  for (int b = 0; b < num_bonds(); ++b) count += bond_defect(*this, b);
  return count;
}

double SpinConfig::defect_density() const {
  return static_cast<double>(defect_count()) / num_bonds();
}

std::vector<int> SpinConfig::defect_bonds() const {
  std::vector<int> bonds;
  for (int b = 0; b < num_bonds(); ++b)
    if (bond_defect(*this, b) == 1) bonds.push_back(b);
  return bonds;
}

void SpinConfig::validate() const {
  if (num_sites() < 3) throw ValidationError("glauber: chains need at least three spins");
  for (const std::int8_t s : spins)
    if (s != 1 && s != -1) throw ValidationError("glauber: spins must be +1 or -1");
}

SpinConfig all_up(int num_sites, bool periodic) {
  SpinConfig config;
  config.spins.assign(static_cast<std::size_t>(num_sites), 1);
  config.periodic = periodic;
  config.validate();
  return config;
}

SpinConfig random_config(int num_sites, Rng& rng, bool periodic) {
  SpinConfig config;
  config.periodic = periodic;
  config.spins.resize(static_cast<std::size_t>(num_sites));
  for (auto& s : config.spins) s = rng.uniform() < 0.5 ? 1 : -1;
  config.validate();
  return config;
}

SpinConfig from_defects(int num_sites, const std::vector<int>& bonds, bool periodic) {
  SpinConfig config = all_up(num_sites, periodic);
  if (periodic && bonds.size() % 2 != 0)
    throw ValidationError("glauber: a ring closes only with an even number of domain walls");
  std::vector<bool> wall(static_cast<std::size_t>(config.num_bonds()), false);
  for (const int b : bonds) {
    if (b < 0 || b >= config.num_bonds())
      throw ValidationError("glauber: defect bond index out of range");
    if (wall[static_cast<std::size_t>(b)])
      throw ValidationError("glauber: duplicate defect bond");
    wall[static_cast<std::size_t>(b)] = true;
  }
  for (int j = 1; j < num_sites; ++j)
    config.spins[static_cast<std::size_t>(j)] =
        static_cast<std::int8_t>(config.spins[static_cast<std::size_t>(j) - 1] *
                                 (wall[static_cast<std::size_t>(j) - 1] ? -1 : 1));
  return config;
}

double flip_rate(const SpinConfig& config, int j, const RateTable& table) {
  config.validate();
  table.validate();
  if (j < 0 || j >= config.num_sites()) throw ValidationError("glauber: site out of range");
  return rate_of(config, j, table);
}

std::vector<double> KmcConfig::grid() const {
  if (!sample_times.empty()) return sample_times;
  std::vector<double> times{0.0};
  if (log_grid) {
    const double lo = std::log(t_min);
    const double hi = std::log(t_final);
    for (int i = 0; i < grid_points; ++i)
      times.push_back(std::exp(lo + (hi - lo) * i / (grid_points - 1)));
  } else {
    for (int i = 1; i <= grid_points - 1; ++i)
      times.push_back(t_final * i / (grid_points - 1.0));
  }
  times.back() = t_final;
  return times;
}

void KmcConfig::validate() const {
  table.validate();
  if (num_sites < 3) throw ValidationError("glauber: chains need at least three spins");
  if (!(t_final > 0.0)) throw ValidationError("glauber: t_final must be positive");
  if (threads < 1) throw ValidationError("glauber: thread count must be at least 1");
  if (init == InitKind::FromDefects && defect_bonds.empty())
    throw ValidationError("glauber: FromDefects needs a defect bond list");
  if (sample_times.empty()) {
    if (grid_points < 2) throw ValidationError("glauber: grid needs at least two points");
    if (log_grid && !(t_min > 0.0 && t_min < t_final))
      throw ValidationError("glauber: log grid needs 0 < t_min < t_final");
  } else {
    double prev = -1.0;
    for (const double t : sample_times) {
      if (!(t >= 0.0) || t > t_final * (1.0 + 1e-12))
        throw ValidationError("glauber: sample times must lie in [0, t_final]");
      if (t <= prev) throw ValidationError("glauber: sample times must increase strictly");
      prev = t;
    }
  }
}

namespace {

SpinConfig initial_config(const KmcConfig& cfg, Rng& rng) {
  switch (cfg.init) {
    case InitKind::Random:
      return random_config(cfg.num_sites, rng, cfg.periodic);
    case InitKind::AllUp:
      return all_up(cfg.num_sites, cfg.periodic);
    case InitKind::FromDefects:
      return from_defects(cfg.num_sites, cfg.defect_bonds, cfg.periodic);
  }
  throw ValidationError("glauber: unknown initial condition");
}

// One event-driven history, sampled on `grid`.
std::vector<double> run_history(const KmcConfig& cfg, const std::vector<double>& grid,
                                std::uint64_t stream) {
  Rng rng(stream);
  SpinConfig config = initial_config(cfg, rng);
  const int num_sites = config.num_sites();
  const int num_bonds = config.num_bonds();
  const RateTable& table = cfg.table;

  std::vector<double> rates(static_cast<std::size_t>(num_sites));
  double total = 0.0;
  const auto recompute = [&] {
    total = 0.0;
    for (int j = 0; j < num_sites; ++j) {
      rates[static_cast<std::size_t>(j)] = rate_of(config, j, table);
      total += rates[static_cast<std::size_t>(j)];
    }
  };
  recompute();

  int defects = config.defect_count();
  const int initial_parity = defects & 1;

  std::vector<double> out;
  out.reserve(grid.size());
  const auto density = [&] { return static_cast<double>(defects) / num_bonds; };

  double t = 0.0;
  std::size_t g = 0;
  long long events = 0;
  while (g < grid.size()) {
    if (total < 1e-12 * table.base_rate) {
      recompute();
      if (total <= 0.0) {  // absorbing configuration: density frozen from here on
        for (; g < grid.size(); ++g) out.push_back(density());
        break;
      }
    }

    const double wait = -std::log(rng.uniform_pos()) / total;
    const double t_next = t + wait;
    while (g < grid.size() && grid[g] < t_next) {
      out.push_back(density());
      ++g;
    }
    if (g >= grid.size()) break;
    t = t_next;

    // site choice proportional to rate (prefix walk)
    const double target = rng.uniform() * total;
    int site = -1;
    int last_positive = -1;
    double running = 0.0;
    for (int j = 0; j < num_sites; ++j) {
      const double r = rates[static_cast<std::size_t>(j)];
      if (r <= 0.0) continue;
      last_positive = j;
      running += r;
      if (target < running) {
        site = j;
        break;
      }
    }
    if (site < 0) site = last_positive;
    if (site < 0) {  // accumulated drift left no selectable site: resynchronize
      recompute();
      continue;
    }

    // flip, tracking the two adjacent bonds' defect change
    const int bond_left = config.periodic ? wrap(site - 1, num_sites) : site - 1;
    const int bond_right = site;
    int before = bond_defect(config, bond_left) + bond_defect(config, bond_right);
    config.spins[static_cast<std::size_t>(site)] =
        static_cast<std::int8_t>(-config.spins[static_cast<std::size_t>(site)]);
    defects += bond_defect(config, bond_left) + bond_defect(config, bond_right) - before;

    for (const int n : {site - 1, site, site + 1}) {
      int j = n;
      if (cfg.periodic)
        j = wrap(n, num_sites);
      else if (n < 0 || n >= num_sites)
        continue;
      total -= rates[static_cast<std::size_t>(j)];
      rates[static_cast<std::size_t>(j)] = rate_of(config, j, table);
      total += rates[static_cast<std::size_t>(j)];
    }

    if ((defects & 1) != initial_parity || (cfg.periodic && (defects & 1)))
      throw Error("glauber: defect parity violated");
    if ((++events & 4095LL) == 0) recompute();  // undo floating-point drift
  }
  return out;
}

RunResult single_result(const KmcConfig& cfg, std::uint64_t history_index) {
  RunResult result;
  result.times = cfg.grid();
  result.n_hist = 1;
  result.seeds = {stream_seed(cfg.seed, history_index)};
  result.mean = run_history(cfg, result.times, result.seeds[0]);
  result.stderr_.assign(result.times.size(), 0.0);
  return result;
}

}  // namespace

RunResult kmc_run(const KmcConfig& config, std::uint64_t history_index) {
  config.validate();
  return single_result(config, history_index);
}

RunResult kmc_ensemble(const KmcConfig& config) {
  config.validate();
  if (config.n_hist < 2)
    throw ValidationError("glauber: ensembles need at least two histories");

  RunResult result;
  result.times = config.grid();
  result.n_hist = config.n_hist;
  result.seeds.resize(config.n_hist);
  for (std::size_t k = 0; k < config.n_hist; ++k)
    result.seeds[k] = stream_seed(config.seed, k);

  std::vector<std::vector<double>> slots(config.n_hist);
  std::vector<std::exception_ptr> failures(config.n_hist);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(config.threads) if (config.threads > 1)
#endif
  for (long long k = 0; k < static_cast<long long>(config.n_hist); ++k) {
    try {
      slots[static_cast<std::size_t>(k)] =
          run_history(config, result.times, result.seeds[static_cast<std::size_t>(k)]);
    } catch (...) {
      failures[static_cast<std::size_t>(k)] = std::current_exception();
    }
  }
  for (const auto& failure : failures)
    if (failure) std::rethrow_exception(failure);

  result.mean.resize(result.times.size());
  result.stderr_.resize(result.times.size());
  std::vector<double> samples(config.n_hist);
  for (std::size_t i = 0; i < result.times.size(); ++i) {
    for (std::size_t k = 0; k < config.n_hist; ++k) samples[k] = slots[k][i];
    const MeanStderr ms = mean_stderr(samples);
    result.mean[i] = ms.mean;
    result.stderr_[i] = ms.stderr_;
  }
  return result;
}

PowerLawFit fit_power_exponent(const RunResult& result, double t_lo, double t_hi) {
  if (!(t_lo > 0.0) || !(t_hi > t_lo))
    throw ValidationError("glauber: fit window must satisfy 0 < t_lo < t_hi");
  // A window may overhang the simulated range (the overhang is ignored), but
  // the data must cover at least half of it in log time for the requested
  // exponent to be meaningful.
  double data_lo = 0.0;
  for (const double t : result.times)
    if (t > 0.0) {
      data_lo = t;
      break;
    }
  const double data_hi = result.times.empty() ? 0.0 : result.times.back();
  const double lo = std::max(t_lo, data_lo);
  const double hi = std::min(t_hi, data_hi);
  if (!(data_lo > 0.0) || !(hi > lo) || std::log(hi / lo) < 0.5 * std::log(t_hi / t_lo))
    throw ValidationError("glauber: the data cover less than half of the fit window");

  std::vector<double> x, y, w;
  bool weighted = true;
  for (std::size_t i = 0; i < result.times.size(); ++i) {
    const double t = result.times[i];
    if (t < t_lo || t > t_hi) continue;
    const double m = result.mean[i];
    if (!(m > 0.0))
      throw ConvergenceError("glauber: non-positive density inside the fit window");
    x.push_back(std::log(t));
    y.push_back(std::log(m));
    const double s = result.stderr_[i];
    if (s > 0.0)
      w.push_back((m * m) / (s * s));  // 1/σ² of log m by error propagation
    else
      weighted = false;
  }
  if (x.size() < 3)
    throw ValidationError("glauber: fit window covers fewer than three samples");
  const LinearFit fit = weighted ? linear_fit(x, y, &w) : linear_fit(x, y);
  return {fit.slope, fit.slope_stderr, fit.r2};
}

SteadyRelaxation steady_and_relaxation(const RunResult& result, const RateTable& table) {
  table.validate();
  if (!(table.h > 0.0))
    throw ValidationError("glauber: relaxation analysis needs h > 0");
  if (result.times.size() < 4)
    throw ValidationError("glauber: too few samples for a steady-state analysis");

  const double t_end = result.times.back();
  const double window_start = t_end / 10.0;
  std::vector<std::size_t> window;
  for (std::size_t i = 0; i < result.times.size(); ++i)
    if (result.times[i] >= window_start) window.push_back(i);
  if (window.size() < 2)
    throw ValidationError("glauber: final decade holds fewer than two samples");

  // The steady density is the final-decade average.  The run counts as
  // converged when the first and second halves of that decade agree to 2%
  // of the steady value; a disagreement must also be statistically
  // significant (3 sigma from the ensemble stderr) before it is treated as
  // residual relaxation rather than sampling noise.
  double sum = 0.0;
  for (const std::size_t i : window) sum += result.mean[i];
  const double steady = sum / static_cast<double>(window.size());
  const std::size_t half = window.size() / 2;
  double early = 0.0, late = 0.0, var_early = 0.0, var_late = 0.0;
  for (std::size_t k = 0; k < window.size(); ++k) {
    const std::size_t i = window[k];
    const double s = result.stderr_[i];
    if (k < half) {
      early += result.mean[i];
      var_early += s * s;
    } else {
      late += result.mean[i];
      var_late += s * s;
    }
  }
  early /= static_cast<double>(half);
  late /= static_cast<double>(window.size() - half);
  var_early /= static_cast<double>(half * half);
  var_late /= static_cast<double>((window.size() - half) * (window.size() - half));
  const double drift = std::abs(late - early);
  const double drift_sigma = std::sqrt(var_early + var_late);
  if (drift > 0.02 * std::max(std::abs(steady), 1e-300) &&
      (drift_sigma == 0.0 || drift > 3.0 * drift_sigma))
    throw ConvergenceError("glauber: density still drifts over the final decade");

  // Relaxation: near equilibrium the excess density decays as
  // exp(-t/tau)/sqrt(t) (a single slow mode on top of the diffusive band), so
  // fit log(excess * sqrt(t)) against t over the band where the excess sits
  // between 5% and 50% of the steady density.  Anchoring the band to the
  // steady scale keeps the early power-law coarsening regime, where no single
  // time scale exists, out of the fit.
  std::vector<double> x, y, w;
  bool weighted = true;
  for (std::size_t i = 0; i < result.times.size(); ++i) {
    if (result.times[i] <= 0.0) continue;
    const double excess = std::abs(result.mean[i] - steady);
    if (excess < 0.05 * steady || excess > 0.5 * steady) continue;
    x.push_back(result.times[i]);
    y.push_back(std::log(excess) + 0.5 * std::log(result.times[i]));
    const double s = result.stderr_[i];
    if (s > 0.0)
      w.push_back((excess * excess) / (s * s));  // 1/sigma^2 of log(excess)
    else
      weighted = false;
  }
  if (x.size() < 3)
    throw ConvergenceError("glauber: too few samples in the relaxation band");
  const LinearFit fit = weighted ? linear_fit(x, y, &w) : linear_fit(x, y);
  if (!(fit.slope < 0.0))
    throw ConvergenceError("glauber: excess density does not decay");

  SteadyRelaxation out;
  out.steady_density = steady;
  out.steady_density_analytic = std::sqrt(table.h) / (1.0 + std::sqrt(table.h));
  out.relaxation_time = -1.0 / fit.slope;
  out.relaxation_time_analytic = (1.0 + table.h) / (4.0 * table.base_rate * table.h);
  return out;
}

IsingOracle ising_oracle(const RateTable& table) {
  table.validate();
  if (table.mode != RateMode::Glauber)
    throw ValidationError("glauber: the Ising oracle applies to glauber-mode rates");
  IsingOracle out;
  out.gamma = table.gamma();
  if (table.h == 0.0) {
    out.infinite_coupling = true;
    out.coupling = std::numeric_limits<double>::infinity();
    out.neighbor_correlation = 1.0;
    out.steady_density = 0.0;
    return out;
  }
  out.coupling = 0.5 * std::atanh(out.gamma);
  out.neighbor_correlation = std::tanh(out.coupling);
  out.steady_density = 0.5 * (1.0 - out.neighbor_correlation);
  return out;
}

}  // namespace pairsim
