#include "pairsim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pairsim {

MeanStderr mean_stderr(const std::vector<double>& samples) {
  const std::size_t n = samples.size();
  if (n == 0) throw ValidationError("mean_stderr: no samples");
  double sum = 0.0;
  for (double s : samples) sum += s;
  const double mean = sum / static_cast<double>(n);
  if (n == 1) return {mean, std::numeric_limits<double>::infinity()};
  double ss = 0.0;
  for (double s : samples) ss += (s - mean) * (s - mean);
  const double var = ss / static_cast<double>(n - 1);
  return {mean, std::sqrt(var / static_cast<double>(n))};
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y,
                     const std::vector<double>* weights) {
  const std::size_t n = x.size();
  if (n != y.size() || (weights && weights->size() != n))
    throw ValidationError("linear_fit: size mismatch");
  if (n < 2) throw ValidationError("linear_fit: need at least two points");

  double sw = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = weights ? (*weights)[i] : 1.0;
    if (w < 0.0 || !std::isfinite(w)) throw ValidationError("linear_fit: bad weight");
    sw += w;
    sx += w * x[i];
    sy += w * y[i];
    sxx += w * x[i] * x[i];
    sxy += w * x[i] * y[i];
  }
  const double delta = sw * sxx - sx * sx;
  if (delta <= 0.0 || sw <= 0.0) throw ValidationError("linear_fit: degenerate abscissae");

  LinearFit fit;
  fit.slope = (sw * sxy - sx * sy) / delta;
  fit.intercept = (sxx * sy - sx * sxy) / delta;

  double ss_res = 0.0, ss_tot = 0.0;
  const double y_mean = sy / sw;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = weights ? (*weights)[i] : 1.0;
    const double fit_y = fit.intercept + fit.slope * x[i];
    ss_res += w * (y[i] - fit_y) * (y[i] - fit_y);
    ss_tot += w * (y[i] - y_mean) * (y[i] - y_mean);
  }
  fit.r2 = (ss_tot > 0.0) ? 1.0 - ss_res / ss_tot : 1.0;
  if (weights) {
    fit.slope_stderr = std::sqrt(sw / delta);
  } else {
    const double dof = static_cast<double>(n) - 2.0;
    fit.slope_stderr = (dof > 0.0) ? std::sqrt((ss_res / dof) * sw / delta) : 0.0;
  }
  return fit;
}

double equilibrium_time(const std::vector<double>& times, const std::vector<double>& values,
                        double level) {
  const std::size_t n = times.size();
  if (n != values.size()) throw ValidationError("equilibrium_time: size mismatch");
  if (n < 3) throw ValidationError("equilibrium_time: series too short");
  if (level <= 0.0 || level >= 1.0) throw ValidationError("equilibrium_time: level must be in (0,1)");

  const std::size_t tail = std::max<std::size_t>(2, n / 10);
  double sat = 0.0, tail_min = values[n - tail], tail_max = values[n - tail];
  for (std::size_t i = n - tail; i < n; ++i) {
    sat += values[i];
    tail_min = std::min(tail_min, values[i]);
    tail_max = std::max(tail_max, values[i]);
  }
  sat /= static_cast<double>(tail);
  const double scale = std::max(std::abs(sat), 1e-300);
  if ((tail_max - tail_min) / scale >= 0.05)
    throw ConvergenceError("equilibrium_time: series has not saturated (final 10% varies >= 5%)");

  const double threshold = level * sat;
  const bool rising = values.front() < threshold;
  auto crossed = [&](double v) { return rising ? v >= threshold : v <= threshold; };

  if (crossed(values[0])) return times[0];
  for (std::size_t i = 1; i < n; ++i) {
    if (!crossed(values[i])) continue;
    const double v0 = values[i - 1], v1 = values[i];
    // a rise of more than half the saturation scale within one sample is a
    // discontinuity, and the jump instant itself is the crossing time
    if (v1 == v0 || std::abs(v1 - v0) > 0.5 * scale) return times[i];
    const double f = (threshold - v0) / (v1 - v0);
    return times[i - 1] + f * (times[i] - times[i - 1]);
  }
  throw ConvergenceError("equilibrium_time: series never crosses the threshold");
}

}  // namespace pairsim
