#pragma once

#include <optional>
#include <vector>

#include "pairsim/types.hpp"

namespace pairsim {

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;  // +inf sentinel when n == 1
};

MeanStderr mean_stderr(const std::vector<double>& samples);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double r2 = 0.0;
};

// Least squares y = intercept + slope*x. Weights, when given, are 1/sigma^2; the
// slope stderr then comes from the weight covariance, otherwise from residuals.
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y,
                     const std::vector<double>* weights = nullptr);

// First time the series crosses level*saturation, with linear interpolation between
// grid points; a segment that rises by more than half the saturation scale within
// one sample counts as a discontinuous step whose crossing time is the sample time.
// Saturation is the mean of the final 10% of samples; throws ConvergenceError unless
// that tail varies by less than 5%.
double equilibrium_time(const std::vector<double>& times, const std::vector<double>& values,
                        double level = 0.8);

}  // namespace pairsim
