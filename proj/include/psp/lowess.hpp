#pragma once

#include <span>
#include <vector>

namespace psp {

struct LowessOptions {
  /// Fraction of points used in each local fit.
  double span = 2.0 / 3.0;
  /// Robustness reweighting passes after the initial fit.
  int iterations = 3;
  /// Points closer than delta to the last fitted abscissa are linearly
  /// interpolated instead of fitted; negative selects 1% of the x range.
  double delta = -1.0;
};

/// Cleveland's robust locally weighted linear regression (the classic
/// `clowess` algorithm): tricube-weighted local linear fits over the nearest
/// floor(span * n) points, followed by bisquare robustness iterations on the
/// residuals. `xs` must be sorted nondecreasing.
std::vector<double> lowess(std::span<const double> xs, std::span<const double> ys, const LowessOptions &opts = {});

} // namespace psp
