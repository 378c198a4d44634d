#include "psp/lowess.hpp"

#include <algorithm>
#include <cmath>

#include "psp/errors.hpp"

namespace psp {

namespace {

double cube(double v) { return v * v * v; }

/// Local fit at xs_point using points [nleft, nright]; returns false when all
/// weights vanish.
bool local_fit(std::span<const double> x, std::span<const double> y, double xs_point, double &ys_out,
               std::size_t nleft, std::size_t nright, std::vector<double> &w, bool use_robust,
               const std::vector<double> &robust) {
  const std::size_t n = x.size();
  const double range = x[n - 1] - x[0];
  const double h = std::max(xs_point - x[nleft], x[nright] - xs_point);
  const double h9 = 0.999 * h;
  const double h1 = 0.001 * h;

  double total = 0.0;
  std::size_t j = nleft;
  for (; j < n; ++j) {
    w[j] = 0.0;
    const double r = std::abs(x[j] - xs_point);
    if (r <= h9) {
      w[j] = r <= h1 ? 1.0 : cube(1.0 - cube(r / h));
      if (use_robust) w[j] *= robust[j];
      total += w[j];
    } else if (x[j] > xs_point) {
      break;
    }
  }
  const std::size_t nrt = j - 1;  // rightmost point, ties included
  if (total <= 0.0) return false;

  for (j = nleft; j <= nrt; ++j) w[j] /= total;
  if (h > 0.0) {
    double center = 0.0;
    for (j = nleft; j <= nrt; ++j) center += w[j] * x[j];
    double b = xs_point - center;
    double c = 0.0;
    for (j = nleft; j <= nrt; ++j) c += w[j] * (x[j] - center) * (x[j] - center);
    if (std::sqrt(c) > 0.001 * range) {
      b /= c;
      for (j = nleft; j <= nrt; ++j) w[j] *= b * (x[j] - center) + 1.0;
    }
  }
  double fit = 0.0;
  for (j = nleft; j <= nrt; ++j) fit += w[j] * y[j];
  ys_out = fit;
  return true;
}

} // namespace

std::vector<double> lowess(std::span<const double> x, std::span<const double> y, const LowessOptions &opts) {
  const std::size_t n = x.size();
  if (y.size() != n) throw UsageError("lowess: xs and ys differ in length");
  if (n < 2) throw UsageError("lowess needs at least 2 points");
  if (!(opts.span > 0.0 && opts.span <= 1.0)) throw UsageError("lowess span must lie in (0, 1]");
  for (std::size_t i = 1; i < n; ++i) {
    if (x[i] < x[i - 1]) throw UsageError("lowess: xs must be sorted");
  }
  const double delta = opts.delta < 0.0 ? 0.01 * (x[n - 1] - x[0]) : opts.delta;

  std::vector<double> ys(n), res(n), robust(n, 1.0), w(n);
  const auto ns = std::clamp<std::size_t>(static_cast<std::size_t>(opts.span * static_cast<double>(n) + 1e-7), 2, n);

  for (int iter = 0; iter <= opts.iterations; ++iter) {
    std::size_t nleft = 0;
    std::size_t nright = ns - 1;
    std::ptrdiff_t last = -1;
    std::size_t i = 0;
    while (true) {
      if (nright < n - 1) {
        // Slide the window while it gets closer to x[i].
        while (nright < n - 1) {
          const double d1 = x[i] - x[nleft];
          const double d2 = x[nright + 1] - x[i];
          if (d1 <= d2) break;
          ++nleft;
          ++nright;
        }
      }
      if (!local_fit(x, y, x[i], ys[i], nleft, nright, w, iter > 0, robust)) ys[i] = y[i];
      if (last < static_cast<std::ptrdiff_t>(i) - 1) {
        const double denom = x[i] - x[static_cast<std::size_t>(last)];
        for (auto j = static_cast<std::size_t>(last + 1); j < i; ++j) {
          const double alpha = (x[j] - x[static_cast<std::size_t>(last)]) / denom;
          ys[j] = alpha * ys[i] + (1.0 - alpha) * ys[static_cast<std::size_t>(last)];
        }
      }
      last = static_cast<std::ptrdiff_t>(i);
      const double cut = x[i] + delta;
      for (i = static_cast<std::size_t>(last) + 1; i < n; ++i) {
        if (x[i] > cut) break;
        if (x[i] == x[static_cast<std::size_t>(last)]) {
          ys[i] = ys[static_cast<std::size_t>(last)];
          last = static_cast<std::ptrdiff_t>(i);
        }
      }
      i = std::max(static_cast<std::size_t>(last) + 1, i - 1);
      if (last >= static_cast<std::ptrdiff_t>(n) - 1) break;
    }

    for (i = 0; i < n; ++i) res[i] = y[i] - ys[i];
    if (iter == opts.iterations) break;

    // Robustness weights: bisquare of residuals scaled by six median |res|.
    std::vector<double> abs_res(n);
    double mean_abs_y = 0.0;
    for (i = 0; i < n; ++i) {
      abs_res[i] = std::abs(res[i]);
      mean_abs_y += std::abs(y[i]);
    }
    mean_abs_y /= static_cast<double>(n);
    std::sort(abs_res.begin(), abs_res.end());
    const std::size_t m1 = n / 2;
    const double cmad = n % 2 == 0 ? 3.0 * (abs_res[m1 - 1] + abs_res[m1]) : 6.0 * abs_res[m1];
    if (cmad < 1e-7 * mean_abs_y) break;  // already an essentially exact fit
    const double c9 = 0.999 * cmad;
    const double c1 = 0.001 * cmad;
    for (i = 0; i < n; ++i) {
      const double r = std::abs(res[i]);
      if (r <= c1) {
        robust[i] = 1.0;
      } else if (r <= c9) {
        const double u = r / cmad;
        robust[i] = (1.0 - u * u) * (1.0 - u * u);
      } else {
        robust[i] = 0.0;
      }
    }
  }
  return ys;
}

} // namespace psp
