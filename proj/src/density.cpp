#include "psp/density.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "psp/errors.hpp"
#include "psp/stats.hpp"

namespace psp {

Bandwidth::Bandwidth(int dim, double b11, double b12, double b22) : dim_(dim) {
  m_[0][0] = b11;
  m_[0][1] = m_[1][0] = b12;
  m_[1][1] = b22;
  const double d = det();
  if (!(b11 > 0.0) || !(d > 0.0) || !std::isfinite(d)) {
    throw NumericError("bandwidth matrix is singular or not positive definite");
  }
  if (dim_ == 1) {
    inv_[0][0] = 1.0 / b11;
  } else {
    inv_[0][0] = b22 / d;
    inv_[1][1] = b11 / d;
    inv_[0][1] = inv_[1][0] = -b12 / d;
  }
}

Bandwidth Bandwidth::scalar(double h) {
  if (!(h > 0.0)) throw NumericError("bandwidth must be positive");
  return Bandwidth(1, h * h, 0.0, 0.0);
}

Bandwidth Bandwidth::matrix2(double b11, double b12, double b22) { return Bandwidth(2, b11, b12, b22); }

double Bandwidth::det() const { return dim_ == 1 ? m_[0][0] : m_[0][0] * m_[1][1] - m_[0][1] * m_[1][0]; }

double Bandwidth::h() const { return std::sqrt(det()); }

double Bandwidth::inverse_quadratic(Vec2 u) const {
  if (dim_ == 1) return u.x * u.x * inv_[0][0];
  return u.x * u.x * inv_[0][0] + 2.0 * u.x * u.y * inv_[0][1] + u.y * u.y * inv_[1][1];
}

std::string Bandwidth::summary() const {
  std::ostringstream os;
  os.precision(6);
  if (dim_ == 1) {
    os << "h=" << h();
  } else {
    os << "B=[" << m_[0][0] << " " << m_[0][1] << "; " << m_[1][0] << " " << m_[1][1] << "]";
  }
  return os.str();
}

BandwidthMethod parse_bandwidth_method(const std::string &name) {
  if (name == "auto" || name == "automatic" || name == "default") return BandwidthMethod::automatic;
  if (name == "normal_reference") return BandwidthMethod::normal_reference;
  if (name == "silverman_1d" || name == "silverman") return BandwidthMethod::silverman_1d;
  throw UsageError("unknown bandwidth method '" + name + "'");
}

std::string to_string(BandwidthMethod m) {
  switch (m) {
  case BandwidthMethod::automatic:
    return "auto";
  case BandwidthMethod::normal_reference:
    return "normal_reference";
  case BandwidthMethod::silverman_1d:
    return "silverman_1d";
  }
  return "auto";
}

double gaussian_kde_sum(std::span<const Vec2> samples, int dim, const Bandwidth &bw, Vec2 x) {
  const double norm_const = dim == 1 ? 1.0 / std::sqrt(2.0 * std::numbers::pi) : 1.0 / (2.0 * std::numbers::pi);
  double s = 0.0;
  for (const Vec2 &z : samples) s += std::exp(-0.5 * bw.inverse_quadratic(x - z));
  return s * norm_const / (static_cast<double>(samples.size()) * bw.h());
}

DensityEstimate::DensityEstimate(int dim, std::vector<Vec2> samples, Bandwidth bandwidth)
    : dim_(dim), samples_(std::move(samples)), bandwidth_(bandwidth) {
  if (samples_.empty()) throw DataError("density estimate needs at least one sample");
  if (bandwidth_.dim() != dim_) throw UsageError("bandwidth dimension does not match the samples");
}

double DensityEstimate::operator()(Vec2 x) const { return gaussian_kde_sum(samples_, dim_, bandwidth_, x); }

double kde_eval(const DensityEstimate &est, Vec2 x) { return est(x); }

Bandwidth select_bandwidth(std::span<const Vec2> samples, int dim, BandwidthMethod method) {
  const std::size_t n = samples.size();
  if (n < 2) throw DataError("bandwidth selection needs at least 2 samples");
  if (method == BandwidthMethod::automatic) {
    method = dim == 1 ? BandwidthMethod::silverman_1d : BandwidthMethod::normal_reference;
  }
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = samples[i].x;
    ys[i] = samples[i].y;
  }
  const double sx = stats::sd(xs);
  if (!(sx > 0.0) || (dim == 2 && !(stats::sd(ys) > 0.0))) {
    throw DegenerateSamplesError(
        "samples have zero spread; add jitter or treat the slice as an exact atom");
  }
  const double nn = static_cast<double>(n);
  if (method == BandwidthMethod::silverman_1d) {
    if (dim != 1) throw UsageError("silverman_1d applies to one-dimensional samples only");
    std::sort(xs.begin(), xs.end());
    const double iqr = stats::quantile_sorted(xs, 0.75) - stats::quantile_sorted(xs, 0.25);
    double spread = sx;
    if (iqr > 0.0) spread = std::min(sx, iqr / 1.34);
    return Bandwidth::scalar(0.9 * spread * std::pow(nn, -0.2));
  }
  const double d = dim;
  const double factor = std::pow(4.0 / (d + 2.0), 2.0 / (d + 4.0)) * std::pow(nn, -2.0 / (d + 4.0));
  if (dim == 1) return Bandwidth::scalar(std::sqrt(factor) * sx);
  const double mx = stats::mean(xs), my = stats::mean(ys);
  double cxx = 0.0, cxy = 0.0, cyy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    cxx += (xs[i] - mx) * (xs[i] - mx);
    cxy += (xs[i] - mx) * (ys[i] - my);
    cyy += (ys[i] - my) * (ys[i] - my);
  }
  cxx /= nn - 1.0;
  cxy /= nn - 1.0;
  cyy /= nn - 1.0;
  if (!(cxx * cyy - cxy * cxy > 1e-14 * cxx * cyy)) {
    throw DegenerateSamplesError("sample covariance is singular (collinear samples)");
  }
  return Bandwidth::matrix2(factor * cxx, factor * cxy, factor * cyy);
}

std::size_t common_grid_size(const Dataset &dataset) {
  if (dataset.empty()) throw DataError("dataset is empty");
  const auto n_h = dataset.front().size();
  const double horizon = dataset.front().horizon;
  for (const auto &t : dataset) {
    if (t.size() != n_h || t.horizon != horizon || t.dim != dataset.front().dim) {
      throw DataError("trajectories do not share a common grid");
    }
  }
  return n_h;
}

namespace {

std::vector<Vec2> slice(const Dataset &dataset, std::size_t j) {
  const auto n_h = common_grid_size(dataset);
  if (j >= n_h) throw DataError("grid index out of range");
  std::vector<Vec2> v;
  v.reserve(dataset.size());
  for (const auto &t : dataset) v.push_back(t.samples[j]);
  return v;
}

} // namespace

DensityEstimate time_slice_density(const Dataset &dataset, std::size_t j, BandwidthMethod method) {
  auto values = slice(dataset, j);
  const int dim = dataset.front().dim;
  const Bandwidth bw = select_bandwidth(values, dim, method);
  return DensityEstimate(dim, std::move(values), bw);
}

DensityEstimate time_slice_density(const Dataset &dataset, std::size_t j, const Bandwidth &bw) {
  auto values = slice(dataset, j);
  return DensityEstimate(dataset.front().dim, std::move(values), bw);
}

} // namespace psp
