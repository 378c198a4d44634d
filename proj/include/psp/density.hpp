#pragma once

#include <span>
#include <string>
#include <vector>

#include "psp/geometry.hpp"
#include "psp/simulate.hpp"

namespace psp {

/// d x d symmetric positive-definite bandwidth matrix (d = 1 or 2).
class Bandwidth {
public:
  /// 1D bandwidth with scalar h, i.e. the matrix [h^2].
  static Bandwidth scalar(double h);
  static Bandwidth matrix2(double b11, double b12, double b22);

  int dim() const { return dim_; }
  double operator()(int i, int j) const { return m_[i][j]; }
  double det() const;
  /// sqrt(det(B)).
  double h() const;
  /// Quadratic form u^T B^{-1} u.
  double inverse_quadratic(Vec2 u) const;
  std::string summary() const;

private:
  Bandwidth(int dim, double b11, double b12, double b22);
  int dim_ = 1;
  double m_[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
  double inv_[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
};

enum class BandwidthMethod { automatic, normal_reference, silverman_1d };

BandwidthMethod parse_bandwidth_method(const std::string &name);
std::string to_string(BandwidthMethod m);

/// Gaussian-kernel density estimate over a fixed sample set.
class DensityEstimate {
public:
  DensityEstimate(int dim, std::vector<Vec2> samples, Bandwidth bandwidth);

  int dim() const { return dim_; }
  const std::vector<Vec2> &samples() const { return samples_; }
  const Bandwidth &bandwidth() const { return bandwidth_; }

  /// (1 / (n sqrt(det B))) sum_i K(B^{-1/2} (x - z_i)).
  double operator()(Vec2 x) const;

private:
  int dim_;
  std::vector<Vec2> samples_;
  Bandwidth bandwidth_;
};

double kde_eval(const DensityEstimate &est, Vec2 x);

/// Gaussian kernel sum at x, scaled: (1 / (n sqrt(det B))) sum_i K(...).
/// Shared by DensityEstimate and the batch kernels.
double gaussian_kde_sum(std::span<const Vec2> samples, int dim, const Bandwidth &bw, Vec2 x);

/// silverman_1d: 0.9 min(sd, IQR/1.34) n^{-1/5}.
/// normal_reference: (4/(d+2))^{2/(d+4)} n^{-2/(d+4)} Sigma_hat.
/// automatic: silverman_1d in 1D, normal_reference in 2D.
/// Throws DegenerateSamplesError when some coordinate has zero spread.
Bandwidth select_bandwidth(std::span<const Vec2> samples, int dim, BandwidthMethod method);

/// KDE over the values of every trajectory at grid index j.
DensityEstimate time_slice_density(const Dataset &dataset, std::size_t j, BandwidthMethod method);
DensityEstimate time_slice_density(const Dataset &dataset, std::size_t j, const Bandwidth &bw);

/// Verifies that all trajectories share the same grid; returns n_H.
std::size_t common_grid_size(const Dataset &dataset);

} // namespace psp
