#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "rfis/features.hpp"
#include "rfis/numerics.hpp"

namespace rfis {

/// Tabulation grid over omega. Frequency coordinates use cells of width
/// `step` on [lo, hi); the phase coordinate (trig only) uses `phase_cells`
/// equal cells on [0, 2pi).
struct GridSpec {
  double lo = -8.0;
  double hi = 8.0;
  double step = 0.004;
  std::size_t phase_cells = 720;

  std::size_t frequency_cells() const;
  void validate() const;
};

/// Upper bound on the number of grid cells a grid oracle may tabulate.
inline constexpr std::size_t kMaxGridCells = std::size_t{1} << 23;

/// Data-driven q(omega) = sqrt(mean_{x in d1} phi(x, omega)^2 * mean_{x in d2} phi(x, omega)^2).
///
/// Immutable and cheap to copy. For one-dimensional data the per-dataset
/// means are evaluated through a Taylor expansion around precomputed row
/// moments, which reproduces the direct sum to rounding error at O(1) cost.
class QEstimator {
 public:
  QEstimator(FeatureRepresentation rep, Dataset d1, Dataset d2, const GridSpec& accel = {});
  /// Same dataset for both marginals; q reduces to the plain mean of phi^2.
  QEstimator(FeatureRepresentation rep, Dataset shared, const GridSpec& accel = {});

  const FeatureRepresentation& rep() const noexcept;
  const Dataset& d1() const noexcept;
  const Dataset& d2() const noexcept;
  bool same_marginals() const noexcept;
  bool accelerated() const noexcept;

  double q_hat(std::span<const double> omega) const;
  double q_hat(const OmegaPoint& omega) const { return q_hat(omega.coords()); }
  /// Same value without the row-moment shortcut.
  double q_hat_direct(std::span<const double> omega) const;

  struct Impl;

 private:
  std::shared_ptr<const Impl> impl_;
};

struct WeightedOmegaSample {
  OmegaPoint omega;
  double weight = 1.0;  // p_Omega(omega) / p_Psi(omega)
};

enum class SamplerStrategy { naive, pool_resampler, rejection, grid_oracle };

std::string_view to_string(SamplerStrategy s) noexcept;
SamplerStrategy parse_sampler_strategy(std::string_view name);

/// Monte Carlo mean of q_hat over fresh Omega draws.
Estimate normalization_estimate(const QEstimator& qest, std::size_t pool_size, RandomSource& source);

/// Tabulated optimal proposal: cell weights p_Omega(c) q_hat(c) vol(c) at cell
/// centres, normalized to cell probabilities.
class PsiGrid {
 public:
  PsiGrid(const QEstimator& qest, const GridSpec& spec);

  const GridSpec& spec() const noexcept { return spec_; }
  std::size_t cell_count() const noexcept { return raw_.size(); }
  /// Cells per omega axis (frequencies first, phase last).
  std::span<const std::size_t> shape() const noexcept { return shape_; }
  std::vector<double> cell_center(std::size_t cell) const;
  double cell_volume() const noexcept { return volume_; }
  /// p_Omega(c) q_hat(c) vol for each cell.
  std::span<const double> raw_weights() const noexcept { return raw_; }
  /// Cell probability (normalized).
  double mass(std::size_t cell) const noexcept { return raw_[cell] / z_.value; }
  /// Quadrature value of E_Omega[q_hat]; `se` is an error estimate made of the
  /// even/odd half-grid discrepancy plus an extrapolated truncated tail.
  Estimate normalization() const noexcept { return z_; }
  /// Index of the cell containing omega, or nullopt outside the grid.
  std::optional<std::size_t> locate(std::span<const double> omega) const;

  std::size_t draw_cell(double u) const;
  /// Uniformly jittered point inside a cell, phase folded into [0, 2pi).
  std::vector<double> jitter(std::size_t cell, RandomSource& source) const;

 private:
  GridSpec spec_;
  std::vector<std::size_t> shape_;
  std::vector<double> step_;
  std::vector<double> origin_;
  double volume_ = 0.0;
  std::vector<double> raw_;
  std::vector<double> cdf_;
  Estimate z_;
};

/// A proposal Psi with its normalizer. Immutable and cheap to copy.
class PsiSampler {
 public:
  SamplerStrategy strategy() const noexcept;
  const QEstimator& qest() const noexcept;
  const FeatureRepresentation& rep() const noexcept;
  /// Estimate of E_Omega[q_hat] (1 for the naive sampler).
  Estimate z_hat() const noexcept;
  /// Rejection envelope constant; 0 for other strategies.
  double envelope() const noexcept;
  /// Grid table for grid_oracle samplers, else nullptr.
  const PsiGrid* grid() const noexcept;
  std::span<const double> pool_q() const noexcept;
  /// Running sums of pool_q (pool_resampler only).
  std::span<const double> pool_cdf() const noexcept;
  std::span<const double> pool_omega(std::size_t i) const noexcept;

  struct Impl;
  explicit PsiSampler(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

 private:
  std::shared_ptr<const Impl> impl_;
};

inline constexpr std::size_t kMaxConsecutiveRejections = 1'000'000;
inline constexpr double kEnvelopeFactor = 1.5;

PsiSampler build_sampler(const QEstimator& qest, SamplerStrategy strategy, std::size_t pool_size,
                         const std::optional<GridSpec>& grid_spec, RandomSource& source);

/// Omega itself as the proposal; every weight is 1.
PsiSampler naive_sampler(const QEstimator& qest);

WeightedOmegaSample sample_psi(const PsiSampler& sampler, RandomSource& source);

double psi_log_density(const PsiSampler& sampler, std::span<const double> omega);

}  // namespace rfis
