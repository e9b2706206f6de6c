#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "rfis/kernels.hpp"
#include "rfis/numerics.hpp"

namespace rfis {

enum class FeatureKind { trig, positive_exp };

std::string_view to_string(FeatureKind kind) noexcept;
FeatureKind parse_feature_kind(std::string_view name);

/// Feature parameter. trig: d frequencies followed by a phase in [0, 2pi);
/// positive_exp: d frequencies.
class OmegaPoint {
 public:
  OmegaPoint() = default;
  explicit OmegaPoint(std::vector<double> coords);

  std::size_t size() const noexcept { return coords_.size(); }
  double operator[](std::size_t i) const { return coords_[i]; }
  std::span<const double> coords() const noexcept { return coords_; }

  friend bool operator==(const OmegaPoint&, const OmegaPoint&) = default;

 private:
  std::vector<double> coords_;
};

/// Inputs to positive_exp features must satisfy |x| / scale <= this bound.
inline constexpr double kPositiveExpMaxNormRatio = 3.0;

/// A feature map phi(x, omega) with base distribution Omega whose product
/// phi(x1, .) phi(x2, .) averages to the target kernel.
///
///   trig:                     sqrt(2) cos(w.x / s + b),  Omega = N(0, I) x U[0, 2pi)
///   positive_exp/gaussian:    exp(w.x / s - |x|^2 / s^2), Omega = N(0, I)
///   positive_exp/exponential: exp(w.x / s - |x|^2 / (2 s^2)), Omega = N(0, I)
class FeatureRepresentation {
 public:
  FeatureRepresentation(FeatureKind kind, KernelSpec target, std::size_t dim);

  FeatureKind kind() const noexcept { return kind_; }
  const KernelSpec& target() const noexcept { return target_; }
  std::size_t dim() const noexcept { return dim_; }
  /// Length of an OmegaPoint for this representation.
  std::size_t omega_dim() const noexcept { return kind_ == FeatureKind::trig ? dim_ + 1 : dim_; }
  bool has_phase() const noexcept { return kind_ == FeatureKind::trig; }

  /// "trig/gaussian" style identifier.
  std::string id() const;

  /// Coefficient c in phi = exp(w.x/s - c |x|^2/s^2) for positive_exp.
  double norm_coefficient() const noexcept { return target_.kind() == KernelKind::gaussian ? 1.0 : 0.5; }

  /// Throws the overflow error for positive_exp inputs beyond the norm bound.
  void check_input(std::span<const double> x) const;
  void check_inputs(const Dataset& data) const;

  friend bool operator==(const FeatureRepresentation&, const FeatureRepresentation&) = default;

 private:
  FeatureKind kind_;
  KernelSpec target_;
  std::size_t dim_;
};

double phi(const FeatureRepresentation& rep, std::span<const double> x, std::span<const double> omega);
inline double phi(const FeatureRepresentation& rep, std::span<const double> x, const OmegaPoint& omega) {
  return phi(rep, x, omega.coords());
}

/// Folds a phase angle into [0, 2pi).
double canonical_phase(double b);

/// Builds an OmegaPoint, folding the phase coordinate (if any) into [0, 2pi).
OmegaPoint canonical_omega(const FeatureRepresentation& rep, std::vector<double> coords);

OmegaPoint omega_sample(const FeatureRepresentation& rep, RandomSource& source);

double omega_log_density(const FeatureRepresentation& rep, std::span<const double> omega);
inline double omega_log_density(const FeatureRepresentation& rep, const OmegaPoint& omega) {
  return omega_log_density(rep, omega.coords());
}

/// Mean and standard error of phi(x1, w) phi(x2, w) over k draws from Omega.
SummaryStats mc_kernel_check(const FeatureRepresentation& rep, std::span<const double> x1, std::span<const double> x2,
                             std::size_t k, RandomSource& source);

}  // namespace rfis
