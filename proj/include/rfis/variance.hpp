#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "rfis/features.hpp"
#include "rfis/kernels.hpp"
#include "rfis/sampling.hpp"

namespace rfis {

/// Statistical contracts compare against this many combined standard errors.
inline constexpr double kToleranceSe = 4.0;
/// Absolute allowance for rounding in deterministic (quadrature) comparisons.
inline constexpr double kRoundingFloor = 1e-12;
/// Data-pair averages use the full double loop up to this many pairs.
inline constexpr std::size_t kFullPairLoopLimit = 1'000'000;
inline constexpr std::size_t kSubsampledPairs = 200'000;

inline double combined_se(double a, double b) { return std::sqrt(a * a + b * b); }

/// Data-pair averages of K(x1,x2)^2 and K(x1,x1)K(x2,x2) - K(x1,x2)^2.
/// Both averages are taken over the same pairs; randomness (when the pair
/// count is too large for a full loop) comes from source.substream("kernel-pairs").
struct PairKernelMoments {
  Estimate k12_sq;
  Estimate cs_gap;
  bool exhaustive = true;
};

PairKernelMoments pair_kernel_moments(const KernelSpec& spec, const Dataset& d1, const Dataset& d2,
                                      const RandomSource& source);

/// Mean over data pairs of the per-pair sample variance of weight * phi * phi.
Estimate empirical_expected_variance(const FeatureRepresentation& rep, const PsiSampler& sampler, const Dataset& d1,
                                     const Dataset& d2, std::size_t n_pairs, std::size_t n_omega,
                                     const RandomSource& source);

/// (E_Omega q)^2 - E[K^2], with E_Omega q estimated from a fresh pool.
Estimate theoretical_optimal_variance(const QEstimator& qest, const KernelSpec& spec, std::size_t pool_size,
                                      const RandomSource& source);
/// Same value with the normalizer carried by a built sampler.
Estimate theoretical_optimal_variance(const PsiSampler& sampler, const KernelSpec& spec, const RandomSource& source);

/// E[K(x1,x1)K(x2,x2) - K(x1,x2)^2] over data pairs.
Estimate cauchy_schwarz_bound(const KernelSpec& spec, const Dataset& d1, const Dataset& d2, const RandomSource& source);

struct EqualityReport {
  Estimate v_hat;
  Estimate bound;
  double gap = 0.0;  // bound - v_hat
  double combined_stderr = 0.0;
  bool ok = false;
};

/// Optimal variance versus the Cauchy-Schwarz bound when both marginals are `d`.
EqualityReport equality_check(const FeatureRepresentation& rep, const KernelSpec& spec, const Dataset& d,
                              std::size_t pool_size, const RandomSource& source);
/// Same check with the normalizer of an already built sampler (both marginals must match).
EqualityReport equality_check(const PsiSampler& sampler, const KernelSpec& spec, const RandomSource& source);

struct AuditEntry {
  std::string direction;
  double t = 0.0;
  double increase = 0.0;  // objective(p_t) - objective(p_opt)
};

struct AuditResult {
  double v_optimal = 0.0;
  std::vector<AuditEntry> entries;
  double min_increase() const;
};

/// Grid-quadrature audit of the variance objective around the optimal proposal:
/// p_t proportional to p_opt * exp(t g) for bounded directions g at t = +-epsilon.
/// The first entry is the zero direction.
AuditResult perturbation_audit(const QEstimator& qest, const KernelSpec& spec, const GridSpec& grid,
                               std::size_t n_directions, double epsilon, const RandomSource& source);

struct VarianceReport {
  std::string rep;
  std::string sampler;
  Estimate empirical_v;
  Estimate theoretical_v_hat;
  Estimate cs_bound;
  std::size_t n_pairs = 0;
  std::size_t n_omega = 0;
  std::uint64_t seed = 0;
};

}  // namespace rfis
