#pragma once

#include <span>
#include <string>
#include <vector>

#include "rfis/features.hpp"
#include "rfis/kernels.hpp"
#include "rfis/sampling.hpp"

namespace rfis {

struct KernelValueEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t k = 0;
  SamplerStrategy strategy = SamplerStrategy::naive;
};

/// Mean of weight * phi(x1, w) * phi(x2, w) over k draws from the sampler.
KernelValueEstimate is_kernel_estimate(const FeatureRepresentation& rep, const PsiSampler& sampler,
                                       std::span<const double> x1, std::span<const double> x2, std::size_t k,
                                       RandomSource& source);

/// Per-omega feature sums s_j = sum_i phi(x_i, w_j) y_i over a labeled dataset.
/// Importance weights stay attached to each omega and are applied at query time.
class PrecomputedSummary {
 public:
  PrecomputedSummary(FeatureRepresentation rep, std::vector<WeightedOmegaSample> omegas, std::vector<double> sums);

  const FeatureRepresentation& rep() const noexcept { return rep_; }
  std::span<const WeightedOmegaSample> omegas() const noexcept { return omegas_; }
  std::span<const double> sums() const noexcept { return sums_; }
  std::size_t k() const noexcept { return sums_.size(); }

 private:
  FeatureRepresentation rep_;
  std::vector<WeightedOmegaSample> omegas_;
  std::vector<double> sums_;
};

PrecomputedSummary build_summary(const FeatureRepresentation& rep, std::vector<WeightedOmegaSample> samples,
                                 const LabeledDataset& data);

/// (1/k) sum_j weight_j phi(x, w_j) s_j, summed in ascending j.
double query(const PrecomputedSummary& summary, std::span<const double> x);

/// The per-omega terms whose mean is query(); used for bootstrap error bars.
std::vector<double> query_terms(const PrecomputedSummary& summary, std::span<const double> x);

/// Exact sum_i K(x, x_i) y_i.
double naive_ke(const KernelSpec& spec, const LabeledDataset& data, std::span<const double> x);

/// Standard deviation of `resamples` bootstrap means of `terms`.
double bootstrap_standard_error(std::span<const double> terms, std::size_t resamples, RandomSource& source);

}  // namespace rfis
