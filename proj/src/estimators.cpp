#include "rfis/estimators.hpp"

#include <cmath>
#include <string>

namespace rfis {

KernelValueEstimate is_kernel_estimate(const FeatureRepresentation& rep, const PsiSampler& sampler,
                                       std::span<const double> x1, std::span<const double> x2, std::size_t k,
                                       RandomSource& source) {
  if (k < 2) fail(ErrorCode::invalid_argument, "is_kernel_estimate needs k >= 2");
  if (!(sampler.rep() == rep)) fail(ErrorCode::invalid_argument, "sampler was built for " + sampler.rep().id());
  RunningStats acc;
  for (std::size_t j = 0; j < k; ++j) {
    const auto s = sample_psi(sampler, source);
    acc.add(s.weight * phi(rep, x1, s.omega) * phi(rep, x2, s.omega));
  }
  const auto st = acc.summary();
  return {st.mean, st.standard_error, k, sampler.strategy()};
}

PrecomputedSummary::PrecomputedSummary(FeatureRepresentation rep, std::vector<WeightedOmegaSample> omegas,
                                       std::vector<double> sums)
    : rep_(rep), omegas_(std::move(omegas)), sums_(std::move(sums)) {
  if (omegas_.size() != sums_.size()) fail(ErrorCode::invalid_argument, "summary omegas and sums differ in length");
  if (omegas_.empty()) fail(ErrorCode::empty_input, "summary needs at least one omega");
  for (double s : sums_)
    if (!std::isfinite(s)) fail(ErrorCode::overflow, "summary feature sum is not finite");
}

PrecomputedSummary build_summary(const FeatureRepresentation& rep, std::vector<WeightedOmegaSample> samples,
                                 const LabeledDataset& data) {
  if (samples.empty()) fail(ErrorCode::empty_input, "build_summary needs at least one omega sample");
  const auto& pts = data.points();
  const auto labels = data.labels();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    try {
      rep.check_input(pts.point(i));
    } catch (const Error& e) {
      throw Error(e.code(), std::string(e.what()) + " at data index " + std::to_string(i));
    }
  }
  std::vector<double> sums(samples.size(), 0.0);
  for (std::size_t j = 0; j < samples.size(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double f = phi(rep, pts.point(i), samples[j].omega);
      s += f * labels[i];
      if (!std::isfinite(s))
        fail(ErrorCode::overflow, "feature sum overflowed at data index " + std::to_string(i) + ", omega " +
                                      std::to_string(j));
    }
    sums[j] = s;
  }
  return PrecomputedSummary(rep, std::move(samples), std::move(sums));
}

std::vector<double> query_terms(const PrecomputedSummary& summary, std::span<const double> x) {
  const auto omegas = summary.omegas();
  const auto sums = summary.sums();
  std::vector<double> t(omegas.size());
  for (std::size_t j = 0; j < omegas.size(); ++j) t[j] = omegas[j].weight * phi(summary.rep(), x, omegas[j].omega) * sums[j];
  return t;
}

double query(const PrecomputedSummary& summary, std::span<const double> x) {
  const auto omegas = summary.omegas();
  const auto sums = summary.sums();
  double acc = 0.0;
  for (std::size_t j = 0; j < omegas.size(); ++j) acc += omegas[j].weight * phi(summary.rep(), x, omegas[j].omega) * sums[j];
  const double v = acc / static_cast<double>(omegas.size());
  if (!std::isfinite(v)) fail(ErrorCode::overflow, "query result is not finite");
  return v;
}

double naive_ke(const KernelSpec& spec, const LabeledDataset& data, std::span<const double> x) {
  const auto& pts = data.points();
  if (pts.dim() != x.size())
    fail(ErrorCode::invalid_dimension, "query has dimension " + std::to_string(x.size()) + ", data has " +
                                           std::to_string(pts.dim()));
  const auto labels = data.labels();
  double acc = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) acc += kernel_eval(spec, x, pts.point(i)) * labels[i];
  return acc;
}

double bootstrap_standard_error(std::span<const double> terms, std::size_t resamples, RandomSource& source) {
  if (terms.size() < 2 || resamples < 2) fail(ErrorCode::invalid_argument, "bootstrap needs >= 2 terms and resamples");
  RunningStats means;
  for (std::size_t b = 0; b < resamples; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < terms.size(); ++i) s += terms[source.below(terms.size())];
    means.add(s / static_cast<double>(terms.size()));
  }
  return std::sqrt(means.summary().variance);
}

}  // namespace rfis
