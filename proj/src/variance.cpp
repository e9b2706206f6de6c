#include "rfis/variance.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace rfis {

PairKernelMoments pair_kernel_moments(const KernelSpec& spec, const Dataset& d1, const Dataset& d2,
                                      const RandomSource& source) {
  if (d1.dim() != d2.dim()) fail(ErrorCode::invalid_dimension, "datasets differ in dimension");
  const std::size_t n1 = d1.size(), n2 = d2.size();
  std::vector<double> self1(n1), self2(n2);
  for (std::size_t i = 0; i < n1; ++i) self1[i] = kernel_eval(spec, d1.point(i), d1.point(i));
  for (std::size_t j = 0; j < n2; ++j) self2[j] = kernel_eval(spec, d2.point(j), d2.point(j));

  RunningStats k2, gap;
  const auto add = [&](std::size_t i, std::size_t j) {
    const double k = kernel_eval(spec, d1.point(i), d2.point(j));
    k2.add(k * k);
    gap.add(self1[i] * self2[j] - k * k);
  };
  PairKernelMoments out;
  if (n1 * n2 <= kFullPairLoopLimit) {
    for (std::size_t i = 0; i < n1; ++i)
      for (std::size_t j = 0; j < n2; ++j) add(i, j);
    out.k12_sq = {k2.summary().mean, 0.0};
    out.cs_gap = {gap.summary().mean, 0.0};
    out.exhaustive = true;
  } else {
    RandomSource rs = source.substream("kernel-pairs");
    for (std::size_t p = 0; p < kSubsampledPairs; ++p) {
      const std::size_t i = rs.below(n1);
      const std::size_t j = rs.below(n2);
      add(i, j);
    }
    const auto a = k2.summary(), b = gap.summary();
    out.k12_sq = {a.mean, a.standard_error};
    out.cs_gap = {b.mean, b.standard_error};
    out.exhaustive = false;
  }
  return out;
}

Estimate empirical_expected_variance(const FeatureRepresentation& rep, const PsiSampler& sampler, const Dataset& d1,
                                     const Dataset& d2, std::size_t n_pairs, std::size_t n_omega,
                                     const RandomSource& source) {
  if (n_pairs < 10) fail(ErrorCode::invalid_argument, "empirical_expected_variance needs n_pairs >= 10");
  if (n_omega < 100) fail(ErrorCode::invalid_argument, "empirical_expected_variance needs n_omega >= 100");
  if (!(sampler.rep() == rep)) fail(ErrorCode::invalid_argument, "sampler was built for " + sampler.rep().id());
  rep.check_inputs(d1);
  rep.check_inputs(d2);
  RunningStats across;
  for (std::size_t p = 0; p < n_pairs; ++p) {
    RandomSource rs = source.substream("pair", p);
    const auto x1 = d1.point(rs.below(d1.size()));
    const auto x2 = d2.point(rs.below(d2.size()));
    RunningStats within;
    for (std::size_t j = 0; j < n_omega; ++j) {
      const auto s = sample_psi(sampler, rs);
      within.add(s.weight * phi(rep, x1, s.omega) * phi(rep, x2, s.omega));
    }
    across.add(within.summary().variance);
  }
  const auto st = across.summary();
  return {st.mean, st.standard_error};
}

namespace {

Estimate optimal_variance_from(Estimate z, const PairKernelMoments& pm) {
  return {z.value * z.value - pm.k12_sq.value, combined_se(2.0 * z.value * z.se, pm.k12_sq.se)};
}

EqualityReport compare_to_bound(Estimate v_hat, const PairKernelMoments& pm) {
  EqualityReport r;
  r.v_hat = v_hat;
  r.bound = pm.cs_gap;
  r.gap = r.bound.value - r.v_hat.value;
  r.combined_stderr = combined_se(r.v_hat.se, r.bound.se);
  r.ok = std::abs(r.gap) <= kToleranceSe * r.combined_stderr + kRoundingFloor;
  return r;
}

}  // namespace

Estimate theoretical_optimal_variance(const QEstimator& qest, const KernelSpec& spec, std::size_t pool_size,
                                      const RandomSource& source) {
  if (pool_size < 1000) fail(ErrorCode::invalid_argument, "theoretical_optimal_variance needs pool_size >= 1000");
  RandomSource zsrc = source.substream("normalization");
  const Estimate z = normalization_estimate(qest, pool_size, zsrc);
  return optimal_variance_from(z, pair_kernel_moments(spec, qest.d1(), qest.d2(), source));
}

Estimate theoretical_optimal_variance(const PsiSampler& sampler, const KernelSpec& spec, const RandomSource& source) {
  const auto& q = sampler.qest();
  return optimal_variance_from(sampler.z_hat(), pair_kernel_moments(spec, q.d1(), q.d2(), source));
}

Estimate cauchy_schwarz_bound(const KernelSpec& spec, const Dataset& d1, const Dataset& d2, const RandomSource& source) {
  return pair_kernel_moments(spec, d1, d2, source).cs_gap;
}

EqualityReport equality_check(const FeatureRepresentation& rep, const KernelSpec& spec, const Dataset& d,
                              std::size_t pool_size, const RandomSource& source) {
  const QEstimator qest(rep, d);
  const auto pm = pair_kernel_moments(spec, d, d, source);
  RandomSource zsrc = source.substream("normalization");
  if (pool_size < 1000) fail(ErrorCode::invalid_argument, "equality_check needs pool_size >= 1000");
  return compare_to_bound(optimal_variance_from(normalization_estimate(qest, pool_size, zsrc), pm), pm);
}

EqualityReport equality_check(const PsiSampler& sampler, const KernelSpec& spec, const RandomSource& source) {
  const auto& q = sampler.qest();
  if (!q.same_marginals()) fail(ErrorCode::invalid_argument, "equality_check needs identical marginals");
  if (sampler.strategy() == SamplerStrategy::naive)
    fail(ErrorCode::invalid_argument, "equality_check needs a sampler that carries a normalizer");
  const auto pm = pair_kernel_moments(spec, q.d1(), q.d2(), source);
  return compare_to_bound(optimal_variance_from(sampler.z_hat(), pm), pm);
}

double AuditResult::min_increase() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& e : entries)
    if (e.direction != "zero") m = std::min(m, e.increase);
  return m;
}

namespace {

double hermite_function(int order, double w) {
  double h0 = 1.0, h1 = w;
  if (order == 0) return std::exp(-0.25 * w * w);
  for (int k = 1; k < order; ++k) {
    const double h2 = w * h1 - k * h0;
    h0 = h1;
    h1 = h2;
  }
  return h1 * std::exp(-0.25 * w * w);
}

struct Direction {
  std::string id;
  std::function<double(std::span<const double>)> g;
};

std::vector<Direction> basis_directions(const FeatureRepresentation& rep) {
  // One-dimensional families per omega axis.
  std::vector<std::vector<Direction>> per_axis;
  for (std::size_t a = 0; a < rep.dim(); ++a) {
    std::vector<Direction> fam;
    for (int k = 1; k <= 4; ++k)
      fam.push_back({"hermite" + std::to_string(k) + "(w" + std::to_string(a) + ")",
                     [a, k](std::span<const double> c) { return hermite_function(k, c[a]); }});
    per_axis.push_back(std::move(fam));
  }
  if (rep.has_phase()) {
    const std::size_t a = rep.dim();
    std::vector<Direction> fam;
    for (int m = 1; m <= 2; ++m) {
      fam.push_back({"cos" + std::to_string(m) + "(b)", [a, m](std::span<const double> c) { return std::cos(m * c[a]); }});
      fam.push_back({"sin" + std::to_string(m) + "(b)", [a, m](std::span<const double> c) { return std::sin(m * c[a]); }});
    }
    per_axis.push_back(std::move(fam));
  }
  std::vector<Direction> out;
  std::size_t longest = 0;
  for (const auto& f : per_axis) longest = std::max(longest, f.size());
  for (std::size_t k = 0; k < longest; ++k)
    for (const auto& f : per_axis)
      if (k < f.size()) out.push_back(f[k]);
  if (per_axis.size() == 2) {
    for (std::size_t k = 0; k < 2; ++k) {
      const auto& f0 = per_axis[0][k];
      const auto& f1 = per_axis[1][k];
      out.push_back({f0.id + "*" + f1.id, [g0 = f0.g, g1 = f1.g](std::span<const double> c) { return g0(c) * g1(c); }});
    }
  }
  return out;
}

}  // namespace

AuditResult perturbation_audit(const QEstimator& qest, const KernelSpec& spec, const GridSpec& grid_spec,
                               std::size_t n_directions, double epsilon, const RandomSource& source) {
  if (!(epsilon > 0.0 && epsilon <= 0.5)) fail(ErrorCode::invalid_argument, "epsilon must lie in (0, 0.5]");
  const PsiGrid grid(qest, grid_spec);
  const auto raw = grid.raw_weights();
  const double z = grid.normalization().value;
  const double ek2 = pair_kernel_moments(spec, qest.d1(), qest.d2(), source).k12_sq.value;
  const std::size_t cells = grid.cell_count();

  std::vector<double> popt(cells);
  for (std::size_t c = 0; c < cells; ++c) popt[c] = raw[c] / z;

  // Objective sum_c a_c^2 / P_c - E[K^2], with P = p_opt e^{tg} / sum(p_opt e^{tg}).
  std::vector<double> scratch(cells);
  const auto objective = [&](const std::vector<double>& g, double t) {
    double norm = 0.0;
    for (std::size_t c = 0; c < cells; ++c) {
      scratch[c] = popt[c] * std::exp(t * g[c]);
      norm += scratch[c];
    }
    double acc = 0.0;
    for (std::size_t c = 0; c < cells; ++c)
      if (raw[c] > 0.0) acc += raw[c] * raw[c] / (scratch[c] / norm);
    return acc - ek2;
  };

  const std::vector<double> zero(cells, 0.0);
  AuditResult result;
  result.v_optimal = objective(zero, 0.0);

  const auto basis = basis_directions(qest.rep());
  std::vector<std::vector<double>> basis_values;
  const std::size_t od = grid.shape().size();
  std::vector<double> centers(cells * od);
  for (std::size_t c = 0; c < cells; ++c) {
    const auto cc = grid.cell_center(c);
    std::copy(cc.begin(), cc.end(), centers.begin() + static_cast<std::ptrdiff_t>(c * od));
  }
  const auto tabulate = [&](const std::function<double(std::span<const double>)>& fn) {
    std::vector<double> g(cells);
    for (std::size_t c = 0; c < cells; ++c) g[c] = fn(std::span<const double>(centers.data() + c * od, od));
    return g;
  };
  const auto normalize = [](std::vector<double>& g) {
    double m = 0.0;
    for (double v : g) m = std::max(m, std::abs(v));
    if (m > 0.0)
      for (double& v : g) v /= m;
  };

  result.entries.push_back({"zero", epsilon, objective(zero, epsilon) - result.v_optimal});
  RandomSource rs = source.substream("audit-directions");
  for (std::size_t j = 0; j < n_directions; ++j) {
    std::vector<double> g;
    std::string id;
    if (j < basis.size()) {
      g = tabulate(basis[j].g);
      id = basis[j].id;
      if (basis_values.size() <= j) basis_values.push_back(g);
    } else {
      if (basis_values.size() < basis.size())
        for (std::size_t b = basis_values.size(); b < basis.size(); ++b) basis_values.push_back(tabulate(basis[b].g));
      g.assign(cells, 0.0);
      for (const auto& bv : basis_values) {
        const double coef = rs.normal();
        for (std::size_t c = 0; c < cells; ++c) g[c] += coef * bv[c];
      }
      id = "mix" + std::to_string(j);
    }
    normalize(g);
    for (double t : {epsilon, -epsilon}) result.entries.push_back({id, t, objective(g, t) - result.v_optimal});
  }
  return result;
}

}  // namespace rfis
