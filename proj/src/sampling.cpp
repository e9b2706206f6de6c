#include "rfis/sampling.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

namespace rfis {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Neumaier-compensated sequential sum.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Per-row moments M_k(r) = mean_i u_i^k g(c_r, u_i), u = x / scale, for
// one-dimensional data. g is exp(2i c u) for trig and exp(2 c u - 2 a u^2)
// for positive_exp, so that mean phi^2 at w = c_r + delta is
// sum_k (2 delta)^k / k! M_k (times i^k for trig).
struct RowMoments {
  double lo = 0.0;
  double step = 0.0;
  std::size_t rows = 0;
  std::size_t terms = 0;
  std::vector<double> re;
  std::vector<double> im;
};

std::optional<RowMoments> build_row_moments(const FeatureRepresentation& rep, const Dataset& data, const GridSpec& g) {
  if (rep.dim() != 1) return std::nullopt;
  const double s = rep.target().scale();
  const std::size_t n = data.size();
  double umax = 0.0;
  for (std::size_t i = 0; i < n; ++i) umax = std::max(umax, std::abs(data.point(i)[0] / s));
  // Horner truncation: |remainder| <= t^K / K! e^t with t = 2 * (step / 2) * umax.
  const double t = g.step * umax;
  if (t > 2.0) return std::nullopt;
  std::size_t terms = 1;
  double bound = std::exp(t);
  while (terms < 40) {
    bound *= t / static_cast<double>(terms);
    if (bound < 1e-18) break;
    ++terms;
  }
  if (terms >= 40) return std::nullopt;

  RowMoments m;
  m.lo = g.lo;
  m.step = g.step;
  m.rows = g.frequency_cells();
  m.terms = terms;
  const bool trig = rep.kind() == FeatureKind::trig;
  m.re.assign(m.rows * terms, 0.0);
  if (trig) m.im.assign(m.rows * terms, 0.0);
  const double a = rep.norm_coefficient();
  std::vector<double> u(n), quad(n);
  for (std::size_t i = 0; i < n; ++i) {
    u[i] = data.point(i)[0] / s;
    quad[i] = -2.0 * a * u[i] * u[i];
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t r = 0; r < m.rows; ++r) {
    const double c = g.lo + (static_cast<double>(r) + 0.5) * g.step;
    double* re = m.re.data() + r * terms;
    double* im = trig ? m.im.data() + r * terms : nullptr;
    for (std::size_t i = 0; i < n; ++i) {
      double p = 1.0;
      if (trig) {
        const double ang = 2.0 * c * u[i];
        const double cs = std::cos(ang), sn = std::sin(ang);
        for (std::size_t k = 0; k < terms; ++k) {
          re[k] += p * cs;
          im[k] += p * sn;
          p *= u[i];
        }
      } else {
        const double v = std::exp(2.0 * c * u[i] + quad[i]);
        for (std::size_t k = 0; k < terms; ++k) {
          re[k] += p * v;
          p *= u[i];
        }
      }
    }
    for (std::size_t k = 0; k < terms; ++k) {
      re[k] *= inv_n;
      if (trig) im[k] *= inv_n;
    }
  }
  for (double v : m.re)
    if (!std::isfinite(v)) return std::nullopt;
  return m;
}

}  // namespace

std::size_t GridSpec::frequency_cells() const {
  return static_cast<std::size_t>(std::llround((hi - lo) / step));
}

void GridSpec::validate() const {
  if (!(hi > lo) || !(step > 0.0) || !std::isfinite(lo) || !std::isfinite(hi))
    fail(ErrorCode::invalid_argument, "grid needs lo < hi and step > 0");
  if (frequency_cells() < 2) fail(ErrorCode::invalid_argument, "grid needs at least two frequency cells");
  if (std::abs(static_cast<double>(frequency_cells()) * step - (hi - lo)) > 1e-9 * (hi - lo))
    fail(ErrorCode::invalid_argument, "grid step must divide hi - lo");
  if (phase_cells < 2) fail(ErrorCode::invalid_argument, "grid needs at least two phase cells");
}

struct QEstimator::Impl {
  FeatureRepresentation rep;
  Dataset d1;
  Dataset d2;
  bool same;
  std::optional<RowMoments> m1;
  std::optional<RowMoments> m2;
  std::vector<double> quad1;  // -2a|x|^2/s^2 per point (positive_exp)
  std::vector<double> quad2;

  double mean_phi_sq_direct(const Dataset& data, const std::vector<double>& quad, std::span<const double> omega) const;
  double mean_phi_sq(const std::optional<RowMoments>& m, const Dataset& data, const std::vector<double>& quad,
                     std::span<const double> omega) const;
};

namespace {

std::vector<double> quadratic_terms(const FeatureRepresentation& rep, const Dataset& data) {
  std::vector<double> q(data.size(), 0.0);
  if (rep.kind() != FeatureKind::positive_exp) return q;
  const double s2 = rep.target().scale() * rep.target().scale();
  for (std::size_t i = 0; i < data.size(); ++i) q[i] = -2.0 * rep.norm_coefficient() * squared_norm(data.point(i)) / s2;
  return q;
}

void check_compatible(const FeatureRepresentation& rep, const Dataset& data, const char* which) {
  if (data.dim() != rep.dim())
    fail(ErrorCode::invalid_dimension, std::string(which) + " has dimension " + std::to_string(data.dim()) +
                                           ", representation expects " + std::to_string(rep.dim()));
  rep.check_inputs(data);
}

}  // namespace

double QEstimator::Impl::mean_phi_sq_direct(const Dataset& data, const std::vector<double>& quad,
                                            std::span<const double> omega) const {
  const std::size_t d = rep.dim();
  const double inv_s = 1.0 / rep.target().scale();
  double sum = 0.0;
  if (rep.kind() == FeatureKind::trig) {
    const double b = omega[d];
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto x = data.point(i);
      double wx = 0.0;
      for (std::size_t j = 0; j < d; ++j) wx += omega[j] * x[j];
      const double c = std::cos(wx * inv_s + b);
      sum += 2.0 * c * c;
    }
  } else {
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto x = data.point(i);
      double wx = 0.0;
      for (std::size_t j = 0; j < d; ++j) wx += omega[j] * x[j];
      sum += std::exp(2.0 * wx * inv_s + quad[i]);
    }
    if (!std::isfinite(sum))
      fail(ErrorCode::overflow, "q_hat overflowed for omega with |w| = " + std::to_string(std::sqrt(squared_norm(
                                                                                omega.subspan(0, d)))));
  }
  return sum / static_cast<double>(data.size());
}

double QEstimator::Impl::mean_phi_sq(const std::optional<RowMoments>& m, const Dataset& data,
                                     const std::vector<double>& quad, std::span<const double> omega) const {
  if (!m) return mean_phi_sq_direct(data, quad, omega);
  const double w = omega[0];
  const double pos = (w - m->lo) / m->step;
  if (!(pos >= 0.0) || pos >= static_cast<double>(m->rows)) return mean_phi_sq_direct(data, quad, omega);
  const auto r = static_cast<std::size_t>(pos);
  const double tt = 2.0 * (w - (m->lo + (static_cast<double>(r) + 0.5) * m->step));
  const std::size_t K = m->terms;
  const double* re = m->re.data() + r * K;
  if (rep.kind() == FeatureKind::trig) {
    const double* im = m->im.data() + r * K;
    double sr = re[K - 1], si = im[K - 1];
    for (std::size_t k = K - 1; k-- > 0;) {
      const double f = tt / static_cast<double>(k + 1);
      const double nr = re[k] - si * f;
      const double ni = im[k] + sr * f;
      sr = nr;
      si = ni;
    }
    const double b2 = 2.0 * omega[1];
    return std::max(0.0, 1.0 + std::cos(b2) * sr - std::sin(b2) * si);
  }
  double acc = re[K - 1];
  for (std::size_t k = K - 1; k-- > 0;) acc = re[k] + acc * tt / static_cast<double>(k + 1);
  return acc;
}

QEstimator::QEstimator(FeatureRepresentation rep, Dataset d1, Dataset d2, const GridSpec& accel) {
  check_compatible(rep, d1, "d1");
  check_compatible(rep, d2, "d2");
  accel.validate();
  auto impl = std::make_shared<Impl>(Impl{rep, std::move(d1), std::move(d2), false, {}, {}, {}, {}});
  impl->same = impl->d1 == impl->d2;
  impl->quad1 = quadratic_terms(rep, impl->d1);
  impl->m1 = build_row_moments(rep, impl->d1, accel);
  if (!impl->same) {
    impl->quad2 = quadratic_terms(rep, impl->d2);
    impl->m2 = build_row_moments(rep, impl->d2, accel);
  }
  impl_ = std::move(impl);
}

QEstimator::QEstimator(FeatureRepresentation rep, Dataset shared, const GridSpec& accel)
    : QEstimator(rep, shared, shared, accel) {}

const FeatureRepresentation& QEstimator::rep() const noexcept { return impl_->rep; }
const Dataset& QEstimator::d1() const noexcept { return impl_->d1; }
const Dataset& QEstimator::d2() const noexcept { return impl_->d2; }
bool QEstimator::same_marginals() const noexcept { return impl_->same; }
bool QEstimator::accelerated() const noexcept { return impl_->m1.has_value(); }

double QEstimator::q_hat(std::span<const double> omega) const {
  const auto& p = *impl_;
  if (omega.size() != p.rep.omega_dim())
    fail(ErrorCode::invalid_dimension, "omega has " + std::to_string(omega.size()) + " coordinates, expected " +
                                           std::to_string(p.rep.omega_dim()));
  const double a = p.mean_phi_sq(p.m1, p.d1, p.quad1, omega);
  if (p.same) return a;
  return std::sqrt(a * p.mean_phi_sq(p.m2, p.d2, p.quad2, omega));
}

double QEstimator::q_hat_direct(std::span<const double> omega) const {
  const auto& p = *impl_;
  if (omega.size() != p.rep.omega_dim())
    fail(ErrorCode::invalid_dimension, "omega has " + std::to_string(omega.size()) + " coordinates, expected " +
                                           std::to_string(p.rep.omega_dim()));
  const double a = p.mean_phi_sq_direct(p.d1, p.quad1, omega);
  if (p.same) return a;
  return std::sqrt(a * p.mean_phi_sq_direct(p.d2, p.same ? p.quad1 : p.quad2, omega));
}

std::string_view to_string(SamplerStrategy s) noexcept {
  switch (s) {
    case SamplerStrategy::naive: return "naive";
    case SamplerStrategy::pool_resampler: return "pool_resampler";
    case SamplerStrategy::rejection: return "rejection";
    case SamplerStrategy::grid_oracle: return "grid_oracle";
  }
  return "unknown";
}

SamplerStrategy parse_sampler_strategy(std::string_view name) {
  if (name == "naive") return SamplerStrategy::naive;
  if (name == "pool_resampler") return SamplerStrategy::pool_resampler;
  if (name == "rejection") return SamplerStrategy::rejection;
  if (name == "grid_oracle") return SamplerStrategy::grid_oracle;
  fail(ErrorCode::config, "unknown sampler '" + std::string(name) +
                              "' (expected naive, pool_resampler, rejection or grid_oracle)");
}

Estimate normalization_estimate(const QEstimator& qest, std::size_t pool_size, RandomSource& source) {
  if (pool_size < 100) fail(ErrorCode::invalid_argument, "normalization_estimate needs pool_size >= 100");
  RunningStats acc;
  bool any_positive = false;
  for (std::size_t i = 0; i < pool_size; ++i) {
    const double q = qest.q_hat(omega_sample(qest.rep(), source));
    any_positive = any_positive || q > 0.0;
    acc.add(q);
  }
  if (!any_positive) fail(ErrorCode::degenerate_q, "q_hat vanished on every draw of the normalization pool");
  const auto s = acc.summary();
  return {s.mean, s.standard_error};
}

// ---------------------------------------------------------------------------
// PsiGrid

PsiGrid::PsiGrid(const QEstimator& qest, const GridSpec& spec) : spec_(spec) {
  spec.validate();
  const auto& rep = qest.rep();
  if (rep.omega_dim() > 2)
    fail(ErrorCode::grid_too_large, "grid oracle supports at most 2 omega coordinates, " + rep.id() + " in d=" +
                                        std::to_string(rep.dim()) + " has " + std::to_string(rep.omega_dim()));
  const std::size_t rows = spec.frequency_cells();
  for (std::size_t j = 0; j < rep.dim(); ++j) {
    shape_.push_back(rows);
    step_.push_back(spec.step);
    origin_.push_back(spec.lo);
  }
  if (rep.has_phase()) {
    shape_.push_back(spec.phase_cells);
    step_.push_back(kTwoPi / static_cast<double>(spec.phase_cells));
    origin_.push_back(0.0);
  }
  std::size_t cells = 1;
  volume_ = 1.0;
  for (std::size_t a = 0; a < shape_.size(); ++a) {
    if (cells > kMaxGridCells / shape_[a])
      fail(ErrorCode::grid_too_large, "grid would exceed " + std::to_string(kMaxGridCells) + " cells; coarsen grid.step");
    cells *= shape_[a];
    volume_ *= step_[a];
  }

  raw_.resize(cells);
  std::array<double, 2> center{};
  const std::span<const double> omega(center.data(), shape_.size());
  for (std::size_t c = 0; c < cells; ++c) {
    std::size_t rest = c;
    for (std::size_t a = shape_.size(); a-- > 0;) {
      const std::size_t idx = rest % shape_[a];
      rest /= shape_[a];
      center[a] = origin_[a] + (static_cast<double>(idx) + 0.5) * step_[a];
    }
    raw_[c] = std::exp(omega_log_density(rep, omega)) * qest.q_hat(omega) * volume_;
  }

  CompensatedSum total, even, odd;
  const std::size_t inner = cells / shape_[0];
  for (std::size_t c = 0; c < cells; ++c) {
    total.add(raw_[c]);
    ((c / inner) % 2 == 0 ? even : odd).add(raw_[c]);
  }
  const double z = total.value();
  if (!(z > 0.0) || !std::isfinite(z))
    fail(ErrorCode::degenerate_q, "q_hat integrates to " + std::to_string(z) + " over the grid");

  // Truncated-tail estimate: extrapolate the decay of the outermost marginal
  // cells geometrically along every frequency axis.
  double tail = 0.0;
  for (std::size_t a = 0; a < rep.dim(); ++a) {
    std::vector<double> marginal(shape_[a], 0.0);
    std::size_t stride = 1;
    for (std::size_t b = a + 1; b < shape_.size(); ++b) stride *= shape_[b];
    for (std::size_t c = 0; c < cells; ++c) marginal[(c / stride) % shape_[a]] += raw_[c];
    const auto edge_tail = [&](double edge, double next) {
      if (edge <= 0.0) return 0.0;
      if (next > edge) {
        const double rho = edge / next;
        return edge * rho / (1.0 - rho);
      }
      return edge * static_cast<double>(shape_[a]);
    };
    tail += edge_tail(marginal.front(), marginal[1]);
    tail += edge_tail(marginal.back(), marginal[marginal.size() - 2]);
  }
  z_ = {z, 0.5 * std::abs(2.0 * even.value() - 2.0 * odd.value()) + tail};

  cdf_.resize(cells);
  double run = 0.0;
  for (std::size_t c = 0; c < cells; ++c) {
    run += raw_[c] / z;
    cdf_[c] = run;
  }
}

std::vector<double> PsiGrid::cell_center(std::size_t cell) const {
  std::vector<double> out(shape_.size());
  for (std::size_t a = shape_.size(); a-- > 0;) {
    out[a] = origin_[a] + (static_cast<double>(cell % shape_[a]) + 0.5) * step_[a];
    cell /= shape_[a];
  }
  return out;
}

std::optional<std::size_t> PsiGrid::locate(std::span<const double> omega) const {
  if (omega.size() != shape_.size()) return std::nullopt;
  std::size_t cell = 0;
  for (std::size_t a = 0; a < shape_.size(); ++a) {
    const double pos = (omega[a] - origin_[a]) / step_[a];
    if (!(pos >= 0.0) || pos >= static_cast<double>(shape_[a])) return std::nullopt;
    cell = cell * shape_[a] + static_cast<std::size_t>(pos);
  }
  return cell;
}

std::size_t PsiGrid::draw_cell(double u) const {
  const double target = u * cdf_.back();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), target);
  const auto idx = static_cast<std::size_t>(it - cdf_.begin());
  return std::min(idx, cdf_.size() - 1);
}

std::vector<double> PsiGrid::jitter(std::size_t cell, RandomSource& source) const {
  std::vector<double> idx(shape_.size());
  for (std::size_t a = shape_.size(); a-- > 0;) {
    idx[a] = static_cast<double>(cell % shape_[a]);
    cell /= shape_[a];
  }
  std::vector<double> out(shape_.size());
  for (std::size_t a = 0; a < shape_.size(); ++a) out[a] = origin_[a] + (idx[a] + source.uniform()) * step_[a];
  if (shape_.size() == 2 && origin_[1] == 0.0 && step_[1] * static_cast<double>(shape_[1]) == kTwoPi)
    out[1] = canonical_phase(out[1]);
  return out;
}

// ---------------------------------------------------------------------------
// PsiSampler

struct PsiSampler::Impl {
  Impl(SamplerStrategy s, QEstimator q) : strategy(s), qest(std::move(q)) {}

  SamplerStrategy strategy;
  QEstimator qest;
  Estimate z{1.0, 0.0};
  double envelope = 0.0;
  std::vector<double> pool_coords;
  std::vector<double> pool_q;
  std::vector<double> pool_cdf;
  std::shared_ptr<const PsiGrid> grid;
};

SamplerStrategy PsiSampler::strategy() const noexcept { return impl_->strategy; }
const QEstimator& PsiSampler::qest() const noexcept { return impl_->qest; }
const FeatureRepresentation& PsiSampler::rep() const noexcept { return impl_->qest.rep(); }
Estimate PsiSampler::z_hat() const noexcept { return impl_->z; }
double PsiSampler::envelope() const noexcept { return impl_->envelope; }
const PsiGrid* PsiSampler::grid() const noexcept { return impl_->grid.get(); }
std::span<const double> PsiSampler::pool_q() const noexcept { return impl_->pool_q; }
std::span<const double> PsiSampler::pool_cdf() const noexcept { return impl_->pool_cdf; }
std::span<const double> PsiSampler::pool_omega(std::size_t i) const noexcept {
  const std::size_t od = impl_->qest.rep().omega_dim();
  return {impl_->pool_coords.data() + i * od, od};
}

PsiSampler naive_sampler(const QEstimator& qest) {
  return PsiSampler(std::make_shared<const PsiSampler::Impl>(SamplerStrategy::naive, qest));
}

PsiSampler build_sampler(const QEstimator& qest, SamplerStrategy strategy, std::size_t pool_size,
                         const std::optional<GridSpec>& grid_spec, RandomSource& source) {
  if (strategy == SamplerStrategy::naive) return naive_sampler(qest);
  auto impl = std::make_shared<PsiSampler::Impl>(strategy, qest);
  const auto& rep = qest.rep();

  if (strategy == SamplerStrategy::grid_oracle) {
    impl->grid = std::make_shared<const PsiGrid>(qest, grid_spec.value_or(GridSpec{}));
    impl->z = impl->grid->normalization();
    return PsiSampler(std::move(impl));
  }

  if (pool_size < 100) fail(ErrorCode::invalid_argument, "pool-based samplers need pool_size >= 100");
  // The normalizer always comes from a pool independent of the one used for selection.
  RandomSource zsrc = source.substream("normalization");
  impl->z = normalization_estimate(qest, pool_size, zsrc);

  RandomSource psrc = source.substream(strategy == SamplerStrategy::rejection ? "envelope" : "pool");
  const std::size_t od = rep.omega_dim();
  impl->pool_coords.reserve(pool_size * od);
  impl->pool_q.reserve(pool_size);
  double qmax = 0.0;
  for (std::size_t i = 0; i < pool_size; ++i) {
    const OmegaPoint w = omega_sample(rep, psrc);
    const double q = qest.q_hat(w);
    qmax = std::max(qmax, q);
    impl->pool_coords.insert(impl->pool_coords.end(), w.coords().begin(), w.coords().end());
    impl->pool_q.push_back(q);
  }
  if (!(qmax > 0.0)) fail(ErrorCode::degenerate_q, "q_hat vanished on every pool draw");

  if (strategy == SamplerStrategy::rejection) {
    impl->envelope = kEnvelopeFactor * qmax;
    impl->pool_coords.clear();
    impl->pool_coords.shrink_to_fit();
  } else {
    impl->pool_cdf.resize(pool_size);
    double run = 0.0;
    for (std::size_t i = 0; i < pool_size; ++i) {
      run += impl->pool_q[i];
      impl->pool_cdf[i] = run;
    }
  }
  return PsiSampler(std::move(impl));
}

WeightedOmegaSample sample_psi(const PsiSampler& sampler, RandomSource& source) {
  const auto& rep = sampler.rep();
  const auto& q = sampler.qest();
  const double z = sampler.z_hat().value;
  switch (sampler.strategy()) {
    case SamplerStrategy::naive:
      return {omega_sample(rep, source), 1.0};

    case SamplerStrategy::pool_resampler: {
      const auto cdf = sampler.pool_cdf();
      const double target = source.uniform() * cdf.back();
      auto i = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), target) - cdf.begin());
      i = std::min(i, cdf.size() - 1);
      const auto w = sampler.pool_omega(i);
      return {OmegaPoint(std::vector<double>(w.begin(), w.end())), z / sampler.pool_q()[i]};
    }

    case SamplerStrategy::rejection: {
      const double m = sampler.envelope();
      for (std::size_t tries = 0; tries < kMaxConsecutiveRejections; ++tries) {
        OmegaPoint w = omega_sample(rep, source);
        const double qv = q.q_hat(w);
        if (source.uniform() * m < qv) return {std::move(w), z / qv};
      }
      fail(ErrorCode::envelope, "rejection sampler exceeded " + std::to_string(kMaxConsecutiveRejections) +
                                    " consecutive rejections (envelope " + std::to_string(m) + ")");
    }

    case SamplerStrategy::grid_oracle: {
      const PsiGrid& g = *sampler.grid();
      for (std::size_t tries = 0; tries < kMaxConsecutiveRejections; ++tries) {
        const std::size_t cell = g.draw_cell(source.uniform());
        std::vector<double> coords = g.jitter(cell, source);
        const double qv = q.q_hat(coords);
        if (qv > 0.0) return {OmegaPoint(std::move(coords)), z / qv};
      }
      fail(ErrorCode::outside_support, "grid sampler kept landing where q_hat vanishes");
    }
  }
  return {};
}

double psi_log_density(const PsiSampler& sampler, std::span<const double> omega) {
  const double lp = omega_log_density(sampler.rep(), omega);
  if (sampler.strategy() == SamplerStrategy::naive) return lp;
  const double qv = sampler.qest().q_hat(omega);
  if (!(qv > 0.0)) fail(ErrorCode::outside_support, "q_hat vanishes at omega; it is outside the support of Psi");
  return lp + std::log(qv) - std::log(sampler.z_hat().value);
}

}  // namespace rfis
