#include "rfis/features.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace rfis {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
const double kLogSqrtTwoPi = 0.5 * std::log(kTwoPi);

void check_omega_layout(const FeatureRepresentation& rep, std::span<const double> omega) {
  if (omega.size() != rep.omega_dim())
    fail(ErrorCode::invalid_dimension, "omega has " + std::to_string(omega.size()) + " coordinates, representation " +
                                           rep.id() + " needs " + std::to_string(rep.omega_dim()));
}

}  // namespace

double canonical_phase(double b) {
  double r = std::fmod(b, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

std::string_view to_string(FeatureKind kind) noexcept { return kind == FeatureKind::trig ? "trig" : "positive_exp"; }

FeatureKind parse_feature_kind(std::string_view name) {
  if (name == "trig") return FeatureKind::trig;
  if (name == "positive_exp") return FeatureKind::positive_exp;
  fail(ErrorCode::config, "unknown representation '" + std::string(name) + "' (expected trig or positive_exp)");
}

OmegaPoint::OmegaPoint(std::vector<double> coords) : coords_(std::move(coords)) {
  for (double c : coords_)
    if (!std::isfinite(c)) fail(ErrorCode::invalid_argument, "omega contains a non-finite coordinate");
}

FeatureRepresentation::FeatureRepresentation(FeatureKind kind, KernelSpec target, std::size_t dim)
    : kind_(kind), target_(target), dim_(dim) {
  if (dim == 0) fail(ErrorCode::invalid_dimension, "representation dimension must be at least 1");
  if (kind == FeatureKind::trig && target.kind() != KernelKind::gaussian)
    fail(ErrorCode::config, "trig features only represent the gaussian kernel");
}

std::string FeatureRepresentation::id() const {
  return std::string(to_string(kind_)) + "/" + std::string(to_string(target_.kind()));
}

void FeatureRepresentation::check_input(std::span<const double> x) const {
  if (x.size() != dim_)
    fail(ErrorCode::invalid_dimension, "input has dimension " + std::to_string(x.size()) + ", representation expects " +
                                           std::to_string(dim_));
  if (kind_ != FeatureKind::positive_exp) return;
  const double ratio = std::sqrt(squared_norm(x)) / target_.scale();
  if (ratio > kPositiveExpMaxNormRatio) {
    std::ostringstream msg;
    msg.precision(6);
    msg << "positive_exp input with |x| = " << std::sqrt(squared_norm(x)) << " exceeds the stable range |x|/scale <= "
        << kPositiveExpMaxNormRatio << " (scale " << target_.scale() << ")";
    fail(ErrorCode::overflow, msg.str());
  }
}

void FeatureRepresentation::check_inputs(const Dataset& data) const {
  for (std::size_t i = 0; i < data.size(); ++i) {
    try {
      check_input(data.point(i));
    } catch (const Error& e) {
      throw Error(e.code(), std::string(e.what()) + " at data index " + std::to_string(i));
    }
  }
}

double phi(const FeatureRepresentation& rep, std::span<const double> x, std::span<const double> omega) {
  rep.check_input(x);
  check_omega_layout(rep, omega);
  const double s = rep.target().scale();
  const std::size_t d = rep.dim();
  double wx = 0.0;
  for (std::size_t i = 0; i < d; ++i) wx += omega[i] * x[i];
  double value;
  if (rep.kind() == FeatureKind::trig) {
    value = std::numbers::sqrt2 * std::cos(wx / s + omega[d]);
  } else {
    value = std::exp(wx / s - rep.norm_coefficient() * squared_norm(x) / (s * s));
    if (!std::isfinite(value)) {
      std::ostringstream msg;
      msg << "positive_exp feature overflowed at |x| = " << std::sqrt(squared_norm(x)) << ", w.x = " << wx;
      fail(ErrorCode::overflow, msg.str());
    }
  }
  return value;
}

OmegaPoint canonical_omega(const FeatureRepresentation& rep, std::vector<double> coords) {
  if (coords.size() != rep.omega_dim()) check_omega_layout(rep, coords);
  if (rep.has_phase()) coords[rep.dim()] = canonical_phase(coords[rep.dim()]);
  return OmegaPoint(std::move(coords));
}

OmegaPoint omega_sample(const FeatureRepresentation& rep, RandomSource& source) {
  std::vector<double> c(rep.omega_dim());
  for (std::size_t i = 0; i < rep.dim(); ++i) c[i] = source.normal();
  if (rep.has_phase()) c[rep.dim()] = kTwoPi * source.uniform();
  return OmegaPoint(std::move(c));
}

double omega_log_density(const FeatureRepresentation& rep, std::span<const double> omega) {
  check_omega_layout(rep, omega);
  double lp = 0.0;
  for (std::size_t i = 0; i < rep.dim(); ++i) lp -= 0.5 * omega[i] * omega[i] + kLogSqrtTwoPi;
  if (rep.has_phase()) {
    const double b = omega[rep.dim()];
    if (!(b >= 0.0 && b < kTwoPi))
      fail(ErrorCode::invalid_argument, "phase coordinate " + std::to_string(b) + " is outside [0, 2pi)");
    lp -= std::log(kTwoPi);
  }
  return lp;
}

SummaryStats mc_kernel_check(const FeatureRepresentation& rep, std::span<const double> x1, std::span<const double> x2,
                             std::size_t k, RandomSource& source) {
  if (k < 2) fail(ErrorCode::invalid_argument, "mc_kernel_check needs k >= 2");
  rep.check_input(x1);
  rep.check_input(x2);
  RunningStats acc;
  for (std::size_t j = 0; j < k; ++j) {
    const OmegaPoint w = omega_sample(rep, source);
    acc.add(phi(rep, x1, w) * phi(rep, x2, w));
  }
  return acc.summary();
}

}  // namespace rfis
