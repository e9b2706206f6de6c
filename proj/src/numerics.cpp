#include "rfis/numerics.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace rfis {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::invalid_dimension: return "invalid-dimension";
    case ErrorCode::empty_input: return "empty-input";
    case ErrorCode::degenerate_weights: return "degenerate-weights";
    case ErrorCode::overflow: return "overflow";
    case ErrorCode::degenerate_q: return "degenerate-q";
    case ErrorCode::envelope: return "envelope";
    case ErrorCode::outside_support: return "outside-support";
    case ErrorCode::grid_too_large: return "grid-too-large";
    case ErrorCode::config: return "config";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

namespace {

void require_finite(std::span<const double> xs, const char* what) {
  for (double x : xs) {
    if (!std::isfinite(x)) fail(ErrorCode::invalid_argument, std::string(what) + " contains a non-finite entry");
  }
}

constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

inline void mulhilo32(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) noexcept {
  constexpr std::uint32_t m0 = 0xD2511F53u, m1 = 0xCD9E8D57u;
  constexpr std::uint32_t w0 = 0x9E3779B9u, w1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += w0;
      key[1] += w1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo32(m0, ctr[0], hi0, lo0);
    mulhilo32(m1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

}  // namespace

Vector::Vector(std::vector<double> entries) : entries_(std::move(entries)) {
  require_finite(entries_, "vector");
}

Dataset::Dataset(std::size_t dim, std::vector<double> row_major) : dim_(dim), values_(std::move(row_major)) {
  if (dim_ == 0) fail(ErrorCode::invalid_dimension, "dataset dimension must be at least 1");
  if (values_.empty()) fail(ErrorCode::empty_input, "dataset must contain at least one point");
  if (values_.size() % dim_ != 0) fail(ErrorCode::invalid_dimension, "dataset values are not a whole number of rows");
  require_finite(values_, "dataset");
}

Dataset::Dataset(const std::vector<Vector>& points) : dim_(0) {
  if (points.empty()) fail(ErrorCode::empty_input, "dataset must contain at least one point");
  dim_ = points.front().size();
  if (dim_ == 0) fail(ErrorCode::invalid_dimension, "dataset dimension must be at least 1");
  values_.reserve(points.size() * dim_);
  for (const auto& p : points) {
    if (p.size() != dim_) fail(ErrorCode::invalid_dimension, "dataset points have mixed dimensions");
    values_.insert(values_.end(), p.values().begin(), p.values().end());
  }
}

double Dataset::max_norm() const noexcept {
  double best = 0.0;
  for (std::size_t i = 0; i < size(); ++i) best = std::max(best, squared_norm(point(i)));
  return std::sqrt(best);
}

Dataset Dataset::concat(const Dataset& other) const {
  if (other.dim_ != dim_) fail(ErrorCode::invalid_dimension, "cannot concatenate datasets of different dimension");
  std::vector<double> v = values_;
  v.insert(v.end(), other.values_.begin(), other.values_.end());
  return Dataset(dim_, std::move(v));
}

LabeledDataset::LabeledDataset(Dataset points, std::vector<double> labels)
    : points_(std::move(points)), labels_(std::move(labels)) {
  if (labels_.size() != points_.size())
    fail(ErrorCode::invalid_argument, "label count " + std::to_string(labels_.size()) + " does not match point count " +
                                          std::to_string(points_.size()));
  require_finite(labels_, "labels");
}

LabeledDataset LabeledDataset::concat(const LabeledDataset& other) const {
  std::vector<double> l(labels_.begin(), labels_.end());
  l.insert(l.end(), other.labels_.begin(), other.labels_.end());
  return LabeledDataset(points_.concat(other.points_), std::move(l));
}

RandomSource::RandomSource(std::uint64_t seed) : key_(splitmix64(seed ^ 0x5EEDF00DBAADCAFEull)) {}

RandomSource RandomSource::substream(std::string_view label) const {
  return RandomSource(splitmix64(key_ ^ splitmix64(fnv1a(label))), 0);
}

RandomSource RandomSource::substream(std::string_view label, std::uint64_t index) const {
  const std::uint64_t k = splitmix64(key_ ^ splitmix64(fnv1a(label)));
  return RandomSource(splitmix64(k ^ splitmix64(index + 0x632BE59BD9B4E019ull)), 0);
}

void RandomSource::refill() {
  const std::array<std::uint32_t, 4> ctr = {static_cast<std::uint32_t>(counter_),
                                            static_cast<std::uint32_t>(counter_ >> 32), 0u, 0u};
  const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(key_), static_cast<std::uint32_t>(key_ >> 32)};
  const auto out = philox4x32_10(ctr, key);
  block_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
  block_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
  block_pos_ = 0;
  ++counter_;
}

std::uint64_t RandomSource::next_u64() {
  if (block_pos_ >= 2) refill();
  return block_[block_pos_++];
}

double RandomSource::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double RandomSource::uniform_open() { return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53; }

std::uint64_t RandomSource::below(std::uint64_t n) {
  if (n == 0) fail(ErrorCode::invalid_argument, "below(0) has no valid result");
  // Lemire's multiply-shift with rejection of the biased low band.
  std::uint64_t x = next_u64();
  __uint128_t m = static_cast<__uint128_t>(x) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      x = next_u64();
      m = static_cast<__uint128_t>(x) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double RandomSource::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  const double r = std::sqrt(-2.0 * std::log(uniform_open()));
  const double theta = 2.0 * std::numbers::pi * uniform();
  spare_normal_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

void RunningStats::add(double x) noexcept {
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

SummaryStats RunningStats::summary() const {
  if (n_ == 0) fail(ErrorCode::empty_input, "cannot summarize an empty sequence");
  SummaryStats s;
  s.count = n_;
  s.mean = mean_;
  s.variance = n_ > 1 ? std::max(0.0, m2_ / static_cast<double>(n_ - 1)) : 0.0;
  s.standard_error = std::sqrt(s.variance / static_cast<double>(n_));
  return s;
}

SummaryStats summarize(std::span<const double> values) {
  RunningStats acc;
  for (double v : values) acc.add(v);
  return acc.summary();
}

double weighted_mean(std::span<const double> values, std::span<const double> weights) {
  if (values.size() != weights.size()) fail(ErrorCode::invalid_argument, "values and weights differ in length");
  if (values.empty()) fail(ErrorCode::empty_input, "weighted_mean of an empty sequence");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(weights[i] >= 0.0)) fail(ErrorCode::invalid_argument, "weights must be nonnegative");
    num += weights[i] * values[i];
    den += weights[i];
  }
  if (!(den > 0.0)) fail(ErrorCode::degenerate_weights, "total weight is zero");
  return num / den;
}

Vector standard_normal_vector(RandomSource& source, std::size_t d) {
  if (d == 0) fail(ErrorCode::invalid_dimension, "standard_normal_vector needs d >= 1");
  std::vector<double> v(d);
  for (auto& x : v) x = source.normal();
  return Vector(std::move(v));
}

double squared_norm(std::span<const double> x) noexcept {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return s;
}

}  // namespace rfis
