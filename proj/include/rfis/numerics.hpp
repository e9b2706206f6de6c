#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "rfis/error.hpp"

namespace rfis {

/// Dense, finite, fixed-length vector of reals.
class Vector {
 public:
  Vector() = default;
  explicit Vector(std::vector<double> entries);
  Vector(std::initializer_list<double> entries) : Vector(std::vector<double>(entries)) {}

  std::size_t size() const noexcept { return entries_.size(); }
  double operator[](std::size_t i) const { return entries_[i]; }
  std::span<const double> values() const noexcept { return entries_; }
  operator std::span<const double>() const noexcept { return entries_; }

  friend bool operator==(const Vector&, const Vector&) = default;

 private:
  std::vector<double> entries_;
};

/// Nonempty set of points of equal dimension, stored row-major.
class Dataset {
 public:
  Dataset(std::size_t dim, std::vector<double> row_major);
  explicit Dataset(const std::vector<Vector>& points);

  std::size_t size() const noexcept { return values_.size() / dim_; }
  std::size_t dim() const noexcept { return dim_; }
  std::span<const double> point(std::size_t i) const noexcept {
    return {values_.data() + i * dim_, dim_};
  }
  std::span<const double> values() const noexcept { return values_; }
  double max_norm() const noexcept;

  Dataset concat(const Dataset& other) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::size_t dim_;
  std::vector<double> values_;
};

class LabeledDataset {
 public:
  LabeledDataset(Dataset points, std::vector<double> labels);

  const Dataset& points() const noexcept { return points_; }
  std::span<const double> labels() const noexcept { return labels_; }
  std::size_t size() const noexcept { return labels_.size(); }

  LabeledDataset concat(const LabeledDataset& other) const;

 private:
  Dataset points_;
  std::vector<double> labels_;
};

/// Counter-based generator (Philox-4x32-10). A stream is a key plus a
/// counter; substreams get a fresh key derived from the parent key and a
/// label, so results never depend on the order in which streams are consumed.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed);

  RandomSource substream(std::string_view label) const;
  RandomSource substream(std::string_view label, std::uint64_t index) const;

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1].
  double uniform_open();
  /// Uniform integer on [0, n).
  std::uint64_t below(std::uint64_t n);
  double normal();

  std::uint64_t key() const noexcept { return key_; }

 private:
  RandomSource(std::uint64_t key, int) : key_(key) {}
  void refill();

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::array<std::uint64_t, 2> block_{};
  int block_pos_ = 2;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

struct SummaryStats {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  // n-1 denominator; 0 when count == 1
  double standard_error = 0.0;
};

/// Welford accumulator; sequential, so the result depends only on input order.
class RunningStats {
 public:
  void add(double x) noexcept;
  std::size_t count() const noexcept { return n_; }
  SummaryStats summary() const;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

SummaryStats summarize(std::span<const double> values);

double weighted_mean(std::span<const double> values, std::span<const double> weights);

Vector standard_normal_vector(RandomSource& source, std::size_t d);

/// A Monte Carlo or quadrature estimate with its standard error.
struct Estimate {
  double value = 0.0;
  double se = 0.0;  // standard error
};

double squared_norm(std::span<const double> x) noexcept;
double dot(std::span<const double> a, std::span<const double> b) noexcept;
double squared_distance(std::span<const double> a, std::span<const double> b) noexcept;

}  // namespace rfis
