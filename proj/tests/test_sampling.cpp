#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "rfis/sampling.hpp"

using namespace rfis;

namespace {

const KernelSpec gauss(KernelKind::gaussian);
const FeatureRepresentation trig1(FeatureKind::trig, gauss, 1);
const FeatureRepresentation pexp1(FeatureKind::positive_exp, gauss, 1);

Dataset normal_data(std::size_t n, std::uint64_t seed, double clip = 3.0) {
  RandomSource src(seed);
  std::vector<double> v;
  while (v.size() < n) {
    const double x = src.normal();
    if (std::abs(x) <= clip) v.push_back(x);
  }
  return Dataset(1, v);
}

Dataset point_mass(double x0 = 0.0, std::size_t n = 50) { return Dataset(1, std::vector<double>(n, x0)); }

// Total variation distance between two histograms over the same bins.
double tv_distance(const std::vector<double>& p, const std::vector<double>& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

std::vector<double> histogram(const std::vector<double>& xs, double lo, double hi, std::size_t bins) {
  std::vector<double> h(bins, 0.0);
  for (double x : xs) {
    const double t = (std::clamp(x, lo, std::nextafter(hi, lo)) - lo) / (hi - lo);
    h[std::min(bins - 1, static_cast<std::size_t>(t * bins))] += 1.0 / xs.size();
  }
  return h;
}

// Grid-mass histogram of one omega coordinate on the same bins.
std::vector<double> grid_histogram(const PsiGrid& g, std::size_t axis, double lo, double hi, std::size_t bins) {
  std::vector<double> h(bins, 0.0);
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    const double x = g.cell_center(c)[axis];
    const double t = (std::clamp(x, lo, std::nextafter(hi, lo)) - lo) / (hi - lo);
    h[std::min(bins - 1, static_cast<std::size_t>(t * bins))] += g.mass(c);
  }
  return h;
}

}  // namespace

TEST_SUITE("sampling") {
  TEST_CASE("q_hat examples") {
    const QEstimator pq(pexp1, Dataset(1, {0.0}));
    RandomSource src(1);
    for (int i = 0; i < 50; ++i) CHECK(pq.q_hat(omega_sample(pexp1, src)) == 1.0);

    const QEstimator tq(trig1, Dataset(1, {0.0}));
    for (double b : {0.0, 0.5, 1.5, 3.0, 6.0}) {
      const std::vector<double> w{src.normal(), b};
      CHECK(tq.q_hat(w) == doctest::Approx(2.0 * std::cos(b) * std::cos(b)).epsilon(1e-12));
    }

    const QEstimator nq(trig1, normal_data(10000, 2, 1e300));
    for (double w : {0.0, 0.3, 1.0, 2.0})
      for (double b : {0.0, 1.0, 2.5, 4.0}) {
        const std::vector<double> om{w, b};
        CHECK(std::abs(nq.q_hat(om) - (1.0 + std::cos(2 * b) * std::exp(-2 * w * w))) <= 0.05);
      }
  }

  TEST_CASE("accelerated q_hat matches the direct sum") {
    const Dataset d1 = normal_data(500, 3), d2 = normal_data(300, 4);
    RandomSource src(5);
    for (const auto& rep : {trig1, pexp1}) {
      const QEstimator q(rep, d1, d2);
      CHECK(q.accelerated());
      CHECK_FALSE(q.same_marginals());
      for (int i = 0; i < 500; ++i) {
        std::vector<double> om(rep.omega_dim());
        om[0] = 3.0 * src.normal();
        if (rep.has_phase()) om[1] = oracle::kTwoPi * src.uniform();
        const double direct = q.q_hat_direct(om);
        CHECK(q.q_hat(om) == doctest::Approx(direct).epsilon(1e-10));
      }
    }
  }

  TEST_CASE("q_hat for two marginals is the geometric mean") {
    const QEstimator q(trig1, Dataset(1, {0.0}), Dataset(1, {1.0}));
    const std::vector<double> om{0.7, 0.2};
    const double a = 2 * std::pow(std::cos(0.2), 2), b = 2 * std::pow(std::cos(0.7 + 0.2), 2);
    CHECK(q.q_hat(om) == doctest::Approx(std::sqrt(a * b)));
  }

  TEST_CASE("QEstimator input checks") {
    CHECK_THROWS_AS(QEstimator(pexp1, Dataset(1, {0.0, 5.0})), Error);
    CHECK_THROWS_AS(QEstimator(trig1, Dataset(2, {0.0, 0.0})), Error);
  }

  TEST_CASE("normalization_estimate examples") {
    RandomSource src(6);
    const auto z0 = normalization_estimate(QEstimator(pexp1, point_mass()), 1000, src);
    CHECK(z0.value == 1.0);
    CHECK(z0.se == 0.0);

    const Dataset nd = normal_data(2000, 7);
    const auto zt = normalization_estimate(QEstimator(trig1, nd), 100000, src);
    CHECK(std::abs(zt.value - 1.0) <= 0.01);

    CHECK_THROWS_AS(normalization_estimate(QEstimator(pexp1, nd), 99, src), Error);
  }

  TEST_CASE("positive_exp normalization on N(0,1) data by grid quadrature") {
    const Dataset nd = normal_data(2000, 7);
    const PsiGrid g(QEstimator(pexp1, nd), GridSpec{});
    CHECK(std::abs(g.normalization().value - 1.0) <= 0.02);
    CHECK(g.normalization().se < 1e-3);
  }

  TEST_CASE("positive_exp normalization on N(0,1) data by pool Monte Carlo" * doctest::may_fail()) {
    // Reported, not enforced: the pool estimate has infinite population variance here.
    const Dataset nd = normal_data(2000, 7);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      RandomSource src(seed);
      const auto z = normalization_estimate(QEstimator(pexp1, nd), 100000, src);
      CAPTURE(seed);
      CAPTURE(z.value);
      CHECK(std::abs(z.value - 1.0) <= 0.02);
    }
  }

  TEST_CASE("grid oracle construction") {
    const PsiGrid g(QEstimator(trig1, normal_data(2000, 8)), GridSpec{});
    double total = 0.0;
    for (std::size_t c = 0; c < g.cell_count(); ++c) total += g.mass(c);
    CHECK(std::abs(total - 1.0) <= 1e-9);
    CHECK(g.cell_count() == 4000u * 720u);

    GridSpec bad;
    bad.step = 0.0;
    CHECK_THROWS_AS(bad.validate(), Error);
    const FeatureRepresentation trig2(FeatureKind::trig, gauss, 2);
    try {
      PsiGrid(QEstimator(trig2, Dataset(2, {0.0, 0.0})), GridSpec{});
      FAIL("expected grid_too_large");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::grid_too_large);
    }
  }

  TEST_CASE("grid psi equals omega for constant q") {
    RandomSource src(9);
    const auto s = build_sampler(QEstimator(pexp1, point_mass()), SamplerStrategy::grid_oracle, 1000, GridSpec{}, src);
    for (double w : {-3.0, -0.5, 0.0, 1.25, 4.0}) {
      const std::vector<double> om{w};
      CHECK(std::abs(std::exp(psi_log_density(s, om)) - std::exp(omega_log_density(pexp1, om))) <= 1e-9);
    }
    const PsiGrid& g = *s.grid();
    for (std::size_t c = 0; c < g.cell_count(); c += 97) {
      const double w = g.cell_center(c)[0];
      CHECK(std::abs(g.mass(c) / g.cell_volume() - oracle::normal_pdf(w)) <= 1e-9);
    }
  }

  TEST_CASE("trig point mass: separable grid marginals") {
    RandomSource src(10);
    const auto s = build_sampler(QEstimator(trig1, point_mass()), SamplerStrategy::grid_oracle, 1000, GridSpec{}, src);
    const PsiGrid& g = *s.grid();
    const auto shape = g.shape();
    REQUIRE(shape.size() == 2);
    std::vector<double> wm(shape[0], 0.0), bm(shape[1], 0.0);
    for (std::size_t i = 0; i < shape[0]; ++i)
      for (std::size_t j = 0; j < shape[1]; ++j) {
        const double m = g.mass(i * shape[1] + j);
        wm[i] += m;
        bm[j] += m;
      }
    const double hw = GridSpec{}.step, hb = oracle::kTwoPi / shape[1];
    double worst_w = 0.0, worst_b = 0.0;
    for (std::size_t i = 0; i < shape[0]; ++i) {
      const double w = g.cell_center(i * shape[1])[0];
      worst_w = std::max(worst_w, std::abs(wm[i] / hw - oracle::normal_pdf(w)));
    }
    for (std::size_t j = 0; j < shape[1]; ++j) {
      const double b = g.cell_center(j)[1];
      worst_b = std::max(worst_b, std::abs(bm[j] / hb - std::cos(b) * std::cos(b) / std::numbers::pi));
    }
    CHECK(worst_w < 1e-6);
    CHECK(worst_b < 1e-6);
  }

  TEST_CASE("sample_psi examples") {
    RandomSource src(11);
    for (auto strategy : {SamplerStrategy::pool_resampler, SamplerStrategy::rejection, SamplerStrategy::grid_oracle}) {
      CAPTURE(to_string(strategy));
      const auto s = build_sampler(QEstimator(pexp1, point_mass()), strategy, 1000, GridSpec{}, src);
      for (int i = 0; i < 200; ++i) CHECK(std::abs(sample_psi(s, src).weight - 1.0) <= 1e-12);
    }

    const auto g = build_sampler(QEstimator(trig1, point_mass()), SamplerStrategy::grid_oracle, 1000, GridSpec{}, src);
    const std::vector<double> zero{0.0};
    for (int i = 0; i < 1000; ++i) {
      const auto w = sample_psi(g, src);
      const double p = phi(trig1, zero, w.omega);
      CHECK(w.weight * p * p == doctest::Approx(g.z_hat().value).epsilon(1e-12));
      CHECK_UNARY(w.omega[1] >= 0.0);
      CHECK_UNARY(w.omega[1] < oracle::kTwoPi);
    }
  }

  TEST_CASE("zero-variance degeneracy at a point mass") {
    for (double x0 : {0.0, 0.8}) {
      const Dataset d = point_mass(x0);
      for (const auto& rep : {trig1, pexp1}) {
        RandomSource src(12);
        const auto s = build_sampler(QEstimator(rep, d), SamplerStrategy::grid_oracle, 1000, GridSpec{}, src);
        const std::vector<double> x{x0};
        std::vector<double> vals;
        for (int i = 0; i < 2000; ++i) {
          const auto w = sample_psi(s, src);
          const double p = phi(rep, x, w.omega);
          vals.push_back(w.weight * p * p);
        }
        const auto st = summarize(vals);
        CHECK(st.variance <= 1e-20 * st.mean * st.mean);
      }
    }
  }

  TEST_CASE("psi_log_density examples") {
    RandomSource src(13);
    const auto s = build_sampler(QEstimator(trig1, normal_data(2000, 14)), SamplerStrategy::grid_oracle, 1000,
                                 GridSpec{}, src);
    const PsiGrid& g = *s.grid();
    long double total = 0.0L;
    for (std::size_t c = 0; c < g.cell_count(); ++c)
      total += std::exp(psi_log_density(s, g.cell_center(c))) * g.cell_volume();
    CHECK(std::abs(static_cast<double>(total) - 1.0) <= 1e-3);

    const auto pm = build_sampler(QEstimator(pexp1, point_mass()), SamplerStrategy::rejection, 1000, {}, src);
    for (double w : {-2.0, 0.0, 0.9}) {
      const std::vector<double> om{w};
      CHECK(std::abs(psi_log_density(pm, om) - omega_log_density(pexp1, om)) <= 1e-12);
    }

    const auto tm = build_sampler(QEstimator(trig1, point_mass()), SamplerStrategy::grid_oracle, 1000, GridSpec{}, src);
    const QEstimator& q = tm.qest();
    std::vector<std::pair<double, double>> by_q;
    for (double b = 0.05; b < 6.2; b += 0.1) {
      const std::vector<double> om{0.4, b};
      by_q.emplace_back(q.q_hat(om), psi_log_density(tm, om));
    }
    std::sort(by_q.begin(), by_q.end());
    for (std::size_t i = 1; i < by_q.size(); ++i) CHECK(by_q[i].second >= by_q[i - 1].second);
  }

  TEST_CASE("support match: sampled omegas have positive q") {
    RandomSource src(15);
    for (auto strategy : {SamplerStrategy::pool_resampler, SamplerStrategy::rejection, SamplerStrategy::grid_oracle}) {
      const auto s = build_sampler(QEstimator(trig1, normal_data(500, 16)), strategy, 10000, GridSpec{}, src);
      for (int i = 0; i < 500; ++i) {
        const auto w = sample_psi(s, src);
        CHECK(s.qest().q_hat(w.omega) > 0.0);
        CHECK(std::isfinite(psi_log_density(s, w.omega.coords())));
        CHECK_UNARY(w.weight > 0.0);
      }
    }
  }

  TEST_CASE("rejection and grid oracle agree in distribution") {
    const Dataset d = normal_data(2000, 17);
    RandomSource src(18);
    const QEstimator q(trig1, d);
    const auto grid = build_sampler(q, SamplerStrategy::grid_oracle, 1000, GridSpec{}, src);
    const auto rej = build_sampler(q, SamplerStrategy::rejection, 100000, {}, src);
    std::vector<double> ws, bs;
    for (int i = 0; i < 100000; ++i) {
      const auto w = sample_psi(rej, src);
      ws.push_back(w.omega[0]);
      bs.push_back(w.omega[1]);
    }
    const double tv_w = tv_distance(histogram(ws, -4, 4, 50), grid_histogram(*grid.grid(), 0, -4, 4, 50));
    const double tv_b =
        tv_distance(histogram(bs, 0, oracle::kTwoPi, 50), grid_histogram(*grid.grid(), 1, 0, oracle::kTwoPi, 50));
    CHECK(tv_w < 0.02);
    CHECK(tv_b < 0.02);
  }

  TEST_CASE("rejection envelope covers the pool") {
    CHECK(kMaxConsecutiveRejections == 1000000u);
    CHECK(kEnvelopeFactor == 1.5);
    RandomSource src(19);
    const auto s = build_sampler(QEstimator(trig1, normal_data(200, 20)), SamplerStrategy::rejection, 1000, {}, src);
    CHECK(s.envelope() >= *std::max_element(s.pool_q().begin(), s.pool_q().end()));
  }

  TEST_CASE("reweighted unbiasedness over pairs") {
    const Dataset d = normal_data(2000, 21);
    for (const auto& rep : {trig1, pexp1}) {
      for (auto strategy : {SamplerStrategy::grid_oracle, SamplerStrategy::pool_resampler}) {
        CAPTURE(rep.id());
        CAPTURE(to_string(strategy));
        const double tol = strategy == SamplerStrategy::grid_oracle ? 4.0 : 5.0;
        const RandomSource root(22);
        RandomSource bsrc = root.substream("build");
        const auto s = build_sampler(QEstimator(rep, d), strategy, 100000, GridSpec{}, bsrc);
        int covered = 0;
        for (int p = 0; p < 20; ++p) {
          RandomSource src = root.substream("pair", p);
          const auto x1 = d.point(src.below(d.size())), x2 = d.point(src.below(d.size()));
          RunningStats acc;
          for (int j = 0; j < 10000; ++j) {
            const auto w = sample_psi(s, src);
            acc.add(w.weight * phi(rep, x1, w.omega) * phi(rep, x2, w.omega));
          }
          const auto st = acc.summary();
          covered += std::abs(st.mean - kernel_eval(gauss, x1, x2)) <= tol * st.standard_error + 1e-12 ? 1 : 0;
        }
        CHECK(covered >= 19);
      }
    }
  }

  TEST_CASE("sampler names") {
    CHECK(parse_sampler_strategy("grid_oracle") == SamplerStrategy::grid_oracle);
    CHECK(parse_sampler_strategy("rejection") == SamplerStrategy::rejection);
    CHECK(to_string(SamplerStrategy::pool_resampler) == "pool_resampler");
    CHECK_THROWS_AS(parse_sampler_strategy("mcmc"), Error);
  }
}
