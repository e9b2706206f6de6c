#include "rfis/rfis.h"

#include <algorithm>
#include <exception>
#include <memory>
#include <new>
#include <string>

#include "rfis/estimators.hpp"
#include "rfis/harness.hpp"
#include "rfis/variance.hpp"

struct rfis_config {
  rfis::Config value;
};

struct rfis_report {
  std::string text;
  bool pass = false;
};

struct rfis_rng {
  rfis::RandomSource value;
};

struct rfis_dataset {
  rfis::Dataset value;
};

struct rfis_representation {
  rfis::FeatureRepresentation value;
};

struct rfis_sampler {
  rfis::PsiSampler value;
};

struct rfis_summary {
  rfis::PrecomputedSummary value;
};

namespace {

thread_local std::string g_last_error;

rfis_status set_error(rfis_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

template <class F>
rfis_status guarded(F&& body) {
  try {
    body();
    return RFIS_OK;
  } catch (const rfis::Error& e) {
    return set_error(static_cast<rfis_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(RFIS_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(RFIS_E_INTERNAL, e.what());
  } catch (...) {
    return set_error(RFIS_E_INTERNAL, "unknown error");
  }
}

template <class... P>
bool any_null(const P*... p) {
  return ((p == nullptr) || ...);
}

rfis_status null_argument(const char* fn) {
  return set_error(RFIS_E_NULL_ARGUMENT, std::string(fn) + ": null argument");
}

std::span<const double> vec(const double* p, std::size_t n) { return {p, n}; }

const rfis::Dataset& second(const rfis_dataset* d1, const rfis_dataset* d2) { return d2 ? d2->value : d1->value; }

}  // namespace

extern "C" {

const char* rfis_last_error(void) { return g_last_error.c_str(); }

const char* rfis_status_name(rfis_status status) {
  switch (status) {
    case RFIS_OK:
      return "ok";
    case RFIS_E_NULL_ARGUMENT:
      return "null_argument";
    case RFIS_E_INTERNAL:
      return "internal";
    default:
      if (status >= RFIS_E_INVALID_ARGUMENT && status <= RFIS_E_IO)
        return rfis::error_code_name(static_cast<rfis::ErrorCode>(status));
      return "unknown";
  }
}

int rfis_status_is_numerical(rfis_status status) {
  return status == RFIS_E_OVERFLOW || status == RFIS_E_DEGENERATE_Q || status == RFIS_E_ENVELOPE ||
         status == RFIS_E_OUTSIDE_SUPPORT;
}

const char* rfis_version(void) { return "0.1.0"; }

rfis_status rfis_config_new(rfis_config** out) {
  if (!out) return null_argument("rfis_config_new");
  return guarded([&] { *out = new rfis_config{}; });
}

void rfis_config_free(rfis_config* config) { delete config; }

rfis_status rfis_config_merge_file(rfis_config* config, const char* path) {
  if (any_null(config, path)) return null_argument("rfis_config_merge_file");
  return guarded([&] { config->value.merge_file(path); });
}

rfis_status rfis_config_merge_text(rfis_config* config, const char* text, const char* origin) {
  if (any_null(config, text)) return null_argument("rfis_config_merge_text");
  return guarded([&] { config->value.merge_text(text, origin ? origin : "text"); });
}

rfis_status rfis_config_set(rfis_config* config, const char* key, const char* value) {
  if (any_null(config, key, value)) return null_argument("rfis_config_set");
  return guarded([&] { config->value.set(key, value); });
}

rfis_status rfis_config_apply(rfis_config* config, const char* assignment) {
  if (any_null(config, assignment)) return null_argument("rfis_config_apply");
  return guarded([&] { config->value.apply_assignment(assignment); });
}

rfis_status rfis_config_get(const rfis_config* config, const char* key, const char** value) {
  if (any_null(config, key, value)) return null_argument("rfis_config_get");
  return guarded([&] { *value = config->value.get(key).c_str(); });
}

rfis_status rfis_run(const rfis_config* config, const char* command, rfis_report** out) {
  if (any_null(config, command, out)) return null_argument("rfis_run");
  *out = nullptr;
  return guarded([&] {
    const std::string cmd = command;
    auto report = std::make_unique<rfis_report>();
    if (cmd == "gen-data") {
      report->text = rfis::gen_data(config->value);
      report->pass = true;
    } else if (cmd == "sweep") {
      report->text = rfis::sweep(config->value);
      report->pass = true;
    } else {
      rfis::ReportDocument doc;
      if (cmd == "check-rep") doc = rfis::check_rep(config->value);
      else if (cmd == "variance-report") doc = rfis::variance_report(config->value);
      else if (cmd == "compare-reps") doc = rfis::compare_reps(config->value);
      else rfis::fail(rfis::ErrorCode::config, "unknown command '" + cmd + "'");
      report->text = doc.dump();
      report->pass = doc.pass;
    }
    *out = report.release();
  });
}

void rfis_report_free(rfis_report* report) { delete report; }

const char* rfis_report_text(const rfis_report* report) { return report ? report->text.c_str() : ""; }

int rfis_report_passed(const rfis_report* report) { return report && report->pass ? 1 : 0; }

rfis_status rfis_rng_new(uint64_t seed, rfis_rng** out) {
  if (!out) return null_argument("rfis_rng_new");
  return guarded([&] { *out = new rfis_rng{rfis::RandomSource(seed)}; });
}

rfis_status rfis_rng_substream(const rfis_rng* parent, const char* label, rfis_rng** out) {
  if (any_null(parent, label, out)) return null_argument("rfis_rng_substream");
  return guarded([&] { *out = new rfis_rng{parent->value.substream(label)}; });
}

void rfis_rng_free(rfis_rng* rng) { delete rng; }

rfis_status rfis_rng_uniform(rfis_rng* rng, double* out) {
  if (any_null(rng, out)) return null_argument("rfis_rng_uniform");
  *out = rng->value.uniform();
  return RFIS_OK;
}

rfis_status rfis_rng_normal(rfis_rng* rng, double* out) {
  if (any_null(rng, out)) return null_argument("rfis_rng_normal");
  *out = rng->value.normal();
  return RFIS_OK;
}

rfis_status rfis_dataset_new(size_t n, size_t dim, const double* values, rfis_dataset** out) {
  if (any_null(values, out)) return null_argument("rfis_dataset_new");
  return guarded([&] { *out = new rfis_dataset{rfis::Dataset(dim, std::vector<double>(values, values + n * dim))}; });
}

rfis_status rfis_dataset_read_csv(const char* path, rfis_dataset** out) {
  if (any_null(path, out)) return null_argument("rfis_dataset_read_csv");
  return guarded([&] { *out = new rfis_dataset{rfis::read_dataset_csv(path)}; });
}

rfis_status rfis_dataset_write_csv(const rfis_dataset* data, const char* path) {
  if (any_null(data, path)) return null_argument("rfis_dataset_write_csv");
  return guarded([&] { rfis::write_dataset_csv(path, data->value); });
}

void rfis_dataset_free(rfis_dataset* data) { delete data; }

size_t rfis_dataset_size(const rfis_dataset* data) { return data ? data->value.size() : 0; }

size_t rfis_dataset_dim(const rfis_dataset* data) { return data ? data->value.dim() : 0; }

rfis_status rfis_dataset_point(const rfis_dataset* data, size_t index, double* out) {
  if (any_null(data, out)) return null_argument("rfis_dataset_point");
  if (index >= data->value.size()) return set_error(RFIS_E_INVALID_ARGUMENT, "rfis_dataset_point: index out of range");
  const auto p = data->value.point(index);
  std::copy(p.begin(), p.end(), out);
  return RFIS_OK;
}

rfis_status rfis_kernel_eval(const char* kernel, double scale, const double* x1, const double* x2, size_t dim,
                             double* out) {
  if (any_null(kernel, x1, x2, out)) return null_argument("rfis_kernel_eval");
  return guarded([&] {
    const rfis::KernelSpec spec(rfis::parse_kernel_kind(kernel), scale);
    *out = rfis::kernel_eval(spec, vec(x1, dim), vec(x2, dim));
  });
}

rfis_status rfis_representation_new(const char* feature, const char* kernel, double scale, size_t dim,
                                    rfis_representation** out) {
  if (any_null(feature, kernel, out)) return null_argument("rfis_representation_new");
  return guarded([&] {
    const rfis::KernelSpec spec(rfis::parse_kernel_kind(kernel), scale);
    *out = new rfis_representation{rfis::FeatureRepresentation(rfis::parse_feature_kind(feature), spec, dim)};
  });
}

void rfis_representation_free(rfis_representation* rep) { delete rep; }

size_t rfis_representation_omega_dim(const rfis_representation* rep) { return rep ? rep->value.omega_dim() : 0; }

rfis_status rfis_phi(const rfis_representation* rep, const double* x, const double* omega, double* out) {
  if (any_null(rep, x, omega, out)) return null_argument("rfis_phi");
  return guarded(
      [&] { *out = rfis::phi(rep->value, vec(x, rep->value.dim()), vec(omega, rep->value.omega_dim())); });
}

rfis_status rfis_sampler_new(const rfis_representation* rep, const rfis_dataset* d1, const rfis_dataset* d2,
                             const char* strategy, size_t pool_size, rfis_rng* rng, rfis_sampler** out) {
  if (any_null(rep, d1, strategy, rng, out)) return null_argument("rfis_sampler_new");
  return guarded([&] {
    const auto s = rfis::parse_sampler_strategy(strategy);
    const rfis::QEstimator qest =
        d2 ? rfis::QEstimator(rep->value, d1->value, d2->value) : rfis::QEstimator(rep->value, d1->value);
    if (s == rfis::SamplerStrategy::naive) {
      *out = new rfis_sampler{rfis::naive_sampler(qest)};
    } else {
      *out = new rfis_sampler{rfis::build_sampler(qest, s, pool_size, rfis::GridSpec{}, rng->value)};
    }
  });
}

void rfis_sampler_free(rfis_sampler* sampler) { delete sampler; }

rfis_status rfis_sampler_z_hat(const rfis_sampler* sampler, double* value, double* se) {
  if (any_null(sampler, value, se)) return null_argument("rfis_sampler_z_hat");
  const auto z = sampler->value.z_hat();
  *value = z.value;
  *se = z.se;
  return RFIS_OK;
}

rfis_status rfis_sampler_draw(const rfis_sampler* sampler, rfis_rng* rng, double* omega_out, double* weight) {
  if (any_null(sampler, rng, omega_out, weight)) return null_argument("rfis_sampler_draw");
  return guarded([&] {
    const auto w = rfis::sample_psi(sampler->value, rng->value);
    const auto c = w.omega.coords();
    std::copy(c.begin(), c.end(), omega_out);
    *weight = w.weight;
  });
}

rfis_status rfis_kernel_estimate(const rfis_sampler* sampler, const double* x1, const double* x2, size_t k,
                                 rfis_rng* rng, double* mean, double* se) {
  if (any_null(sampler, x1, x2, rng, mean, se)) return null_argument("rfis_kernel_estimate");
  return guarded([&] {
    const auto& rep = sampler->value.rep();
    const auto est =
        rfis::is_kernel_estimate(rep, sampler->value, vec(x1, rep.dim()), vec(x2, rep.dim()), k, rng->value);
    *mean = est.mean;
    *se = est.standard_error;
  });
}

rfis_status rfis_summary_build(const rfis_sampler* sampler, size_t k, const rfis_dataset* data, const double* labels,
                               rfis_rng* rng, rfis_summary** out) {
  if (any_null(sampler, data, labels, rng, out)) return null_argument("rfis_summary_build");
  return guarded([&] {
    std::vector<rfis::WeightedOmegaSample> samples;
    samples.reserve(k);
    for (std::size_t j = 0; j < k; ++j) samples.push_back(rfis::sample_psi(sampler->value, rng->value));
    const rfis::LabeledDataset labeled(data->value, std::vector<double>(labels, labels + data->value.size()));
    *out = new rfis_summary{rfis::build_summary(sampler->value.rep(), std::move(samples), labeled)};
  });
}

void rfis_summary_free(rfis_summary* summary) { delete summary; }

rfis_status rfis_summary_query(const rfis_summary* summary, const double* x, double* out) {
  if (any_null(summary, x, out)) return null_argument("rfis_summary_query");
  return guarded([&] { *out = rfis::query(summary->value, vec(x, summary->value.rep().dim())); });
}

rfis_status rfis_naive_ke(const char* kernel, double scale, const rfis_dataset* data, const double* labels,
                          const double* x, double* out) {
  if (any_null(kernel, data, labels, x, out)) return null_argument("rfis_naive_ke");
  return guarded([&] {
    const rfis::KernelSpec spec(rfis::parse_kernel_kind(kernel), scale);
    const rfis::LabeledDataset labeled(data->value, std::vector<double>(labels, labels + data->value.size()));
    *out = rfis::naive_ke(spec, labeled, vec(x, data->value.dim()));
  });
}

rfis_status rfis_empirical_variance(const rfis_sampler* sampler, const rfis_dataset* d1, const rfis_dataset* d2,
                                    size_t n_pairs, size_t n_omega, const rfis_rng* rng, double* value, double* se) {
  if (any_null(sampler, d1, rng, value, se)) return null_argument("rfis_empirical_variance");
  return guarded([&] {
    const auto e = rfis::empirical_expected_variance(sampler->value.rep(), sampler->value, d1->value, second(d1, d2),
                                                     n_pairs, n_omega, rng->value);
    *value = e.value;
    *se = e.se;
  });
}

rfis_status rfis_theoretical_variance(const rfis_sampler* sampler, const rfis_rng* rng, double* value, double* se) {
  if (any_null(sampler, rng, value, se)) return null_argument("rfis_theoretical_variance");
  return guarded([&] {
    const auto e = rfis::theoretical_optimal_variance(sampler->value, sampler->value.rep().target(), rng->value);
    *value = e.value;
    *se = e.se;
  });
}

rfis_status rfis_cs_bound(const char* kernel, double scale, const rfis_dataset* d1, const rfis_dataset* d2,
                          const rfis_rng* rng, double* value, double* se) {
  if (any_null(kernel, d1, rng, value, se)) return null_argument("rfis_cs_bound");
  return guarded([&] {
    const rfis::KernelSpec spec(rfis::parse_kernel_kind(kernel), scale);
    const auto e = rfis::cauchy_schwarz_bound(spec, d1->value, second(d1, d2), rng->value);
    *value = e.value;
    *se = e.se;
  });
}

}  // extern "C"
