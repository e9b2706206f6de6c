#include "rfis/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace rfis {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool parse_double(std::string_view s, double& out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  const auto* end = t.data() + t.size();
  const auto r = std::from_chars(t.data(), end, out);
  return r.ec == std::errc() && r.ptr == end && std::isfinite(out);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// Config

const std::map<std::string, std::string, std::less<>>& Config::defaults() {
  static const std::map<std::string, std::string, std::less<>> d = {
      {"kernel", "gaussian"},
      {"scale", "1"},
      {"reps", "trig,positive_exp"},
      {"sampler", "grid_oracle"},
      {"d", "1"},
      {"n", "2000"},
      {"k", "10000"},
      {"n_pairs", "200"},
      {"n_omega", "10000"},
      {"pool_size", "100000"},
      {"seed", "1"},
      {"out", ""},
      {"check.pairs", "20"},
      {"data1.kind", "gaussian_blob"},
      {"data1.mean", "0"},
      {"data1.sd", "1"},
      {"data1.clip", "3"},
      {"data1.half_width", "1"},
      {"data1.point", "0"},
      {"data1.path", ""},
      {"data2.kind", "same"},
      {"data2.mean", "0"},
      {"data2.sd", "1"},
      {"data2.clip", "3"},
      {"data2.half_width", "1"},
      {"data2.point", "0"},
      {"data2.path", ""},
      {"grid.lo", "-8"},
      {"grid.hi", "8"},
      {"grid.step", "0.004"},
      {"grid.phase_cells", "720"},
      {"audit.directions", "8"},
      {"audit.epsilon", "0.2"},
      {"sweep.axis", "k"},
      {"sweep.values", "10,100,1000"},
      {"sweep.repeats", "200"},
  };
  return d;
}

Config::Config() : values_(defaults()) {
  for (const auto& [k, v] : values_) origins_[k] = "default";
}

void Config::set(std::string_view key, std::string_view value, std::string_view origin) {
  const auto it = values_.find(key);
  if (it == values_.end())
    fail(ErrorCode::config, std::string(origin) + ": unknown config key '" + std::string(key) + "'");
  it->second = trim(value);
  origins_[std::string(key)] = std::string(origin);
}

void Config::apply_assignment(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos)
    fail(ErrorCode::config, "--set expects key=value, got '" + std::string(assignment) + "'");
  set(trim(assignment.substr(0, eq)), assignment.substr(eq + 1), "--set");
}

void Config::merge_text(std::string_view text, std::string_view origin) {
  std::size_t line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = std::string(origin) + ":" + std::to_string(line_no);
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorCode::config, where + ": expected 'key = value', got '" + line + "'");
    set(trim(std::string_view(line).substr(0, eq)), std::string_view(line).substr(eq + 1), where);
  }
}

void Config::merge_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::config, "cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  merge_text(ss.str(), path);
}

const std::string& Config::get(std::string_view key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) fail(ErrorCode::config, "unknown config key '" + std::string(key) + "'");
  return it->second;
}

void Config::bad_value(std::string_view key, const std::string& why) const {
  const auto o = origins_.find(key);
  fail(ErrorCode::config, (o != origins_.end() ? o->second : std::string("config")) + ": key '" + std::string(key) +
                              "' = '" + get(key) + "': " + why);
}

double Config::get_double(std::string_view key) const {
  double v;
  if (!parse_double(get(key), v)) bad_value(key, "expected a finite real number");
  return v;
}

std::uint64_t Config::get_u64(std::string_view key) const {
  const std::string& s = get(key);
  std::uint64_t v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size()) bad_value(key, "expected an unsigned integer");
  return v;
}

std::size_t Config::get_count(std::string_view key) const {
  const auto v = get_u64(key);
  if (v == 0) bad_value(key, "expected a positive count");
  return static_cast<std::size_t>(v);
}

std::vector<double> Config::get_list(std::string_view key) const {
  std::vector<double> out;
  for (const auto& item : split(get(key), ',')) {
    double v;
    if (!parse_double(item, v)) bad_value(key, "expected a comma-separated list of reals");
    out.push_back(v);
  }
  return out;
}

std::vector<std::string> Config::get_words(std::string_view key) const {
  std::vector<std::string> out;
  for (auto& item : split(get(key), ','))
    if (!item.empty()) out.push_back(std::move(item));
  if (out.empty()) bad_value(key, "expected a non-empty list");
  return out;
}

// ---------------------------------------------------------------------------
// Data

DataKind parse_data_kind(std::string_view name) {
  if (name == "gaussian_blob") return DataKind::gaussian_blob;
  if (name == "uniform_cube") return DataKind::uniform_cube;
  if (name == "point_mass") return DataKind::point_mass;
  if (name == "csv") return DataKind::csv;
  fail(ErrorCode::config, "unknown data kind '" + std::string(name) +
                              "' (expected gaussian_blob, uniform_cube, point_mass or csv)");
}

namespace {

std::vector<double> broadcast(const std::vector<double>& v, std::size_t d, const char* what) {
  if (v.size() == 1) return std::vector<double>(d, v[0]);
  if (v.size() != d)
    fail(ErrorCode::config, std::string(what) + " has " + std::to_string(v.size()) + " entries, expected 1 or " +
                                std::to_string(d));
  return v;
}

}  // namespace

Dataset generate_dataset(const DataSpec& spec, RandomSource& source) {
  if (spec.kind == DataKind::csv) return read_dataset_csv(spec.path);
  if (spec.d == 0) fail(ErrorCode::invalid_dimension, "data dimension must be at least 1");
  if (spec.n == 0) fail(ErrorCode::empty_input, "data size must be at least 1");
  std::vector<double> values;
  values.reserve(spec.n * spec.d);
  switch (spec.kind) {
    case DataKind::gaussian_blob: {
      if (!(spec.sd >= 0.0)) fail(ErrorCode::config, "gaussian_blob sd must be nonnegative");
      if (spec.clip < 0.0) fail(ErrorCode::config, "gaussian_blob clip must be nonnegative");
      const auto mean = broadcast(spec.mean, spec.d, "mean");
      std::vector<double> x(spec.d);
      for (std::size_t i = 0; i < spec.n; ++i) {
        for (std::size_t attempt = 0;; ++attempt) {
          if (attempt > 1000) fail(ErrorCode::config, "gaussian_blob clip radius rejects nearly every draw");
          double r2 = 0.0;
          for (std::size_t j = 0; j < spec.d; ++j) {
            const double dev = spec.sd * source.normal();
            x[j] = mean[j] + dev;
            r2 += dev * dev;
          }
          if (spec.clip == 0.0 || std::sqrt(r2) <= spec.clip) break;
        }
        values.insert(values.end(), x.begin(), x.end());
      }
      break;
    }
    case DataKind::uniform_cube: {
      if (!(spec.half_width >= 0.0)) fail(ErrorCode::config, "uniform_cube half_width must be nonnegative");
      const auto mean = broadcast(spec.mean, spec.d, "mean");
      for (std::size_t i = 0; i < spec.n; ++i)
        for (std::size_t j = 0; j < spec.d; ++j)
          values.push_back(mean[j] + spec.half_width * (2.0 * source.uniform() - 1.0));
      break;
    }
    case DataKind::point_mass: {
      const auto p = broadcast(spec.point, spec.d, "point");
      for (std::size_t i = 0; i < spec.n; ++i) values.insert(values.end(), p.begin(), p.end());
      break;
    }
    case DataKind::csv:
      break;
  }
  return Dataset(spec.d, std::move(values));
}

std::string dataset_to_csv(const Dataset& data) {
  std::string out;
  for (std::size_t j = 0; j < data.dim(); ++j) {
    if (j) out += ',';
    out += "x" + std::to_string(j + 1);
  }
  out += '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto p = data.point(i);
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (j) out += ',';
      out += format_double(p[j]);
    }
    out += '\n';
  }
  return out;
}

void write_dataset_csv(const std::string& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io, "cannot write '" + path + "'");
  out << dataset_to_csv(data);
  if (!out) fail(ErrorCode::io, "write to '" + path + "' failed");
}

Dataset parse_dataset_csv(std::string_view text, std::string_view origin) {
  auto lines = split(text, '\n');
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) fail(ErrorCode::io, std::string(origin) + ": empty CSV");
  const auto header = split(lines[0], ',');
  for (std::size_t j = 0; j < header.size(); ++j)
    if (header[j] != "x" + std::to_string(j + 1))
      fail(ErrorCode::io, std::string(origin) + ":1: header must be x1,...,xd, got '" + lines[0] + "'");
  const std::size_t d = header.size();
  std::vector<double> values;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = split(lines[i], ',');
    if (cells.size() != d)
      fail(ErrorCode::io, std::string(origin) + ":" + std::to_string(i + 1) + ": expected " + std::to_string(d) +
                              " values, got " + std::to_string(cells.size()));
    for (const auto& c : cells) {
      double v;
      if (!parse_double(c, v))
        fail(ErrorCode::io, std::string(origin) + ":" + std::to_string(i + 1) + ": bad number '" + c + "'");
      values.push_back(v);
    }
  }
  if (values.empty()) fail(ErrorCode::io, std::string(origin) + ": CSV has no data rows");
  return Dataset(d, std::move(values));
}

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open dataset '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_dataset_csv(ss.str(), path);
}

// ---------------------------------------------------------------------------
// Setup

namespace {

DataSpec data_spec(const Config& c, const std::string& prefix) {
  DataSpec s;
  s.kind = parse_data_kind(c.get(prefix + ".kind"));
  s.n = c.get_count("n");
  s.d = c.get_count("d");
  s.mean = c.get_list(prefix + ".mean");
  s.sd = c.get_double(prefix + ".sd");
  s.clip = c.get_double(prefix + ".clip");
  s.half_width = c.get_double(prefix + ".half_width");
  s.point = c.get_list(prefix + ".point");
  s.path = c.get(prefix + ".path");
  if (s.kind == DataKind::csv && s.path.empty()) fail(ErrorCode::config, prefix + ".kind = csv needs " + prefix + ".path");
  return s;
}

}  // namespace

ExperimentSetup resolve_setup(const Config& c) {
  ExperimentSetup s;
  s.kernel = KernelSpec(parse_kernel_kind(c.get("kernel")), c.get_double("scale"));
  s.strategy = parse_sampler_strategy(c.get("sampler"));
  s.k = c.get_count("k");
  s.n_pairs = c.get_count("n_pairs");
  s.n_omega = c.get_count("n_omega");
  s.pool_size = c.get_count("pool_size");
  s.check_pairs = c.get_count("check.pairs");
  s.seed = c.get_u64("seed");
  s.grid.lo = c.get_double("grid.lo");
  s.grid.hi = c.get_double("grid.hi");
  s.grid.step = c.get_double("grid.step");
  s.grid.phase_cells = c.get_count("grid.phase_cells");
  try {
    s.grid.validate();
  } catch (const Error& e) {
    fail(ErrorCode::config, std::string("grid.*: ") + e.what());
  }

  const RandomSource root(s.seed);
  RandomSource src1 = root.substream("data1");
  s.d1 = generate_dataset(data_spec(c, "data1"), src1);
  const std::string kind2 = c.get("data2.kind");
  s.same_marginals = kind2 == "same";
  if (s.same_marginals) {
    s.d2 = s.d1;
  } else {
    RandomSource src2 = root.substream("data2");
    s.d2 = generate_dataset(data_spec(c, "data2"), src2);
  }
  if (s.d1.dim() != s.d2.dim()) fail(ErrorCode::config, "data1 and data2 differ in dimension");
  const std::size_t d = s.d1.dim();

  for (const auto& word : c.get_words("reps")) {
    const auto parts = split(word, ':');
    if (parts.size() > 2) fail(ErrorCode::config, "reps entry '" + word + "' should be kind or kind:kernel");
    const FeatureKind fk = parse_feature_kind(parts[0]);
    if (parts.size() == 2 && parse_kernel_kind(parts[1]) != s.kernel.kind())
      fail(ErrorCode::config, "mismatched kernels: reps entry '" + word + "' targets " + parts[1] +
                                  " but kernel = " + std::string(to_string(s.kernel.kind())));
    s.reps.emplace_back(fk, s.kernel, d);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Experiments

namespace {

nlohmann::ordered_json config_echo(const Config& c) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [k, v] : c.entries()) j[k] = v;
  return j;
}

nlohmann::ordered_json document_head(const Config& c, const char* command, std::uint64_t seed) {
  nlohmann::ordered_json j;
  j["schema"] = kReportSchema;
  j["command"] = command;
  j["seed"] = seed;
  j["config"] = config_echo(c);
  j["tolerance_se"] = kToleranceSe;
  return j;
}

nlohmann::ordered_json opt_bool(const std::optional<bool>& b) {
  return b ? nlohmann::ordered_json(*b) : nlohmann::ordered_json(nullptr);
}

nlohmann::ordered_json row_json(const VarianceReport& r, Estimate z, bool bound_ok, const std::optional<bool>& eq,
                                const std::optional<bool>& dom, const std::optional<bool>& cons) {
  nlohmann::ordered_json j;
  j["rep"] = r.rep;
  j["sampler"] = r.sampler;
  j["empirical_v"] = r.empirical_v.value;
  j["empirical_v_stderr"] = r.empirical_v.se;
  j["theoretical_v_hat"] = r.theoretical_v_hat.value;
  j["theoretical_v_hat_stderr"] = r.theoretical_v_hat.se;
  j["cs_bound"] = r.cs_bound.value;
  j["cs_bound_stderr"] = r.cs_bound.se;
  j["z_hat"] = z.value;
  j["z_hat_stderr"] = z.se;
  j["n_pairs"] = r.n_pairs;
  j["n_omega"] = r.n_omega;
  j["verdicts"] = {{"bound_ok", bound_ok},
                   {"equality_ok", opt_bool(eq)},
                   {"dominance_ok", opt_bool(dom)},
                   {"consistency_ok", opt_bool(cons)}};
  return j;
}

bool within(double a, double b, double se_a, double se_b) {
  return std::abs(a - b) <= kToleranceSe * combined_se(se_a, se_b) + kRoundingFloor;
}

QEstimator make_qest(const ExperimentSetup& s, const FeatureRepresentation& rep) {
  return s.same_marginals ? QEstimator(rep, s.d1, s.grid) : QEstimator(rep, s.d1, s.d2, s.grid);
}

bool all_verdicts(const CellResult& c) {
  return c.bound_ok && c.equality_ok.value_or(true) && c.dominance_ok.value_or(true) && c.consistency_ok.value_or(true);
}

}  // namespace

CellResult run_variance_cell(const ExperimentSetup& s, const FeatureRepresentation& rep) {
  const RandomSource root(s.seed);
  const QEstimator qest = make_qest(s, rep);
  RandomSource sampler_src = root.substream("sampler/" + rep.id());
  const PsiSampler opt = build_sampler(qest, s.strategy, s.pool_size, s.grid, sampler_src);
  const PsiSampler naive = naive_sampler(qest);
  const std::string opt_name(to_string(s.strategy));

  CellResult out;
  const auto fill = [&](VarianceReport& r, const PsiSampler& sampler, const std::string& name) {
    r.rep = rep.id();
    r.sampler = name;
    r.n_pairs = s.n_pairs;
    r.n_omega = s.n_omega;
    r.seed = s.seed;
    r.empirical_v = empirical_expected_variance(rep, sampler, s.d1, s.d2, s.n_pairs, s.n_omega,
                                                root.substream("empirical/" + rep.id() + "/" + name));
  };
  fill(out.naive, naive, "naive");
  if (s.strategy == SamplerStrategy::naive) {
    out.optimal = out.naive;
    out.optimal.theoretical_v_hat = theoretical_optimal_variance(qest, s.kernel, s.pool_size, root);
    RandomSource zsrc = root.substream("normalization");
    out.z_hat = normalization_estimate(qest, s.pool_size, zsrc);
  } else {
    fill(out.optimal, opt, opt_name);
    out.optimal.theoretical_v_hat = theoretical_optimal_variance(opt, s.kernel, root);
    out.z_hat = opt.z_hat();
  }
  out.optimal.cs_bound = cauchy_schwarz_bound(s.kernel, s.d1, s.d2, root);
  out.naive.theoretical_v_hat = out.optimal.theoretical_v_hat;
  out.naive.cs_bound = out.optimal.cs_bound;

  const auto& v = out.optimal.theoretical_v_hat;
  const auto& b = out.optimal.cs_bound;
  out.bound_ok = v.value <= b.value + kToleranceSe * combined_se(v.se, b.se) + kRoundingFloor;
  if (s.same_marginals) out.equality_ok = within(v.value, b.value, v.se, b.se);
  if (s.strategy != SamplerStrategy::naive) {
    const auto& eo = out.optimal.empirical_v;
    const auto& en = out.naive.empirical_v;
    out.dominance_ok = eo.value <= en.value + kToleranceSe * combined_se(eo.se, en.se) + kRoundingFloor;
    out.consistency_ok = within(eo.value, v.value, eo.se, v.se);
  }
  return out;
}

ReportDocument check_rep(const Config& config) {
  const auto s = resolve_setup(config);
  const RandomSource root(s.seed);
  ReportDocument doc;
  doc.json = document_head(config, "check-rep", s.seed);
  doc.json["reports"] = nlohmann::ordered_json::array();
  auto checks = nlohmann::ordered_json::array();
  bool pass = true;
  for (const auto& rep : s.reps) {
    rep.check_inputs(s.d1);
    rep.check_inputs(s.d2);
    auto pairs = nlohmann::ordered_json::array();
    std::size_t covered = 0;
    for (std::size_t p = 0; p < s.check_pairs; ++p) {
      RandomSource rs = root.substream("check-rep/" + rep.id(), p);
      const auto x1 = s.d1.point(rs.below(s.d1.size()));
      const auto x2 = s.d2.point(rs.below(s.d2.size()));
      const auto st = mc_kernel_check(rep, x1, x2, s.k, rs);
      const double exact = kernel_eval(s.kernel, x1, x2);
      const double dev = std::abs(st.mean - exact);
      const bool ok = dev <= kToleranceSe * st.standard_error + kRoundingFloor;
      covered += ok ? 1 : 0;
      pairs.push_back({{"x1", std::vector<double>(x1.begin(), x1.end())},
                       {"x2", std::vector<double>(x2.begin(), x2.end())},
                       {"exact", exact},
                       {"mean", st.mean},
                       {"stderr", st.standard_error},
                       {"covered", ok}});
    }
    const double coverage = static_cast<double>(covered) / static_cast<double>(s.check_pairs);
    const bool rep_pass = coverage >= 0.95;
    pass = pass && rep_pass;
    checks.push_back({{"rep", rep.id()},
                      {"k", s.k},
                      {"covered", covered},
                      {"total", s.check_pairs},
                      {"coverage", coverage},
                      {"required_coverage", 0.95},
                      {"pass", rep_pass},
                      {"pairs", std::move(pairs)}});
  }
  doc.json["checks"] = std::move(checks);
  doc.json["pass"] = pass;
  doc.pass = pass;
  return doc;
}

ReportDocument variance_report(const Config& config) {
  const auto s = resolve_setup(config);
  ReportDocument doc;
  doc.json = document_head(config, "variance-report", s.seed);
  doc.json["same_marginals"] = s.same_marginals;
  auto rows = nlohmann::ordered_json::array();
  bool pass = true;
  for (const auto& rep : s.reps) {
    const auto cell = run_variance_cell(s, rep);
    if (s.strategy != SamplerStrategy::naive)
      rows.push_back(row_json(cell.optimal, cell.z_hat, cell.bound_ok, cell.equality_ok, cell.dominance_ok,
                              cell.consistency_ok));
    rows.push_back(row_json(cell.naive, {1.0, 0.0}, cell.bound_ok, cell.equality_ok, std::nullopt, std::nullopt));
    pass = pass && all_verdicts(cell);
  }
  doc.json["reports"] = std::move(rows);
  doc.json["pass"] = pass;
  doc.pass = pass;
  return doc;
}

ReportDocument compare_reps(const Config& config) {
  const auto s = resolve_setup(config);
  if (s.reps.size() < 2) fail(ErrorCode::config, "compare-reps needs at least two entries in reps");
  if (!s.same_marginals) fail(ErrorCode::config, "compare-reps needs data2.kind = same");
  if (s.strategy == SamplerStrategy::naive) fail(ErrorCode::config, "compare-reps needs an optimal sampler");
  ReportDocument doc;
  doc.json = document_head(config, "compare-reps", s.seed);
  std::vector<CellResult> cells;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& rep : s.reps) {
    cells.push_back(run_variance_cell(s, rep));
    const auto& c = cells.back();
    rows.push_back(row_json(c.optimal, c.z_hat, c.bound_ok, c.equality_ok, c.dominance_ok, c.consistency_ok));
    rows.push_back(row_json(c.naive, {1.0, 0.0}, c.bound_ok, c.equality_ok, std::nullopt, std::nullopt));
  }
  const auto ratio = [](const Estimate& a, const Estimate& b) {
    const double diff = std::abs(a.value - b.value);
    const double se = combined_se(a.se, b.se);
    if (diff <= kRoundingFloor) return 0.0;
    return se > 0.0 ? diff / se : std::numeric_limits<double>::infinity();
  };
  auto comparisons = nlohmann::ordered_json::array();
  bool pass = true;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    for (std::size_t j = i + 1; j < cells.size(); ++j) {
      const auto& a = cells[i];
      const auto& b = cells[j];
      const double r_opt = ratio(a.optimal.empirical_v, b.optimal.empirical_v);
      const double r_naive = ratio(a.naive.empirical_v, b.naive.empirical_v);
      const bool ok = r_opt <= kToleranceSe;
      pass = pass && ok;
      comparisons.push_back(
          {{"a", a.optimal.rep},
           {"b", b.optimal.rep},
           {"optimal_diff", a.optimal.empirical_v.value - b.optimal.empirical_v.value},
           {"optimal_combined_stderr", combined_se(a.optimal.empirical_v.se, b.optimal.empirical_v.se)},
           {"optimal_ratio", std::isfinite(r_opt) ? nlohmann::ordered_json(r_opt) : nlohmann::ordered_json(nullptr)},
           {"naive_diff", a.naive.empirical_v.value - b.naive.empirical_v.value},
           {"naive_combined_stderr", combined_se(a.naive.empirical_v.se, b.naive.empirical_v.se)},
           {"naive_ratio", std::isfinite(r_naive) ? nlohmann::ordered_json(r_naive) : nlohmann::ordered_json(nullptr)},
           {"pass", ok}});
    }
  }
  doc.json["reports"] = std::move(rows);
  doc.json["comparisons"] = std::move(comparisons);
  doc.json["pass"] = pass;
  doc.pass = pass;
  return doc;
}

std::string sweep(const Config& config) {
  const std::string axis = config.get("sweep.axis");
  std::vector<std::string> keys;
  if (axis == "k") keys = {"k"};
  else if (axis == "n") keys = {"n"};
  else if (axis == "pool_size") keys = {"pool_size"};
  else if (axis == "sd") keys = {"data1.sd", "data2.sd"};
  else fail(ErrorCode::config, "sweep.axis must be one of k, n, pool_size, sd (got '" + axis + "')");

  const auto values = config.get_list("sweep.values");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0)) fail(ErrorCode::config, "sweep.values must be positive");
    if (i > 0 && !(values[i] > values[i - 1])) fail(ErrorCode::config, "sweep.values must be strictly ascending");
    if (axis != "sd" && values[i] != std::floor(values[i])) fail(ErrorCode::config, "sweep.values must be integers for axis " + axis);
  }
  const std::size_t repeats = config.get_count("sweep.repeats");

  std::string out =
      "axis,value,rep,sampler,empirical_v,empirical_v_stderr,theoretical_v_hat,theoretical_v_hat_stderr,cs_bound,"
      "cs_bound_stderr,z_hat,z_hat_stderr,k,mse,mse_stderr,predicted_mse\n";
  for (double v : values) {
    Config c = config;
    const std::string text = axis == "sd" ? format_double(v) : std::to_string(static_cast<std::uint64_t>(v));
    for (const auto& key : keys) c.set(key, text, "sweep");
    const auto s = resolve_setup(c);
    const auto& rep = s.reps.front();
    const auto cell = run_variance_cell(s, rep);

    // Mean squared error of the k-sample estimator against the exact kernel.
    const RandomSource root(s.seed);
    const QEstimator qest = make_qest(s, rep);
    RandomSource sampler_src = root.substream("sampler/" + rep.id());
    const PsiSampler sampler = build_sampler(qest, s.strategy, s.pool_size, s.grid, sampler_src);
    RunningStats sq_err;
    for (std::size_t r = 0; r < repeats; ++r) {
      RandomSource rs = root.substream("sweep-mse", r);
      const auto x1 = s.d1.point(rs.below(s.d1.size()));
      const auto x2 = s.d2.point(rs.below(s.d2.size()));
      const auto est = is_kernel_estimate(rep, sampler, x1, x2, std::max<std::size_t>(s.k, 2), rs);
      const double e = est.mean - kernel_eval(s.kernel, x1, x2);
      sq_err.add(e * e);
    }
    const auto mse = sq_err.count() > 1 ? sq_err.summary() : SummaryStats{};
    const auto& row = cell.optimal;
    out += axis + "," + text + "," + row.rep + "," + row.sampler + "," + format_double(row.empirical_v.value) + "," +
           format_double(row.empirical_v.se) + "," + format_double(row.theoretical_v_hat.value) + "," +
           format_double(row.theoretical_v_hat.se) + "," + format_double(row.cs_bound.value) + "," +
           format_double(row.cs_bound.se) + "," + format_double(cell.z_hat.value) + "," + format_double(cell.z_hat.se) +
           "," + std::to_string(s.k) + "," + format_double(mse.mean) + "," + format_double(mse.standard_error) + "," +
           format_double(row.empirical_v.value / static_cast<double>(s.k)) + "\n";
  }
  return out;
}

std::string gen_data(const Config& config) {
  const RandomSource root(config.get_u64("seed"));
  RandomSource src = root.substream("data1");
  return dataset_to_csv(generate_dataset(data_spec(config, "data1"), src));
}

}  // namespace rfis
