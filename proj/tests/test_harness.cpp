#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "rfis/harness.hpp"

using namespace rfis;

namespace {

Config quick(std::initializer_list<std::pair<const char*, const char*>> overrides) {
  Config c;
  c.set("n", "400");
  c.set("n_pairs", "20");
  c.set("n_omega", "1000");
  c.set("pool_size", "10000");
  c.set("k", "2000");
  c.set("grid.step", "0.02");
  c.set("grid.phase_cells", "180");
  for (const auto& [k, v] : overrides) c.set(k, v);
  return c;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("config parsing and diagnostics") {
    Config c;
    c.merge_text("# comment\nkernel = exponential\n\n  n = 50  # trailing\n", "inline.cfg");
    CHECK(c.get("kernel") == "exponential");
    CHECK(c.get_count("n") == 50);
    try {
      c.merge_text("n = 5\nbogus = 1\n", "bad.cfg");
      FAIL("expected a config error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::config);
      const std::string msg = e.what();
      CHECK(msg.find("bad.cfg:2") != std::string::npos);
      CHECK(msg.find("bogus") != std::string::npos);
    }
    CHECK_THROWS_AS(c.merge_text("just words\n", "x"), Error);
    c.apply_assignment("seed=17");
    CHECK(c.get_u64("seed") == 17);
    CHECK_THROWS_AS(c.apply_assignment("seed"), Error);
    c.set("n", "0");
    CHECK_THROWS_AS(c.get_count("n"), Error);
    c.set("scale", "abc");
    try {
      c.get_double("scale");
      FAIL("expected a config error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("scale") != std::string::npos);
    }
    CHECK(c.get_list("sweep.values") == std::vector<double>{10, 100, 1000});
    CHECK_THROWS_AS(c.merge_file("/nonexistent/file.cfg"), Error);
  }

  TEST_CASE("config rejects mismatched kernels and incompatible reps") {
    CHECK_THROWS_AS(resolve_setup(quick({{"reps", "trig:gaussian,positive_exp:exponential"}})), Error);
    CHECK_THROWS_AS(resolve_setup(quick({{"kernel", "exponential"}, {"reps", "trig"}})), Error);
    const auto s = resolve_setup(quick({{"kernel", "exponential"}, {"reps", "positive_exp:exponential"}}));
    CHECK(s.reps.size() == 1);
    CHECK(s.reps[0].id() == "positive_exp/exponential");
  }

  TEST_CASE("gen_data examples") {
    Config c;
    c.set("data1.kind", "point_mass");
    c.set("d", "2");
    c.set("n", "5");
    CHECK(gen_data(c) == "x1,x2\n0,0\n0,0\n0,0\n0,0\n0,0\n");

    Config g;
    g.set("n", "10000");
    g.set("data1.clip", "0");
    const Dataset d = parse_dataset_csv(gen_data(g), "blob");
    CHECK(d.size() == 10000);
    double m = 0.0;
    for (double v : d.values()) m += v;
    CHECK(std::abs(m / 10000) < 0.03);
    CHECK(gen_data(g) == gen_data(g));
    g.set("seed", "2");
    CHECK(gen_data(g) != gen_data(Config{}));
  }

  TEST_CASE("gen_data kinds") {
    Config c;
    c.set("data1.kind", "uniform_cube");
    c.set("data1.half_width", "0.5");
    c.set("d", "3");
    c.set("n", "200");
    const Dataset d = parse_dataset_csv(gen_data(c), "cube");
    for (double v : d.values()) CHECK(std::abs(v) <= 0.5);
    c.set("data1.kind", "gaussian_blob");
    c.set("data1.mean", "1,2");
    CHECK_THROWS_AS(gen_data(c), Error);
    c.set("data1.mean", "1,2,3");
    c.set("data1.clip", "1");
    const Dataset b = parse_dataset_csv(gen_data(c), "blob");
    for (std::size_t i = 0; i < b.size(); ++i) {
      const auto p = b.point(i);
      CHECK(std::hypot(p[0] - 1, p[1] - 2, p[2] - 3) <= 1.0);
    }
    CHECK_THROWS_AS(parse_data_kind("spiral"), Error);
  }

  TEST_CASE("csv round trip at full precision") {
    RandomSource src(3);
    std::vector<double> v(300);
    for (auto& x : v) x = src.normal() * std::pow(10.0, src.below(20) - 10.0);
    const Dataset d(3, v);
    const auto path = std::filesystem::temp_directory_path() / "rfis_roundtrip.csv";
    write_dataset_csv(path.string(), d);
    CHECK(read_dataset_csv(path.string()) == d);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(write_dataset_csv("/nonexistent/dir/x.csv", d), Error);
    CHECK_THROWS_AS(parse_dataset_csv("a,b\n1,2\n", "hdr"), Error);
    CHECK_THROWS_AS(parse_dataset_csv("x1,x2\n1\n", "ragged"), Error);
    CHECK_THROWS_AS(parse_dataset_csv("x1\nfoo\n", "num"), Error);
  }

  TEST_CASE("check_rep passes for each representation") {
    const auto doc = check_rep(quick({{"reps", "trig,positive_exp"}}));
    CHECK(doc.pass);
    CHECK(doc.json["schema"] == kReportSchema);
    CHECK(doc.json["checks"].size() == 2);

    Config ec = quick({{"kernel", "exponential"}, {"reps", "positive_exp"}, {"data1.kind", "uniform_cube"}});
    ec.set("d", "2");
    ec.set("data1.half_width", "0.7");
    CHECK(check_rep(ec).pass);
  }

  TEST_CASE("check_rep fails loudly beyond the positive_exp norm bound") {
    Config c = quick({{"reps", "positive_exp"}, {"data1.kind", "point_mass"}, {"data1.point", "3.5"}});
    try {
      check_rep(c);
      FAIL("expected overflow");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::overflow);
      CHECK(e.is_numerical());
    }
  }

  TEST_CASE("variance_report schema and verdicts") {
    const auto doc = variance_report(quick({}));
    const auto& j = doc.json;
    CHECK(j["schema"] == "rfis-report/1");
    CHECK(j["seed"] == 1);
    CHECK(j["config"]["n"] == "400");
    REQUIRE(j["reports"].size() == 4);
    for (const auto& r : j["reports"]) {
      for (const char* key : {"rep", "sampler", "empirical_v", "empirical_v_stderr", "theoretical_v_hat",
                              "theoretical_v_hat_stderr", "cs_bound", "cs_bound_stderr", "verdicts"})
        CHECK(r.contains(key));
      CHECK(r["verdicts"].contains("dominance_ok"));
      CHECK(r["verdicts"].contains("bound_ok"));
      CHECK(r["verdicts"].contains("equality_ok"));
    }
    // Verdicts are recomputable from the numbers in the document.
    for (const auto& r : j["reports"]) {
      if (r["sampler"] == "naive") continue;
      const double v = r["theoretical_v_hat"], vs = r["theoretical_v_hat_stderr"];
      const double b = r["cs_bound"], bs = r["cs_bound_stderr"];
      CHECK(r["verdicts"]["bound_ok"] == (v <= b + 4 * std::hypot(vs, bs) + 1e-12));
      CHECK(r["verdicts"]["equality_ok"] == (std::abs(v - b) <= 4 * std::hypot(vs, bs) + 1e-12));
    }
    CHECK(doc.pass == j["pass"].get<bool>());
  }

  TEST_CASE("variance_report is byte-reproducible") {
    const auto a = variance_report(quick({{"reps", "trig"}}));
    const auto b = variance_report(quick({{"reps", "trig"}}));
    CHECK(a.dump() == b.dump());
    const auto c = variance_report(quick({{"reps", "trig"}, {"seed", "2"}}));
    CHECK(a.dump() != c.dump());
  }

  TEST_CASE("point-mass variance report is all zeros") {
    const auto doc = variance_report(quick({{"data1.kind", "point_mass"}}));
    for (const auto& r : doc.json["reports"]) {
      if (r["sampler"] == "naive" && r["rep"] == "trig/gaussian") {
        CHECK(std::abs(r["empirical_v"].get<double>() - 0.5) < 0.05);
        continue;
      }
      CHECK(std::abs(r["empirical_v"].get<double>()) < 1e-9);
      CHECK(std::abs(r["theoretical_v_hat"].get<double>()) < 1e-9);
      CHECK(std::abs(r["cs_bound"].get<double>()) < 1e-12);
    }
    CHECK(doc.pass);
  }

  TEST_CASE("variance_report with distinct marginals omits equality") {
    const auto doc = variance_report(quick({{"data2.kind", "uniform_cube"}, {"data2.half_width", "1"}}));
    CHECK(doc.json["same_marginals"] == false);
    for (const auto& r : doc.json["reports"]) CHECK(r["verdicts"]["equality_ok"].is_null());
  }

  TEST_CASE("compare_reps examples") {
    const auto doc = compare_reps(quick({}));
    CHECK(doc.pass);
    REQUIRE(doc.json["comparisons"].size() == 1);
    CHECK(compare_reps(quick({{"reps", "trig,trig"}})).pass);

    const auto pm = compare_reps(quick({{"data1.kind", "point_mass"}}));
    CHECK(pm.pass);
    const auto& cmp = pm.json["comparisons"][0];
    CHECK((cmp["naive_ratio"].is_null() || cmp["naive_ratio"].get<double>() > 4.0));
    CHECK(std::abs(cmp["naive_diff"].get<double>()) > 0.4);

    CHECK_THROWS_AS(compare_reps(quick({{"reps", "trig"}})), Error);
    CHECK_THROWS_AS(compare_reps(quick({{"data2.kind", "point_mass"}})), Error);
  }

  TEST_CASE("sweep over k") {
    Config c = quick({{"reps", "trig"}, {"sweep.values", "10,100,1000"}, {"sweep.repeats", "100"}});
    const auto rows = lines(sweep(c));
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].rfind("axis,value,rep,sampler,empirical_v", 0) == 0);
    std::vector<double> mse;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      std::vector<std::string> cells;
      std::stringstream ss(rows[i]);
      for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
      mse.push_back(std::stod(cells[13]));
    }
    CHECK(mse[1] <= mse[0]);
    CHECK(mse[2] <= mse[1]);
  }

  TEST_CASE("single-value sweep matches variance_report") {
    Config c = quick({{"reps", "trig"}, {"sweep.axis", "k"}, {"sweep.values", "2000"}, {"sweep.repeats", "10"}});
    const auto rows = lines(sweep(c));
    REQUIRE(rows.size() == 2);
    const auto doc = variance_report(c);
    const auto& r = doc.json["reports"][0];
    char buf[64];
    std::snprintf(buf, sizeof buf, ",%.17g,", r["empirical_v"].get<double>());
    CHECK(rows[1].find(buf) != std::string::npos);
    std::snprintf(buf, sizeof buf, ",%.17g,", r["theoretical_v_hat"].get<double>());
    CHECK(rows[1].find(buf) != std::string::npos);
  }

  TEST_CASE("sweep validation") {
    CHECK_THROWS_AS(sweep(quick({{"sweep.values", "100,10"}})), Error);
    CHECK_THROWS_AS(sweep(quick({{"sweep.values", "-1"}})), Error);
    CHECK_THROWS_AS(sweep(quick({{"sweep.axis", "seed"}})), Error);
  }
}
