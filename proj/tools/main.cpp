#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rfis/rfis.h"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitVerdict = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

struct ConfigDeleter {
  void operator()(rfis_config* c) const { rfis_config_free(c); }
};
struct ReportDeleter {
  void operator()(rfis_report* r) const { rfis_report_free(r); }
};

int exit_code_for(rfis_status status) {
  if (status == RFIS_OK) return kExitPass;
  if (rfis_status_is_numerical(status)) return kExitNumerical;
  if (status == RFIS_E_INTERNAL) return kExitNumerical;
  return kExitUsage;
}

int report_failure(rfis_status status) {
  std::fprintf(stderr, "rfis: error [%s]: %s\n", rfis_status_name(status), rfis_last_error());
  return exit_code_for(status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random-feature kernel estimates with optimal importance sampling"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::string seed;
  std::vector<std::string> assignments;
  app.add_option("--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Root seed (unsigned 64-bit)");
  app.add_option("--out", out_path, "Write the output here instead of stdout");
  app.add_option("--set", assignments, "Override a config key (key=value, repeatable)")->allow_extra_args(false);

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"gen-data", "Generate data1 as CSV"},
      {"check-rep", "Check that each representation reproduces its kernel"},
      {"variance-report", "Empirical, optimal and bound variances with verdicts"},
      {"compare-reps", "Compare optimal-sampled variances across representations"},
      {"sweep", "Variance and error table over one config axis"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitPass : kExitUsage;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  rfis_config* raw_config = nullptr;
  if (const auto st = rfis_config_new(&raw_config); st != RFIS_OK) return report_failure(st);
  std::unique_ptr<rfis_config, ConfigDeleter> config(raw_config);

  if (!config_path.empty())
    if (const auto st = rfis_config_merge_file(config.get(), config_path.c_str()); st != RFIS_OK)
      return report_failure(st);
  for (const auto& a : assignments)
    if (const auto st = rfis_config_apply(config.get(), a.c_str()); st != RFIS_OK) return report_failure(st);
  if (!seed.empty())
    if (const auto st = rfis_config_set(config.get(), "seed", seed.c_str()); st != RFIS_OK) return report_failure(st);
  if (!out_path.empty())
    if (const auto st = rfis_config_set(config.get(), "out", out_path.c_str()); st != RFIS_OK)
      return report_failure(st);

  rfis_report* raw_report = nullptr;
  if (const auto st = rfis_run(config.get(), command.c_str(), &raw_report); st != RFIS_OK) return report_failure(st);
  std::unique_ptr<rfis_report, ReportDeleter> report(raw_report);

  const char* out = nullptr;
  rfis_config_get(config.get(), "out", &out);
  const std::string text = rfis_report_text(report.get());
  if (out && *out) {
    std::ofstream file(out, std::ios::binary | std::ios::trunc);
    file << text;
    if (!file) {
      std::fprintf(stderr, "rfis: error [io]: cannot write '%s'\n", out);
      return kExitUsage;
    }
  } else {
    std::fwrite(text.data(), 1, text.size(), stdout);
  }
  return rfis_report_passed(report.get()) ? kExitPass : kExitVerdict;
}
