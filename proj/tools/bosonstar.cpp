// Command-line driver: run, validate and inspect experiments.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bosonstar.hpp"

namespace {

using namespace bosonstar;

void print_report(const FitReport& r) {
  std::printf("  [%s] %-40s fitted=%-13.6g predicted=%-13.6g", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.fitted,
              r.predicted);
  if (std::isfinite(r.tolerance)) std::printf(" tol=%-9.3g", r.tolerance);
  if (std::isfinite(r.window_lo)) std::printf(" window=[%g, %g]", r.window_lo, r.window_hi);
  std::printf("\n");
  if (!r.note.empty()) std::printf("         %s\n", r.note.c_str());
}

int cmd_run(const std::string& path, const std::string& out, int threads, long long seed) {
  auto cfg = load_config(path);
  if (threads > 0) cfg.threads = threads;
  if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
  const std::string dir = out.empty() ? cfg.output_dir : out;
  const auto res = run_experiment(cfg);
  write_outputs(res, dir);
  std::printf("%s: %s\n", res.experiment.c_str(), res.passed() ? "PASS" : "FAIL");
  for (const auto& r : res.reports) print_report(r);
  std::printf("outputs written to %s\n", dir.c_str());
  return res.passed() ? 0 : 2;
}

int cmd_validate(const std::string& path) {
  const auto cfg = load_config(path);
  validate(cfg);
  std::printf("%s: valid %s configuration\n", path.c_str(), cfg.name.c_str());
  return 0;
}

int cmd_report(const std::string& dir) {
  const auto file = std::filesystem::path(dir) / "report.json";
  std::ifstream in(file);
  if (!in) throw InvalidArgument("no report.json in " + dir);
  const auto j = json::parse(in);
  std::printf("%s: %s\n", j.value("experiment", "?").c_str(), j.value("pass", false) ? "PASS" : "FAIL");
  for (const auto& r : j.at("reports")) {
    print_report(r.get<FitReport>());
    std::printf("         %s\n", r.value("reference", "").c_str());
  }
  return j.value("pass", false) ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pseudo-relativistic Hartree simulator and experiment runner"};
  app.require_subcommand(1);

  std::string config, out, dir;
  int threads = 0;
  long long seed = -1;
  auto* run = app.add_subcommand("run", "Run the experiment described by a JSON config");
  run->add_option("config", config, "Config file")->required();
  run->add_option("--out", out, "Output directory (default: output_dir from the config)");
  run->add_option("--threads", threads, "Worker threads for parameter sweeps");
  run->add_option("--seed", seed, "Seed for randomized choices");

  auto* val = app.add_subcommand("validate", "Check a config without running it");
  val->add_option("config", config, "Config file")->required();

  auto* rep = app.add_subcommand("report", "Pretty-print the fit reports in an output directory");
  rep->add_option("dir", dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (*run) return cmd_run(config, out, threads, seed);
    if (*val) return cmd_validate(config);
    return cmd_report(dir);
  } catch (const ConfigInvalid& e) {
    std::cerr << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (*run || *val) std::cerr << '\n' << app.help();
    return 1;
  }
}
