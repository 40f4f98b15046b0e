#include <cstdlib>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "qpois/cli.hpp"

namespace qp::cli {

namespace {

void setup_logging() {
  auto logger = spdlog::get("qpois");
  if (!logger) logger = spdlog::stderr_color_mt("qpois");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("QPOIS_LOG")) {
    std::string v = env;
    if (v == "error")
      spdlog::set_level(spdlog::level::err);
    else if (v == "warn")
      spdlog::set_level(spdlog::level::warn);
    else if (v == "info")
      spdlog::set_level(spdlog::level::info);
    else if (v == "debug")
      spdlog::set_level(spdlog::level::debug);
    else
      spdlog::warn("ignoring QPOIS_LOG={}", v);
  }
}

int finish(const Report& r, const std::string& out) {
  write_report(r, out);
  int failed = 0;
  for (const auto& c : r.checks) {
    if (c.status != Status::Fail) continue;
    ++failed;
    std::cerr << "FAIL " << c.name << " residual=" << c.residual << " tol=" << c.tolerance;
    if (!c.reason.empty()) std::cerr << " (" << c.reason << ")";
    std::cerr << "\n";
  }
  int bad_rows = 0;
  if (r.rows.is_array())
    for (const auto& row : r.rows)
      if (row.value("status", "") == "SolverFailed") ++bad_rows;
  if (bad_rows) std::cerr << bad_rows << " row(s) flagged SolverFailed\n";
  spdlog::info("{} checks, {} failed", r.checks.size(), failed);
  return (failed || bad_rows) ? 1 : 0;
}

}  // namespace

int main_entry(int argc, char** argv) {
  setup_logging();
  CLI::App app{"qpois: numerical checks for quasi-Poisson and quasi-Hamiltonian structures"};
  app.require_subcommand(1);

  std::string config_path, out = "-", suite;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--seed", seed, "override the config seed")->each([&](const std::string&) { seed_given = true; });
    sub->add_option("--out", out, "report path ('-' for stdout)");
    sub->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  };
  CLI::App* verify = app.add_subcommand("verify", "run a verification suite");
  verify->add_option("suite", suite, "core, duality, dirac, moduli, all or empty")->required();
  add_common(verify);
  CLI::App* bracket = app.add_subcommand("bracket", "bracket table of trace words at solved points");
  add_common(bracket);
  CLI::App* sample = app.add_subcommand("sample", "solve and print representation samples");
  add_common(sample);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    RunConfig cfg = load_config(config_path);
    if (seed_given) {
      cfg.seed = seed;
      cfg.echo["seed"] = seed;
    }
    spdlog::info("config {} seed {} jobs {}", config_path, cfg.seed, jobs);
    if (verify->parsed()) return finish(run_suite(cfg, suite, jobs), out);
    if (bracket->parsed()) return finish(compute_brackets(cfg, jobs), out);
    return finish(sample_reps(cfg, jobs), out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace qp::cli
