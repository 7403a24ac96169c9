// equiconv: run a JSON experiment and write CSV reports.
//
//   equiconv --config exp.json [--mode NAME] [--out DIR] [--seed N] [--m-list 16,32,64] [--strict]
//
// Exit status: 0 when every enabled check passes, 1 when a check fails
// (or a warning is raised under --strict), 2 on configuration or runtime errors.

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "equiconv/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Equiconvergence lab for Sturm-Liouville operators with distributional potentials"};
  std::string config_path, mode, out_dir, m_list;
  std::uint64_t seed = 0;
  bool strict = false;
  app.add_option("--config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  app.add_option("--mode", mode, "override the config mode")
      ->check(CLI::IsMember({"spectrum", "expand", "equiconv", "asymptotics", "operators", "sweep"}));
  app.add_option("--out", out_dir, "output directory");
  auto* seed_opt = app.add_option("--seed", seed, "random seed");
  app.add_option("--m-list", m_list, "comma-separated partial-sum orders");
  app.add_flag("--strict", strict, "treat warnings as failures");
  CLI11_PARSE(app, argc, argv);

  try {
    auto cfg = equiconv::load_config(config_path);
    if (!mode.empty()) cfg.mode = mode;
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (*seed_opt) cfg.seed = seed;
    if (!m_list.empty()) cfg.m_list = equiconv::parse_int_list(m_list);
    cfg.strict = strict;

    const auto report = equiconv::run(cfg);
    for (const auto& c : report.checks)
      std::printf("[%s] %s: %s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
    for (const auto& w : report.warnings) std::printf("[WARN] %s\n", w.c_str());
    for (const auto& f : report.files) std::printf("wrote %s\n", f.string().c_str());
    return equiconv::exit_code(report, cfg.strict);
  } catch (const equiconv::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
