#include <CLI11.hpp>

#include <iostream>

#include "csbp/cli.hpp"
#include "csbp/kernels.hpp"

namespace {

// Flag overrides merged on top of the config file.
struct CommonFlags {
  std::string config_path;
  std::string mechanism;
  std::string out_dir;
  std::int64_t seed = -1;
  std::int64_t replicas = -1;
  int threads = -1;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "experiment config file (JSON)");
  cmd->add_option("--mechanism", f.mechanism, "named mechanism override (feller|neveu)");
  cmd->add_option("--seed", f.seed, "seed override");
  cmd->add_option("--replicas", f.replicas, "replica-count override for the command");
  cmd->add_option("--out-dir", f.out_dir, "output directory");
  cmd->add_option("--threads", f.threads, "worker threads (0 = auto)");
}

csbp::cli::ExperimentConfig build_config(const CommonFlags& f, const std::string& command) {
  nlohmann::json doc = nlohmann::json::object();
  if (!f.config_path.empty())
    doc = csbp::cli::ExperimentConfig::from_file(f.config_path).to_json();
  if (!f.mechanism.empty()) doc["mechanism"] = {{"named", f.mechanism}};
  if (!doc.contains("mechanism")) doc["mechanism"] = {{"named", "feller"}};
  if (f.seed >= 0) doc["seed"] = static_cast<std::uint64_t>(f.seed);
  if (!f.out_dir.empty()) doc["out_dir"] = f.out_dir;
  if (f.threads >= 0) doc["threads"] = f.threads;
  if (f.replicas >= 0) {
    if (!doc.contains(command)) doc[command] = nlohmann::json::object();
    doc[command]["replicas"] = f.replicas;
    if (command == "density") doc[command]["mc_paths"] = f.replicas;
  }
  return csbp::cli::ExperimentConfig::from_json(std::move(doc));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"subcritical branching-process flows: simulation and verification"};
  app.require_subcommand(1);

  CommonFlags f_vtable, f_lin, f_lim, f_den, f_ver;
  auto* c_vtable = app.add_subcommand("v-table", "tabulate the cumulant and limit exponents");
  add_common(c_vtable, f_vtable);
  auto* c_lin = app.add_subcommand("simulate-lineages", "backward ancestral-lineage trajectories");
  add_common(c_lin, f_lin);
  auto* c_lim = app.add_subcommand("simulate-limit",
                                   "limit subordinator path and ancestral partition");
  add_common(c_lim, f_lim);
  auto* c_den = app.add_subcommand("density", "density of the inverse limit process");
  add_common(c_den, f_den);
  auto* c_ver = app.add_subcommand("verify", "run the statistical verification suite");
  add_common(c_ver, f_ver);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (c_vtable->parsed())
      return csbp::cli::run_v_table(build_config(f_vtable, "v_table"), std::cout);
    if (c_lin->parsed())
      return csbp::cli::run_simulate_lineages(build_config(f_lin, "simulate_lineages"),
                                              std::cout);
    if (c_lim->parsed())
      return csbp::cli::run_simulate_limit(build_config(f_lim, "simulate_limit"), std::cout);
    if (c_den->parsed()) return csbp::cli::run_density(build_config(f_den, "density"), std::cout);
    if (c_ver->parsed()) return csbp::cli::run_verify(build_config(f_ver, "verify"), std::cout);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
