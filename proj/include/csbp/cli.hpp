#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "csbp/mechanism.hpp"

namespace csbp::cli {

/// Fully serializable experiment description; round-trips losslessly
/// through its JSON form. Flag overrides are merged in by the entry point
/// before a command runs.
struct ExperimentConfig {
  nlohmann::json doc;

  static ExperimentConfig from_file(const std::string& path);
  static ExperimentConfig from_json(nlohmann::json j);
  nlohmann::json to_json() const { return doc; }

  std::uint64_t seed() const;
  int threads() const;
  std::string out_dir() const;

  /// FNV-1a over the canonical dump, excluding runtime-only fields
  /// (threads, out_dir), so outputs identify the experiment and stay
  /// identical regardless of parallelism or target directory.
  std::string hash() const;

  BranchingMechanism mechanism() const;
};

BranchingMechanism mechanism_from_json(const nlohmann::json& m);
nlohmann::json mechanism_to_json(const BranchingMechanism& m);

/// Exit codes: 0 success / all checks pass, 1 check failure, 2 usage or
/// configuration error (the thrower names the offending key).
int run_v_table(const ExperimentConfig& cfg, std::ostream& log);
int run_simulate_lineages(const ExperimentConfig& cfg, std::ostream& log);
int run_simulate_limit(const ExperimentConfig& cfg, std::ostream& log);
int run_density(const ExperimentConfig& cfg, std::ostream& log);
int run_verify(const ExperimentConfig& cfg, std::ostream& log);

}  // namespace csbp::cli
