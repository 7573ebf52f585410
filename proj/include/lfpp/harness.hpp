#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lfpp/config.hpp"

namespace lfpp {

inline constexpr int kManifestSchemaVersion = 1;
inline constexpr int kRecordsSchemaVersion = 1;
inline constexpr const char* kRecordsHeader = "kind,params,replicate,statistic,value,seed";
inline constexpr const char* kCodeVersion = "lfpp-lab 0.1.0";

// One row of records.csv. `params` is a flattened key=value list joined by
// ';'. Non-finite values are written as the tag "censored".
struct Record {
  std::string kind;
  std::string params;
  std::int64_t replicate = 0;
  std::string statistic;
  double value = 0.0;
  std::uint64_t seed = 0;
};

std::string format_record(const Record& r);
Record parse_record(const std::string& line);

// Work for one config: independent units (replicates, or a (scale,
// replicate) pair), each producing records deterministically, and a
// summary computed from the records alone.
struct ExperimentPlan {
  ExperimentKind kind{};
  std::size_t units = 0;
  std::function<std::vector<Record>(std::size_t unit)> run_unit;
  std::function<nlohmann::ordered_json(const std::vector<Record>&)> summarize;
  nlohmann::ordered_json resolved;  // parameters with defaults filled in
};

// Validates everything up front: PreconditionError for bad parameters,
// ResourceError when the profile caps are exceeded.
ExperimentPlan plan_experiment(const ExperimentConfig& cfg);

// Hash of the resolved configuration (kind, profile, seed, parameters).
std::string config_hash(const ExperimentConfig& cfg, const ExperimentPlan& plan);

struct RunOptions {
  int jobs = 0;
  std::optional<std::size_t> stop_after;  // testing: stop once this many units are done
  std::filesystem::path config_source;    // recorded for resume
  std::vector<std::string> overrides;
};

struct RunOutcome {
  std::filesystem::path dir;
  bool complete = false;
  std::size_t units_done = 0;
  std::size_t units_total = 0;
};

// Raised when a results directory does not match its configuration.
class MismatchError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

RunOutcome run_experiment(const ExperimentConfig& cfg, const RunOptions& opt);
RunOutcome resume_experiment(const std::filesystem::path& dir, const RunOptions& opt);

// Human-readable table from summary.json.
std::string report_experiment(const std::filesystem::path& dir);

}  // namespace lfpp
