#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lfpp/error.hpp"

namespace lfpp {

enum class ExperimentKind { covariance, scaling, maxstats, bridge, tail, mz, modulus, supercrit };
enum class ResourceProfile { smoke, desk, large };

std::string to_string(ExperimentKind k);
std::string to_string(ResourceProfile p);
ExperimentKind parse_kind(std::string_view s);
ResourceProfile parse_profile(std::string_view s);

struct ProfileCaps {
  int max_cells = 0;
  long long max_replicates = 0;
};
ProfileCaps profile_caps(ResourceProfile p);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::covariance;
  ResourceProfile profile = ResourceProfile::desk;
  std::uint64_t master_seed = 1;
  std::filesystem::path output_dir;
  std::map<std::string, std::string> params;  // kind-specific, raw text
};

// Grammar, one entry per line:
//   key = value      value runs to end of line, surrounding quotes optional
//   # comment        also allowed after a value
// Lists are comma separated. Reserved keys: kind, profile, seed, output_dir.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

// `key=value`, same rules as a config line. Later overrides win.
void apply_override(ExperimentConfig& cfg, std::string_view assignment);

// Typed, defaulted access to the kind-specific map. Every key read is
// recorded; finish() rejects keys nobody asked for.
class Params {
 public:
  explicit Params(const std::map<std::string, std::string>& raw) : raw_(raw) {}

  double real(const std::string& key, double fallback);
  long long integer(const std::string& key, long long fallback);
  bool flag(const std::string& key, bool fallback);
  std::string text(const std::string& key, const std::string& fallback,
                   const std::vector<std::string>& allowed);
  std::vector<double> reals(const std::string& key, const std::vector<double>& fallback);
  std::vector<int> integers(const std::string& key, const std::vector<int>& fallback);

  void finish() const;
  // Every parameter actually used, defaults filled in.
  const nlohmann::ordered_json& resolved() const { return resolved_; }

 private:
  const std::string* find(const std::string& key);

  const std::map<std::string, std::string>& raw_;
  std::set<std::string> used_;
  nlohmann::ordered_json resolved_ = nlohmann::ordered_json::object();
};

// Shortest round-trip text for a double.
std::string format_real(double v);

}  // namespace lfpp
