#include "lfpp/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace lfpp {

namespace {

std::string trim(std::string_view s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string_view::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return std::string(s.substr(a, b - a + 1));
}

std::string unquote(std::string s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

bool valid_key(const std::string& k) {
  if (k.empty() || !(std::islower(static_cast<unsigned char>(k[0])) || k[0] == '_')) return false;
  for (char c : k)
    if (!(std::islower(static_cast<unsigned char>(c)) || std::isdigit(static_cast<unsigned char>(c)) ||
          c == '_'))
      return false;
  return true;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  require(ec == std::errc() && p == v.data() + v.size(),
          "config: " + key + " must be a non-negative 64-bit integer, got '" + v + "'");
  return out;
}

double parse_real(const std::string& key, const std::string& v) {
  double out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  require(ec == std::errc() && p == v.data() + v.size() && std::isfinite(out),
          "config: " + key + " must be a finite number, got '" + v + "'");
  return out;
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(v);
  while (std::getline(in, cur, ',')) out.push_back(trim(cur));
  return out;
}

void assign(ExperimentConfig& cfg, const std::string& key, const std::string& value,
            std::set<std::string>* seen) {
  require(valid_key(key), "config: bad key '" + key + "'");
  if (seen) {
    require(!seen->count(key), "config: duplicate key '" + key + "'");
    seen->insert(key);
  }
  if (key == "kind") {
    cfg.kind = parse_kind(value);
  } else if (key == "profile") {
    cfg.profile = parse_profile(value);
  } else if (key == "seed") {
    cfg.master_seed = parse_u64(key, value);
  } else if (key == "output_dir") {
    require(!value.empty(), "config: output_dir must not be empty");
    cfg.output_dir = value;
  } else {
    cfg.params[key] = value;
  }
}

void parse_line(std::string_view raw, ExperimentConfig& cfg, std::set<std::string>* seen,
                int line) {
  std::string s(raw);
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) {
      s.resize(i);
      break;
    }
  }
  s = trim(s);
  if (s.empty()) return;
  const auto eq = s.find('=');
  const std::string where = line > 0 ? " (line " + std::to_string(line) + ")" : "";
  require(eq != std::string::npos, "config: expected key = value" + where);
  assign(cfg, trim(s.substr(0, eq)), unquote(trim(s.substr(eq + 1))), seen);
}

}  // namespace

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::covariance: return "covariance";
    case ExperimentKind::scaling: return "scaling";
    case ExperimentKind::maxstats: return "maxstats";
    case ExperimentKind::bridge: return "bridge";
    case ExperimentKind::tail: return "tail";
    case ExperimentKind::mz: return "mz";
    case ExperimentKind::modulus: return "modulus";
    case ExperimentKind::supercrit: return "supercrit";
  }
  return "?";
}

std::string to_string(ResourceProfile p) {
  switch (p) {
    case ResourceProfile::smoke: return "smoke";
    case ResourceProfile::desk: return "desk";
    case ResourceProfile::large: return "large";
  }
  return "?";
}

ExperimentKind parse_kind(std::string_view s) {
  for (auto k : {ExperimentKind::covariance, ExperimentKind::scaling, ExperimentKind::maxstats,
                 ExperimentKind::bridge, ExperimentKind::tail, ExperimentKind::mz,
                 ExperimentKind::modulus, ExperimentKind::supercrit})
    if (to_string(k) == s) return k;
  throw PreconditionError("config: unknown kind '" + std::string(s) + "'");
}

ResourceProfile parse_profile(std::string_view s) {
  for (auto p : {ResourceProfile::smoke, ResourceProfile::desk, ResourceProfile::large})
    if (to_string(p) == s) return p;
  throw PreconditionError("config: unknown profile '" + std::string(s) + "'");
}

ProfileCaps profile_caps(ResourceProfile p) {
  switch (p) {
    case ResourceProfile::smoke: return {128, 5000};
    case ResourceProfile::desk: return {1024, 200000};
    case ResourceProfile::large: return {4096, 2000000};
  }
  return {};
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig cfg;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  int no = 0;
  while (std::getline(in, line)) parse_line(line, cfg, &seen, ++no);
  require(seen.count("kind"), "config: missing kind");
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "config: cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void apply_override(ExperimentConfig& cfg, std::string_view assignment) {
  require(assignment.find('=') != std::string_view::npos,
          "config: override must look like key=value");
  parse_line(assignment, cfg, nullptr, 0);
}

std::string format_real(double v) {
  char buf[32];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

const std::string* Params::find(const std::string& key) {
  used_.insert(key);
  const auto it = raw_.find(key);
  return it == raw_.end() ? nullptr : &it->second;
}

double Params::real(const std::string& key, double fallback) {
  const auto* v = find(key);
  const double out = v ? parse_real(key, *v) : fallback;
  resolved_[key] = out;
  return out;
}

long long Params::integer(const std::string& key, long long fallback) {
  const auto* v = find(key);
  long long out = fallback;
  if (v) {
    const auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    require(ec == std::errc() && p == v->data() + v->size(),
            "config: " + key + " must be an integer, got '" + *v + "'");
  }
  resolved_[key] = out;
  return out;
}

bool Params::flag(const std::string& key, bool fallback) {
  const auto* v = find(key);
  bool out = fallback;
  if (v) {
    require(*v == "true" || *v == "false", "config: " + key + " must be true or false");
    out = *v == "true";
  }
  resolved_[key] = out;
  return out;
}

std::string Params::text(const std::string& key, const std::string& fallback,
                         const std::vector<std::string>& allowed) {
  const auto* v = find(key);
  const std::string out = v ? *v : fallback;
  bool ok = false;
  for (const auto& a : allowed) ok = ok || a == out;
  require(ok, "config: " + key + " has unsupported value '" + out + "'");
  resolved_[key] = out;
  return out;
}

std::vector<double> Params::reals(const std::string& key, const std::vector<double>& fallback) {
  const auto* v = find(key);
  std::vector<double> out = fallback;
  if (v) {
    out.clear();
    for (const auto& item : split_list(*v)) out.push_back(parse_real(key, item));
  }
  resolved_[key] = out;
  return out;
}

std::vector<int> Params::integers(const std::string& key, const std::vector<int>& fallback) {
  const auto* v = find(key);
  std::vector<int> out = fallback;
  if (v) {
    out.clear();
    for (const auto& item : split_list(*v)) {
      int x = 0;
      const auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), x);
      require(ec == std::errc() && p == item.data() + item.size(),
              "config: " + key + " must be a list of integers");
      out.push_back(x);
    }
  }
  resolved_[key] = out;
  return out;
}

void Params::finish() const {
  for (const auto& [k, v] : raw_)
    require(used_.count(k), "config: unknown parameter '" + k + "' for this kind");
}

}  // namespace lfpp
