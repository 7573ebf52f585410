#include "lfpp/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "lfpp/parallel.hpp"

namespace lfpp {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

const char* kPartial = ".partial";

void write_atomic(const fs::path& path, const std::string& data) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << data;
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path unit_path(const fs::path& partial, std::size_t u, const char* ext) {
  char name[40];
  std::snprintf(name, sizeof name, "unit-%08zu.%s", u, ext);
  return partial / name;
}

json raw_config(const ExperimentConfig& cfg) {
  json params = json::object();
  for (const auto& [k, v] : cfg.params) params[k] = v;
  return {{"kind", to_string(cfg.kind)},
          {"profile", to_string(cfg.profile)},
          {"seed", cfg.master_seed},
          {"params", params}};
}

ExperimentConfig config_from_raw(const json& j) {
  ExperimentConfig cfg;
  cfg.kind = parse_kind(j.at("kind").get<std::string>());
  cfg.profile = parse_profile(j.at("profile").get<std::string>());
  cfg.master_seed = j.at("seed").get<std::uint64_t>();
  for (const auto& [k, v] : j.at("params").items()) cfg.params[k] = v.get<std::string>();
  return cfg;
}

json build_manifest(const ExperimentConfig& cfg, const ExperimentPlan& plan,
                    const RunOptions& opt) {
  json cols = json::array();
  std::istringstream header(kRecordsHeader);
  for (std::string c; std::getline(header, c, ',');) cols.push_back(c);
  std::string source;
  if (!opt.config_source.empty()) source = fs::absolute(opt.config_source).string();
  return {{"schema_version", kManifestSchemaVersion},
          {"records_schema_version", kRecordsSchemaVersion},
          {"records_columns", cols},
          {"code_version", kCodeVersion},
          {"kind", to_string(cfg.kind)},
          {"profile", to_string(cfg.profile)},
          {"master_seed", cfg.master_seed},
          {"parameters", plan.resolved},
          {"config_hash", config_hash(cfg, plan)},
          {"config", raw_config(cfg)},
          {"config_source", source},
          {"overrides", opt.overrides},
          {"units", plan.units},
          {"status", "partial"}};
}

json load_json(const fs::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw std::runtime_error("corrupt " + path.string() + ": " + e.what());
  }
}

RunOutcome execute(const fs::path& dir, const ExperimentPlan& plan, json manifest,
                   const RunOptions& opt) {
  const auto started = std::chrono::steady_clock::now();
  const fs::path partial = dir / kPartial;
  std::vector<std::size_t> missing;
  for (std::size_t u = 0; u < plan.units; ++u)
    if (!fs::exists(unit_path(partial, u, "csv"))) missing.push_back(u);

  std::atomic<std::size_t> done{plan.units - missing.size()};
  const std::size_t limit = opt.stop_after.value_or(plan.units);
  parallel_for(missing.size(), opt.jobs, [&](std::size_t i) {
    if (done.load() >= limit) return;
    const std::size_t u = missing[i];
    const auto t0 = std::chrono::steady_clock::now();
    std::string body;
    for (const auto& r : plan.run_unit(u)) body += format_record(r) + "\n";
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
    write_atomic(unit_path(partial, u, "ms"), std::to_string(ms) + "\n");
    write_atomic(unit_path(partial, u, "csv"), body);
    ++done;
  });

  RunOutcome out{dir, false, done.load(), plan.units};
  if (out.units_done < plan.units) return out;

  // deterministic reduce in unit order
  std::string csv = std::string(kRecordsHeader) + "\n";
  std::string timing = "unit,wall_ms\n";
  std::vector<Record> records;
  long long total_ms = 0;
  for (std::size_t u = 0; u < plan.units; ++u) {
    const std::string body = read_file(unit_path(partial, u, "csv"));
    csv += body;
    std::istringstream lines(body);
    for (std::string line; std::getline(lines, line);)
      if (!line.empty()) records.push_back(parse_record(line));
    long long ms = 0;
    const fs::path mp = unit_path(partial, u, "ms");
    if (fs::exists(mp)) ms = std::stoll(read_file(mp));
    total_ms += ms;
    timing += std::to_string(u) + "," + std::to_string(ms) + "\n";
  }
  json summary = {{"schema_version", kManifestSchemaVersion}, {"kind", to_string(plan.kind)}};
  summary.update(plan.summarize(records));

  manifest["status"] = "complete";
  manifest["timing"] = {
      {"jobs", resolve_jobs(opt.jobs)},
      {"unit_wall_ms_total", total_ms},
      {"final_invocation_ms", std::chrono::duration_cast<std::chrono::milliseconds>(
                                  std::chrono::steady_clock::now() - started)
                                  .count()}};
  write_atomic(dir / "records.csv", csv);
  write_atomic(dir / "summary.json", summary.dump(2) + "\n");
  write_atomic(dir / "timing.csv", timing);
  write_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
  fs::remove_all(partial);
  out.complete = true;
  return out;
}

ExperimentConfig config_for_resume(const json& m, const fs::path& dir) {
  ExperimentConfig cfg;
  const std::string source = m.value("config_source", "");
  if (!source.empty() && fs::exists(source)) {
    cfg = load_config(source);
    for (const auto& o : m.at("overrides")) apply_override(cfg, o.get<std::string>());
  } else {
    cfg = config_from_raw(m.at("config"));
  }
  cfg.output_dir = dir;
  return cfg;
}

void check_manifest(const json& m, const ExperimentConfig& cfg, const ExperimentPlan& plan) {
  if (m.value("schema_version", 0) != kManifestSchemaVersion ||
      m.value("records_schema_version", 0) != kRecordsSchemaVersion)
    throw MismatchError("resume: manifest schema version is not supported");
  if (m.value("config_hash", "") != config_hash(cfg, plan))
    throw MismatchError("resume: configuration does not match the manifest (hash " +
                        config_hash(cfg, plan) + " vs " + m.value("config_hash", "") + ")");
  if (m.value("units", std::size_t{0}) != plan.units)
    throw MismatchError("resume: unit count does not match the manifest");
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string num(const json& j, const char* f = "%.4f") {
  if (j.is_number()) return fmt(f, j.get<double>());
  if (j.is_boolean()) return j.get<bool>() ? "yes" : "no";
  if (j.is_string()) return j.get<std::string>();
  return "-";
}

std::string slope_of(const json& fit) {
  if (fit.is_null()) return "-";
  return num(fit.at("slope")) + " +- " + num(fit.at("slope_stderr"));
}

}  // namespace

std::string format_record(const Record& r) {
  std::string v = std::isfinite(r.value) ? format_real(r.value) : "censored";
  return r.kind + "," + r.params + "," + std::to_string(r.replicate) + "," + r.statistic + "," +
         v + "," + std::to_string(r.seed);
}

Record parse_record(const std::string& line) {
  std::vector<std::string> f;
  std::istringstream in(line);
  for (std::string c; std::getline(in, c, ',');) f.push_back(c);
  if (f.size() != 6) throw std::runtime_error("records: malformed line '" + line + "'");
  Record r;
  r.kind = f[0];
  r.params = f[1];
  r.replicate = std::stoll(f[2]);
  r.statistic = f[3];
  r.value = f[4] == "censored" ? std::nan("") : std::stod(f[4]);
  r.seed = std::stoull(f[5]);
  return r;
}

std::string config_hash(const ExperimentConfig& cfg, const ExperimentPlan& plan) {
  const json j = {{"kind", to_string(cfg.kind)},
                  {"profile", to_string(cfg.profile)},
                  {"seed", cfg.master_seed},
                  {"parameters", plan.resolved}};
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunOutcome run_experiment(const ExperimentConfig& cfg, const RunOptions& opt) {
  const ExperimentPlan plan = plan_experiment(cfg);
  require(!cfg.output_dir.empty(), "config: output_dir is required");
  const fs::path dir = cfg.output_dir;
  fs::create_directories(dir);
  const fs::path partial = dir / kPartial;
  fs::remove_all(partial);
  fs::create_directories(partial);
  const json manifest = build_manifest(cfg, plan, opt);
  write_atomic(partial / "manifest.json", manifest.dump(2) + "\n");
  return execute(dir, plan, manifest, opt);
}

RunOutcome resume_experiment(const fs::path& dir, const RunOptions& opt) {
  const fs::path partial_manifest = dir / kPartial / "manifest.json";
  const fs::path final_manifest = dir / "manifest.json";
  if (fs::exists(partial_manifest)) {
    const json m = load_json(partial_manifest);
    const auto cfg = config_for_resume(m, dir);
    const auto plan = plan_experiment(cfg);
    check_manifest(m, cfg, plan);
    return execute(dir, plan, m, opt);
  }
  if (fs::exists(final_manifest)) {
    const json m = load_json(final_manifest);
    const auto cfg = config_for_resume(m, dir);
    const auto plan = plan_experiment(cfg);
    check_manifest(m, cfg, plan);
    return {dir, true, plan.units, plan.units};
  }
  throw PreconditionError("resume: no manifest in " + dir.string());
}

std::string report_experiment(const fs::path& dir) {
  const fs::path path = dir / "summary.json";
  require(fs::exists(path), "report: no summary.json in " + dir.string());
  const json s = load_json(path);
  const json& res = s.at("results");
  const std::string kind = s.at("kind").get<std::string>();
  std::ostringstream out;
  out << "kind: " << kind;
  if (fs::exists(dir / "manifest.json")) {
    const json m = load_json(dir / "manifest.json");
    out << "  profile: " << m.value("profile", "?") << "  seed: " << m.at("master_seed").dump();
  }
  out << "\n\n";
  char line[256];
  if (kind == "scaling") {
    out << "      xi      Q_hat    stderr\n";
    for (const auto& r : res.at("runs")) {
      std::snprintf(line, sizeof line, "%8.4f %10.4f %9.4f\n", r.at("xi").get<double>(),
                    r.at("q_hat").get<double>(), r.at("q_stderr").get<double>());
      out << line;
    }
  } else if (kind == "modulus") {
    out << "xi " << num(res.at("xi")) << "  pairs: " << num(res.at("sampling")) << "\n";
    out << "model            theta_hat    stderr   residual_ss\n";
    for (const char* m : {"log_power", "euclid_power", "log_power_min"}) {
      const auto& f = res.at(m);
      std::snprintf(line, sizeof line, "%-15s %10.4f %9.4f %13.6f\n", m,
                    f.at("theta_hat").get<double>(), f.at("theta_stderr").get<double>(),
                    f.at("fit").at("residual_ss").get<double>());
      out << line;
    }
    out << "selected model (smaller residuals, max fits): " << num(res.at("selected_model"))
        << "\n";
  } else if (kind == "covariance") {
    out << "pair        empirical     oracle       z\n";
    for (const auto& r : res.at("pairs")) {
      std::snprintf(line, sizeof line, "%2d-%-2d  %12.5f %10.5f %7.2f\n", r.at("point_a").get<int>(),
                    r.at("point_b").get<int>(), r.at("empirical").get<double>(),
                    r.at("oracle").get<double>(), r.at("z").get<double>());
      out << line;
    }
    const auto& bm = res.at("circle_average_process");
    if (bm.contains("fit"))
      out << "circle-average increment variance slope: " << slope_of(bm.at("fit")) << "\n";
  } else if (kind == "maxstats") {
    out << " n      mean     iqr   residual\n";
    for (std::size_t i = 0; i < res.at("n_list").size(); ++i) {
      std::snprintf(line, sizeof line, "%2d %9.4f %7.4f %10.4f\n", res.at("n_list")[i].get<int>(),
                    res.at("mean")[i].get<double>(), res.at("iqr")[i].get<double>(),
                    res.at("residual")[i].get<double>());
      out << line;
    }
    out << "c_hat " << num(res.at("c_hat")) << "  tail slope " << slope_of(res.at("tail_fit"))
        << "\n";
  } else if (kind == "bridge") {
    out << "     T   accepted   acceptance   slope\n";
    for (const auto& r : res.at("runs")) {
      std::snprintf(line, sizeof line, "%6.0f %10d %12.5f   ", r.at("T").get<double>(),
                    r.at("accepted").get<int>(), r.at("acceptance_rate").get<double>());
      out << line << slope_of(r.at("fit")) << "\n";
    }
  } else if (kind == "tail") {
    for (const auto& r : res.at("radii")) {
      out << "r " << num(r.at("r"), "%.5f") << "\n";
      for (const char* w : {"across", "around"}) {
        const auto& t = r.at(w);
        out << "  " << w << ": upper " << slope_of(t.at("upper_quadratic")) << "  lower "
            << slope_of(t.at("lower_quadratic")) << "  P(S=1) " << num(t.at("p_upper_at_1"))
            << "\n";
      }
    }
  } else if (kind == "mz") {
    out << "median " << num(res.at("median")) << "  q90 " << num(res.at("q90"))
        << "\ncorr(log M_z, radial) " << num(res.at("correlation")) << "  null band "
        << num(res.at("null_band")) << "  degenerate " << num(res.at("degenerate"))
        << "  control " << num(res.at("dependent_control")) << "\n";
  } else if (kind == "supercrit") {
    out << "xi " << num(res.at("xi")) << " (" << num(res.at("phase")) << ")\n n  median ratio\n";
    for (std::size_t i = 0; i < res.at("n_list").size(); ++i) {
      std::snprintf(line, sizeof line, "%2d %12.4f\n", res.at("n_list")[i].get<int>(),
                    res.at("median_ratio")[i].get<double>());
      out << line;
    }
  }
  const auto& checks = s.at("checks");
  if (!checks.empty()) {
    out << "\nchecks\n";
    for (const auto& [k, v] : checks.items()) out << "  " << k << ": " << v.get<std::string>() << "\n";
  }
  return out.str();
}

}  // namespace lfpp
