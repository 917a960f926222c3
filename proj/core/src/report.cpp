#include "reamot/report.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>

#include "json.hpp"
#include "reamot/error.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace reamot {
namespace {

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%6.2f", 100.0 * v);
  return buf;
}

std::string fixed(double v, int digits = 4) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

ordered_json scores_json(const metrics::AggregateScores& a) {
  return ordered_json{{"n", a.n},         {"RIDF1", a.ridf1}, {"RMOTA", a.rmota},
                      {"RRcll", a.rrcll}, {"RPrcn", a.rprcn}};
}

ordered_json manifest_json(const RunManifest& m) {
  ordered_json cfg = ordered_json::object();
  for (const auto& [k, v] : m.config) cfg[k] = v;
  ordered_json inputs = ordered_json::array();
  for (const auto& [p, d] : m.inputs) inputs.push_back({{"path", p}, {"digest", d}});
  return ordered_json{{"command", m.command},
                      {"toolkit_version", m.toolkit_version},
                      {"config", cfg},
                      {"inputs", inputs}};
}

}  // namespace

void RunManifest::set(std::string key, std::string value) {
  for (auto& [k, v] : config) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  config.emplace_back(std::move(key), std::move(value));
}

void RunManifest::add_input(const fs::path& path) {
  inputs.emplace_back(path.generic_string(), digest_path(path));
}

std::string digest(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

std::string digest_path(const fs::path& path) {
  if (fs::is_regular_file(path)) return digest(read_file(path));
  if (!fs::is_directory(path)) throw LoadError("cannot digest " + path.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(path)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::string acc;
  for (const auto& f : files) {
    acc += fs::relative(f, path).generic_string();
    acc += '\0';
    acc += digest(read_file(f));
    acc += '\n';
  }
  return digest(acc);
}

std::string render_manifest_json(const RunManifest& manifest) {
  return manifest_json(manifest).dump(2) + "\n";
}

std::string render_text(const metrics::MetricsReport& report, const RunManifest& manifest,
                        const std::vector<std::string>& skipped) {
  std::string out;
  out += "# reamot " + manifest.toolkit_version + " " + manifest.command + "\n";
  for (const auto& [k, v] : manifest.config) out += "# " + k + " = " + v + "\n";
  for (const auto& [p, d] : manifest.inputs) out += "# input " + p + " " + d + "\n";
  out += "# precision is 0 for instructions with no predictions\n";
  out += "# excluded (no ground truth): " + std::to_string(report.excluded) + "\n";
  for (const auto& s : skipped) out += "# skipped: " + s + "\n";
  out += "\n";

  char line[512];
  std::snprintf(line, sizeof line, "%-40s %-6s %7s %8s %8s %7s %7s %6s %6s %6s %5s %6s\n",
                "task", "level", "IDF1", "MOTA", "MOTA+", "Rcll", "Prcn", "TP", "FP",
                "FN", "IDSW", "GT");
  out += line;
  for (const auto& r : report.instructions) {
    const std::string level = r.level ? std::string(to_string(*r.level)) : "-";
    if (!r.evaluable()) {
      std::snprintf(line, sizeof line, "%-40s %-6s %s\n", r.task_id.c_str(), level.c_str(),
                    "(excluded: no ground truth)");
      out += line;
      continue;
    }
    std::snprintf(line, sizeof line,
                  "%-40s %-6s %7.4f %8.4f %8.4f %7.4f %7.4f %6lld %6lld %6lld %5lld %6lld\n",
                  r.task_id.c_str(), level.c_str(), r.idf1, r.mota_raw, r.mota_clamped,
                  r.recall, r.precision, static_cast<long long>(r.counts.tp),
                  static_cast<long long>(r.counts.fp), static_cast<long long>(r.counts.fn),
                  static_cast<long long>(r.counts.idsw), static_cast<long long>(r.counts.gt));
    out += line;
  }

  out += "\n";
  std::snprintf(line, sizeof line, "%-8s %5s %7s %7s %7s %7s\n", "group", "n", "RIDF1",
                "RMOTA", "RRcll", "RPrcn");
  out += line;
  auto block = [&](const std::string& name, const metrics::AggregateScores& a) {
    std::snprintf(line, sizeof line, "%-8s %5zu %s %s %s %s\n", name.c_str(), a.n,
                  pct(a.ridf1).c_str(), pct(a.rmota).c_str(), pct(a.rrcll).c_str(),
                  pct(a.rprcn).c_str());
    out += line;
  };
  for (auto level : {Level::Easy, Level::Medium, Level::Hard}) {
    const auto it = report.by_level.find(level);
    if (it != report.by_level.end()) block(std::string(to_string(level)), it->second);
  }
  block("overall", report.overall);
  return out;
}

std::string render_json(const metrics::MetricsReport& report, const RunManifest& manifest,
                        const std::vector<std::string>& skipped) {
  ordered_json j;
  j["manifest"] = manifest_json(manifest);
  j["tp_iou"] = report.tp_iou;
  j["precision_without_predictions"] = 0.0;
  j["excluded_no_ground_truth"] = report.excluded;
  j["skipped"] = skipped;
  ordered_json rows = ordered_json::array();
  for (const auto& r : report.instructions) {
    const auto& c = r.counts;
    ordered_json row{{"task_id", r.task_id},
                     {"level", r.level ? ordered_json(std::string(to_string(*r.level)))
                                       : ordered_json(nullptr)},
                     {"evaluable", r.evaluable()},
                     {"IDF1", r.idf1},
                     {"MOTA_raw", r.mota_raw},
                     {"MOTA_clamped", r.mota_clamped},
                     {"Rcll", r.recall},
                     {"Prcn", r.precision},
                     {"counts",
                      {{"TP", c.tp},
                       {"FP", c.fp},
                       {"FN", c.fn},
                       {"IDSW", c.idsw},
                       {"GT", c.gt},
                       {"PRED", c.pred},
                       {"IDTP", c.idtp},
                       {"IDFP", c.idfp},
                       {"IDFN", c.idfn}}}};
    rows.push_back(std::move(row));
  }
  j["instructions"] = std::move(rows);
  ordered_json levels = ordered_json::object();
  for (const auto& [level, a] : report.by_level) {
    levels[std::string(to_string(level))] = scores_json(a);
  }
  j["levels"] = std::move(levels);
  j["overall"] = scores_json(report.overall);
  return j.dump(2) + "\n";
}

}  // namespace reamot
