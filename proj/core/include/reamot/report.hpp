#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "reamot/metrics.hpp"

namespace reamot {

// Everything needed to reproduce an output: configuration, input digests and
// the toolkit version. Embedded in every report the CLI writes.
struct RunManifest {
  std::string command;
  std::string toolkit_version = REAMOT_VERSION_STRING;
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<std::pair<std::string, std::string>> inputs;  // path -> digest

  void set(std::string key, std::string value);
  void add_input(const std::filesystem::path& path);  // file or directory tree
};

// 64-bit FNV-1a, hex encoded. Identifies inputs; not a security hash.
std::string digest(std::string_view bytes);
std::string digest_path(const std::filesystem::path& path);

std::string render_manifest_json(const RunManifest& manifest);

// Per-instruction rows followed by Easy/Medium/Hard/Overall blocks with
// RIDF1, RMOTA, RRcll, RPrcn in percent.
std::string render_text(const metrics::MetricsReport& report, const RunManifest& manifest,
                        const std::vector<std::string>& skipped = {});

// Machine-readable form with every count and the manifest.
std::string render_json(const metrics::MetricsReport& report, const RunManifest& manifest,
                        const std::vector<std::string>& skipped = {});

}  // namespace reamot
