#pragma once

#include "nvtel/config.hpp"

#include <map>
#include <string>

namespace nvtel {

// Everything one run produces, built in memory. The machine report is a pure
// function of the configuration (and binary version): identical config and
// seed give byte-identical artifacts.
struct RunArtifacts {
  std::string report_json;
  std::string summary_text;
  std::string resolved_config;
  std::map<std::string, std::string> csv_files;
};

RunArtifacts execute(const RunConfig& config);

// Write artifacts under config.out_dir (report.json, summary.txt,
// resolved.cfg and any CSV series).
void write_artifacts(const RunConfig& config, const RunArtifacts& artifacts);

// execute + write; the CLI entry point.
void run(const RunConfig& config);

}  // namespace nvtel
