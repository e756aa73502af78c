#pragma once

#include <iosfwd>
#include <string>

#include "json.hpp"

#include "config.hpp"

namespace fnlab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConditionFail = 4;

/// Everything a command produces before anything touches the disk.
struct RunArtifacts {
  nlohmann::ordered_json report;  // deterministic: no timings, paths or thread counts
  std::string fields_csv;
  bool conditions_passed = true;
};

/// Runs the command. Module errors propagate as fnlab::Error.
RunArtifacts execute(const RunConfig& config);

/// Runs the command and writes manifest.json, report.json and fields.csv into
/// `output_dir`. Errors are reported in report.json and on `log`; the return
/// value is the process exit status.
int run(const RunConfig& config, const std::string& output_dir, std::ostream& log);

/// Shortest round-trip decimal, with "nan", "+inf" and "-inf".
std::string csv_number(double v);

}  // namespace fnlab::cli
