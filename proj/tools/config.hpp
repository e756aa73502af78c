#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "fnlab/chart_grid.hpp"
#include "fnlab/domain.hpp"
#include "fnlab/expression.hpp"
#include "fnlab/metric.hpp"
#include "fnlab/solver.hpp"

namespace fnlab::cli {

inline constexpr int kConfigVersion = 1;

const std::vector<std::string>& command_names();

struct ProblemConfig {
  std::optional<DomainSpec> domain;
  ChartKind chart = ChartKind::Cartesian;
  double spacing = 0.0;
  int angular_count = 0;
  MetricPreset metric;
  ChiPreset chi;
  std::string operator_name;
  int operator_k = 0;
  int operator_dimension = 0;  // 0 means the domain dimension
  std::optional<Expression> psi;
  std::optional<Expression> phi;
  std::optional<Expression> subsolution;  // empty means the built-in generator
  std::optional<Expression> exact;        // manufactured solution, for error reports
};

struct ScheduleConfig {
  std::vector<double> epsilons;         // explicit list, or empty for geometric
  std::optional<double> initial;        // geometric start; empty means the default margin rule
  int levels = 8;
  double step_tolerance = 1e-8;
  double min_epsilon = 0.0;
  double stagnation = 0.0;
  bool present = false;
};

struct LemmaConfig {
  Vec diagonal;
  Vec border;
  double epsilon = 0.0;
  std::optional<double> corner;  // empty means the threshold itself
};

struct DiagnoseConfig {
  int audit_samples = 64;
  double collar_radius = 0.3;
  int anchor = 0;  // index among boundary nodes
};

struct RunConfig {
  int config_version = kConfigVersion;
  std::string command;
  std::uint64_t seed = 1;
  std::string output_dir;
  ProblemConfig problem;
  SolverOptions solver;
  ScheduleConfig schedule;
  int check_samples = 10000;
  LemmaConfig lemma;
  DiagnoseConfig diagnose;
};

/// Parses and validates a config. Syntax errors raise PARSE_ERROR with line
/// and column; every semantic problem is collected and raised together as one
/// VALIDATION_ERROR whose message lists "path: problem" entries. CSV fields
/// are read here; a missing file raises IO_ERROR.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// The fully resolved config, defaults filled in; parse_config accepts it back.
nlohmann::ordered_json resolved_config(const RunConfig& c);

/// Reads a node table with header x,y[,z],value.
Expression read_csv_expression(const std::string& path);

}  // namespace fnlab::cli
