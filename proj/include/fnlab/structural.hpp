#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "fnlab/operator.hpp"

namespace fnlab {

struct CheckEntry {
  std::string name;
  bool applicable = true;
  bool passed = true;
  double margin = 0.0;  // worst observed value of the checked quantity
  int samples = 0;
  std::optional<Vec> witness_lambda;
  std::optional<Vec> witness_mu;
  std::string note;
};

struct ConditionReport {
  std::string operator_name;
  std::string cone_name;
  int dimension = 0;
  std::vector<CheckEntry> checks;

  bool all_passed() const;
  const CheckEntry* find(const std::string& name) const;
};

struct SampleBudget {
  int samples = 10000;
  std::uint64_t seed = 1;
};

/// Random interior point of the cone, |lambda| of order one to a few units.
Vec sample_cone_point(const ConeSpec& cone, std::mt19937_64& rng);

/// Samples the cone and tests ellipticity, concavity (midpoint and tangent
/// forms), the ray conditions (growth beyond any value, bounded below,
/// nonnegative asymptotic slope), the gradient pairings sum f_i(l) m_i >= 0,
/// sum f_i(l) l_i >= 0 and the strict pairing, the lower bound by the vertex
/// value, and finally whether the growth-type conditions agree with each
/// other as they must for elliptic concave f.
ConditionReport check_structural_conditions(const OperatorSpec& op, SampleBudget budget);

nlohmann::ordered_json to_json(const ConditionReport& report);

}  // namespace fnlab
