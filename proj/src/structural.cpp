#include "fnlab/structural.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fnlab/json_util.hpp"

namespace fnlab {

bool ConditionReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const CheckEntry& c) { return !c.applicable || c.passed; });
}

const CheckEntry* ConditionReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

Vec sample_cone_point(const ConeSpec& cone, std::mt19937_64& rng) {
  const int n = cone.dimension();
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> scale(0.1, 3.0);
  std::uniform_real_distribution<double> lift(0.02, 2.0);
  const Vec ones = Vec::Ones(n);
  Vec w(n);
  for (int i = 0; i < n; ++i) w(i) = normal(rng);
  w -= (w.sum() / n) * ones;
  const double wn = w.norm();
  if (wn > 1e-12) w *= scale(rng) / wn;
  if (cone.is_whole_space()) return w + normal(rng) * ones;
  const double shift = cone.boundary_shift(w);
  return w + (shift + lift(rng) * (0.05 + w.norm())) * ones;
}

namespace {

constexpr double kTangentSlack = 1e-10;
constexpr int kRayDoublings = 40;

struct Tracker {
  CheckEntry entry;

  explicit Tracker(std::string name) {
    entry.name = std::move(name);
    entry.margin = std::numeric_limits<double>::infinity();
  }

  // Records a sample whose checked quantity is `value`; it passes when value >= floor.
  void observe(double value, double floor, const Vec& lambda, const Vec* mu = nullptr) {
    ++entry.samples;
    const bool worst = value < entry.margin;
    if (worst) entry.margin = value;
    if (value < floor) {
      if (entry.passed || worst) {
        entry.witness_lambda = lambda;
        if (mu) entry.witness_mu = *mu;
      }
      entry.passed = false;
    }
  }
};

// f(t * lambda) along t = 2^0 .. 2^kRayDoublings.
std::vector<double> ray_values(const OperatorSpec& op, const Vec& lambda) {
  std::vector<double> v;
  v.reserve(kRayDoublings + 1);
  double t = 1.0;
  for (int j = 0; j <= kRayDoublings; ++j, t *= 2.0) v.push_back(op.value(t * lambda));
  return v;
}

}  // namespace

ConditionReport check_structural_conditions(const OperatorSpec& op, SampleBudget budget) {
  ConditionReport report;
  report.operator_name = op.name();
  report.cone_name = op.cone().name();
  report.dimension = op.dimension();

  std::mt19937_64 rng(budget.seed);
  Tracker elliptic("ellipticity");
  Tracker midpoint("concavity_midpoint");
  Tracker tangent("concavity_tangent");
  Tracker growth("ray_growth_exceeds_values");
  Tracker bounded("ray_bounded_below");
  Tracker slope("ray_slope_nonnegative");
  Tracker pairing("gradient_pairing_nonnegative");
  Tracker self_pairing("gradient_self_pairing_nonnegative");
  Tracker strict_pairing("gradient_pairing_positive");
  Tracker vertex("lower_bound_by_vertex_value");

  const auto vertex_value = op.value_at_vertex();
  const double t_max = std::ldexp(1.0, kRayDoublings);

  for (int s = 0; s < budget.samples; ++s) {
    const Vec lambda = sample_cone_point(op.cone(), rng);
    const Vec mu = sample_cone_point(op.cone(), rng);
    const double fl = op.value(lambda);
    const double fm = op.value(mu);
    const Vec df = op.gradient(lambda);

    elliptic.observe(df.minCoeff(), std::numeric_limits<double>::min(), lambda);

    const Vec mid = 0.5 * (lambda + mu);
    const double mid_gap = op.value(mid) - 0.5 * (fl + fm);
    midpoint.observe(mid_gap, -kTangentSlack, lambda, &mu);

    const double tangent_gap = df.dot(mu - lambda) - (fm - fl);
    tangent.observe(tangent_gap, -kTangentSlack, lambda, &mu);

    // Concave along the ray, so a nondecreasing tail means the limit is at
    // least the last value; a decreasing tail means the limit is -inf.
    const auto ray = ray_values(op, lambda);
    const double tail = ray.back();
    const bool nondecreasing = tail >= ray[ray.size() - 2];
    growth.observe(nondecreasing ? tail - fm : -std::numeric_limits<double>::infinity(),
                   std::numeric_limits<double>::min(), lambda, &mu);
    bounded.observe(nondecreasing ? 0.0 : -1.0, 0.0, lambda);
    slope.observe(nondecreasing ? std::max(0.0, tail / t_max) : tail / t_max, 0.0, lambda);

    const double pair = df.dot(mu);
    pairing.observe(pair, 0.0, lambda, &mu);
    self_pairing.observe(df.dot(lambda), 0.0, lambda);
    if (df.sum() > 0.0) {
      strict_pairing.observe(pair, std::numeric_limits<double>::min(), lambda, &mu);
    }

    if (vertex_value) vertex.observe(fl - *vertex_value, -kTangentSlack, lambda);
  }

  if (!vertex_value) {
    vertex.entry.applicable = false;
    vertex.entry.note = "operator does not extend continuously to the vertex";
    vertex.entry.margin = 0.0;
  }
  if (strict_pairing.entry.samples == 0) {
    strict_pairing.entry.applicable = false;
    strict_pairing.entry.note = "sum of f_i never positive on the sample";
    strict_pairing.entry.margin = 0.0;
  }

  for (Tracker* t : {&elliptic, &midpoint, &tangent, &growth, &bounded, &slope, &pairing,
                     &self_pairing, &strict_pairing, &vertex}) {
    report.checks.push_back(t->entry);
  }

  // For elliptic concave f the growth-type conditions are all equivalent.
  CheckEntry equivalence;
  equivalence.name = "growth_conditions_equivalent";
  equivalence.samples = budget.samples;
  const bool premises = elliptic.entry.passed && midpoint.entry.passed && tangent.entry.passed;
  if (!premises) {
    equivalence.applicable = false;
    equivalence.note = "ellipticity or concavity failed; equivalence not implied";
  } else {
    std::vector<const CheckEntry*> group = {&growth.entry, &bounded.entry, &slope.entry,
                                            &pairing.entry, &self_pairing.entry};
    if (strict_pairing.entry.applicable) group.push_back(&strict_pairing.entry);
    const bool first = group.front()->passed;
    for (const auto* c : group) {
      if (c->passed != first) {
        equivalence.passed = false;
        equivalence.note += (equivalence.note.empty() ? "" : "; ") + c->name +
                            (c->passed ? " holds" : " fails");
        if (!c->passed && c->witness_lambda) {
          equivalence.witness_lambda = c->witness_lambda;
          equivalence.witness_mu = c->witness_mu;
        }
      }
    }
    equivalence.margin = equivalence.passed ? 1.0 : 0.0;
  }
  report.checks.push_back(equivalence);
  return report;
}

nlohmann::ordered_json to_json(const ConditionReport& report) {
  nlohmann::ordered_json j;
  j["operator"] = report.operator_name;
  j["cone"] = report.cone_name;
  j["dimension"] = report.dimension;
  j["all_passed"] = report.all_passed();
  auto checks = nlohmann::ordered_json::array();
  for (const auto& c : report.checks) {
    nlohmann::ordered_json e;
    e["name"] = c.name;
    e["status"] = !c.applicable ? "not_applicable" : (c.passed ? "pass" : "fail");
    e["margin"] = json_number(c.margin);
    e["samples"] = c.samples;
    if (c.witness_lambda) e["witness_lambda"] = json_vector(*c.witness_lambda);
    if (c.witness_mu) e["witness_mu"] = json_vector(*c.witness_mu);
    if (!c.note.empty()) e["note"] = c.note;
    checks.push_back(e);
  }
  j["checks"] = checks;
  return j;
}

}  // namespace fnlab
