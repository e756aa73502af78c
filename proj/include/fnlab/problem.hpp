#pragma once

#include <optional>
#include <vector>

#include "fnlab/chart_grid.hpp"
#include "fnlab/expression.hpp"
#include "fnlab/metric_field.hpp"
#include "fnlab/operator.hpp"

namespace fnlab {

/// A discretized Dirichlet problem f(lambda(Hess u + chi; g)) = psi, u = phi.
/// Node fields span all nodes; phi matters on boundary nodes only and the
/// subsolution agrees with phi there exactly.
struct ChartProblem {
  ChartGrid grid;
  MetricPreset metric;
  ChiPreset chi;
  MetricField field;
  std::vector<std::vector<Stencil>> hessian;  // covariant stencils per interior node
  OperatorSpec op;
  Vec psi;
  Vec phi;
  Vec subsolution;
  double subsolution_scale = 0.0;  // generator coefficient; 0 for supplied fields

  int unknowns() const { return grid.interior_count(); }
};

/// Assembles the problem. Without a supplied subsolution the built-in
/// generator phi + A w is used, where w vanishes on the boundary with a
/// constant positive Hessian (disk, or a box with one bounded axis), and A
/// doubles from 1 until the discrete subsolution is admissible with
/// f > max psi at every interior node. Throws VALIDATION_ERROR when no
/// generator exists for the domain or A exceeds 2^40. With
/// `build_subsolution` false and nothing supplied, the subsolution slot holds
/// phi unchecked; only the linear barrier problem may use such a problem.
ChartProblem make_problem(ChartGrid grid, const MetricPreset& metric, const ChiPreset& chi,
                          OperatorSpec op, const Expression& psi, const Expression& phi,
                          const std::optional<Expression>& subsolution = std::nullopt,
                          bool build_subsolution = true);

/// f(lambda(Hess v + chi)) - psi at every interior node for a node field v.
/// Throws CONE_VIOLATION naming the first inadmissible node.
Vec subsolution_margins(const ChartProblem& p, const Vec& v, const Vec& psi);

}  // namespace fnlab
