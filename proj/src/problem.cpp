#include "fnlab/problem.hpp"

#include <cmath>
#include <functional>

#include "fnlab/eigen_toolkit.hpp"
#include "fnlab/error.hpp"

namespace fnlab {

namespace {

// A function vanishing on the boundary with Hessian I (disk) or e_a e_a^T
// (box bounded along the single axis a). Empty when the preset has none.
std::optional<std::function<double(const Vec&)>> boundary_quadratic(const DomainSpec& d) {
  if (d.kind() == DomainKind::Disk) {
    const Vec c = d.center();
    const double r2 = d.radius() * d.radius();
    return [c, r2](const Vec& x) { return 0.5 * ((x - c).squaredNorm() - r2); };
  }
  if (d.kind() == DomainKind::Box) {
    int axis = -1;
    for (int i = 0; i < d.dimension(); ++i) {
      if (d.is_periodic(i)) continue;
      if (axis >= 0) return std::nullopt;
      axis = i;
    }
    if (axis < 0) return std::nullopt;
    const double lo = d.lower()(axis);
    const double hi = d.upper()(axis);
    return [axis, lo, hi](const Vec& x) { return 0.5 * (x(axis) - lo) * (x(axis) - hi); };
  }
  return std::nullopt;
}

}  // namespace

Vec subsolution_margins(const ChartProblem& p, const Vec& v, const Vec& psi) {
  const auto hess = covariant_hessian(v, p.field, p.grid);
  Vec margin(p.unknowns());
  for (int i = 0; i < p.unknowns(); ++i) {
    const Vec lambda = eigenvalues_wrt(hess[i] + p.field.chi[i], p.field.g[i]);
    if (!p.op.cone().is_interior(lambda)) {
      throw Error(ErrorCode::ConeViolation, "field is not admissible at node " + std::to_string(i));
    }
    margin(i) = p.op.value(lambda) - psi(i);
  }
  return margin;
}

ChartProblem make_problem(ChartGrid grid, const MetricPreset& metric, const ChiPreset& chi,
                          OperatorSpec op, const Expression& psi_expr, const Expression& phi_expr,
                          const std::optional<Expression>& subsolution, bool build_subsolution) {
  if (op.dimension() != grid.dimension()) {
    throw Error(ErrorCode::ValidationError, "operator dimension " + std::to_string(op.dimension()) +
                                                " does not match domain dimension " +
                                                std::to_string(grid.dimension()));
  }
  MetricField field = build_metric_field(grid, metric, chi);
  auto stencils = covariant_stencils(grid, field);
  Vec psi = grid.sample([&](const Vec& x) { return psi_expr(x); });
  Vec phi = grid.sample([&](const Vec& x) { return phi_expr(x); });
  ChartProblem p{std::move(grid), metric, chi, std::move(field), std::move(stencils),
                 std::move(op),   psi,    phi, Vec(),           0.0};
  const int m = p.unknowns();

  if (subsolution) {
    p.subsolution = p.grid.sample([&](const Vec& x) { return (*subsolution)(x); });
    for (int b = m; b < p.grid.node_count(); ++b) p.subsolution(b) = p.phi(b);
    subsolution_margins(p, p.subsolution, p.psi);  // admissibility only
    return p;
  }

  if (!build_subsolution) {
    p.subsolution = p.phi;
    return p;
  }

  const auto w = boundary_quadratic(p.grid.domain());
  if (!w) {
    throw Error(ErrorCode::ValidationError,
                "no built-in subsolution for domain " + p.grid.domain().name() +
                    "; supply problem.subsolution");
  }
  const Vec base = p.grid.sample(*w);
  const double psi_max = m > 0 ? p.psi.head(m).maxCoeff() : 0.0;
  for (double a = 1.0; a <= std::ldexp(1.0, 40); a *= 2.0) {
    Vec candidate = p.phi + a * base;
    for (int b = m; b < p.grid.node_count(); ++b) candidate(b) = p.phi(b);
    bool ok = true;
    try {
      const Vec margin = subsolution_margins(p, candidate, Vec::Constant(p.grid.node_count(), psi_max));
      ok = m == 0 || margin.minCoeff() > 0.0;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ConeViolation) throw;
      ok = false;
    }
    if (ok) {
      p.subsolution = std::move(candidate);
      p.subsolution_scale = a;
      return p;
    }
  }
  throw Error(ErrorCode::ValidationError, "subsolution generator found no admissible scale up to 2^40");
}

}  // namespace fnlab
