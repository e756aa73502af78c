#include "fnlab/solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>

#include "fnlab/boundary_fit.hpp"
#include "fnlab/eigen_toolkit.hpp"
#include "fnlab/error.hpp"
#include "fnlab/json_util.hpp"
#include "fnlab/parallel.hpp"

namespace fnlab {

namespace {

using SparseMat = Eigen::SparseMatrix<double>;

std::string num(double x) { return ExtendedReal(x).to_string(); }

double psi_scale(const ChartProblem& p, const Vec& psi) {
  const int m = p.unknowns();
  return m > 0 ? psi.head(m).cwiseAbs().maxCoeff() : 0.0;
}

// Assembles rows sum_ij c_ij(node) * stencil_ij over interior unknowns and
// returns the boundary contribution applied to `boundary_values`.
template <class Coefficients>
SparseMat assemble(const ChartProblem& p, Coefficients&& coeff, const Vec& boundary_values,
                   Vec& boundary_part) {
  const int m = p.unknowns();
  const int n = p.grid.dimension();
  std::vector<std::vector<Eigen::Triplet<double>>> rows(m);
  boundary_part = Vec::Zero(m);
  parallel_for(m, [&](int node) {
    const Mat c = coeff(node);
    auto& row = rows[node];
    double outside = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const double cij = c(i, j);
        if (cij == 0.0) continue;
        for (const auto& t : p.hessian[node][i * n + j]) {
          if (t.node < m) {
            row.emplace_back(node, t.node, cij * t.weight);
          } else {
            outside += cij * t.weight * boundary_values(t.node);
          }
        }
      }
    }
    boundary_part(node) = outside;
  });
  std::vector<Eigen::Triplet<double>> all;
  for (auto& r : rows) all.insert(all.end(), r.begin(), r.end());
  SparseMat a(m, m);
  a.setFromTriplets(all.begin(), all.end());
  a.makeCompressed();
  return a;
}

Vec sparse_solve(const SparseMat& a, const Vec& rhs) {
  Eigen::SparseLU<SparseMat, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(a);
  lu.factorize(a);
  if (lu.info() != Eigen::Success) {
    throw Error(ErrorCode::LinearSolveFailure, "sparse factorization failed: " + lu.lastErrorMessage());
  }
  Vec x = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !x.allFinite()) {
    throw Error(ErrorCode::LinearSolveFailure, "sparse solve failed");
  }
  // One refinement pass, then a normwise backward-error check.
  x += lu.solve(rhs - a * x);
  Vec row_sums = Vec::Zero(a.rows());
  for (int k = 0; k < a.outerSize(); ++k)
    for (SparseMat::InnerIterator it(a, k); it; ++it) row_sums(it.row()) += std::abs(it.value());
  const double scale = row_sums.maxCoeff() * x.cwiseAbs().maxCoeff() + rhs.cwiseAbs().maxCoeff();
  const double backward = (a * x - rhs).cwiseAbs().maxCoeff() / std::max(scale, std::numeric_limits<double>::min());
  if (!x.allFinite() || backward > 1e-10) {
    throw Error(ErrorCode::LinearSolveFailure, "linear backward error " + num(backward) + " above 1e-10");
  }
  return x;
}

}  // namespace

double Evaluation::interior_max_abs() const {
  const int m = static_cast<int>(tensor.size());
  return m > 0 ? residual.head(m).cwiseAbs().maxCoeff() : 0.0;
}

double Evaluation::interior_norm() const {
  const int m = static_cast<int>(tensor.size());
  return m > 0 ? residual.head(m).norm() : 0.0;
}

Evaluation evaluate(const ChartProblem& p, const Vec& u, const Vec& psi) {
  const int m = p.unknowns();
  Evaluation e;
  e.residual = Vec::Zero(p.grid.node_count());
  e.tensor.resize(m);
  e.eigenvalues.resize(m);
  std::vector<double> distance(m, 0.0);
  parallel_for(m, [&](int i) {
    e.tensor[i] = covariant_hessian_at(u, p.field, p.grid, i) + p.field.chi[i];
    e.eigenvalues[i] = eigenvalues_wrt(e.tensor[i], p.field.g[i]);
    if (p.op.cone().is_interior(e.eigenvalues[i])) {
      e.residual(i) = p.op.value(e.eigenvalues[i]) - psi(i);
    } else {
      e.residual(i) = std::numeric_limits<double>::quiet_NaN();
      distance[i] = std::min(-0.0, p.op.cone().signed_distance(e.eigenvalues[i]));
    }
  });
  for (int i = 0; i < m; ++i) {
    if (std::isnan(e.residual(i))) {
      if (e.first_violation < 0) e.first_violation = i;
      e.worst_cone_distance = std::min(e.worst_cone_distance, distance[i]);
    }
  }
  for (int b = m; b < p.grid.node_count(); ++b) e.residual(b) = u(b) - p.phi(b);
  return e;
}

Vec residual(const ChartProblem& p, const Vec& u) {
  Evaluation e = evaluate(p, u, p.psi);
  if (!e.admissible()) {
    throw Error(ErrorCode::ConeViolation,
                "eigenvalues leave the cone at node " + std::to_string(e.first_violation));
  }
  return e.residual;
}

namespace {

NewtonDirection newton_step_from(const ChartProblem& p, const Evaluation& e) {
  const int m = p.unknowns();
  if (!e.admissible()) {
    throw Error(ErrorCode::ConeViolation,
                "eigenvalues leave the cone at node " + std::to_string(e.first_violation));
  }
  std::vector<Mat> coeff(m);
  std::vector<char> elliptic(m, 1);
  parallel_for(m, [&](int i) {
    coeff[i] = dFdA(p.op, e.tensor[i], p.field.g[i]);
    Eigen::LLT<Mat> llt(coeff[i]);
    elliptic[i] = llt.info() == Eigen::Success;
  });
  for (int i = 0; i < m; ++i) {
    if (!elliptic[i]) {
      throw Error(ErrorCode::NonellipticNode,
                  "dF/dA is not positive definite at node " + std::to_string(i));
    }
  }
  Vec unused;
  const SparseMat jac = assemble(
      p, [&](int i) { return coeff[i]; }, Vec::Zero(p.grid.node_count()), unused);
  const Vec r = e.residual.head(m);
  NewtonDirection out;
  out.direction = Vec::Zero(p.grid.node_count());
  if (r.squaredNorm() > 0.0) out.direction.head(m) = sparse_solve(jac, -r);
  out.expected_decrease = r.squaredNorm();
  return out;
}

LineSearchResult search(const ChartProblem& p, const Vec& u, const Evaluation& current,
                        const Vec& d, const Vec& psi, const SolverOptions& options) {
  LineSearchResult out;
  if (d.cwiseAbs().maxCoeff() == 0.0) {
    out.step = 1.0;
    out.state = current;
    return out;
  }
  const double norm0 = current.interior_norm();
  double t = std::min(1.0, options.damping);
  int worst_node = -1;
  while (t >= options.min_step) {
    Evaluation trial = evaluate(p, u + t * d, psi);
    if (trial.admissible() && trial.interior_norm() < norm0) {
      out.step = t;
      out.state = std::move(trial);
      return out;
    }
    worst_node = trial.first_violation;
    t *= 0.5;
    ++out.halvings;
  }
  throw Error(ErrorCode::StepCollapse,
              "line search step fell below " + num(options.min_step) +
                  (worst_node >= 0 ? "; cone violated at node " + std::to_string(worst_node)
                                   : "; residual norm did not decrease"));
}

}  // namespace

NewtonDirection newton_step(const ChartProblem& p, const Vec& u, const Vec& psi) {
  return newton_step_from(p, evaluate(p, u, psi));
}

LineSearchResult line_search_admissible(const ChartProblem& p, const Vec& u, const Vec& d,
                                        const Vec& psi, const SolverOptions& options) {
  const Evaluation current = evaluate(p, u, psi);
  if (!current.admissible()) {
    throw Error(ErrorCode::ConeViolation,
                "line search started at an inadmissible field, node " +
                    std::to_string(current.first_violation));
  }
  return search(p, u, current, d, psi, options);
}

SolutionField newton_solve(const ChartProblem& p, const SolverOptions& options,
                           const std::optional<Vec>& initial, const std::optional<Vec>& psi_in) {
  const Vec& psi = psi_in ? *psi_in : p.psi;
  SolutionField s;
  s.u = initial ? *initial : p.subsolution;
  for (int b = p.unknowns(); b < p.grid.node_count(); ++b) s.u(b) = p.phi(b);
  s.tolerance = options.tolerance * (1.0 + psi_scale(p, psi));
  s.state = evaluate(p, s.u, psi);
  if (!s.state.admissible()) {
    throw Error(ErrorCode::ConeViolation,
                "initial iterate is not admissible at node " + std::to_string(s.state.first_violation));
  }
  for (;;) {
    const double res = s.state.interior_max_abs();
    s.residual_history.push_back(res);
    if (res < s.tolerance) return s;
    if (s.iterations >= options.max_iterations) {
      throw Error(ErrorCode::MaxIterations, "no convergence after " + std::to_string(s.iterations) +
                                                " iterations; max residual " + num(res));
    }
    const NewtonDirection d = newton_step_from(p, s.state);
    LineSearchResult ls = search(p, s.u, s.state, d.direction, psi, options);
    s.u += ls.step * d.direction;
    s.state = std::move(ls.state);
    s.step_history.push_back(ls.step);
    s.update_norms.push_back(ls.step * d.direction.cwiseAbs().maxCoeff());
    ++s.iterations;
  }
}

Vec solve_poisson_h(const ChartProblem& p) {
  const int m = p.unknowns();
  std::vector<Mat> ginv(m);
  Vec rhs(m);
  for (int i = 0; i < m; ++i) {
    ginv[i] = p.field.g[i].inverse();
    rhs(i) = -(ginv[i] * p.field.chi[i]).trace();
  }
  Vec boundary_part;
  const SparseMat lap = assemble(p, [&](int i) { return ginv[i]; }, p.phi, boundary_part);
  Vec h = p.phi;
  if (m > 0) h.head(m) = sparse_solve(lap, rhs - boundary_part);
  return h;
}

void ContinuationSchedule::validate() const {
  if (epsilons.empty()) throw Error(ErrorCode::ValidationError, "schedule needs at least one epsilon");
  for (std::size_t k = 0; k < epsilons.size(); ++k) {
    if (!(epsilons[k] > 0.0) || !std::isfinite(epsilons[k])) {
      throw Error(ErrorCode::ValidationError, "schedule epsilons must be positive and finite");
    }
    if (k > 0 && !(epsilons[k] < epsilons[k - 1])) {
      throw Error(ErrorCode::ValidationError, "schedule must decrease");
    }
  }
  if (!(step_tolerance > 0.0)) throw Error(ErrorCode::ValidationError, "schedule step tolerance must be positive");
  if (min_epsilon < 0.0 || stagnation < 0.0) {
    throw Error(ErrorCode::ValidationError, "schedule stop thresholds must be nonnegative");
  }
}

ContinuationSchedule geometric_schedule(double epsilon0, int levels) {
  ContinuationSchedule s;
  for (int k = 0; k < levels; ++k) s.epsilons.push_back(std::ldexp(epsilon0, -k));
  return s;
}

double default_initial_epsilon(const ChartProblem& p) {
  const Vec margin = subsolution_margins(p, p.subsolution, p.psi);
  return 0.5 * margin.minCoeff();
}

Vec regularized_psi(const Vec& psi, double boundary_sup, double epsilon) {
  return psi.cwiseMax(boundary_sup + epsilon);
}

ContinuationReport continuation_solve(const ChartProblem& p, const ContinuationSchedule& schedule,
                                      const SolverOptions& options) {
  schedule.validate();
  const BoundarySup sup = sup_boundary_f(p.op);
  if (!sup.value.is_finite()) {
    throw Error(ErrorCode::ValidationError,
                "continuation needs a finite boundary supremum; " + p.op.name() + " has " +
                    sup.value.to_string());
  }
  ContinuationReport report;
  report.boundary_sup = sup.value.value();

  const Vec psi0 = regularized_psi(p.psi, report.boundary_sup, schedule.epsilons.front());
  const Vec margin = subsolution_margins(p, p.subsolution, psi0);
  if (!(margin.minCoeff() > 0.0)) {
    throw Error(ErrorCode::ScheduleTooAggressive,
                "first epsilon " + num(schedule.epsilons.front()) +
                    " leaves the subsolution non-strict (margin " + num(margin.minCoeff()) +
                    "); default is " + num(default_initial_epsilon(p)));
  }

  SolverOptions level_options = options;
  level_options.tolerance = schedule.step_tolerance;
  const BoundaryJetFitter fitter(p.grid, p.metric);
  std::optional<Vec> warm;
  report.stop_reason = "schedule_exhausted";
  for (double eps : schedule.epsilons) {
    ContinuationLevel level;
    level.epsilon = eps;
    level.solution = newton_solve(p, level_options, warm, regularized_psi(p.psi, report.boundary_sup, eps));
    const FieldSummary summary = summarize_field(p.grid, p.field, fitter, level.solution.u);
    level.sup_laplacian = summary.sup_laplacian;
    level.sup_gradient = summary.sup_gradient;
    level.sup_boundary_laplacian = summary.sup_boundary_laplacian;
    if (warm) level.change_from_previous = (level.solution.u - *warm).cwiseAbs().maxCoeff();
    warm = level.solution.u;
    const bool stagnant = !report.levels.empty() && level.change_from_previous < schedule.stagnation;
    report.levels.push_back(std::move(level));
    if (eps <= schedule.min_epsilon) {
      report.stop_reason = "min_epsilon";
      break;
    }
    if (stagnant) {
      report.stop_reason = "stagnation";
      break;
    }
  }
  return report;
}

nlohmann::ordered_json to_json(const SolutionField& s) {
  nlohmann::ordered_json j;
  j["iterations"] = s.iterations;
  j["tolerance"] = json_number(s.tolerance);
  j["final_max_residual"] = json_number(s.residual_history.empty() ? 0.0 : s.residual_history.back());
  auto hist = nlohmann::ordered_json::array();
  for (double r : s.residual_history) hist.push_back(json_number(r));
  j["residual_history"] = hist;
  auto steps = nlohmann::ordered_json::array();
  for (double t : s.step_history) steps.push_back(json_number(t));
  j["step_history"] = steps;
  auto updates = nlohmann::ordered_json::array();
  for (double t : s.update_norms) updates.push_back(json_number(t));
  j["update_norms"] = updates;
  return j;
}

nlohmann::ordered_json to_json(const ContinuationReport& r) {
  nlohmann::ordered_json j;
  j["boundary_sup"] = json_number(r.boundary_sup);
  j["stop_reason"] = r.stop_reason;
  auto levels = nlohmann::ordered_json::array();
  for (const auto& l : r.levels) {
    nlohmann::ordered_json e;
    e["epsilon"] = json_number(l.epsilon);
    e["iterations"] = l.solution.iterations;
    e["final_max_residual"] = json_number(l.solution.residual_history.back());
    e["sup_laplacian"] = json_number(l.sup_laplacian);
    e["sup_gradient"] = json_number(l.sup_gradient);
    e["sup_boundary_laplacian"] = json_number(l.sup_boundary_laplacian);
    e["change_from_previous"] = json_number(l.change_from_previous);
    levels.push_back(e);
  }
  j["levels"] = levels;
  return j;
}

}  // namespace fnlab
