#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "fnlab/problem.hpp"

namespace fnlab {

struct SolverOptions {
  double tolerance = 1e-8;  // stop when max |residual| < tolerance (1 + |psi|_inf)
  int max_iterations = 60;
  double damping = 1.0;     // first trial step of the line search
  double min_step = 1e-8;
};

/// Pointwise state of a node field: tensor Hess u + chi, its eigenvalues and
/// the residual (f - psi inside, u - phi on the boundary). Inadmissible
/// interior nodes get a NaN residual.
struct Evaluation {
  Vec residual;
  std::vector<Mat> tensor;
  std::vector<Vec> eigenvalues;
  int first_violation = -1;
  double worst_cone_distance = 0.0;  // most negative signed distance among violations

  bool admissible() const { return first_violation < 0; }
  double interior_max_abs() const;
  double interior_norm() const;
};

Evaluation evaluate(const ChartProblem& p, const Vec& u, const Vec& psi);

/// Residual against the problem's psi. Throws CONE_VIOLATION at inadmissible nodes.
Vec residual(const ChartProblem& p, const Vec& u);

struct NewtonDirection {
  Vec direction;               // zero on boundary nodes
  double expected_decrease = 0.0;  // |r|^2; the slope of |r(u + t d)|^2 at t = 0 is -2 |r|^2
};

/// Solves L d = -r with L v = F^{ij} (covariant stencil)_ij v. Throws
/// NONELLIPTIC_NODE when dF/dA is not positive definite somewhere and
/// LINEAR_SOLVE_FAILURE when the factorization fails.
NewtonDirection newton_step(const ChartProblem& p, const Vec& u, const Vec& psi);

struct LineSearchResult {
  double step = 1.0;
  int halvings = 0;
  Evaluation state;  // evaluation at u + step d
};

/// Backtracks t = t0, t0/2, ... until u + t d is admissible with a smaller
/// residual norm. Throws STEP_COLLAPSE once t < min_step.
LineSearchResult line_search_admissible(const ChartProblem& p, const Vec& u, const Vec& d,
                                        const Vec& psi, const SolverOptions& options = {});

struct SolutionField {
  Vec u;
  Evaluation state;
  int iterations = 0;
  std::vector<double> residual_history;  // max |residual| before each step and at the end
  std::vector<double> step_history;
  std::vector<double> update_norms;      // max |t d|
  double tolerance = 0.0;                // absolute stopping threshold used
};

/// Damped Newton from the subsolution (or `initial`), against `psi` when given.
/// Throws CONE_VIOLATION for an inadmissible start, MAX_ITERATIONS, STEP_COLLAPSE.
SolutionField newton_solve(const ChartProblem& p, const SolverOptions& options = {},
                           const std::optional<Vec>& initial = std::nullopt,
                           const std::optional<Vec>& psi = std::nullopt);

/// Discrete Laplace-Beltrami problem Lap h + tr_g chi = 0, h = phi.
Vec solve_poisson_h(const ChartProblem& p);

struct ContinuationSchedule {
  std::vector<double> epsilons;   // strictly decreasing, positive
  double step_tolerance = 1e-8;   // newton tolerance per level
  double min_epsilon = 0.0;       // stop after the first level at or below this
  double stagnation = 0.0;        // stop when max |u_k - u_{k-1}| falls below this

  /// Throws VALIDATION_ERROR "schedule must decrease" and friends.
  void validate() const;
};

ContinuationSchedule geometric_schedule(double epsilon0, int levels);

/// Half the smallest subsolution margin f(subsolution) - psi.
double default_initial_epsilon(const ChartProblem& p);

/// psi_eps = max(psi, boundary_sup + eps) nodewise.
Vec regularized_psi(const Vec& psi, double boundary_sup, double epsilon);

struct ContinuationLevel {
  double epsilon = 0.0;
  SolutionField solution;
  double sup_laplacian = 0.0;
  double sup_gradient = 0.0;
  double sup_boundary_laplacian = 0.0;
  double change_from_previous = 0.0;  // max |u_eps - u_prev|; 0 for the first level
};

struct ContinuationReport {
  double boundary_sup = 0.0;
  std::vector<ContinuationLevel> levels;
  std::string stop_reason;  // "schedule_exhausted", "min_epsilon" or "stagnation"

  const SolutionField& terminal() const { return levels.back().solution; }
};

/// Solves the regularized problems along the schedule, each warm-started at
/// the previous level. Throws SCHEDULE_TOO_AGGRESSIVE if the subsolution is
/// not strict for the first psi_eps.
ContinuationReport continuation_solve(const ChartProblem& p, const ContinuationSchedule& s,
                                      const SolverOptions& options = {});

nlohmann::ordered_json to_json(const SolutionField& s);
nlohmann::ordered_json to_json(const ContinuationReport& r);

}  // namespace fnlab
