#include "run.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "fnlab/boundary_fit.hpp"
#include "fnlab/boundary_geometry.hpp"
#include "fnlab/diagnostics.hpp"
#include "fnlab/eigen_toolkit.hpp"
#include "fnlab/error.hpp"
#include "fnlab/json_util.hpp"
#include "fnlab/parallel.hpp"
#include "fnlab/structural.hpp"

namespace fnlab::cli {

using json = nlohmann::ordered_json;

std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  return ExtendedReal(v).to_string();
}

namespace {

ChartProblem build_problem(const RunConfig& c, bool nonlinear) {
  const ProblemConfig& pc = c.problem;
  ChartGrid grid = ChartGrid::build(*pc.domain, pc.chart, pc.spacing, pc.angular_count);
  const std::string name = pc.operator_name.empty() ? "sigma_1" : pc.operator_name;
  OperatorSpec op = make_operator(name, grid.dimension(), pc.operator_k);
  const Expression psi = pc.psi.value_or(Expression::constant(0.0));
  return make_problem(std::move(grid), pc.metric, pc.chi, op, psi, *pc.phi, pc.subsolution, nonlinear);
}

json grid_json(const ChartProblem& p) {
  json j;
  j["chart"] = p.grid.chart() == ChartKind::Polar ? "polar" : "cartesian";
  j["spacing"] = p.grid.spacing();
  if (p.grid.chart() == ChartKind::Polar) {
    j["radial_spacing"] = p.grid.radial_spacing();
    j["angular_count"] = p.grid.angular_count();
  }
  j["nodes"] = p.grid.node_count();
  j["interior"] = p.grid.interior_count();
  j["boundary"] = p.grid.boundary_count();
  return j;
}

json problem_json(const ChartProblem& p) {
  json j;
  j["operator"] = p.op.name();
  j["metric"] = p.metric.name();
  j["chi"] = p.chi.name();
  j["grid"] = grid_json(p);
  j["subsolution_scale"] = p.subsolution_scale;
  return j;
}

double max_error(const ChartGrid& grid, const Vec& u, const Expression& exact) {
  double worst = 0.0;
  for (int i = 0; i < grid.node_count(); ++i) {
    worst = std::max(worst, std::abs(u(i) - exact(grid.node(i).physical)));
  }
  return worst;
}

std::string coordinate_header(int n) {
  static const char* names[] = {"x", "y", "z"};
  std::string out;
  for (int k = 0; k < n; ++k) out += std::string(",") + names[k];
  return out;
}

void write_coordinates(std::ostringstream& os, const GridNode& node) {
  for (Eigen::Index k = 0; k < node.physical.size(); ++k) os << ',' << csv_number(node.physical(k));
}

// Rows: node, boundary flag, coordinates, u, ascending eigenvalues, residual.
// Interior eigenvalues come from the stencils, boundary ones from the fits.
std::string solution_csv(const ChartProblem& p, const Vec& u, const Evaluation& state) {
  const int n = p.grid.dimension();
  const BoundaryJetFitter fitter(p.grid, p.metric);
  std::vector<Vec> boundary_eigs(static_cast<std::size_t>(fitter.boundary_count()));
  parallel_for(fitter.boundary_count(), [&](int b) {
    const Mat g = fitter.metric_at(b);
    const Mat a = fitter.jet(u, b).hessian + p.chi.metric_multiple * g;
    boundary_eigs[static_cast<std::size_t>(b)] = eigenvalues_wrt(a, g);
  });

  std::ostringstream os;
  os << "node,boundary" << coordinate_header(n) << ",u";
  for (int k = 1; k <= n; ++k) os << ",lambda_" << k;
  os << ",residual\n";
  for (int i = 0; i < p.grid.node_count(); ++i) {
    const GridNode& node = p.grid.node(i);
    const bool bdry = p.grid.is_boundary(i);
    os << i << ',' << (bdry ? 1 : 0);
    write_coordinates(os, node);
    os << ',' << csv_number(u(i));
    const Vec& eig = bdry ? boundary_eigs[static_cast<std::size_t>(i - p.grid.interior_count())]
                          : state.eigenvalues[static_cast<std::size_t>(i)];
    for (int k = 0; k < n; ++k) os << ',' << csv_number(k < eig.size() ? eig(k) : std::nan(""));
    os << ',' << csv_number(state.residual(i)) << '\n';
  }
  return os.str();
}

ContinuationSchedule make_schedule(const ScheduleConfig& s, const ChartProblem& p) {
  ContinuationSchedule out;
  if (!s.epsilons.empty()) {
    out.epsilons = s.epsilons;
  } else {
    out = geometric_schedule(s.initial ? *s.initial : default_initial_epsilon(p), s.levels);
  }
  out.step_tolerance = s.step_tolerance;
  out.min_epsilon = s.min_epsilon;
  out.stagnation = s.stagnation;
  out.validate();
  return out;
}

struct SolvedRun {
  Vec u;
  Evaluation state;
  Vec psi_used;
  std::optional<ContinuationReport> continuation;
};

SolvedRun solve_direct(const ChartProblem& p, const RunConfig& c, json& report) {
  SolutionField s = newton_solve(p, c.solver);
  report["solve"] = to_json(s);
  return {s.u, s.state, p.psi, std::nullopt};
}

SolvedRun solve_continuation(const ChartProblem& p, const RunConfig& c, json& report) {
  const ContinuationSchedule schedule = make_schedule(c.schedule, p);
  ContinuationReport r = continuation_solve(p, schedule, c.solver);
  report["schedule"] = schedule.epsilons;
  report["continuation"] = to_json(r);
  const double eps = r.levels.back().epsilon;
  SolvedRun out{r.terminal().u, r.terminal().state, regularized_psi(p.psi, r.boundary_sup, eps),
                std::move(r)};
  return out;
}

void add_sandwich(const ChartProblem& p, const RunConfig& c, const Vec& u, json& report,
                  SandwichReport* keep = nullptr) {
  const Vec h = solve_poisson_h(p);
  const SandwichReport s = sandwich_check(u, p.subsolution, h, 10.0 * c.solver.tolerance);
  report["sandwich"] = to_json(s);
  if (keep) *keep = s;
}

RunArtifacts run_solve(const RunConfig& c) {
  const ChartProblem p = build_problem(c, true);
  RunArtifacts a;
  a.report["problem"] = problem_json(p);
  SolvedRun s = c.command == "continuation" ? solve_continuation(p, c, a.report) : solve_direct(p, c, a.report);
  if (c.problem.exact) a.report["max_error"] = json_number(max_error(p.grid, s.u, *c.problem.exact));
  add_sandwich(p, c, s.u, a.report);
  if (s.continuation) {
    if (s.continuation->levels.size() >= 4) {
      a.report["delta_study"] = to_json(delta_independence_study(delta_levels(*s.continuation)));
    } else {
      a.report["delta_study"] = json{{"skipped", "fewer than four levels"}};
    }
  }
  a.fields_csv = solution_csv(p, s.u, s.state);
  return a;
}

RunArtifacts run_poisson(const RunConfig& c) {
  const ChartProblem p = build_problem(c, false);
  const Vec h = solve_poisson_h(p);
  RunArtifacts a;
  json g = grid_json(p);
  a.report["problem"] = json{{"metric", p.metric.name()}, {"chi", p.chi.name()}, {"grid", g}};
  a.report["min_value"] = json_number(h.minCoeff());
  a.report["max_value"] = json_number(h.maxCoeff());
  if (c.problem.exact) a.report["max_error"] = json_number(max_error(p.grid, h, *c.problem.exact));

  std::ostringstream os;
  os << "node,boundary" << coordinate_header(p.grid.dimension()) << ",h\n";
  for (int i = 0; i < p.grid.node_count(); ++i) {
    os << i << ',' << (p.grid.is_boundary(i) ? 1 : 0);
    write_coordinates(os, p.grid.node(i));
    os << ',' << csv_number(h(i)) << '\n';
  }
  a.fields_csv = os.str();
  return a;
}

std::string csv_vector(const std::optional<Vec>& v) {
  if (!v) return "";
  std::string out = "\"";
  for (Eigen::Index i = 0; i < v->size(); ++i) out += (i ? " " : "") + csv_number((*v)(i));
  return out + "\"";
}

std::string csv_text(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return out + "\"";
}

RunArtifacts run_check_cone(const RunConfig& c) {
  const ProblemConfig& pc = c.problem;
  const OperatorSpec op = make_operator(pc.operator_name, pc.operator_dimension, pc.operator_k);
  const ConditionReport r = check_structural_conditions(op, SampleBudget{c.check_samples, c.seed});
  RunArtifacts a;
  a.report["structural"] = to_json(r);
  a.conditions_passed = r.all_passed();

  if (pc.domain) {
    const double h = pc.spacing > 0.0 ? pc.spacing : 1.0 / 32.0;
    const ChartGrid grid = ChartGrid::build(*pc.domain, pc.chart, h, pc.angular_count);
    const BoundaryConeReport b = check_boundary_cone_condition(principal_curvatures(grid, pc.metric), op.cone());
    json j;
    j["passed"] = b.passed;
    j["worst_distance"] = json_number(b.worst_distance);
    j["worst_node"] = b.worst_node;
    if (b.worst_kappa.size() > 0) j["worst_curvatures"] = json_vector(b.worst_kappa);
    j["boundary_nodes"] = b.distances.size();
    a.report["boundary_cone_condition"] = j;
    a.conditions_passed = a.conditions_passed && b.passed;
  }
  a.report["passed"] = a.conditions_passed;

  std::ostringstream os;
  os << "check,applicable,passed,margin,samples,witness_lambda,witness_mu,note\n";
  for (const CheckEntry& e : r.checks) {
    os << csv_text(e.name) << ',' << (e.applicable ? 1 : 0) << ',' << (e.passed ? 1 : 0) << ','
       << csv_number(e.margin) << ',' << e.samples << ',' << csv_vector(e.witness_lambda) << ','
       << csv_vector(e.witness_mu) << ',' << csv_text(e.note) << '\n';
  }
  a.fields_csv = os.str();
  return a;
}

RunArtifacts run_lemma_border(const RunConfig& c) {
  const LemmaConfig& l = c.lemma;
  const double threshold = border_threshold(l.diagonal, l.border, l.epsilon);
  BorderedMatrix m{l.diagonal, l.border, l.corner.value_or(threshold), l.epsilon};
  const LocalizationReport r = border_localize(m, false);
  RunArtifacts a;
  a.report["threshold"] = json_number(threshold);
  a.report["corner"] = json_number(m.corner);
  a.report["epsilon"] = json_number(l.epsilon);
  a.report["localization"] = to_json(r);
  a.conditions_passed = r.precondition_met && r.passed;
  a.report["passed"] = a.conditions_passed;

  // One row per eigenvalue with the entry it pairs with and the slack of its bound.
  const int order = m.order();
  std::vector<int> partner(static_cast<std::size_t>(order), -1);
  for (int alpha = 0; alpha < order; ++alpha) partner[static_cast<std::size_t>(r.pairing[alpha])] = alpha;
  std::ostringstream os;
  os << "index,eigenvalue,paired_with,paired_value,slack\n";
  for (int i = 0; i < order; ++i) {
    const int alpha = partner[static_cast<std::size_t>(i)];
    const bool corner = alpha == order - 1;
    const double paired = corner ? m.corner : l.diagonal(alpha);
    const double slack = corner ? std::min(r.lower_slack, r.upper_slack) : r.tangential_slack(alpha);
    os << i << ',' << csv_number(r.eigenvalues(i)) << ',' << (corner ? std::string("corner") : std::to_string(alpha))
       << ',' << csv_number(paired) << ',' << csv_number(slack) << '\n';
  }
  a.fields_csv = os.str();
  return a;
}

RunArtifacts run_diagnose(const RunConfig& c) {
  const ChartProblem p = build_problem(c, true);
  RunArtifacts a;
  a.report["problem"] = problem_json(p);
  SolvedRun s = c.schedule.present ? solve_continuation(p, c, a.report) : solve_direct(p, c, a.report);
  if (c.problem.exact) a.report["max_error"] = json_number(max_error(p.grid, s.u, *c.problem.exact));

  json gates;
  SandwichReport sandwich;
  add_sandwich(p, c, s.u, a.report, &sandwich);
  gates["sandwich"] = sandwich.passed;

  const BoundaryJetFitter fitter(p.grid, p.metric);
  const EstimateReport est = boundary_hessian_report(p, s.u, fitter);
  a.report["estimate"] = to_json(est);
  gates["estimate"] = est.passed;

  const NormalAudit audit = normal_threshold_audit(p, s.u, s.psi_used, c.diagnose.audit_samples);
  a.report["normal_audit"] = to_json(audit);
  gates["normal_audit"] = audit.passed;

  if (s.continuation && s.continuation->levels.size() >= 4) {
    const DeltaStudy d = delta_independence_study(delta_levels(*s.continuation));
    a.report["delta_study"] = to_json(d);
    gates["delta_study"] = d.verdict == DeltaVerdict::Bounded;
  } else {
    a.report["delta_study"] = json{{"skipped", "needs a continuation with at least four levels"}};
  }

  a.report["global_laplacian"] = to_json(global_laplacian_report(p, s.u));

  // The barrier is informational; a small collar is reported, not fatal.
  if (c.diagnose.anchor >= p.grid.boundary_count()) {
    throw Error(ErrorCode::ValidationError, "diagnose.anchor exceeds the boundary node count " +
                                                std::to_string(p.grid.boundary_count()));
  }
  try {
    a.report["barrier"] =
        to_json(barrier_probe(p, s.u, c.diagnose.collar_radius, p.grid.interior_count() + c.diagnose.anchor));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::CollarTooSmall) throw;
    a.report["barrier"] = json{{"skipped", e.what()}};
  }

  bool all = true;
  for (auto it = gates.begin(); it != gates.end(); ++it) all = all && it->get<bool>();
  a.report["gates"] = gates;
  a.report["passed"] = all;
  a.conditions_passed = all;
  a.fields_csv = solution_csv(p, s.u, s.state);
  return a;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  out.close();
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

}  // namespace

RunArtifacts execute(const RunConfig& c) {
  RunArtifacts a;
  if (c.command == "solve" || c.command == "continuation") {
    a = run_solve(c);
  } else if (c.command == "poisson-h") {
    a = run_poisson(c);
  } else if (c.command == "check-cone") {
    a = run_check_cone(c);
  } else if (c.command == "lemma-border") {
    a = run_lemma_border(c);
  } else if (c.command == "diagnose") {
    a = run_diagnose(c);
  } else {
    throw Error(ErrorCode::ValidationError, "unknown command '" + c.command + "'");
  }
  json report;
  report["command"] = c.command;
  report["seed"] = c.seed;
  report["status"] = a.conditions_passed ? "ok" : "condition_failed";
  for (auto it = a.report.begin(); it != a.report.end(); ++it) report[it.key()] = it.value();
  a.report = std::move(report);
  return a;
}

int run(const RunConfig& config, const std::string& output_dir, std::ostream& log) {
  namespace fs = std::filesystem;
  const fs::path dir(output_dir);
  try {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create output directory " + output_dir + ": " + ec.message());

    json manifest;
    manifest["config"] = resolved_config(config);
    manifest["threads"] = thread_count();
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");

    RunArtifacts a;
    try {
      a = execute(config);
    } catch (const Error& e) {
      json report;
      report["command"] = config.command;
      report["seed"] = config.seed;
      report["status"] = "error";
      report["error"] = json{{"code", std::string(to_string(e.code()))}, {"message", e.what()}};
      write_file(dir / "report.json", report.dump(2) + "\n");
      throw;
    }
    write_file(dir / "report.json", a.report.dump(2) + "\n");
    write_file(dir / "fields.csv", a.fields_csv);
    if (!a.conditions_passed) {
      log << "condition check failed; see " << (dir / "report.json").string() << "\n";
      return kExitConditionFail;
    }
    return kExitOk;
  } catch (const Error& e) {
    log << e.what() << "\n";
    return exit_code_for(e.code());
  }
}

}  // namespace fnlab::cli
