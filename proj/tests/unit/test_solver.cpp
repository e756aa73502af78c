#include <cmath>
#include <functional>

#include "doctest.h"
#include "fnlab/error.hpp"
#include "fnlab/solver.hpp"

using namespace fnlab;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::IoError;
}

ChartGrid unit_disk(double h, ChartKind chart = ChartKind::Cartesian) {
  return ChartGrid::build(DomainSpec::disk(2, 1.0), chart, h);
}

ChartProblem ma_disk(double h, double psi, double phi, ChartKind chart = ChartKind::Cartesian) {
  return make_problem(unit_disk(h, chart), MetricPreset::flat(), ChiPreset::zero(),
                      OperatorSpec::monge_ampere(2), Expression::constant(psi),
                      Expression::constant(phi));
}

double max_error(const ChartGrid& g, const Vec& u, const std::function<double(const Vec&)>& exact) {
  double e = 0.0;
  for (int i = 0; i < g.node_count(); ++i) e = std::max(e, std::abs(u(i) - exact(g.node(i).physical)));
  return e;
}

double radial_oracle(const Vec& x) {
  const double r = x.norm();
  return (r * r * r - 1.0) / (3.0 * std::sqrt(2.0));
}

}  // namespace

TEST_CASE("expression catalog values") {
  Vec x(2);
  x << 3.0, 4.0;
  CHECK(Expression::constant(2.5)(x) == 2.5);
  Vec b(2);
  b << 1.0, -2.0;
  CHECK(Expression::affine(b, 0.5)(x) == doctest::Approx(-4.5));
  Mat m(2, 2);
  m << 1.0, 0.5, 0.5, 2.0;
  CHECK(Expression::quadratic_form(m, b, 1.0)(x) == doctest::Approx(9.0 + 12.0 + 32.0 - 5.0 + 1.0));
  CHECK(Expression::radial_power(2.0, 3.0, -1.0)(x) == doctest::Approx(249.0));
  Vec c(3);
  c << 1.0, 0.0, 2.0;
  CHECK(Expression::radial_polynomial(c)(x) == doctest::Approx(51.0));
  const auto t = Expression::table({x}, {7.0}, "f.csv");
  CHECK(t(x) == 7.0);
  CHECK(code_of([&] { t(b); }) == ErrorCode::ValidationError);
  CHECK(Expression::radial_power(1.0, 1.0, 0.0).to_json()["kind"] == "radial_power");
}

TEST_CASE("subsolution generator doubles until strict") {
  const auto p = ma_disk(1.0 / 16, 1.0, 0.5);
  CHECK(p.subsolution_scale == 2.0);
  for (int b = p.unknowns(); b < p.grid.node_count(); ++b) CHECK(p.subsolution(b) == p.phi(b));
  const Vec margin = subsolution_margins(p, p.subsolution, p.psi);
  CHECK(margin.minCoeff() > 0.0);

  const auto annulus = ChartGrid::build(DomainSpec::annulus(0.5, 1.0), ChartKind::Polar, 1.0 / 8);
  CHECK(code_of([&] {
          make_problem(annulus, MetricPreset::flat(), ChiPreset::zero(), OperatorSpec::monge_ampere(2),
                       Expression::constant(1.0), Expression::constant(0.0));
        }) == ErrorCode::ValidationError);
  CHECK(code_of([&] {
          make_problem(unit_disk(0.25), MetricPreset::flat(), ChiPreset::zero(),
                       OperatorSpec::monge_ampere(3), Expression::constant(1.0), Expression::constant(0.0));
        }) == ErrorCode::ValidationError);
}

TEST_CASE("residual examples") {
  const auto p = ma_disk(1.0 / 16, 1.0, 0.5);
  SUBCASE("strict subsolution gives a positive residual") {
    const Vec r = residual(p, p.subsolution);
    CHECK(r.head(p.unknowns()).minCoeff() > 0.0);
    CHECK(r.tail(p.grid.boundary_count()).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("exact solution on an aligned box is resolved exactly") {
    Vec lo(2), hi(2);
    lo << -1.0, -1.0;
    hi << 1.0, 1.0;
    const auto box = ChartGrid::build(DomainSpec::box(lo, hi), ChartKind::Cartesian, 0.125);
    Mat q = 0.5 * Mat::Identity(2, 2);
    const auto exact = Expression::quadratic_form(q, Vec::Zero(2), 0.0);
    const auto bp = make_problem(box, MetricPreset::flat(), ChiPreset::zero(), OperatorSpec::monge_ampere(2),
                                 Expression::constant(1.0), exact, exact);
    CHECK(residual(bp, bp.subsolution).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("inadmissible field names its node") {
    Vec u = -p.subsolution;
    for (int b = p.unknowns(); b < p.grid.node_count(); ++b) u(b) = p.phi(b);
    CHECK(code_of([&] { residual(p, u); }) == ErrorCode::ConeViolation);
  }
}

TEST_CASE("newton on the nondegenerate Monge-Ampere disk") {
  const double h = 1.0 / 32;
  const auto p = ma_disk(h, 1.0, 0.5);
  const auto s = newton_solve(p);
  CHECK(s.state.admissible());
  CHECK(s.residual_history.back() < s.tolerance);
  CHECK(max_error(p.grid, s.u, [](const Vec& x) { return 0.5 * x.squaredNorm(); }) < 0.25 * h * h);
  for (int b = p.unknowns(); b < p.grid.node_count(); ++b) CHECK(s.u(b) == p.phi(b));

  // Quadratic convergence of the residual until round-off.
  const auto& res = s.residual_history;
  int quadratic_steps = 0;
  for (std::size_t k = 0; k + 1 < res.size(); ++k) {
    if (res[k] < 0.1 && res[k + 1] > 1e-11) {
      CHECK(res[k + 1] <= res[k] * res[k]);
      ++quadratic_steps;
    }
  }
  CHECK(quadratic_steps >= 1);

  // At the discrete solution the Newton direction vanishes.
  const auto d = newton_step(p, s.u, p.psi);
  CHECK(d.direction.cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("polar restatement matches the Cartesian solve") {
  const double h = 1.0 / 16;
  const auto pc = ma_disk(h, 1.0, 0.5, ChartKind::Cartesian);
  const auto pp = ma_disk(h, 1.0, 0.5, ChartKind::Polar);
  const auto sc = newton_solve(pc);
  const auto sp = newton_solve(pp);
  int shared = 0;
  for (int i = 0; i < pc.grid.node_count(); ++i) {
    for (int j = 0; j < pp.grid.node_count(); ++j) {
      if ((pc.grid.node(i).physical - pp.grid.node(j).physical).norm() > 1e-12) continue;
      ++shared;
      CHECK(std::abs(sc.u(i) - sp.u(j)) <= 10.0 * h * h);
      if (i < pc.unknowns() && j < pp.unknowns() && (pc.grid.node(i).physical.norm() < 0.75)) {
        CHECK((sc.state.eigenvalues[i] - sp.state.eigenvalues[j]).cwiseAbs().maxCoeff() <= 10.0 * h * h);
      }
    }
  }
  CHECK(shared >= 9);
}

TEST_CASE("sigma_1 is solved by one Newton step") {
  const double h = 1.0 / 16;
  const auto p = make_problem(unit_disk(h), MetricPreset::flat(), ChiPreset::zero(),
                              OperatorSpec::sigma_k_root(2, 1), Expression::constant(4.0),
                              Expression::constant(1.0));
  const auto s = newton_solve(p);
  CHECK(s.iterations == 1);
  CHECK(s.step_history.front() == 1.0);
  CHECK(max_error(p.grid, s.u, [](const Vec& x) { return x.squaredNorm(); }) < h * h);
}

TEST_CASE("line search examples") {
  const double h = 1.0 / 16;
  const auto p = make_problem(unit_disk(h), MetricPreset::flat(), ChiPreset::zero(),
                              OperatorSpec::sigma_k_root(2, 1), Expression::constant(4.0),
                              Expression::constant(1.0));
  const Vec& u0 = p.subsolution;
  const Vec d = newton_step(p, u0, p.psi).direction;

  CHECK(line_search_admissible(p, u0, d, p.psi).step == 1.0);
  const auto still = line_search_admissible(p, u0, Vec::Zero(u0.size()), p.psi);
  CHECK(still.step == 1.0);
  CHECK(still.halvings == 0);

  // Raising the center node lowers its Laplacian by 8 at t = 1, below zero,
  // and by 4 at t = 1/2, where 8 - 2 - 4 > 0.
  int center = -1;
  for (int i = 0; i < p.unknowns(); ++i)
    if (p.grid.node(i).physical.norm() < 1e-12) center = i;
  REQUIRE(center >= 0);
  Vec spiked = d;
  spiked(center) += 2.0 * h * h;
  CHECK(!evaluate(p, u0 + spiked, p.psi).admissible());
  const auto ls = line_search_admissible(p, u0, spiked, p.psi);
  CHECK(ls.step == 0.5);
  CHECK(ls.state.admissible());

  // Pure ascent of the residual collapses.
  CHECK(code_of([&] { line_search_admissible(p, u0, -d, p.psi); }) == ErrorCode::StepCollapse);
}

TEST_CASE("discrete comparison under right-hand-side ordering") {
  const double h = 1.0 / 16;
  const auto u_small = newton_solve(ma_disk(h, 0.5, 0.5)).u;
  const auto u_mid = newton_solve(ma_disk(h, 1.0, 0.5)).u;
  const auto u_large = newton_solve(ma_disk(h, 2.0, 0.5)).u;
  CHECK((u_small - u_mid).minCoeff() >= 0.0);
  CHECK((u_mid - u_large).minCoeff() >= 0.0);
}

TEST_CASE("Poisson barrier examples") {
  const double h = 1.0 / 16;
  const auto grid = unit_disk(h);
  Vec e1(2);
  e1 << 1.0, 0.0;
  SUBCASE("harmonic trace") {
    const auto p = make_problem(grid, MetricPreset::flat(), ChiPreset::zero(), OperatorSpec::monge_ampere(2),
                                Expression::constant(1.0), Expression::affine(e1, 0.0));
    CHECK(max_error(p.grid, solve_poisson_h(p), [](const Vec& x) { return x(0); }) < 1e-12);
  }
  SUBCASE("metric-multiple chi") {
    const auto p = make_problem(grid, MetricPreset::flat(), ChiPreset::scaled_metric(1.0),
                                OperatorSpec::monge_ampere(2), Expression::constant(1.0),
                                Expression::constant(0.0));
    CHECK(max_error(p.grid, solve_poisson_h(p), [](const Vec& x) { return 0.5 * (1.0 - x.squaredNorm()); }) <
          h * h);
  }
  SUBCASE("constant trace") {
    const auto p = ma_disk(h, 1.0, 0.75);
    CHECK(max_error(p.grid, solve_poisson_h(p), [](const Vec&) { return 0.75; }) < 1e-12);
  }
}

TEST_CASE("schedule validation") {
  ContinuationSchedule s;
  s.epsilons = {0.1, 0.2};
  CHECK(code_of([&] { s.validate(); }) == ErrorCode::ValidationError);
  s.epsilons = {0.1, -0.05};
  CHECK(code_of([&] { s.validate(); }) == ErrorCode::ValidationError);
  s = geometric_schedule(0.1, 8);
  CHECK(s.epsilons.size() == 8);
  CHECK(s.epsilons.back() == doctest::Approx(0.1 / 128));
  CHECK_NOTHROW(s.validate());
}

TEST_CASE("degenerate continuation reaches the radial oracle") {
  const double h = 1.0 / 16;
  const auto p = make_problem(unit_disk(h), MetricPreset::flat(), ChiPreset::zero(), OperatorSpec::monge_ampere(2),
                              Expression::radial_power(1.0, 1.0, 0.0), Expression::constant(0.0));
  const auto r = continuation_solve(p, geometric_schedule(0.1, 8));
  REQUIRE(r.levels.size() == 8);
  CHECK(r.boundary_sup == 0.0);
  CHECK(r.stop_reason == "schedule_exhausted");
  for (const auto& level : r.levels) {
    CHECK(level.solution.state.admissible());
    CHECK(max_error(p.grid, level.solution.u, radial_oracle) <= 5.0 * (h * h + level.epsilon));
  }
  // The C^{1,1} proxy stays bounded along the schedule.
  CHECK(r.levels.back().sup_laplacian < 2.0 * r.levels.front().sup_laplacian);
  CHECK(std::abs(r.levels.back().sup_gradient - 1.0 / std::sqrt(2.0)) < 0.05);
  CHECK(std::abs(r.levels.back().sup_boundary_laplacian - 3.0 / std::sqrt(2.0)) < 0.5);

  ContinuationSchedule greedy;
  greedy.epsilons = {5.0, 1.0};
  CHECK(code_of([&] { continuation_solve(p, greedy); }) == ErrorCode::ScheduleTooAggressive);
  CHECK(default_initial_epsilon(p) > 0.0);
}

TEST_CASE("flat right-hand side keeps the affine extension") {
  const double h = 1.0 / 16;
  Vec b(2);
  b << 0.3, -0.2;
  const auto p = make_problem(unit_disk(h), MetricPreset::flat(), ChiPreset::zero(), OperatorSpec::monge_ampere(2),
                              Expression::constant(0.0), Expression::affine(b, 0.1));
  const auto r = continuation_solve(p, geometric_schedule(0.1, 6));
  const auto& last = r.levels.back();
  CHECK(max_error(p.grid, last.solution.u, [&](const Vec& x) { return b.dot(x) + 0.1; }) < 2.0 * last.epsilon);
  CHECK(last.sup_laplacian < 4.0 * last.epsilon);
  CHECK(r.levels.front().sup_laplacian > last.sup_laplacian);
}

TEST_CASE("single-level schedule equals the direct solve") {
  const auto p = ma_disk(1.0 / 16, 1.0, 0.5);
  const double delta = 1.0 - sup_boundary_f(p.op).value.value();
  ContinuationSchedule s;
  s.epsilons = {0.5 * delta};
  const auto r = continuation_solve(p, s);
  const auto direct = newton_solve(p);
  CHECK((r.terminal().u - direct.u).cwiseAbs().maxCoeff() == 0.0);
  CHECK(r.terminal().iterations == direct.iterations);
}
