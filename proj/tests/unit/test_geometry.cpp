#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "fnlab/boundary_geometry.hpp"
#include "fnlab/chart_grid.hpp"
#include "fnlab/error.hpp"
#include "fnlab/metric_field.hpp"

using namespace fnlab;

namespace {

Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::IoError;
}

// Interior nodes whose stencils only touch lattice nodes.
bool uncut(const ChartGrid& g, int node) {
  for (int i = 0; i < g.dimension(); ++i)
    for (int j = 0; j < g.dimension(); ++j)
      for (const auto& t : g.second(node, i, j))
        if (g.is_boundary(t.node)) return false;
  return true;
}

int find_node(const ChartGrid& g, const Vec& x) {
  for (int i = 0; i < g.node_count(); ++i)
    if ((g.node(i).physical - x).norm() < 1e-12) return i;
  return -1;
}

}  // namespace

TEST_CASE("cartesian disk grid structure") {
  const auto disk = DomainSpec::disk(2, 1.0);
  const auto g = ChartGrid::build(disk, ChartKind::Cartesian, 1.0 / 16);
  CHECK(g.interior_count() > 700);
  CHECK(g.boundary_count() > 60);
  for (int i = g.interior_count(); i < g.node_count(); ++i) {
    CHECK(std::abs(disk.signed_distance(g.node(i).physical)) < 1e-13);
  }
  for (int i = 0; i < g.interior_count(); ++i) {
    CHECK(disk.signed_distance(g.node(i).physical) < 0.0);
    for (int a = 0; a < 2; ++a)
      for (const auto& t : g.second(i, a, a)) {
        CHECK(t.node >= 0);
        CHECK(t.node < g.node_count());
      }
  }
  CHECK(g.min_crossing_fraction() > 0.0);
  CHECK(code_of([&] { g.second(g.interior_count(), 0, 0); }) == ErrorCode::StencilOutOfDomain);
  CHECK(find_node(g, vec({1.0, 0.0})) >= g.interior_count());
}

TEST_CASE("polar grid structure and shared axis points") {
  const auto disk = DomainSpec::disk(2, 1.0);
  const double h = 1.0 / 16;
  const auto p = ChartGrid::build(disk, ChartKind::Polar, h);
  const auto c = ChartGrid::build(disk, ChartKind::Cartesian, h);
  CHECK(p.angular_count() % 4 == 0);
  CHECK(p.node(0).pole);
  CHECK(p.boundary_count() == p.angular_count());
  int shared = 0;
  for (int i = 0; i < p.node_count(); ++i) {
    if (find_node(c, p.node(i).physical) >= 0) ++shared;
  }
  CHECK(shared >= 4 * 16 + 1);
  CHECK(code_of([&] { ChartGrid::build(DomainSpec::disk(3, 1.0), ChartKind::Polar, h); }) ==
        ErrorCode::UnsupportedDomain);
}

TEST_CASE("christoffel symbols") {
  const auto disk = DomainSpec::disk(2, 1.0);
  const auto c = ChartGrid::build(disk, ChartKind::Cartesian, 0.125);
  for (const auto& gam : christoffel(MetricPreset::flat(), c))
    for (const auto& m : gam) CHECK(m.norm() == 0.0);

  const auto p = ChartGrid::build(disk, ChartKind::Polar, 0.125);
  const auto analytic = christoffel(MetricPreset::flat(), p, ChristoffelMethod::Analytic);
  const auto fd = christoffel(MetricPreset::flat(), p, ChristoffelMethod::Differences);
  for (int i = 1; i < p.node_count(); ++i) {
    const double r = p.node(i).chart(0);
    CHECK(analytic[i][0](1, 1) == doctest::Approx(-r));
    CHECK(analytic[i][1](0, 1) == doctest::Approx(1.0 / r));
    CHECK(analytic[i][1](1, 0) == doctest::Approx(1.0 / r));
    CHECK(analytic[i][0](0, 0) == 0.0);
    CHECK(analytic[i][0](0, 1) == 0.0);
    CHECK(analytic[i][1](1, 1) == 0.0);
    for (int k = 0; k < 2; ++k) CHECK((fd[i][k] - analytic[i][k]).norm() < 1e-9);
  }

  // Conformal metric: differences converge to the closed form at second order.
  const auto metric = MetricPreset::conformal(0.3);
  double err[2];
  for (int level = 0; level < 2; ++level) {
    const double h = 0.1 / (1 << level);
    const auto grid = ChartGrid::build(disk, ChartKind::Cartesian, h);
    const Vec x = vec({0.3, -0.4});
    const auto a = metric.christoffel_cartesian(x);
    const auto d = christoffel_by_differences([&](const Vec& y) { return metric.at(y); }, x, h);
    err[level] = 0.0;
    for (int k = 0; k < 2; ++k) {
      err[level] = std::max(err[level], (a[k] - d[k]).cwiseAbs().maxCoeff());
      CHECK((a[k] - a[k].transpose()).norm() == 0.0);
    }
    (void)grid;
  }
  CHECK(err[0] / err[1] == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("covariant hessian in flat charts") {
  const auto box = DomainSpec::box(vec({-1, -1}), vec({1, 1}));
  const auto g = ChartGrid::build(box, ChartKind::Cartesian, 0.125);
  const auto m = build_metric_field(g, MetricPreset::flat(), ChiPreset::zero());
  const Vec quad = g.sample([](const Vec& x) { return 0.5 * x.squaredNorm(); });
  for (const auto& hm : covariant_hessian(quad, m, g)) CHECK((hm - Mat::Identity(2, 2)).norm() < 1e-12);
  const Vec lin = g.sample([](const Vec& x) { return 3 * x(0) - 2 * x(1) + 1; });
  for (const auto& hm : covariant_hessian(lin, m, g)) CHECK(hm.norm() < 1e-11);

  const auto disk = DomainSpec::disk(2, 1.0);
  const auto gd = ChartGrid::build(disk, ChartKind::Cartesian, 0.0625);
  const auto md = build_metric_field(gd, MetricPreset::flat(), ChiPreset::zero());
  const Vec lind = gd.sample([](const Vec& x) { return 3 * x(0) - 2 * x(1) + 1; });
  for (const auto& hm : covariant_hessian(lind, md, gd)) CHECK(hm.norm() < 1e-9);
  const Vec quadd = gd.sample([](const Vec& x) { return 0.5 * x.squaredNorm(); });
  for (int i = 0; i < gd.interior_count(); ++i) {
    const Mat hm = covariant_hessian_at(quadd, md, gd, i);
    if (uncut(gd, i)) CHECK((hm - Mat::Identity(2, 2)).norm() < 1e-10);
    // Cut arms replace a value by a linear extrapolation, which can only
    // lower a convex function: the diagonal stays within [1/2, 1].
    CHECK(hm(0, 0) >= 0.5 - 1e-12);
    CHECK(hm(0, 0) <= 1.0 + 1e-12);
    CHECK(hm.determinant() > 0.0);
  }
}

TEST_CASE("covariant hessian in the polar chart") {
  const auto disk = DomainSpec::disk(2, 1.0);
  const auto p = ChartGrid::build(disk, ChartKind::Polar, 0.0625);
  const auto m = build_metric_field(p, MetricPreset::flat(), ChiPreset::zero());
  const Vec u = p.sample([](const Vec& x) { return x.squaredNorm(); });
  for (int i = 0; i < p.interior_count(); ++i) {
    const Mat hm = covariant_hessian_at(u, m, p, i);
    if (!p.node(i).pole) {
      const double r = p.node(i).chart(0);
      CHECK(hm(0, 0) == doctest::Approx(2.0).epsilon(1e-10));
      CHECK(hm(1, 1) == doctest::Approx(2 * r * r).epsilon(1e-9));
      CHECK(std::abs(hm(0, 1)) < 1e-9);
    }
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(hm, m.g[i]);
    CHECK(es.eigenvalues()(0) == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(es.eigenvalues()(1) == doctest::Approx(2.0).epsilon(1e-9));
  }
}

TEST_CASE("chart invariance of eigenvalue fields") {
  // Non-quadratic test function so that both charts carry truncation error.
  auto f = [](const Vec& x) { return std::exp(0.5 * x(0)) + x(0) * x(1) * x(1) + x.squaredNorm(); };
  auto exact = [](const Vec& x) {
    Mat h(2, 2);
    h << 0.25 * std::exp(0.5 * x(0)) + 2, 2 * x(1), 2 * x(1), 2 * x(0) + 2;
    Eigen::SelfAdjointEigenSolver<Mat> es(h);
    return Vec(es.eigenvalues());
  };
  const auto disk = DomainSpec::disk(2, 1.0);
  double worst[2] = {0, 0};
  for (int level = 0; level < 2; ++level) {
    const double h = 1.0 / (16 << level);
    const auto p = ChartGrid::build(disk, ChartKind::Polar, h);
    const auto mp = build_metric_field(p, MetricPreset::flat(), ChiPreset::zero());
    const Vec u = p.sample(f);
    for (int i = 0; i < p.interior_count(); ++i) {
      // Central differences in (r, theta) lose an order within O(h) of the center.
      const double r = p.node(i).chart(0);
      if (r < 0.25 || r > 0.8) continue;
      const Mat hm = covariant_hessian_at(u, mp, p, i);
      Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(hm, mp.g[i]);
      worst[level] = std::max(worst[level], (es.eigenvalues() - exact(p.node(i).physical)).cwiseAbs().maxCoeff());
    }
  }
  CHECK(worst[0] / worst[1] > 3.0);

  // u = x^2 + y^2: both charts give the eigenvalue pair (2, 2) at shared nodes.
  const auto p = ChartGrid::build(disk, ChartKind::Polar, 0.0625);
  const auto c = ChartGrid::build(disk, ChartKind::Cartesian, 0.0625);
  const auto mp = build_metric_field(p, MetricPreset::flat(), ChiPreset::zero());
  const auto mc = build_metric_field(c, MetricPreset::flat(), ChiPreset::zero());
  auto sq = [](const Vec& x) { return x.squaredNorm(); };
  const Vec up = p.sample(sq), uc = c.sample(sq);
  int shared = 0;
  for (int i = 0; i < p.interior_count(); ++i) {
    const int j = find_node(c, p.node(i).physical);
    if (j < 0 || c.is_boundary(j) || !uncut(c, j)) continue;
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> ep(covariant_hessian_at(up, mp, p, i), mp.g[i]);
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> ec(covariant_hessian_at(uc, mc, c, j), mc.g[j]);
    CHECK((ep.eigenvalues() - ec.eigenvalues()).norm() < 1e-9);
    ++shared;
  }
  CHECK(shared > 50);
}

TEST_CASE("boundary distance") {
  const auto disk = DomainSpec::disk(2, 1.0);
  const auto g = ChartGrid::build(disk, ChartKind::Cartesian, 0.1);
  const auto b = boundary_distance(g);
  const int i = find_node(g, vec({0.30000000000000004, 0.0}));
  REQUIRE(i >= 0);
  CHECK(b.sigma(i) == doctest::Approx(0.7));
  for (int k = g.interior_count(); k < g.node_count(); ++k) CHECK(b.sigma(k) == 0.0);

  const auto ann = DomainSpec::annulus(0.5, 1.0);
  const auto ga = ChartGrid::build(ann, ChartKind::Polar, 0.1);
  const auto ba = boundary_distance(ga);
  bool seen = false;
  for (int k = 0; k < ga.node_count(); ++k) {
    if (std::abs(ga.node(k).chart(0) - 0.6) < 1e-12) {
      CHECK(ba.sigma(k) == doctest::Approx(0.1));
      seen = true;
    }
  }
  CHECK(seen);

  CHECK(code_of([] {
          boundary_distance(ChartGrid::build(DomainSpec::box(vec({0, 0}), vec({1, 1})), ChartKind::Cartesian, 0.25));
        }) == ErrorCode::UnsupportedDomain);
  const auto slab = DomainSpec::box(vec({0, 0}), vec({1, 1}), {true, false});
  const auto bs = boundary_distance(ChartGrid::build(slab, ChartKind::Cartesian, 0.25));
  CHECK(bs.sigma.maxCoeff() == doctest::Approx(0.5));
}

TEST_CASE("distance gradient has unit length to second order on the collar") {
  const auto disk = DomainSpec::disk(2, 1.0);
  double worst[2] = {0, 0};
  for (int level = 0; level < 2; ++level) {
    const double h = 1.0 / (16 << level);
    const auto g = ChartGrid::build(disk, ChartKind::Cartesian, h);
    const auto b = boundary_distance(g);
    for (int i = 0; i < g.interior_count(); ++i) {
      if (b.sigma(i) > 0.25 || !uncut(g, i)) continue;
      const double gn = frame_gradient_at(b.sigma, g, i).norm();
      worst[level] = std::max(worst[level], std::abs(gn - 1.0));
      CHECK(gn >= 0.5);
      CHECK(gn <= 2.0);
    }
  }
  CHECK(worst[0] / worst[1] > 3.0);
}

TEST_CASE("collar masks are nested") {
  const auto disk = DomainSpec::disk(2, 1.0);
  const auto g = ChartGrid::build(disk, ChartKind::Cartesian, 0.0625);
  const int anchor = find_node(g, vec({1.0, 0.0}));
  REQUIRE(anchor >= 0);
  const Vec rho = distance_to_anchor(g, MetricPreset::flat(), anchor);
  const auto small = collar_nodes(rho, 0.2), big = collar_nodes(rho, 0.3);
  CHECK(small.size() < big.size());
  for (int k : small) CHECK(std::find(big.begin(), big.end(), k) != big.end());
  const Vec rho_c = distance_to_anchor(g, MetricPreset::conformal(0.0001), anchor);
  // Graph distance dominates the straight line and exceeds it by at most
  // the lattice direction error plus an O(h) detour through boundary nodes.
  for (int k = 0; k < g.node_count(); ++k) {
    CHECK(rho_c(k) >= rho(k) - 1e-12);
    CHECK(rho_c(k) <= 1.09 * rho(k) + 2 * g.spacing());
  }
}

TEST_CASE("principal curvatures") {
  const auto flat = MetricPreset::flat();
  const auto disk = ChartGrid::build(DomainSpec::disk(2, 1.0), ChartKind::Cartesian, 0.125);
  for (const auto& k : principal_curvatures(disk, flat).kappa) CHECK(k(0) == doctest::Approx(1.0));

  const auto ann = ChartGrid::build(DomainSpec::annulus(0.5, 1.0), ChartKind::Polar, 0.125);
  const auto ka = principal_curvatures(ann, flat);
  for (std::size_t e = 0; e < ka.nodes.size(); ++e) {
    const double r = ann.node(ka.nodes[e]).chart(0);
    CHECK(ka.kappa[e](0) == doctest::Approx(r > 0.75 ? 1.0 : -2.0));
  }

  const auto rb = DomainSpec::rounded_box(vec({-1, -1}), vec({1, 1}), 0.25);
  CHECK(principal_curvatures_at(rb, flat, vec({1, 0.2}))(0) == doctest::Approx(0.0));
  CHECK(principal_curvatures_at(rb, flat, vec({-0.3, -1}))(0) == doctest::Approx(0.0));
  const double s = std::sqrt(0.5) * 0.25;
  CHECK(principal_curvatures_at(rb, flat, vec({0.75 + s, 0.75 + s}))(0) == doctest::Approx(4.0));

  for (double radius : {0.5, 2.0, 3.0}) {
    const auto d = DomainSpec::disk(3, radius);
    const Vec k = principal_curvatures_at(d, flat, vec({0, radius * 0.6, radius * 0.8}));
    CHECK(k.size() == 2);
    CHECK(k(0) == doctest::Approx(1.0 / radius));
    CHECK(k(1) == doctest::Approx(1.0 / radius));
  }

  // Conformal change e^{2w}: k = e^{-w} (k_E + dw/dn_outward).
  const double c = 0.4, radius = 0.8;
  const Vec kc = principal_curvatures_at(DomainSpec::disk(2, radius), MetricPreset::conformal(c),
                                         vec({0, radius}));
  CHECK(kc(0) == doctest::Approx(std::exp(-c * radius * radius) * (1 / radius + 2 * c * radius)));

  CHECK(code_of([&] {
          principal_curvatures_at(DomainSpec::box(vec({0, 0}), vec({1, 1})), flat, vec({1, 0.5}));
        }) == ErrorCode::UnsupportedDomain);
}

TEST_CASE("projected cone") {
  CHECK(gamma_infinity(ConeSpec::garding(2, 1)).is_whole_space());
  CHECK(gamma_infinity(ConeSpec::positive(2)) == ConeSpec::garding(1, 1));
  CHECK(gamma_infinity(ConeSpec::garding(3, 2)) == ConeSpec::garding(2, 1));
  CHECK(projected_cone_contains(ConeSpec::garding(2, 1), vec({-100})));
  CHECK(projected_cone_contains(ConeSpec::positive(2), vec({0.5})));
  CHECK_FALSE(projected_cone_contains(ConeSpec::positive(2), vec({-0.5})));
  std::mt19937_64 rng(8);
  std::normal_distribution<double> nd;
  for (int n = 2; n <= 5; ++n) {
    for (int k = 1; k <= n; ++k) {
      const auto cone = ConeSpec::garding(n, k);
      const auto proj = gamma_infinity(cone);
      for (int s = 0; s < 300; ++s) {
        Vec l(n - 1);
        for (int i = 0; i < n - 1; ++i) l(i) = nd(rng);
        if (std::abs(proj.signed_distance(l)) < 1e-6) continue;
        CHECK(proj.contains(l) == projected_cone_contains(cone, l));
      }
    }
  }
}

TEST_CASE("boundary cone condition") {
  const auto flat = MetricPreset::flat();
  const auto disk = ChartGrid::build(DomainSpec::disk(2, 1.0), ChartKind::Polar, 0.125);
  const auto kd = principal_curvatures(disk, flat);
  CHECK(check_boundary_cone_condition(kd, ConeSpec::garding(2, 1)).passed);
  const auto fail = check_boundary_cone_condition(kd, ConeSpec::positive(2));
  CHECK_FALSE(fail.passed);
  CHECK(fail.worst_distance == doctest::Approx(-1.0));
  CHECK(fail.worst_node >= disk.interior_count());

  const auto ann = ChartGrid::build(DomainSpec::annulus(0.5, 1.0), ChartKind::Polar, 0.125);
  const auto ka = principal_curvatures(ann, flat);
  const auto ra = check_boundary_cone_condition(ka, ConeSpec::positive(2));
  CHECK_FALSE(ra.passed);
  for (std::size_t e = 0; e < ka.nodes.size(); ++e) {
    const bool inner = ann.node(ka.nodes[e]).chart(0) < 0.75;
    CHECK((ra.distances[e] >= 0.0) == inner);
  }
}
