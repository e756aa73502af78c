#include "fnlab/chart_grid.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>

#include "fnlab/error.hpp"

namespace fnlab {

double apply(const Stencil& s, const Vec& values) {
  double acc = 0.0;
  for (const auto& t : s) acc += t.weight * values(t.node);
  return acc;
}

namespace {

constexpr double kInteriorDepth = 1e-3;  // in units of h

// Linear combination of stencils with duplicate nodes merged.
Stencil combine(std::initializer_list<std::pair<const Stencil*, double>> parts) {
  std::map<int, double> acc;
  for (const auto& [s, c] : parts)
    for (const auto& t : *s) acc[t.node] += c * t.weight;
  Stencil out;
  out.reserve(acc.size());
  for (const auto& [node, w] : acc)
    if (w != 0.0) out.push_back({node, w});
  return out;
}

Stencil scaled(const Stencil& s, double c) {
  Stencil out = s;
  for (auto& t : out) t.weight *= c;
  return out;
}

}  // namespace

ChartGrid ChartGrid::build(const DomainSpec& domain, ChartKind chart, double h, int angular_count) {
  if (!(h > 0.0)) throw Error(ErrorCode::ValidationError, "grid spacing must be positive");
  ChartGrid g(domain, chart, h);
  if (chart == ChartKind::Cartesian) {
    g.build_cartesian();
  } else {
    if (domain.dimension() != 2 ||
        (domain.kind() != DomainKind::Disk && domain.kind() != DomainKind::Annulus)) {
      throw Error(ErrorCode::UnsupportedDomain, "polar chart needs a planar disk or annulus");
    }
    g.build_polar(angular_count);
  }
  return g;
}

const Stencil& ChartGrid::first(int node, int k) const {
  if (node < 0 || node >= interior_count_) {
    throw Error(ErrorCode::StencilOutOfDomain, "no derivative stencil at node " + std::to_string(node));
  }
  return first_[node][k];
}

const Stencil& ChartGrid::second(int node, int i, int j) const {
  if (node < 0 || node >= interior_count_) {
    throw Error(ErrorCode::StencilOutOfDomain, "no derivative stencil at node " + std::to_string(node));
  }
  return second_[node][i * dimension() + j];
}

Vec ChartGrid::chart_to_physical(const Vec& q) const {
  if (chart_ == ChartKind::Cartesian) return q;
  Vec x(2);
  x << q(0) * std::cos(q(1)), q(0) * std::sin(q(1));
  return domain_.center() + x;
}

Mat ChartGrid::chart_jacobian(const Vec& q) const {
  const int n = dimension();
  if (chart_ == ChartKind::Cartesian) return Mat::Identity(n, n);
  Mat j(2, 2);
  const double c = std::cos(q(1)), s = std::sin(q(1));
  j << c, -q(0) * s, s, q(0) * c;
  return j;
}

Mat ChartGrid::frame_jacobian(int node) const {
  const auto& nd = nodes_[node];
  if (nd.pole) return Mat::Identity(2, 2);
  return chart_jacobian(nd.chart);
}

Vec ChartGrid::sample(const std::function<double(const Vec&)>& f) const {
  Vec v(node_count());
  for (int i = 0; i < node_count(); ++i) v(i) = f(nodes_[i].physical);
  return v;
}

void ChartGrid::build_cartesian() {
  const int n = dimension();
  const double h = h_;
  // Lattice x = origin + h * index.
  Vec origin(n);
  std::vector<int> lo(n), count(n);
  std::vector<bool> periodic(n, false);
  const Vec blo = domain_.bounding_lower(), bhi = domain_.bounding_upper();
  for (int a = 0; a < n; ++a) {
    if (domain_.kind() == DomainKind::Box || domain_.kind() == DomainKind::RoundedBox) {
      const double cells = (bhi(a) - blo(a)) / h;
      const double rounded = std::round(cells);
      if (std::abs(cells - rounded) > 1e-9 * std::max(1.0, cells)) {
        throw Error(ErrorCode::ValidationError, "box side lengths must be multiples of the grid spacing");
      }
      origin(a) = blo(a);
      periodic[a] = domain_.is_periodic(a);
      if (periodic[a]) {
        lo[a] = 0;
        count[a] = static_cast<int>(rounded);
      } else {
        lo[a] = -2;
        count[a] = static_cast<int>(rounded) + 5;
      }
    } else {
      origin(a) = domain_.center()(a);
      lo[a] = static_cast<int>(std::floor((blo(a) - origin(a)) / h)) - 2;
      count[a] = static_cast<int>(std::ceil((bhi(a) - origin(a)) / h)) + 3 - lo[a];
    }
  }
  std::vector<long> stride(n);
  long total = 1;
  for (int a = n - 1; a >= 0; --a) {
    stride[a] = total;
    total *= count[a];
  }
  auto position = [&](const std::vector<int>& idx) {
    Vec x(n);
    for (int a = 0; a < n; ++a) x(a) = origin(a) + h * idx[a];
    return x;
  };
  auto unflatten = [&](long flat) {
    std::vector<int> idx(n);
    for (int a = 0; a < n; ++a) {
      idx[a] = lo[a] + static_cast<int>(flat / stride[a]);
      flat %= stride[a];
    }
    return idx;
  };
  // Lattice slot of idx with periodic wrap; -1 outside the lattice window.
  auto flatten = [&](std::vector<int> idx) -> long {
    long f = 0;
    for (int a = 0; a < n; ++a) {
      int off = idx[a] - lo[a];
      if (periodic[a]) off = ((off % count[a]) + count[a]) % count[a];
      if (off < 0 || off >= count[a]) return -1;
      f += off * stride[a];
    }
    return f;
  };

  std::vector<int> slot_to_node(total, -1);
  for (long f = 0; f < total; ++f) {
    const Vec x = position(unflatten(f));
    if (domain_.signed_distance(x) < -kInteriorDepth * h) {
      slot_to_node[f] = static_cast<int>(nodes_.size());
      GridNode nd;
      nd.chart = x;
      nd.physical = x;
      nodes_.push_back(std::move(nd));
    }
  }
  interior_count_ = static_cast<int>(nodes_.size());
  if (interior_count_ == 0) throw Error(ErrorCode::ValidationError, "grid has no interior nodes");

  std::map<std::vector<long long>, int> boundary_ids;
  auto boundary_node = [&](const Vec& b) {
    std::vector<long long> key(n);
    for (int a = 0; a < n; ++a) key[a] = std::llround(b(a) / (1e-9 * h));
    auto it = boundary_ids.find(key);
    if (it != boundary_ids.end()) return it->second;
    const int id = static_cast<int>(nodes_.size());
    GridNode nd;
    nd.chart = b;
    nd.physical = b;
    nd.boundary = true;
    nodes_.push_back(std::move(nd));
    boundary_ids.emplace(std::move(key), id);
    return id;
  };

  // Value of u at x_I + h d as a stencil.
  auto arm = [&](int node, const std::vector<int>& idx, const std::vector<int>& d) -> Stencil {
    std::vector<int> nb(n);
    for (int a = 0; a < n; ++a) nb[a] = idx[a] + d[a];
    const long f = flatten(nb);
    if (f >= 0 && slot_to_node[f] >= 0) return {{slot_to_node[f], 1.0}};
    const Vec x = nodes_[node].physical;
    Vec step(n);
    for (int a = 0; a < n; ++a) step(a) = h * d[a];
    auto s_at = [&](double t) { return domain_.signed_distance(x + t * step); };
    double hi = -1.0;
    for (double t : {1.0, 1.25, 1.5, 1.75, 2.0}) {
      if (s_at(t) >= 0.0) {
        hi = t;
        break;
      }
    }
    if (hi < 0.0) {
      // Grazing arm: the lattice point sits within 1e-3 h of the boundary
      // and stays inside; its boundary projection stands in for it.
      const int b = boundary_node(domain_.project_to_boundary(x + step));
      return {{b, 1.0}};
    }
    double lo_t = 0.0;
    double theta = hi;
    if (s_at(hi) != 0.0) {
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo_t + hi);
        (s_at(mid) < 0.0 ? lo_t : hi) = mid;
      }
      theta = hi;
    }
    const int b = boundary_node(domain_.project_to_boundary(x + theta * step));
    min_crossing_ = std::min(min_crossing_, theta);
    return {{node, 1.0 - 1.0 / theta}, {b, 1.0 / theta}};
  };

  first_.resize(interior_count_);
  second_.resize(interior_count_);
  for (int I = 0; I < interior_count_; ++I) {
    std::vector<int> idx(n);
    for (int a = 0; a < n; ++a) idx[a] = static_cast<int>(std::llround((nodes_[I].physical(a) - origin(a)) / h));
    const Stencil self = {{I, 1.0}};
    first_[I].resize(n);
    second_[I].resize(n * n);
    for (int a = 0; a < n; ++a) {
      std::vector<int> e(n, 0);
      e[a] = 1;
      std::vector<int> me(n, 0);
      me[a] = -1;
      const Stencil up = arm(I, idx, e), dn = arm(I, idx, me);
      first_[I][a] = combine({{&up, 0.5 / h}, {&dn, -0.5 / h}});
      second_[I][a * n + a] = combine({{&up, 1.0 / (h * h)}, {&dn, 1.0 / (h * h)}, {&self, -2.0 / (h * h)}});
      for (int b = a + 1; b < n; ++b) {
        std::vector<int> pp(n, 0), pm(n, 0), mp(n, 0), mm(n, 0);
        pp[a] = 1, pp[b] = 1;
        pm[a] = 1, pm[b] = -1;
        mp[a] = -1, mp[b] = 1;
        mm[a] = -1, mm[b] = -1;
        const Stencil spp = arm(I, idx, pp), spm = arm(I, idx, pm), smp = arm(I, idx, mp),
                      smm = arm(I, idx, mm);
        const double w = 0.25 / (h * h);
        second_[I][a * n + b] = combine({{&spp, w}, {&spm, -w}, {&smp, -w}, {&smm, w}});
        second_[I][b * n + a] = second_[I][a * n + b];
      }
    }
  }
}

void ChartGrid::build_polar(int angular_count) {
  const bool disk = domain_.kind() == DomainKind::Disk;
  const double r_in = disk ? 0.0 : domain_.inner_radius();
  const double r_out = domain_.radius();
  const int rings = std::max(2, static_cast<int>(std::lround((r_out - r_in) / h_)));
  const double hr = (r_out - r_in) / rings;
  radial_spacing_ = hr;
  int m = angular_count;
  if (m == 0) m = 4 * static_cast<int>(std::ceil(2 * std::numbers::pi * r_out / (4 * h_)));
  if (m < 8 || m % 4 != 0) throw Error(ErrorCode::ValidationError, "angular count must be a multiple of 4, at least 8");
  angular_count_ = m;
  const double ht = 2 * std::numbers::pi / m;
  const Vec& c = domain_.center();

  // Ring i = 0 is the pole (disk) or the inner circle (annulus).
  std::vector<std::vector<int>> id(rings + 1, std::vector<int>(m, -1));
  auto add = [&](int i, int j, bool boundary) {
    GridNode nd;
    const double r = r_in + i * hr;
    nd.chart = Vec(2);
    nd.chart << r, j * ht;
    nd.physical = chart_to_physical(nd.chart);
    nd.boundary = boundary;
    id[i][j] = static_cast<int>(nodes_.size());
    nodes_.push_back(std::move(nd));
  };
  int pole = -1;
  if (disk) {
    pole = 0;
    GridNode nd;
    nd.chart = Vec::Zero(2);
    nd.physical = c;
    nd.pole = true;
    nodes_.push_back(std::move(nd));
    std::fill(id[0].begin(), id[0].end(), pole);
  }
  for (int i = 1; i < rings; ++i)
    for (int j = 0; j < m; ++j) add(i, j, false);
  interior_count_ = static_cast<int>(nodes_.size());
  if (!disk)
    for (int j = 0; j < m; ++j) add(0, j, true);
  for (int j = 0; j < m; ++j) add(rings, j, true);

  auto at = [&](int i, int j) -> Stencil { return {{id[i][((j % m) + m) % m], 1.0}}; };
  first_.resize(interior_count_);
  second_.resize(interior_count_);
  if (disk) {
    // Fourier modes of ring 1 give the Cartesian derivatives at the center.
    Stencil a0, a1, b1, a2, b2;
    for (int j = 0; j < m; ++j) {
      const double t = j * ht;
      const int node = id[1][j];
      a0.push_back({node, 1.0 / m});
      a1.push_back({node, 2.0 / m * std::cos(t)});
      b1.push_back({node, 2.0 / m * std::sin(t)});
      a2.push_back({node, 2.0 / m * std::cos(2 * t)});
      b2.push_back({node, 2.0 / m * std::sin(2 * t)});
    }
    const Stencil self = {{pole, 1.0}};
    const double rho2 = hr * hr;
    const Stencil lap = combine({{&a0, 4.0 / rho2}, {&self, -4.0 / rho2}});
    first_[pole] = {scaled(a1, 1.0 / hr), scaled(b1, 1.0 / hr)};
    second_[pole].resize(4);
    second_[pole][0] = combine({{&lap, 0.5}, {&a2, 2.0 / rho2}});
    second_[pole][3] = combine({{&lap, 0.5}, {&a2, -2.0 / rho2}});
    second_[pole][1] = second_[pole][2] = scaled(b2, 2.0 / rho2);
  }
  for (int i = 1; i < rings; ++i) {
    for (int j = 0; j < m; ++j) {
      const int node = id[i][j];
      const Stencil self = at(i, j);
      const Stencil rp = at(i + 1, j), rm = at(i - 1, j), tp = at(i, j + 1), tm = at(i, j - 1);
      const Stencil pp = at(i + 1, j + 1), pm = at(i + 1, j - 1), mp = at(i - 1, j + 1),
                    mm = at(i - 1, j - 1);
      first_[node] = {combine({{&rp, 0.5 / hr}, {&rm, -0.5 / hr}}),
                      combine({{&tp, 0.5 / ht}, {&tm, -0.5 / ht}})};
      second_[node].resize(4);
      second_[node][0] = combine({{&rp, 1 / (hr * hr)}, {&rm, 1 / (hr * hr)}, {&self, -2 / (hr * hr)}});
      second_[node][3] = combine({{&tp, 1 / (ht * ht)}, {&tm, 1 / (ht * ht)}, {&self, -2 / (ht * ht)}});
      const double w = 0.25 / (hr * ht);
      second_[node][1] = second_[node][2] = combine({{&pp, w}, {&pm, -w}, {&mp, -w}, {&mm, w}});
    }
  }
}

}  // namespace fnlab
