#include "fnlab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fnlab/boundary_geometry.hpp"
#include "fnlab/error.hpp"
#include "fnlab/json_util.hpp"

namespace fnlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Euclidean orthonormal complement of v, then made g-orthonormal.
Mat tangent_basis(const Vec& v, const Mat& g) {
  const int n = static_cast<int>(v.size());
  Eigen::HouseholderQR<Mat> qr(v);
  const Mat q = qr.householderQ() * Mat::Identity(n, n);
  const Mat complement = q.rightCols(n - 1);
  const Mat m = complement.transpose() * g * complement;
  const Eigen::LLT<Mat> llt(m);
  const Mat linv = llt.matrixL().solve(Mat::Identity(n - 1, n - 1));
  return complement * linv.transpose();
}

Vec inward_normal(const Vec& sigma_gradient, const Mat& g) {
  const Vec raised = g.ldlt().solve(sigma_gradient);
  return raised / std::sqrt(sigma_gradient.dot(raised));
}

// Physical gradient of a node field at any node.
Vec physical_gradient(const ChartProblem& p, const BoundaryJetFitter& fitter, const Vec& u, int node) {
  if (node >= p.unknowns()) return fitter.partials(u, node - p.unknowns()).gradient;
  const Mat j = p.grid.frame_jacobian(node);
  return j.transpose().fullPivLu().solve(frame_gradient_at(u, p.grid, node));
}

Mat chi_physical(const ChartProblem& p, const Mat& g) { return p.chi.metric_multiple * g; }

}  // namespace

SandwichReport sandwich_check(const Vec& u, const Vec& subsolution, const Vec& h, double tolerance) {
  SandwichReport r;
  r.tolerance = tolerance;
  r.lower_slack = kInf;
  r.upper_slack = kInf;
  double worst = kInf;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double lower = u(i) - subsolution(i);
    const double upper = h(i) - u(i);
    r.lower_slack = std::min(r.lower_slack, lower);
    r.upper_slack = std::min(r.upper_slack, upper);
    if (lower < -tolerance || upper < -tolerance) ++r.violations;
    const double slack = std::min(lower, upper);
    if (slack < worst) {
      worst = slack;
      r.worst_node = static_cast<int>(i);
    }
  }
  r.passed = r.violations == 0;
  return r;
}

AdaptedFrame adapted_frame(const ChartProblem& p, int node, const Mat& subsolution_tensor) {
  AdaptedFrame f;
  f.node = node;
  f.position = p.grid.node(node).physical;
  const DomainSpec& d = p.grid.domain();
  f.metric = p.metric.at(f.position);
  f.sigma_gradient = -d.signed_distance_gradient(f.position);
  if (!(f.sigma_gradient.norm() > 1e-8)) {
    throw Error(ErrorCode::FrameDegenerate, "distance gradient vanishes at boundary node " + std::to_string(node));
  }
  const int n = p.grid.dimension();
  const Vec normal = inward_normal(f.sigma_gradient, f.metric);
  f.normal_sigma = f.sigma_gradient.dot(normal);
  Mat tangents = tangent_basis(f.sigma_gradient, f.metric);
  const Mat block = tangents.transpose() * subsolution_tensor * tangents;
  Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (block + block.transpose()));
  tangents = (tangents * eig.eigenvectors()).eval();
  f.frame = Mat(n, n);
  f.frame.leftCols(n - 1) = tangents;
  f.frame.col(n - 1) = normal;
  f.sigma_hessian = -d.signed_distance_hessian(f.position);
  if (!p.metric.is_flat()) {
    const auto gamma = p.metric.christoffel_cartesian(f.position);
    for (int k = 0; k < n; ++k) f.sigma_hessian -= gamma[k] * f.sigma_gradient(k);
  }
  return f;
}

EstimateReport boundary_hessian_report(const ChartProblem& p, const Vec& u) {
  const BoundaryJetFitter fitter(p.grid, p.metric);
  return boundary_hessian_report(p, u, fitter);
}

EstimateReport boundary_hessian_report(const ChartProblem& p, const Vec& u, const BoundaryJetFitter& fitter) {
  EstimateReport r;
  const int n = p.grid.dimension();
  const FieldSummary summary = summarize_field(p.grid, p.field, fitter, u);
  r.sup_laplacian = {summary.sup_laplacian, summary.sup_laplacian_node};
  r.sup_gradient = {summary.sup_gradient, summary.sup_gradient_node};
  r.sup_boundary_laplacian = {-kInf, -1};
  r.mixed_ratio = {-kInf, -1};
  r.normal_ratio = {-kInf, -1};

  auto raise = [](RatioMax& m, double v, int node) {
    if (v > m.value || m.node < 0) m = {v, node};
  };

  for (int b = 0; b < fitter.boundary_count(); ++b) {
    const int node = fitter.node(b);
    const BoundaryJet ju = fitter.jet(u, b);
    const BoundaryJet jsub = fitter.jet(p.subsolution, b);
    const BoundaryJet jphi = fitter.jet(p.phi, b);
    const Mat g = fitter.metric_at(b);
    const Mat chi = chi_physical(p, g);
    const AdaptedFrame f = adapted_frame(p, node, jsub.hessian + chi);
    const Mat& e = f.frame;

    BoundaryNodeEstimate est;
    est.node = node;
    est.position = f.position;
    est.laplacian = g.ldlt().solve(ju.hessian).trace();
    const Mat hess = e.transpose() * ju.hessian * e;
    est.tensor = e.transpose() * (ju.hessian + chi) * e;
    est.sub_tensor = e.transpose() * (jsub.hessian + chi) * e;
    const Vec normal = e.col(n - 1);
    est.normal_gap = normal.dot(ju.gradient - jsub.gradient);

    double mixed = 0.0;
    double mixed_sq = 0.0;
    for (int a = 0; a < n - 1; ++a) {
      mixed = std::max(mixed, std::abs(hess(a, n - 1)));
      mixed_sq += est.tensor(a, n - 1) * est.tensor(a, n - 1);
    }
    est.mixed_ratio = mixed / (1.0 + summary.sup_gradient);
    est.normal_ratio = hess(n - 1, n - 1) / (1.0 + mixed_sq);

    const Vec trace_gap = ju.gradient - jphi.gradient;
    const Mat sigma_frame = e.transpose() * f.sigma_hessian * e;
    const Mat sub_hess = e.transpose() * jsub.hessian * e;
    for (int a = 0; a < n - 1; ++a) {
      est.trace_identity_residual = std::max(est.trace_identity_residual, std::abs(e.col(a).dot(trace_gap)));
      for (int c = 0; c < n - 1; ++c) {
        const double predicted = sub_hess(a, c) + sigma_frame(a, c) / f.normal_sigma * est.normal_gap;
        est.tangential_identity_residual =
            std::max(est.tangential_identity_residual, std::abs(hess(a, c) - predicted));
      }
    }

    raise(r.sup_boundary_laplacian, est.laplacian, node);
    raise(r.mixed_ratio, est.mixed_ratio, node);
    raise(r.normal_ratio, est.normal_ratio, node);
    raise(r.trace_identity_residual, est.trace_identity_residual, node);
    raise(r.tangential_identity_residual, est.tangential_identity_residual, node);
    r.nodes.push_back(std::move(est));
  }

  const double grad_sq = 1.0 + summary.sup_gradient * summary.sup_gradient;
  r.boundary_ratio = r.sup_boundary_laplacian.value / grad_sq;
  r.global_ratio = r.sup_laplacian.value / grad_sq;
  r.passed = true;
  for (double v : {r.boundary_ratio, r.global_ratio, r.mixed_ratio.value, r.normal_ratio.value}) {
    if (!std::isfinite(v) || v > r.ratio_ceiling) r.passed = false;
  }
  return r;
}

BoundaryFrameData boundary_frame_data(const BoundaryNodeEstimate& e, const AdaptedFrame& f) {
  const int n = static_cast<int>(e.tensor.rows());
  BoundaryFrameData d;
  d.sub_tangential = e.sub_tensor.diagonal().head(n - 1);
  d.mixed = e.tensor.col(n - 1).head(n - 1);
  const Mat sigma_frame = f.frame.transpose() * f.sigma_hessian * f.frame;
  d.distance_hessian = sigma_frame.topLeftCorner(n - 1, n - 1) / f.normal_sigma;
  d.normal_gap = std::max(0.0, e.normal_gap);
  d.tangential = e.tensor.topLeftCorner(n - 1, n - 1);
  d.normal_entry = e.tensor(n - 1, n - 1);
  return d;
}

NormalAudit normal_threshold_audit(const ChartProblem& p, const Vec& u, const Vec& psi, int samples) {
  const BoundaryJetFitter fitter(p.grid, p.metric);
  const EstimateReport report = boundary_hessian_report(p, u, fitter);
  NormalAudit audit;
  audit.passed = true;
  audit.min_normal_slack = kInf;
  const int count = static_cast<int>(report.nodes.size());
  const int stride = std::max(1, (count + std::max(1, samples) - 1) / std::max(1, samples));
  for (int b = 0; b < count; b += stride) {
    const BoundaryNodeEstimate& est = report.nodes[b];
    const AdaptedFrame f = adapted_frame(p, est.node, fitter.jet(p.subsolution, b).hessian +
                                                          chi_physical(p, fitter.metric_at(b)));
    NormalAuditEntry entry;
    entry.node = est.node;
    entry.psi = psi(est.node);
    entry.normal_entry = est.tensor(p.grid.dimension() - 1, p.grid.dimension() - 1);
    entry.certificate = verify_normal_estimate(p.op, boundary_frame_data(est, f), entry.psi);
    if (!entry.certificate.passed) audit.passed = false;
    const double slack = entry.certificate.rc - entry.normal_entry;
    if (slack < audit.min_normal_slack) {
      audit.min_normal_slack = slack;
      audit.worst_node = est.node;
    }
    audit.entries.push_back(std::move(entry));
  }
  if (audit.entries.empty()) audit.passed = false;
  return audit;
}

std::vector<DeltaLevel> delta_levels(const ContinuationReport& r) {
  std::vector<DeltaLevel> out;
  for (const auto& l : r.levels) out.push_back({l.epsilon, l.sup_boundary_laplacian, l.sup_gradient});
  return out;
}

DeltaStudy delta_independence_study(const std::vector<DeltaLevel>& levels) {
  if (levels.size() < 4) {
    throw Error(ErrorCode::InsufficientLevels,
                "need at least 4 epsilon levels, got " + std::to_string(levels.size()));
  }
  DeltaStudy s;
  for (const auto& l : levels) {
    s.epsilons.push_back(l.epsilon);
    s.constants.push_back(l.sup_boundary_laplacian / (1.0 + l.sup_gradient * l.sup_gradient));
  }
  const std::size_t first = s.constants.size() - 4;
  double lo = kInf, hi = -kInf;
  for (std::size_t k = first; k < s.constants.size(); ++k) {
    lo = std::min(lo, s.constants[k]);
    hi = std::max(hi, s.constants[k]);
  }
  s.spread = lo > 0.0 ? hi / lo : kInf;
  if (lo > 0.0) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = first; k < s.constants.size(); ++k) {
      const double x = std::log(1.0 / s.epsilons[k]);
      const double y = std::log(s.constants[k]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double denom = 4.0 * sxx - sx * sx;
    s.growth_exponent = denom > 0.0 ? (4.0 * sxy - sx * sy) / denom : 0.0;
  } else {
    s.growth_exponent = kInf;
  }
  s.verdict = s.spread <= 4.0 ? DeltaVerdict::Bounded : DeltaVerdict::Growing;
  return s;
}

BarrierProbe barrier_probe(const ChartProblem& p, const Vec& u, double delta, int anchor) {
  if (anchor < p.unknowns() || anchor >= p.grid.node_count()) {
    throw Error(ErrorCode::ValidationError, "barrier anchor must be a boundary node");
  }
  const int n = p.grid.dimension();
  const BoundaryJetFitter fitter(p.grid, p.metric);
  const BoundaryGeometry geom = boundary_distance(p.grid);
  const Vec rho = distance_to_anchor(p.grid, p.metric, anchor);

  BarrierProbe probe;
  probe.anchor = anchor;
  probe.collar = collar_nodes(rho, delta);
  const auto interior = std::count_if(probe.collar.begin(), probe.collar.end(),
                                      [&](int k) { return k < p.unknowns(); });
  if (interior < n + 1) {
    throw Error(ErrorCode::CollarTooSmall, "collar of radius " + std::to_string(delta) + " holds " +
                                               std::to_string(interior) + " interior nodes");
  }

  const FieldSummary summary = summarize_field(p.grid, p.field, fitter, u);
  BarrierParams& par = probe.params;
  par.delta = delta;
  par.b1 = 1.0 + summary.sup_gradient * summary.sup_gradient;

  // beta0 from the subsolution normals along the boundary.
  par.beta0 = kInf;
  for (int b = 0; b < fitter.boundary_count(); ++b) {
    const Mat g = fitter.metric_at(b);
    const Vec lambda = eigenvalues_wrt(fitter.jet(p.subsolution, b).hessian + chi_physical(p, g), g);
    if (!p.op.cone().is_interior(lambda)) continue;
    par.beta0 = std::min(par.beta0, 0.5 * unit_normal(p.op, lambda).minCoeff());
  }

  const int anchor_b = anchor - p.unknowns();
  const Mat anchor_sub = fitter.jet(p.subsolution, anchor_b).hessian + chi_physical(p, fitter.metric_at(anchor_b));
  const AdaptedFrame f0 = adapted_frame(p, anchor, anchor_sub);
  const Vec normal0 = f0.frame.col(n - 1);

  const int c = static_cast<int>(probe.collar.size());
  Vec gap(c), rho_sq(c), sig(c), tangential(c), transport(c);
  for (int k = 0; k < c; ++k) {
    const int node = probe.collar[k];
    const bool on_boundary = node >= p.unknowns();
    const Vec du = physical_gradient(p, fitter, u, node) - physical_gradient(p, fitter, p.phi, node);
    const Vec& dsig = geom.sigma_gradient[node];
    gap(k) = p.subsolution(node) - u(node);
    rho_sq(k) = rho(node) * rho(node);
    sig(k) = geom.sigma(node);
    double worst = 0.0;
    for (int a = 0; a < n - 1; ++a) {
      const Vec ea = f0.frame.col(a);
      const double eta = ea.dot(dsig) / normal0.dot(dsig);
      worst = std::max(worst, std::abs(ea.dot(du) - eta * normal0.dot(du)));
    }
    const Mat g = p.metric.at(p.grid.node(node).physical);
    const Mat tangents = tangent_basis(dsig, g);
    const double tsum = (tangents.transpose() * du).squaredNorm();
    if (on_boundary) {
      // u - phi vanishes on the boundary, so both tangential terms are zero
      // there; the fitted values only measure discretization error.
      probe.boundary_tangential_residual = std::max(probe.boundary_tangential_residual, worst);
      tangential(k) = 0.0;
      transport(k) = 0.0;
    } else {
      tangential(k) = tsum;
      transport(k) = worst;
    }
  }

  const double sb = std::sqrt(par.b1);
  const Vec fixed = tangential / sb + transport;
  auto evaluate_rung = [&](double a1, double a2, double a3, double nn) {
    const double t = nn * delta;
    return Vec(sb * (a1 * gap - a2 * rho_sq + a3 * (nn * sig.cwiseProduct(sig) - t * sig)) + fixed);
  };
  const double tol = 1e-10;
  for (int e1 = 2; e1 <= 10 && !probe.found; ++e1) {
    for (int e2 = 1; e2 < e1 && !probe.found; ++e2) {
      for (int e3 = 0; e3 < e2 && !probe.found; ++e3) {
        for (int en = 0; en <= 4 && !probe.found; ++en) {
          const double a1 = std::pow(10.0, e1), a2 = std::pow(10.0, e2), a3 = std::pow(10.0, e3);
          const double nn = std::pow(10.0, en);
          ++probe.rungs_tried;
          probe.barrier = evaluate_rung(a1, a2, a3, nn);
          par.a1 = a1;
          par.a2 = a2;
          par.a3 = a3;
          par.n = nn;
          par.t = nn * delta;
          probe.max_value = probe.barrier.maxCoeff();
          probe.found = probe.max_value <= tol;
        }
      }
    }
  }
  for (int k = 0; k < c; ++k)
    if (probe.collar[k] == anchor) probe.value_at_anchor = probe.barrier(k);
  return probe;
}

GlobalLaplacianReport global_laplacian_report(const ChartProblem& p, const Vec& u) {
  GlobalLaplacianReport r;
  const BoundaryJetFitter fitter(p.grid, p.metric);
  const FieldSummary summary = summarize_field(p.grid, p.field, fitter, u);
  r.sup_laplacian = summary.sup_laplacian;
  r.sup_node = summary.sup_laplacian_node;
  r.sup_gradient = summary.sup_gradient;
  r.ratio = r.sup_laplacian / (1.0 + r.sup_gradient * r.sup_gradient);
  const auto hess = covariant_hessian(u, p.field, p.grid);
  r.min_trace_margin = kInf;
  for (int i = 0; i < p.unknowns(); ++i) {
    const double margin = p.field.g[i].ldlt().solve(hess[i] + p.field.chi[i]).trace();
    if (margin < r.min_trace_margin) {
      r.min_trace_margin = margin;
      r.min_trace_node = i;
    }
  }
  r.trace_positive = r.min_trace_margin > 0.0;
  return r;
}

std::string to_string(DeltaVerdict v) { return v == DeltaVerdict::Bounded ? "BOUNDED" : "GROWING"; }

namespace {

nlohmann::ordered_json ratio_json(const RatioMax& m) {
  nlohmann::ordered_json j;
  j["value"] = json_number(m.value);
  j["node"] = m.node;
  return j;
}

}  // namespace

nlohmann::ordered_json to_json(const SandwichReport& r) {
  nlohmann::ordered_json j;
  j["passed"] = r.passed;
  j["tolerance"] = json_number(r.tolerance);
  j["lower_slack"] = json_number(r.lower_slack);
  j["upper_slack"] = json_number(r.upper_slack);
  j["worst_node"] = r.worst_node;
  j["violations"] = r.violations;
  return j;
}

nlohmann::ordered_json to_json(const EstimateReport& r, bool per_node) {
  nlohmann::ordered_json j;
  j["passed"] = r.passed;
  j["ratio_ceiling"] = json_number(r.ratio_ceiling);
  j["sup_boundary_laplacian"] = ratio_json(r.sup_boundary_laplacian);
  j["sup_laplacian"] = ratio_json(r.sup_laplacian);
  j["sup_gradient"] = ratio_json(r.sup_gradient);
  j["boundary_ratio"] = json_number(r.boundary_ratio);
  j["global_ratio"] = json_number(r.global_ratio);
  j["mixed_ratio"] = ratio_json(r.mixed_ratio);
  j["normal_ratio"] = ratio_json(r.normal_ratio);
  j["trace_identity_residual"] = ratio_json(r.trace_identity_residual);
  j["tangential_identity_residual"] = ratio_json(r.tangential_identity_residual);
  if (per_node) {
    auto nodes = nlohmann::ordered_json::array();
    for (const auto& e : r.nodes) {
      nlohmann::ordered_json n;
      n["node"] = e.node;
      n["position"] = json_vector(e.position);
      n["laplacian"] = json_number(e.laplacian);
      n["mixed_ratio"] = json_number(e.mixed_ratio);
      n["normal_ratio"] = json_number(e.normal_ratio);
      n["normal_gap"] = json_number(e.normal_gap);
      nodes.push_back(n);
    }
    j["nodes"] = nodes;
  }
  return j;
}

nlohmann::ordered_json to_json(const NormalAudit& a, bool per_node) {
  nlohmann::ordered_json j;
  j["passed"] = a.passed;
  j["sampled_nodes"] = a.entries.size();
  j["min_normal_slack"] = json_number(a.min_normal_slack);
  j["worst_node"] = a.worst_node;
  if (per_node) {
    auto entries = nlohmann::ordered_json::array();
    for (const auto& e : a.entries) {
      nlohmann::ordered_json n;
      n["node"] = e.node;
      n["psi"] = json_number(e.psi);
      n["normal_entry"] = json_number(e.normal_entry);
      n["certificate"] = to_json(e.certificate);
      entries.push_back(n);
    }
    j["entries"] = entries;
  }
  return j;
}

nlohmann::ordered_json to_json(const DeltaStudy& s) {
  nlohmann::ordered_json j;
  j["verdict"] = to_string(s.verdict);
  j["spread"] = json_number(s.spread);
  j["growth_exponent"] = json_number(s.growth_exponent);
  auto levels = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < s.constants.size(); ++k) {
    nlohmann::ordered_json l;
    l["epsilon"] = json_number(s.epsilons[k]);
    l["constant"] = json_number(s.constants[k]);
    levels.push_back(l);
  }
  j["levels"] = levels;
  return j;
}

nlohmann::ordered_json to_json(const BarrierProbe& b) {
  nlohmann::ordered_json j;
  j["found"] = b.found;
  j["anchor"] = b.anchor;
  j["collar_nodes"] = b.collar.size();
  j["rungs_tried"] = b.rungs_tried;
  nlohmann::ordered_json par;
  par["A1"] = json_number(b.params.a1);
  par["A2"] = json_number(b.params.a2);
  par["A3"] = json_number(b.params.a3);
  par["N"] = json_number(b.params.n);
  par["t"] = json_number(b.params.t);
  par["delta"] = json_number(b.params.delta);
  par["b1"] = json_number(b.params.b1);
  par["beta0"] = json_number(b.params.beta0);
  j["params"] = par;
  j["max_value"] = json_number(b.max_value);
  j["value_at_anchor"] = json_number(b.value_at_anchor);
  j["boundary_tangential_residual"] = json_number(b.boundary_tangential_residual);
  return j;
}

nlohmann::ordered_json to_json(const GlobalLaplacianReport& r) {
  nlohmann::ordered_json j;
  j["sup_laplacian"] = json_number(r.sup_laplacian);
  j["sup_node"] = r.sup_node;
  j["sup_gradient"] = json_number(r.sup_gradient);
  j["ratio"] = json_number(r.ratio);
  j["min_trace_margin"] = json_number(r.min_trace_margin);
  j["min_trace_node"] = r.min_trace_node;
  j["trace_positive"] = r.trace_positive;
  return j;
}

}  // namespace fnlab
