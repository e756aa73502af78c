#include "fnlab/eigen_toolkit.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fnlab/error.hpp"
#include "fnlab/json_util.hpp"

namespace fnlab {

GeneralizedEigen generalized_eigen(const Mat& a, const Mat& g) {
  if (a.rows() != a.cols() || g.rows() != g.cols() || a.rows() != g.rows()) {
    throw Error(ErrorCode::ValidationError, "generalized_eigen: shape mismatch");
  }
  Eigen::LLT<Mat> llt(g);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::MetricNotSpd, "metric is not positive definite");
  }
  const Mat sym = 0.5 * (a + a.transpose());
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(sym, g,
                                                   Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::MetricNotSpd, "generalized eigensolver failed");
  }
  return {es.eigenvalues(), es.eigenvectors()};
}

Vec eigenvalues_wrt(const Mat& a, const Mat& g) { return generalized_eigen(a, g).values; }

ExtendedReal spectral_value(const OperatorSpec& op, const Mat& a, const Mat& g) {
  return f_eval(op, eigenvalues_wrt(a, g));
}

Mat dFdA(const OperatorSpec& op, const Mat& a, const Mat& g) {
  const auto eig = generalized_eigen(a, g);
  const Vec& lambda = eig.values;
  Vec df = f_grad(op, lambda);
  const int n = static_cast<int>(lambda.size());
  const double cluster_tol = 1e-8 * std::max(lambda.cwiseAbs().maxCoeff(), 1e-300);
  for (int start = 0; start < n;) {
    int end = start + 1;
    while (end < n && lambda(end) - lambda(end - 1) <= cluster_tol) ++end;
    if (end - start > 1) df.segment(start, end - start).setConstant(df.segment(start, end - start).mean());
    start = end;
  }
  const Mat& v = eig.vectors;
  Mat out = v * df.asDiagonal() * v.transpose();
  return 0.5 * (out + out.transpose());
}

Mat BorderedMatrix::assemble() const {
  const int n = order();
  Mat m = Mat::Zero(n, n);
  for (int i = 0; i < n - 1; ++i) {
    m(i, i) = diagonal(i);
    m(i, n - 1) = border(i);
    m(n - 1, i) = border(i);
  }
  m(n - 1, n - 1) = corner;
  return m;
}

double border_threshold(const Vec& diagonal, const Vec& border, double epsilon) {
  if (!(epsilon > 0.0)) {
    throw Error(ErrorCode::NonpositiveEpsilon, "epsilon must be positive");
  }
  if (diagonal.size() != border.size()) {
    throw Error(ErrorCode::ValidationError, "diagonal and border lengths differ");
  }
  const double n = static_cast<double>(diagonal.size()) + 1.0;
  return (2 * n - 3) / epsilon * border.squaredNorm() + (n - 1) * diagonal.cwiseAbs().sum() +
         (n - 2) * epsilon / (2 * n - 3);
}

LocalizationReport border_localize(const BorderedMatrix& m, bool require_threshold) {
  const int n = m.order();
  if (n < 2 || m.border.size() != n - 1) {
    throw Error(ErrorCode::ValidationError, "bordered matrix needs order >= 2 and matching border");
  }
  LocalizationReport r;
  r.threshold = border_threshold(m.diagonal, m.border, m.epsilon);
  r.precondition_met = m.corner >= r.threshold;
  if (require_threshold && !r.precondition_met) {
    throw Error(ErrorCode::GrowthConditionUnmet, "corner below threshold");
  }
  const Mat full = m.assemble();
  Eigen::SelfAdjointEigenSolver<Mat> es(full, Eigen::EigenvaluesOnly);
  r.eigenvalues = es.eigenvalues();

  // On the line, matching sorted lists minimizes the largest deviation, so
  // only the eigenvalue paired with the corner needs to be enumerated.
  std::vector<int> d_order(n - 1);
  std::iota(d_order.begin(), d_order.end(), 0);
  std::sort(d_order.begin(), d_order.end(),
            [&](int i, int j) { return m.diagonal(i) < m.diagonal(j); });
  const double eps = m.epsilon;
  const double tol = 64 * std::numeric_limits<double>::epsilon() * n *
                     std::max(1.0, full.cwiseAbs().maxCoeff());
  double best_score = std::numeric_limits<double>::infinity();
  for (int j = n - 1; j >= 0; --j) {
    std::vector<int> pairing(n);
    int cursor = 0;
    double score = 0.0;
    for (int rank = 0; rank < n - 1; ++rank, ++cursor) {
      if (cursor == j) ++cursor;
      const int alpha = d_order[rank];
      pairing[alpha] = cursor;
      score = std::max(score, std::abs(m.diagonal(alpha) - r.eigenvalues(cursor)) / eps);
    }
    pairing[n - 1] = j;
    const double dev = r.eigenvalues(j) - m.corner;
    score = std::max(score, dev < -tol ? 1.0 + (-dev) / eps : dev / ((n - 1) * eps));
    if (score < best_score) {
      best_score = score;
      r.pairing = pairing;
    }
  }

  r.tangential_slack.resize(n - 1);
  for (int alpha = 0; alpha < n - 1; ++alpha) {
    r.tangential_slack(alpha) = eps - std::abs(m.diagonal(alpha) - r.eigenvalues(r.pairing[alpha]));
  }
  const double dev = r.eigenvalues(r.pairing[n - 1]) - m.corner;
  r.lower_slack = dev;
  r.upper_slack = (n - 1) * eps - dev;
  r.passed = (n == 1 || r.tangential_slack.minCoeff() > 0.0) && r.lower_slack >= -tol &&
             r.upper_slack > 0.0;
  return r;
}

double rc_threshold(const BoundaryFrameData& b) {
  if (b.normal_gap < 0.0) {
    throw Error(ErrorCode::InvalidFrame, "normal derivative of solution minus subsolution is negative");
  }
  if (!(b.tangential_margin > 0.0)) {
    throw Error(ErrorCode::NonpositiveEpsilon, "tangential margin must be positive");
  }
  const double n = static_cast<double>(b.mixed.size()) + 1.0;
  const double e0 = b.tangential_margin;
  double diag_sum = 0.0;
  for (Eigen::Index i = 0; i < b.sub_tangential.size(); ++i) {
    diag_sum += std::abs(b.sub_tangential(i)) + e0 / 8.0;
  }
  return 8.0 * (2 * n - 3) / e0 * b.mixed.squaredNorm() + (n - 1) * diag_sum +
         (n - 2) * e0 / (8.0 * (2 * n - 3)) + b.base_corner + b.curvature_corner * b.normal_gap;
}

namespace {

Vec with_corner(const Vec& tangential, double corner) {
  Vec v(tangential.size() + 1);
  v << tangential, corner;
  return v;
}

bool step1_holds(const OperatorSpec& op, const Vec& sub, double margin, double corner,
                 double psi) {
  const Vec l = with_corner((sub.array() - margin).matrix(), corner);
  return op.cone().is_interior(l) && op.value(l) >= psi;
}

// Smallest t >= 0 with (e, t) in the cone; nullopt when no t works.
std::optional<double> smallest_admissible_corner(const ConeSpec& cone, const Vec& e) {
  if (cone.is_interior(with_corner(e, 0.0))) return 0.0;
  double hi = 1.0;
  const double cap = 1e12 * (1.0 + e.norm());
  while (!cone.is_interior(with_corner(e, hi))) {
    hi *= 2.0;
    if (hi > cap) return std::nullopt;
  }
  double lo = 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (cone.is_interior(with_corner(e, mid)) ? hi : lo) = mid;
  }
  return hi;
}

double margin_or_minus_inf(const OperatorSpec& op, const Vec& l, double psi) {
  if (!op.cone().is_interior(l)) return -std::numeric_limits<double>::infinity();
  return op.value(l) - psi;
}

}  // namespace

NormalCertificate verify_normal_estimate(const OperatorSpec& op, const BoundaryFrameData& b,
                                         double psi) {
  const int n = op.dimension();
  if (b.sub_tangential.size() != n - 1 || b.mixed.size() != n - 1 ||
      b.distance_hessian.rows() != n - 1 || b.distance_hessian.cols() != n - 1) {
    throw Error(ErrorCode::InvalidFrame, "frame data does not match operator dimension");
  }
  if (b.normal_gap < 0.0) {
    throw Error(ErrorCode::InvalidFrame, "normal derivative of solution minus subsolution is negative");
  }
  NormalCertificate c;
  BoundaryFrameData data = b;

  if (data.tangential_margin > 0.0 && data.base_corner > 0.0) {
    if (!step1_holds(op, data.sub_tangential, data.tangential_margin, data.base_corner, psi)) {
      throw Error(ErrorCode::Step1Failure, "supplied margin and corner do not reach psi");
    }
  } else {
    bool found = false;
    for (double margin = 1.0; margin > 1e-12 && !found; margin *= 0.5) {
      for (double corner = 1.0; corner < 1e18; corner *= 2.0) {
        if (step1_holds(op, data.sub_tangential, margin, corner, psi)) {
          data.tangential_margin = margin;
          data.base_corner = corner;
          found = true;
          break;
        }
      }
    }
    if (!found) throw Error(ErrorCode::Step1Failure, "no admissible margin/corner pair reaches psi");
  }
  const double margin = data.tangential_margin;
  if (!(data.gap_scale > 0.0)) data.gap_scale = margin / (16.0 * (1.0 + data.normal_gap));
  c.gap_scale_guard_ok = data.gap_scale * data.normal_gap < margin / 8.0;

  Eigen::SelfAdjointEigenSolver<Mat> hess_eig(0.5 * (data.distance_hessian + data.distance_hessian.transpose()),
                                              Eigen::EigenvaluesOnly);
  const Vec lifted = (hess_eig.eigenvalues().array() + data.gap_scale).matrix();
  if (data.curvature_corner > 0.0) {
    c.boundary_cone_condition_met = op.cone().is_interior(with_corner(lifted, data.curvature_corner));
  } else if (auto r0 = smallest_admissible_corner(op.cone(), lifted)) {
    data.curvature_corner = *r0;
    c.boundary_cone_condition_met = true;
  } else {
    data.curvature_corner = 0.0;
    c.boundary_cone_condition_met = false;
  }

  c.tangential_margin = margin;
  c.base_corner = data.base_corner;
  c.gap_scale = data.gap_scale;
  c.curvature_corner = data.curvature_corner;
  c.rc = rc_threshold(data);

  BorderedMatrix lower;
  lower.diagonal = (data.sub_tangential.array() - data.gap_scale * data.normal_gap).matrix();
  lower.border = data.mixed;
  lower.corner = c.rc - data.curvature_corner * data.normal_gap;
  lower.epsilon = margin / 8.0;
  c.localization = border_localize(lower, false);
  c.lower_matrix_eigenvalues = c.localization.eigenvalues;
  c.lower_matrix_admissible = op.cone().is_interior(c.lower_matrix_eigenvalues);
  c.lower_matrix_value_margin = margin_or_minus_inf(op, c.lower_matrix_eigenvalues, psi);

  c.tangential_floor_slack = std::numeric_limits<double>::infinity();
  for (int alpha = 0; alpha < n - 1; ++alpha) {
    const double l = c.localization.eigenvalues(c.localization.pairing[alpha]);
    c.tangential_floor_slack =
        std::min(c.tangential_floor_slack, l - (data.sub_tangential(alpha) - margin / 4.0));
  }
  c.corner_floor_slack = c.localization.lower_slack;
  c.floor_value_margin = margin_or_minus_inf(
      op, with_corner((data.sub_tangential.array() - margin / 4.0).matrix(), lower.corner), psi);

  if (data.tangential) {
    Mat full(n, n);
    full.topLeftCorner(n - 1, n - 1) = *data.tangential;
    full.topRightCorner(n - 1, 1) = data.mixed;
    full.bottomLeftCorner(1, n - 1) = data.mixed.transpose();
    full(n - 1, n - 1) = c.rc;
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (full + full.transpose()), Eigen::EigenvaluesOnly);
    const double m = margin_or_minus_inf(op, es.eigenvalues(), psi);
    c.full_matrix_value_margin = m;
    c.full_dominates_lower = m >= c.lower_matrix_value_margin - 1e-12 * (1.0 + std::abs(psi));
  }
  if (data.normal_entry) c.normal_bound_slack = c.rc - *data.normal_entry;

  c.passed = c.gap_scale_guard_ok && c.lower_matrix_admissible &&
             c.lower_matrix_value_margin > 0.0 && c.localization.precondition_met &&
             c.localization.passed && c.tangential_floor_slack > 0.0 &&
             c.floor_value_margin > 0.0 &&
             (c.boundary_cone_condition_met || c.full_matrix_value_margin.has_value()) &&
             (!c.full_matrix_value_margin || *c.full_matrix_value_margin > 0.0) &&
             (!c.normal_bound_slack || *c.normal_bound_slack >= 0.0);
  return c;
}

nlohmann::ordered_json to_json(const LocalizationReport& r) {
  nlohmann::ordered_json j;
  j["eigenvalues"] = json_vector(r.eigenvalues);
  j["pairing"] = r.pairing;
  j["threshold"] = json_number(r.threshold);
  j["precondition_met"] = r.precondition_met;
  j["tangential_slack"] = json_vector(r.tangential_slack);
  j["lower_slack"] = json_number(r.lower_slack);
  j["upper_slack"] = json_number(r.upper_slack);
  j["passed"] = r.passed;
  return j;
}

nlohmann::ordered_json to_json(const NormalCertificate& c) {
  nlohmann::ordered_json j;
  j["tangential_margin"] = json_number(c.tangential_margin);
  j["base_corner"] = json_number(c.base_corner);
  j["gap_scale"] = json_number(c.gap_scale);
  j["curvature_corner"] = json_number(c.curvature_corner);
  j["rc"] = json_number(c.rc);
  j["gap_scale_guard_ok"] = c.gap_scale_guard_ok;
  j["boundary_cone_condition_met"] = c.boundary_cone_condition_met;
  j["lower_matrix_eigenvalues"] = json_vector(c.lower_matrix_eigenvalues);
  j["lower_matrix_admissible"] = c.lower_matrix_admissible;
  j["lower_matrix_value_margin"] = json_number(c.lower_matrix_value_margin);
  j["localization"] = to_json(c.localization);
  j["tangential_floor_slack"] = json_number(c.tangential_floor_slack);
  j["floor_value_margin"] = json_number(c.floor_value_margin);
  j["corner_floor_slack"] = json_number(c.corner_floor_slack);
  if (c.full_matrix_value_margin) j["full_matrix_value_margin"] = json_number(*c.full_matrix_value_margin);
  if (c.full_dominates_lower) j["full_dominates_lower"] = *c.full_dominates_lower;
  if (c.normal_bound_slack) j["normal_bound_slack"] = json_number(*c.normal_bound_slack);
  j["passed"] = c.passed;
  return j;
}

}  // namespace fnlab
