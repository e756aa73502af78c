#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "fnlab/boundary_fit.hpp"
#include "fnlab/eigen_toolkit.hpp"
#include "fnlab/solver.hpp"

namespace fnlab {

struct SandwichReport {
  bool passed = true;
  double tolerance = 0.0;
  double lower_slack = 0.0;  // min (u - subsolution)
  double upper_slack = 0.0;  // min (h - u)
  int worst_node = -1;       // node of the most negative slack of either kind
  int violations = 0;
};

/// subsolution - tol <= u <= h + tol at every node.
SandwichReport sandwich_check(const Vec& u, const Vec& subsolution, const Vec& h, double tolerance);

/// Physical data at a boundary node in a g-orthonormal frame whose last column
/// is the inward unit normal and whose tangential columns diagonalize the
/// subsolution tensor's tangential block.
struct AdaptedFrame {
  int node = -1;
  Vec position;
  Mat metric;
  Mat frame;             // columns e_1 .. e_{n-1}, normal
  Vec sigma_gradient;    // physical partials of the boundary distance
  double normal_sigma = 0.0;  // derivative of the distance along the unit normal
  Mat sigma_hessian;     // covariant physical Hessian of the distance
};

/// Throws FRAME_DEGENERATE when the distance gradient vanishes.
AdaptedFrame adapted_frame(const ChartProblem& p, int node, const Mat& subsolution_tensor);

struct BoundaryNodeEstimate {
  int node = -1;
  Vec position;
  double laplacian = 0.0;
  Mat tensor;          // solution tensor Hess u + chi in the adapted frame
  Mat sub_tensor;      // subsolution tensor in the adapted frame
  double normal_gap = 0.0;    // normal derivative of u - subsolution
  double mixed_ratio = 0.0;   // max_alpha |Hess_{alpha n} u| / (1 + sup |du|)
  double normal_ratio = 0.0;  // Hess_{nn} u / (1 + sum_alpha |tensor_{alpha n}|^2)
  double trace_identity_residual = 0.0;    // first-order boundary identity for u - phi
  double tangential_identity_residual = 0.0;  // tangential Hessian identity
};

struct RatioMax {
  double value = 0.0;
  int node = -1;
};

struct EstimateReport {
  RatioMax sup_boundary_laplacian;
  RatioMax sup_laplacian;
  RatioMax sup_gradient;
  double boundary_ratio = 0.0;  // sup_bdry Lap u / (1 + sup |du|^2)
  double global_ratio = 0.0;    // sup Lap u / (1 + sup |du|^2)
  RatioMax mixed_ratio;
  RatioMax normal_ratio;
  RatioMax trace_identity_residual;
  RatioMax tangential_identity_residual;
  double ratio_ceiling = 100.0;
  bool passed = false;  // every ratio finite and at most the ceiling
  std::vector<BoundaryNodeEstimate> nodes;
};

/// Boundary derivatives of u from least-squares jets in adapted frames.
/// `fitter` may be shared across calls on the same grid.
EstimateReport boundary_hessian_report(const ChartProblem& p, const Vec& u,
                                       const BoundaryJetFitter& fitter);
EstimateReport boundary_hessian_report(const ChartProblem& p, const Vec& u);

struct NormalAuditEntry {
  int node = -1;
  double psi = 0.0;
  double normal_entry = 0.0;
  NormalCertificate certificate;
};

struct NormalAudit {
  std::vector<NormalAuditEntry> entries;
  bool passed = false;
  double min_normal_slack = 0.0;  // min (R_c - normal entry)
  int worst_node = -1;
};

/// Frame data for verify_normal_estimate at one boundary node.
BoundaryFrameData boundary_frame_data(const BoundaryNodeEstimate& e, const AdaptedFrame& f);

/// Certificates at up to `samples` evenly strided boundary nodes, against the
/// right-hand side the solve used.
NormalAudit normal_threshold_audit(const ChartProblem& p, const Vec& u, const Vec& psi,
                                   int samples = 64);

enum class DeltaVerdict { Bounded, Growing };

struct DeltaLevel {
  double epsilon = 0.0;
  double sup_boundary_laplacian = 0.0;
  double sup_gradient = 0.0;
};

struct DeltaStudy {
  std::vector<double> epsilons;
  std::vector<double> constants;  // sup_bdry Lap / (1 + sup |du|^2) per level
  double spread = 1.0;            // max / min over the last four levels
  double growth_exponent = 0.0;   // slope of log C against log(1/eps) over the last four
  DeltaVerdict verdict = DeltaVerdict::Bounded;
};

std::vector<DeltaLevel> delta_levels(const ContinuationReport& r);

/// BOUNDED when the last four constants stay within a factor 4. Throws
/// INSUFFICIENT_LEVELS below four levels.
DeltaStudy delta_independence_study(const std::vector<DeltaLevel>& levels);

struct BarrierParams {
  double a1 = 0.0;
  double a2 = 0.0;
  double a3 = 0.0;
  double n = 0.0;
  double t = 0.0;
  double delta = 0.0;
  double b1 = 0.0;     // 1 + sup |du|^2
  double beta0 = 0.0;  // half the least distance of subsolution normals to the positive-cone boundary
};

struct BarrierProbe {
  BarrierParams params;          // the accepted ladder rung, or the last tried
  bool found = false;
  int anchor = -1;
  std::vector<int> collar;       // nodes with rho < delta
  Vec barrier;                   // per collar node
  double max_value = 0.0;        // max over the collar
  double value_at_anchor = 0.0;
  double boundary_tangential_residual = 0.0;  // fitted |T(u - phi)| on boundary collar nodes
  int rungs_tried = 0;
};

/// Evaluates the collar barrier and searches a geometric ladder of constants
/// with A1 >= 10 A2 >= 100 A3, N in {1, 10, ...} and t = N delta. Throws
/// COLLAR_TOO_SMALL when the collar has fewer than n + 1 interior nodes.
BarrierProbe barrier_probe(const ChartProblem& p, const Vec& u, double delta, int anchor);

struct GlobalLaplacianReport {
  double sup_laplacian = 0.0;
  int sup_node = -1;
  double sup_gradient = 0.0;
  double ratio = 0.0;              // sup Lap / (1 + sup |du|^2)
  double min_trace_margin = 0.0;   // min (Lap u + tr_g chi), positive for admissible u
  int min_trace_node = -1;
  bool trace_positive = false;
};

GlobalLaplacianReport global_laplacian_report(const ChartProblem& p, const Vec& u);

std::string to_string(DeltaVerdict v);

nlohmann::ordered_json to_json(const SandwichReport& r);
nlohmann::ordered_json to_json(const EstimateReport& r, bool per_node = false);
nlohmann::ordered_json to_json(const NormalAudit& a, bool per_node = false);
nlohmann::ordered_json to_json(const DeltaStudy& s);
nlohmann::ordered_json to_json(const BarrierProbe& b);
nlohmann::ordered_json to_json(const GlobalLaplacianReport& r);

}  // namespace fnlab
