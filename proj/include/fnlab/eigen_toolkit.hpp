#pragma once

#include <optional>
#include <vector>

#include "json.hpp"

#include "fnlab/operator.hpp"
#include "fnlab/types.hpp"

namespace fnlab {

struct GeneralizedEigen {
  Vec values;   // ascending
  Mat vectors;  // columns v_k with A v_k = values_k g v_k and V^T g V = I
};

/// Eigenvalues of A with respect to the metric g, i.e. of g^{-1} A.
GeneralizedEigen generalized_eigen(const Mat& a, const Mat& g);
Vec eigenvalues_wrt(const Mat& a, const Mat& g);

/// F(A) = f(lambda(A; g)) on the closed cone.
ExtendedReal spectral_value(const OperatorSpec& op, const Mat& a, const Mat& g);

/// dF/dA_ij = sum_k f_k v_k^i v_k^j, with f_k averaged over eigenvalue clusters
/// so the result is continuous across multiplicities.
Mat dFdA(const OperatorSpec& op, const Mat& a, const Mat& g);

/// Symmetric matrix with diagonal d, last column and row a, corner entry.
struct BorderedMatrix {
  Vec diagonal;
  Vec border;
  double corner = 0.0;
  double epsilon = 1.0;

  int order() const { return static_cast<int>(diagonal.size()) + 1; }
  Mat assemble() const;
};

/// Smallest corner for which the eigenvalue localization is guaranteed.
double border_threshold(const Vec& diagonal, const Vec& border, double epsilon);

struct LocalizationReport {
  Vec eigenvalues;                  // ascending
  std::vector<int> pairing;         // pairing[alpha] = index into eigenvalues; last entry pairs with the corner
  Vec tangential_slack;             // epsilon - |d_alpha - lambda_alpha|
  double lower_slack = 0.0;         // lambda_n - corner
  double upper_slack = 0.0;         // (n-1) epsilon - (lambda_n - corner)
  double threshold = 0.0;
  bool precondition_met = false;
  bool passed = false;
};

/// Pairs eigenvalues with the diagonal entries and the corner, minimizing the
/// largest deviation, then checks |d_alpha - lambda_alpha| < epsilon and
/// 0 <= lambda_n - corner < (n-1) epsilon. Throws GROWTH_CONDITION_UNMET when
/// the corner is below the threshold unless `require_threshold` is false.
LocalizationReport border_localize(const BorderedMatrix& m, bool require_threshold = true);

/// Boundary-point data in a g-orthonormal frame whose last vector is the
/// inward normal and whose tangential vectors diagonalize the subsolution block.
struct BoundaryFrameData {
  Vec sub_tangential;               // diagonal of the subsolution tangential block
  Vec mixed;                        // tangential-normal entries of the solution tensor
  Mat distance_hessian;             // tangential Hessian of the boundary distance
  double normal_gap = 0.0;          // normal derivative of (solution - subsolution), >= 0
  std::optional<Mat> tangential;    // tangential block of the solution tensor, if known
  std::optional<double> normal_entry;  // normal-normal entry of the solution tensor, if known

  // Left at zero to be searched or derived by verify_normal_estimate.
  double tangential_margin = 0.0;  // shift of the subsolution block keeping f >= psi
  double base_corner = 0.0;        // corner value paired with tangential_margin
  double gap_scale = 0.0;          // multiplies normal_gap; gap_scale * normal_gap < margin / 8
  double curvature_corner = 0.0;   // corner making distance_hessian + gap_scale admissible
};

/// Corner threshold R_c; quadratic in the mixed entries.
double rc_threshold(const BoundaryFrameData& b);

struct NormalCertificate {
  double tangential_margin = 0.0;
  double base_corner = 0.0;
  double gap_scale = 0.0;
  double curvature_corner = 0.0;
  double rc = 0.0;
  bool gap_scale_guard_ok = false;           // gap_scale * normal_gap < tangential_margin / 8
  bool boundary_cone_condition_met = false;  // some curvature_corner makes the lifted distance Hessian admissible
  Vec lower_matrix_eigenvalues;
  bool lower_matrix_admissible = false;
  double lower_matrix_value_margin = 0.0;   // f(lower matrix) - psi
  LocalizationReport localization;
  double tangential_floor_slack = 0.0;      // min_alpha lambda_alpha - (sub_alpha - margin / 4)
  double floor_value_margin = 0.0;          // f(sub - margin / 4, R_c - curvature_corner * normal_gap) - psi
  double corner_floor_slack = 0.0;          // lambda_n - (R_c - curvature_corner * normal_gap)
  std::optional<double> full_matrix_value_margin;  // f(A(R_c)) - psi
  std::optional<bool> full_dominates_lower;        // f(A(R_c)) >= f(lower matrix)
  std::optional<double> normal_bound_slack;        // R_c - normal_entry
  bool passed = false;
};

/// Builds the lower comparison matrix at R_c and checks that it is admissible,
/// that f exceeds psi there, and that its spectrum localizes as predicted.
/// When the tangential block is known, also checks f(A(R_c)) > psi directly.
NormalCertificate verify_normal_estimate(const OperatorSpec& op, const BoundaryFrameData& b,
                                         double psi);

nlohmann::ordered_json to_json(const LocalizationReport& r);
nlohmann::ordered_json to_json(const NormalCertificate& c);

}  // namespace fnlab
