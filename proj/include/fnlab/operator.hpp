#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fnlab/cone.hpp"
#include "fnlab/extended_real.hpp"
#include "fnlab/types.hpp"

namespace fnlab {

enum class OperatorKind {
  SigmaKRoot,          // sigma_k^{1/k} on Gamma_k
  MongeAmpere,         // (prod lambda_i)^{1/n} on Gamma_n
  LogSigmaN,           // log(prod lambda_i) on Gamma_n
  NonmonotoneDifference,  // lambda_1 - lambda_2 on Gamma_n; deliberately not elliptic
};

/// A symmetric function f on its cone together with the metadata the
/// structural checks and the solver need.
class OperatorSpec {
 public:
  static OperatorSpec sigma_k_root(int dimension, int k);
  static OperatorSpec monge_ampere(int dimension);
  static OperatorSpec log_sigma_n(int dimension);
  static OperatorSpec nonmonotone_difference(int dimension);

  OperatorKind kind() const { return kind_; }
  int dimension() const { return cone_.dimension(); }
  int order() const { return order_; }
  const ConeSpec& cone() const { return cone_; }
  std::string name() const;

  /// Analytic sup of the boundary limits, if known for this operator.
  std::optional<ExtendedReal> declared_boundary_sup() const;

  /// Value of the continuous extension at the vertex, if f extends continuously.
  std::optional<double> value_at_vertex() const;

  /// Raw evaluation on the open cone, no membership check.
  double value(const Vec& lambda) const;
  Vec gradient(const Vec& lambda) const;

  /// Boundary limit at a closure point (used by f_eval for boundary points).
  ExtendedReal boundary_value(const Vec& lambda) const;

 private:
  OperatorSpec(OperatorKind kind, ConeSpec cone, int order)
      : kind_(kind), cone_(cone), order_(order) {}

  OperatorKind kind_;
  ConeSpec cone_;
  int order_;
};

/// Registry lookup: "sigma_k" (param k), "sigma_1", "monge_ampere",
/// "log_sigma_n", "nonmonotone_difference".
OperatorSpec make_operator(const std::string& name, int dimension, int k = 0);
const std::vector<std::string>& operator_zoo_names();

/// f(lambda) on the closed cone; boundary points return the limsup value.
ExtendedReal f_eval(const OperatorSpec& op, const Vec& lambda);

/// (f_1, ..., f_n) on the open cone.
Vec f_grad(const OperatorSpec& op, const Vec& lambda);

struct BoundarySup {
  ExtendedReal value;
  bool numeric = false;  // true when sampled rather than declared
};

BoundarySup sup_boundary_f(const OperatorSpec& op);

/// Sampled estimate of the boundary supremum, ignoring any declared value.
BoundarySup sampled_boundary_sup(const OperatorSpec& op, int samples = 400,
                                 unsigned long long seed = 7);

/// Df / |Df|.
Vec unit_normal(const OperatorSpec& op, const Vec& lambda);

struct ConcavityGap {
  double gap = 0.0;                 // sum f_i(lambda)(mu_i - lambda_i) - (f(mu) - f(lambda))
  double normal_separation = 0.0;   // |nu_mu - nu_lambda|
  bool filter_active = false;       // separation >= beta0
  std::optional<double> epsilon_hat;  // gap / (1 + sum f_i(lambda)) when filter active
};

ConcavityGap concavity_gap(const OperatorSpec& op, const Vec& lambda, const Vec& mu,
                           double beta0);

/// Empirical constant of the concavity-gap lemma: min of epsilon_hat over
/// pairs (mu in K, lambda in probes) whose normals differ by at least beta0.
/// Returns nullopt when no pair passes the normal filter.
std::optional<double> estimate_concavity_epsilon(const OperatorSpec& op,
                                                 const std::vector<Vec>& compact_set,
                                                 const std::vector<Vec>& probes,
                                                 double beta0);

}  // namespace fnlab
