#include "fnlab/operator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "fnlab/error.hpp"

namespace fnlab {

OperatorSpec OperatorSpec::sigma_k_root(int dimension, int k) {
  return OperatorSpec(OperatorKind::SigmaKRoot, ConeSpec::garding(dimension, k), k);
}

OperatorSpec OperatorSpec::monge_ampere(int dimension) {
  return OperatorSpec(OperatorKind::MongeAmpere, ConeSpec::positive(dimension), dimension);
}

OperatorSpec OperatorSpec::log_sigma_n(int dimension) {
  return OperatorSpec(OperatorKind::LogSigmaN, ConeSpec::positive(dimension), dimension);
}

OperatorSpec OperatorSpec::nonmonotone_difference(int dimension) {
  if (dimension < 2) {
    throw Error(ErrorCode::ValidationError, "nonmonotone_difference needs n >= 2");
  }
  return OperatorSpec(OperatorKind::NonmonotoneDifference, ConeSpec::positive(dimension),
                      dimension);
}

std::string OperatorSpec::name() const {
  switch (kind_) {
    case OperatorKind::SigmaKRoot:
      return "sigma_k(k=" + std::to_string(order_) + ")";
    case OperatorKind::MongeAmpere:
      return "monge_ampere";
    case OperatorKind::LogSigmaN:
      return "log_sigma_n";
    case OperatorKind::NonmonotoneDifference:
      return "nonmonotone_difference";
  }
  return "unknown";
}

std::optional<ExtendedReal> OperatorSpec::declared_boundary_sup() const {
  switch (kind_) {
    case OperatorKind::SigmaKRoot:
    case OperatorKind::MongeAmpere:
      return ExtendedReal(0.0);
    case OperatorKind::LogSigmaN:
      return ExtendedReal::negative_infinity();
    case OperatorKind::NonmonotoneDifference:
      return std::nullopt;
  }
  return std::nullopt;
}

std::optional<double> OperatorSpec::value_at_vertex() const {
  switch (kind_) {
    case OperatorKind::SigmaKRoot:
    case OperatorKind::MongeAmpere:
    case OperatorKind::NonmonotoneDifference:
      return 0.0;
    case OperatorKind::LogSigmaN:
      return std::nullopt;
  }
  return std::nullopt;
}

double OperatorSpec::value(const Vec& lambda) const {
  const int n = dimension();
  switch (kind_) {
    case OperatorKind::SigmaKRoot: {
      const double s = elementary_symmetric(lambda, order_)(order_);
      if (order_ == 1) return s;
      return std::pow(std::max(s, 0.0), 1.0 / order_);
    }
    case OperatorKind::MongeAmpere: {
      double p = lambda.prod();
      return std::pow(std::max(p, 0.0), 1.0 / n);
    }
    case OperatorKind::LogSigmaN: {
      double s = 0.0;
      for (Eigen::Index i = 0; i < lambda.size(); ++i) s += std::log(lambda(i));
      return s;
    }
    case OperatorKind::NonmonotoneDifference:
      return lambda(0) - lambda(1);
  }
  return 0.0;
}

Vec OperatorSpec::gradient(const Vec& lambda) const {
  const int n = dimension();
  Vec g(n);
  switch (kind_) {
    case OperatorKind::SigmaKRoot: {
      if (order_ == 1) return Vec::Ones(n);
      const double s = elementary_symmetric(lambda, order_)(order_);
      const double scale = std::pow(s, 1.0 / order_ - 1.0) / order_;
      for (int i = 0; i < n; ++i) {
        g(i) = scale * elementary_symmetric_without(lambda, order_ - 1, i);
      }
      return g;
    }
    case OperatorKind::MongeAmpere: {
      const double f = value(lambda);
      for (int i = 0; i < n; ++i) g(i) = f / (n * lambda(i));
      return g;
    }
    case OperatorKind::LogSigmaN:
      for (int i = 0; i < n; ++i) g(i) = 1.0 / lambda(i);
      return g;
    case OperatorKind::NonmonotoneDifference:
      g.setZero();
      g(0) = 1.0;
      g(1) = -1.0;
      return g;
  }
  return g;
}

ExtendedReal OperatorSpec::boundary_value(const Vec& lambda) const {
  switch (kind_) {
    case OperatorKind::SigmaKRoot:
    case OperatorKind::MongeAmpere:
      // continuous up to the boundary, where the top sigma vanishes
      return ExtendedReal(0.0);
    case OperatorKind::LogSigmaN:
      return ExtendedReal::negative_infinity();
    case OperatorKind::NonmonotoneDifference:
      return ExtendedReal(value(lambda));
  }
  return ExtendedReal(0.0);
}

OperatorSpec make_operator(const std::string& name, int dimension, int k) {
  if (dimension < 2) {
    throw Error(ErrorCode::ValidationError, "operator dimension must be >= 2");
  }
  if (name == "sigma_k") {
    if (k < 1 || k > dimension) {
      throw Error(ErrorCode::ValidationError,
                  "sigma_k needs 1 <= k <= n (got k=" + std::to_string(k) + ")");
    }
    return OperatorSpec::sigma_k_root(dimension, k);
  }
  if (name == "sigma_1") return OperatorSpec::sigma_k_root(dimension, 1);
  if (name == "monge_ampere") return OperatorSpec::monge_ampere(dimension);
  if (name == "log_sigma_n") return OperatorSpec::log_sigma_n(dimension);
  if (name == "nonmonotone_difference") return OperatorSpec::nonmonotone_difference(dimension);
  std::string zoo;
  for (const auto& z : operator_zoo_names()) zoo += (zoo.empty() ? "" : ", ") + z;
  throw Error(ErrorCode::ValidationError,
              "unknown operator '" + name + "' (available: " + zoo + ")");
}

const std::vector<std::string>& operator_zoo_names() {
  static const std::vector<std::string> names = {"sigma_k", "sigma_1", "monge_ampere",
                                                 "log_sigma_n", "nonmonotone_difference"};
  return names;
}

namespace {

void require_dimension(const OperatorSpec& op, const Vec& lambda) {
  if (lambda.size() != op.dimension()) {
    throw Error(ErrorCode::ValidationError,
                "eigenvalue vector has size " + std::to_string(lambda.size()) +
                    ", operator expects " + std::to_string(op.dimension()));
  }
}

void require_open_cone(const OperatorSpec& op, const Vec& lambda) {
  require_dimension(op, lambda);
  if (op.cone().is_interior(lambda)) return;
  throw Error(ErrorCode::ConeViolation, "lambda not in the open cone " + op.cone().name());
}

}  // namespace

ExtendedReal f_eval(const OperatorSpec& op, const Vec& lambda) {
  require_dimension(op, lambda);
  if (op.cone().is_interior(lambda)) return ExtendedReal(op.value(lambda));
  const auto m = op.cone().classify(lambda);
  if (m.region == ConeRegion::Outside) {
    throw Error(ErrorCode::ConeViolation,
                "lambda outside the closed cone " + op.cone().name() +
                    " (signed distance " + std::to_string(m.signed_distance) + ")");
  }
  return op.boundary_value(lambda);
}

Vec f_grad(const OperatorSpec& op, const Vec& lambda) {
  require_open_cone(op, lambda);
  return op.gradient(lambda);
}

BoundarySup sampled_boundary_sup(const OperatorSpec& op, int samples,
                                 unsigned long long seed) {
  const int n = op.dimension();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const Vec ones = Vec::Ones(n);
  double best = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    Vec w(n);
    for (int i = 0; i < n; ++i) w(i) = normal(rng);
    w -= (w.sum() / n) * ones;
    if (w.norm() < 1e-12) continue;
    w.normalize();
    const Vec b = w + op.cone().boundary_shift(w) * ones;
    // Approach the boundary point along the diagonal. Differences that shrink
    // geometrically converge; differences that stay comparable diverge to -inf.
    std::vector<double> trail;
    for (double eta : {1e-3, 1e-6, 1e-9, 1e-12}) {
      const Vec inside = b + eta * ones;
      if (op.cone().contains(inside)) trail.push_back(op.value(inside));
    }
    if (trail.empty()) continue;
    double limit = trail.back();
    if (trail.size() >= 3) {
      const double d1 = trail[trail.size() - 3] - trail[trail.size() - 2];
      const double d2 = trail[trail.size() - 2] - trail.back();
      if (d2 > 1.0 && d2 > 0.5 * d1) limit = -std::numeric_limits<double>::infinity();
    }
    best = std::max(best, limit);
  }
  return {ExtendedReal(best), true};
}

BoundarySup sup_boundary_f(const OperatorSpec& op) {
  if (auto declared = op.declared_boundary_sup()) return {*declared, false};
  return sampled_boundary_sup(op);
}

Vec unit_normal(const OperatorSpec& op, const Vec& lambda) {
  const Vec g = f_grad(op, lambda);
  return g / g.norm();
}

ConcavityGap concavity_gap(const OperatorSpec& op, const Vec& lambda, const Vec& mu,
                           double beta0) {
  require_open_cone(op, lambda);
  require_open_cone(op, mu);
  const Vec df = op.gradient(lambda);
  ConcavityGap out;
  out.gap = df.dot(mu - lambda) - (op.value(mu) - op.value(lambda));
  const Vec nu_l = df / df.norm();
  const Vec dm = op.gradient(mu);
  const Vec nu_m = dm / dm.norm();
  out.normal_separation = (nu_m - nu_l).norm();
  out.filter_active = out.normal_separation >= beta0;
  if (out.filter_active) out.epsilon_hat = out.gap / (1.0 + df.sum());
  return out;
}

std::optional<double> estimate_concavity_epsilon(const OperatorSpec& op,
                                                 const std::vector<Vec>& compact_set,
                                                 const std::vector<Vec>& probes,
                                                 double beta0) {
  std::optional<double> best;
  for (const auto& mu : compact_set) {
    for (const auto& lambda : probes) {
      const auto g = concavity_gap(op, lambda, mu, beta0);
      if (!g.epsilon_hat) continue;
      if (!best || *g.epsilon_hat < *best) best = g.epsilon_hat;
    }
  }
  return best;
}

}  // namespace fnlab
