#ifndef PRIVLR_MECHANISMS_HPP
#define PRIVLR_MECHANISMS_HPP

// Differential-privacy mechanisms for logistic regression:
//
//  * perturb_params     - Laplace noise added to trained parameters
//  * ofpa_perturb       - objective perturbation l(w, a) + v^T w
//  * ofaa_perturb       - Laplace noise on the coefficients of the degree-2
//                         Taylor approximation of the objective
//
// Every mechanism draws its noise from a caller-owned NoiseSource, in a fixed
// order, so a seeded source gives bit-identical results.

#include <cmath>
#include <numbers>

#include "privlr/core_model.hpp"
#include "privlr/random.hpp"

namespace privlr {

struct PrivacyBudget {
  double epsilon;

  explicit PrivacyBudget(double eps) : epsilon(eps) {
    if (!(eps > 0.0) || !std::isfinite(eps)) throw InvalidArgument("PrivacyBudget: epsilon must be a finite value > 0");
  }
};

/// True when every record has l1 norm <= 1 + tol.
template <typename Scalar>
bool is_l1_normalized(const Dataset<Scalar>& data, double tol = 1e-12) {
  if (data.empty()) return true;
  return (data.features.cwiseAbs().rowwise().sum().array() <= Scalar(1.0 + tol)).all();
}

template <typename Scalar>
void require_normalized(const Dataset<Scalar>& data, const char* what) {
  if (!is_l1_normalized(data)) throw DataError(std::string(what) + ": dataset records must have l1 norm <= 1");
}

/// Adds an independent Lap(0, sensitivity / epsilon) draw to every weight and
/// to the bias. Draw order: weights, then bias.
template <typename Scalar>
ModelParams<Scalar> perturb_params(const ModelParams<Scalar>& optimal, double sensitivity, PrivacyBudget budget,
                                   NoiseSource& noise) {
  if (!(sensitivity > 0.0)) throw InvalidArgument("perturb_params: sensitivity must be > 0");
  const double scale = sensitivity / budget.epsilon;
  ModelParams<Scalar> out = optimal;
  for (Index i = 0; i < out.weights.size(); ++i) out.weights(i) += Scalar(noise.laplace(scale));
  out.bias += Scalar(noise.laplace(scale));
  return out;
}

/// Laplace scale of the objective-perturbation noise vector: 4 / epsilon.
inline double ofpa_scale(PrivacyBudget budget) { return 4.0 / budget.epsilon; }

/// l(w, a) + v^T w. The noise multiplies the weights only; the bias
/// gradient is that of the clean objective.
template <typename Scalar>
class OfpaObjective {
 public:
  OfpaObjective(const Dataset<Scalar>& data, Vector<Scalar> noise) : base_(data), noise_(std::move(noise)) {
    if (noise_.size() != data.dimension())
      throw DimensionError(detail::mismatch_message("OfpaObjective", data.dimension(), noise_.size()));
  }

  Scalar value(const ModelParams<Scalar>& p) const { return base_.value(p) + noise_.dot(p.weights); }

  ModelParams<Scalar> gradient(const ModelParams<Scalar>& p) const {
    ModelParams<Scalar> g = base_.gradient(p);
    g.weights += noise_;
    return g;
  }

  Scalar step_scale() const { return base_.step_scale(); }

  const Vector<Scalar>& noise() const { return noise_; }

 private:
  LogisticObjective<Scalar> base_;
  Vector<Scalar> noise_;
};

template <typename Scalar>
OfpaObjective<Scalar> ofpa_perturb(const Dataset<Scalar>& data, PrivacyBudget budget, NoiseSource& noise) {
  require_normalized(data, "ofpa_perturb");
  const double scale = ofpa_scale(budget);
  Vector<Scalar> v(data.dimension());
  for (Index i = 0; i < v.size(); ++i) v(i) = Scalar(noise.laplace(scale));
  return OfpaObjective<Scalar>(data, std::move(v));
}

/// Derivatives of ln(1 + e^t) at t = 0.
struct TaylorCoefficients {
  double value;      // ln 2
  double slope;      // 1/2
  double curvature;  // 1/4
};

constexpr TaylorCoefficients taylor_coefficients() { return {std::numbers::ln2, 0.5, 0.25}; }

/// c0 + c1^T theta + theta^T C2 theta over theta = (w, alpha).
template <typename Scalar>
struct QuadraticObjective {
  static constexpr int truncation_degree = 2;

  Scalar constant = Scalar(0);  // c0
  Vector<Scalar> linear;        // c1, length d + 1
  Matrix<Scalar> quadratic;     // C2, (d + 1) x (d + 1), symmetric
  Scalar records = Scalar(1);

  Index dimension() const { return linear.size() - 1; }

  Scalar value(const ModelParams<Scalar>& p) const {
    check(p);
    const Vector<Scalar> theta = p.stacked();
    return constant + linear.dot(theta) + theta.dot(quadratic * theta);
  }

  ModelParams<Scalar> gradient(const ModelParams<Scalar>& p) const {
    check(p);
    const Vector<Scalar> theta = p.stacked();
    return ModelParams<Scalar>::FromStacked(linear + Scalar(2) * (quadratic * theta));
  }

  Scalar step_scale() const { return records; }

 private:
  void check(const ModelParams<Scalar>& p) const {
    if (p.dimension() != dimension())
      throw DimensionError(detail::mismatch_message("QuadraticObjective", dimension(), p.dimension()));
  }
};

/// Degree-2 Taylor expansion of the logistic objective around zero. With
/// z_i = (x_i, 1):
///   c0 = N ln 2,  c1 = sum_i (1/2 - y_i) z_i,  C2 = (1/8) sum_i z_i z_i^T
template <typename Scalar>
QuadraticObjective<Scalar> build_quadratic_objective(const Dataset<Scalar>& data) {
  require_normalized(data, "build_quadratic_objective");
  if (data.labels.size() != data.size())
    throw DimensionError(detail::mismatch_message("build_quadratic_objective", data.size(), data.labels.size()));

  constexpr TaylorCoefficients taylor = taylor_coefficients();
  const Index n = data.size();
  const Index d = data.dimension();

  Matrix<Scalar> z(n, d + 1);
  z << data.features, Vector<Scalar>::Ones(n);
  const Vector<Scalar> residual = Scalar(taylor.slope) - data.labelsAs().array();

  QuadraticObjective<Scalar> q;
  q.constant = Scalar(n) * Scalar(taylor.value);
  q.linear = z.transpose() * residual;
  q.quadratic = Matrix<Scalar>::Zero(d + 1, d + 1);
  q.quadratic.template selfadjointView<Eigen::Lower>().rankUpdate(z.transpose(), Scalar(taylor.curvature / 2.0));
  q.quadratic = q.quadratic.template selfadjointView<Eigen::Lower>();
  q.records = n > 0 ? Scalar(n) : Scalar(1);
  return q;
}

/// Laplace sensitivity of the degree-j coefficients for d features:
///   j = 0: 2(J+1) ln 2
///   j = 1: 9d / 2
///   j = 2: 2(J+1) (d+1)^2 / 8
double ofaa_sensitivity(int degree, Index dimension, int truncation = 2);

/// Adds independent Lap(0, dS_j / epsilon) noise to every degree-j
/// coefficient. Draw order: c0, c1 entries, then the upper triangle of C2
/// row by row (each draw mirrored to keep C2 symmetric).
template <typename Scalar>
QuadraticObjective<Scalar> ofaa_perturb(const QuadraticObjective<Scalar>& quad, PrivacyBudget budget, Index dimension,
                                        NoiseSource& noise) {
  if (quad.dimension() != dimension)
    throw DimensionError(detail::mismatch_message("ofaa_perturb", dimension, quad.dimension()));
  const int J = QuadraticObjective<Scalar>::truncation_degree;
  const double b0 = ofaa_sensitivity(0, dimension, J) / budget.epsilon;
  const double b1 = ofaa_sensitivity(1, dimension, J) / budget.epsilon;
  const double b2 = ofaa_sensitivity(2, dimension, J) / budget.epsilon;

  QuadraticObjective<Scalar> out = quad;
  out.constant += Scalar(noise.laplace(b0));
  for (Index i = 0; i < out.linear.size(); ++i) out.linear(i) += Scalar(noise.laplace(b1));
  for (Index r = 0; r < out.quadratic.rows(); ++r) {
    for (Index c = r; c < out.quadratic.cols(); ++c) {
      out.quadratic(r, c) += Scalar(noise.laplace(b2));
      out.quadratic(c, r) = out.quadratic(r, c);
    }
  }
  return out;
}

}  // namespace privlr

#endif  // PRIVLR_MECHANISMS_HPP
