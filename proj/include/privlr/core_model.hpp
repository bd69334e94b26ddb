#ifndef PRIVLR_CORE_MODEL_HPP
#define PRIVLR_CORE_MODEL_HPP

// Logistic-regression objective, gradient, descent and prediction.
//
// Everything here is templated on the scalar type and works on dense Eigen
// storage. Datasets hold one record per row of `features`; parameters are the
// weight vector plus a scalar bias.

#include <Eigen/Dense>

#include <cmath>
#include <concepts>
#include <optional>
#include <sstream>
#include <string>

#include "privlr/error.hpp"

namespace privlr {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Index = Eigen::Index;

template <typename Scalar>
struct ModelParams {
  Vector<Scalar> weights;
  Scalar bias = Scalar(0);

  static ModelParams Zero(Index dimension) { return {Vector<Scalar>::Zero(dimension), Scalar(0)}; }

  Index dimension() const { return weights.size(); }

  /// (w, alpha) as one vector of length d + 1.
  Vector<Scalar> stacked() const {
    Vector<Scalar> out(weights.size() + 1);
    out << weights, bias;
    return out;
  }

  static ModelParams FromStacked(const Vector<Scalar>& theta) {
    const Index d = theta.size() - 1;
    return {theta.head(d), theta(d)};
  }

  bool allFinite() const { return weights.allFinite() && std::isfinite(bias); }

  bool operator==(const ModelParams& other) const {
    return weights.size() == other.weights.size() && weights == other.weights && bias == other.bias;
  }
};

using ModelParamsd = ModelParams<double>;

template <typename Scalar>
struct Dataset {
  Matrix<Scalar> features;  // N x d
  Eigen::VectorXi labels;   // N entries in {0, 1}

  Index size() const { return features.rows(); }
  Index dimension() const { return features.cols(); }
  bool empty() const { return features.rows() == 0; }

  Vector<Scalar> labelsAs() const { return labels.cast<Scalar>(); }
};

using Datasetd = Dataset<double>;

namespace detail {

inline std::string mismatch_message(const char* what, Index expected, Index got) {
  std::ostringstream os;
  os << what << ": dimension mismatch (expected " << expected << ", got " << got << ")";
  return os.str();
}

}  // namespace detail

template <typename Scalar>
void check_dimensions(const ModelParams<Scalar>& params, const Dataset<Scalar>& data, const char* what) {
  if (params.dimension() != data.dimension())
    throw DimensionError(detail::mismatch_message(what, data.dimension(), params.dimension()));
  if (data.labels.size() != data.size())
    throw DimensionError(detail::mismatch_message(what, data.size(), data.labels.size()));
}

/// 1 / (1 + e^-x), evaluated without overflow for any finite x.
template <typename Scalar>
Scalar sigmoid(Scalar x) {
  using std::exp;
  const Scalar z = exp(-std::abs(x));
  return x >= Scalar(0) ? Scalar(1) / (Scalar(1) + z) : z / (Scalar(1) + z);
}

/// ln(1 + e^t); for t > 0 computed as t + ln(1 + e^-t).
template <typename Scalar>
Scalar log1p_exp(Scalar t) {
  using std::exp;
  using std::log1p;
  return t > Scalar(0) ? t + log1p(exp(-t)) : log1p(exp(t));
}

/// Linear scores w^T x_i + alpha for every record.
template <typename Scalar>
Vector<Scalar> margins(const ModelParams<Scalar>& params, const Dataset<Scalar>& data) {
  return (data.features * params.weights).array() + params.bias;
}

/// Negative log-likelihood summed over all N records:
///   sum_i -y_i (w^T x_i + alpha) + ln(1 + exp(w^T x_i + alpha))
template <typename Scalar>
Scalar objective_value(const ModelParams<Scalar>& params, const Dataset<Scalar>& data) {
  check_dimensions(params, data, "objective_value");
  const Vector<Scalar> t = margins(params, data);
  Scalar total(0);
  for (Index i = 0; i < t.size(); ++i) total += log1p_exp(t(i)) - Scalar(data.labels(i)) * t(i);
  return total;
}

template <typename Scalar>
ModelParams<Scalar> objective_gradient(const ModelParams<Scalar>& params, const Dataset<Scalar>& data) {
  check_dimensions(params, data, "objective_gradient");
  Vector<Scalar> residual = margins(params, data);
  for (Index i = 0; i < residual.size(); ++i) residual(i) = sigmoid(residual(i)) - Scalar(data.labels(i));
  return {data.features.transpose() * residual, residual.sum()};
}

/// Anything `minimize` can descend on. `step_scale()` is the number of
/// records the objective sums over; each step moves by
/// learning_rate * gradient / step_scale so that the learning rate does not
/// depend on dataset size.
template <typename F, typename Scalar>
concept DifferentiableObjective = requires(const F& f, const ModelParams<Scalar>& p) {
  { f.value(p) } -> std::convertible_to<Scalar>;
  { f.gradient(p) } -> std::convertible_to<ModelParams<Scalar>>;
  { f.step_scale() } -> std::convertible_to<Scalar>;
};

/// The unperturbed logistic objective bound to a dataset. The dataset must
/// outlive the objective.
template <typename Scalar>
class LogisticObjective {
 public:
  explicit LogisticObjective(const Dataset<Scalar>& data) : data_(&data) {}

  Scalar value(const ModelParams<Scalar>& p) const { return objective_value(p, *data_); }
  ModelParams<Scalar> gradient(const ModelParams<Scalar>& p) const { return objective_gradient(p, *data_); }
  Scalar step_scale() const { return data_->size() > 0 ? Scalar(data_->size()) : Scalar(1); }

  const Dataset<Scalar>& data() const { return *data_; }

 private:
  const Dataset<Scalar>* data_;
};

struct GdSettings {
  double learning_rate = 0.1;
  int epochs = 40;
  std::optional<double> clip_radius = 50.0;

  void validate() const {
    if (!(learning_rate > 0.0)) throw InvalidArgument("GdSettings: learning_rate must be > 0");
    if (epochs < 1) throw InvalidArgument("GdSettings: epochs must be >= 1");
    if (clip_radius && !(*clip_radius > 0.0)) throw InvalidArgument("GdSettings: clip_radius must be > 0");
  }
};

/// Rescales (w, alpha) onto the l2 ball of the given radius if outside it.
template <typename Scalar>
void clip_to_ball(ModelParams<Scalar>& p, Scalar radius) {
  const Scalar norm = std::sqrt(p.weights.squaredNorm() + p.bias * p.bias);
  if (norm > radius) {
    const Scalar s = radius / norm;
    p.weights *= s;
    p.bias *= s;
  }
}

/// Full-batch gradient descent for exactly `settings.epochs` steps.
/// `observer(epoch, params)` is called after each step (post clipping).
template <typename Scalar, DifferentiableObjective<Scalar> Objective, typename Observer>
ModelParams<Scalar> minimize(const Objective& objective, const ModelParams<Scalar>& init, const GdSettings& settings,
                             Observer&& observer) {
  settings.validate();
  if (!init.allFinite() || !std::isfinite(static_cast<double>(objective.value(init))))
    throw NumericalError("minimize: objective is not finite at the initial point", 0);

  const Scalar step = Scalar(settings.learning_rate) / Scalar(objective.step_scale());
  ModelParams<Scalar> p = init;
  for (int epoch = 1; epoch <= settings.epochs; ++epoch) {
    const ModelParams<Scalar> g = objective.gradient(p);
    p.weights -= step * g.weights;
    p.bias -= step * g.bias;
    if (settings.clip_radius) clip_to_ball(p, Scalar(*settings.clip_radius));
    if (!p.allFinite()) {
      std::ostringstream os;
      os << "minimize: non-finite parameters at step " << epoch;
      throw NumericalError(os.str(), epoch);
    }
    observer(epoch, static_cast<const ModelParams<Scalar>&>(p));
  }
  return p;
}

template <typename Scalar, DifferentiableObjective<Scalar> Objective>
ModelParams<Scalar> minimize(const Objective& objective, const ModelParams<Scalar>& init, const GdSettings& settings) {
  return minimize(objective, init, settings, [](int, const ModelParams<Scalar>&) {});
}

template <typename Scalar>
void check_dimensions(const ModelParams<Scalar>& params, const Vector<Scalar>& x, const char* what) {
  if (params.dimension() != x.size()) throw DimensionError(detail::mismatch_message(what, params.dimension(), x.size()));
}

/// p(y = 1 | x) = sigmoid(w^T x + alpha).
template <typename Scalar>
Scalar predict_proba(const ModelParams<Scalar>& params, const Vector<Scalar>& x) {
  check_dimensions(params, x, "predict_proba");
  return sigmoid(Scalar(params.weights.dot(x) + params.bias));
}

/// 1 iff the predicted probability is strictly above one half.
template <typename Scalar>
int predict_label(const ModelParams<Scalar>& params, const Vector<Scalar>& x) {
  return predict_proba(params, x) > Scalar(0.5) ? 1 : 0;
}

template <typename Scalar>
double misclassification_rate(const ModelParams<Scalar>& params, const Dataset<Scalar>& test) {
  if (test.empty()) throw DataError("misclassification_rate: empty test set");
  check_dimensions(params, test, "misclassification_rate");
  const Vector<Scalar> t = margins(params, test);
  Index wrong = 0;
  for (Index i = 0; i < t.size(); ++i) {
    const int label = sigmoid(t(i)) > Scalar(0.5) ? 1 : 0;
    if (label != test.labels(i)) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(test.size());
}

}  // namespace privlr

#endif  // PRIVLR_CORE_MODEL_HPP
