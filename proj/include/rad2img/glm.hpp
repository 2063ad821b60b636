#pragma once

// Penalized logistic regression, leave-one-out predictions, odds-ratio
// significance tables and Youden threshold calibration.
//
// Objective for labels y in {0,1}, per-sample weights s and linear score
// eta = w.x + b:
//
//   J(w, b) = sum_i s_i * [softplus(eta_i) - y_i * eta_i] + lambda * Omega(w)
//
// with Omega = 0.5 * |w|^2, lambda = 1/C for L2 and Omega = |w|_1,
// lambda = alpha for L1. The bias is never penalized and the penalty is not
// scaled by n.
//
// fit_logistic aggregates identical (row, label) pairs before optimizing, so
// its result depends only on the multiset of training rows, not their order.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rad2img/error.hpp"
#include "rad2img/label_model.hpp"

namespace rad2img {

struct Penalty {
  enum class Kind { None, L1, L2 };

  Kind kind = Kind::None;
  double alpha = 0.0;  // L1 strength
  double c = 0.0;      // L2 inverse strength

  static Penalty none() { return {}; }
  static Penalty l1(double alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ValidationError("L1 alpha must be > 0");
    return {Kind::L1, alpha, 0.0};
  }
  static Penalty l2(double c) {
    if (!(c > 0.0)) throw ValidationError("L2 C must be > 0");
    return {Kind::L2, 0.0, c};
  }

  double lambda() const {
    switch (kind) {
      case Kind::L1: return alpha;
      case Kind::L2: return 1.0 / c;
      case Kind::None: return 0.0;
    }
    return 0.0;
  }
};

enum class ClassWeighting { Uniform, InversePrevalence };

struct FitOptions {
  int max_iter = 500;
  double tol = 1e-6;
};

struct FitReport {
  int iterations = 0;
  double final_gradient_norm = 0.0;
  bool converged = false;
};

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

/// log(1 + e^z) without overflow.
inline double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

struct LogisticModel {
  std::vector<std::string> feature_names;
  Eigen::VectorXd weights;
  double bias = 0.0;
  Penalty penalty;
  ClassWeighting weighting = ClassWeighting::Uniform;
  FitReport fit_report;

  Eigen::Index num_features() const { return weights.size(); }

  double linear_score(std::span<const double> x) const {
    if (static_cast<Eigen::Index>(x.size()) != weights.size()) {
      throw ValidationError("predict: feature length " + std::to_string(x.size()) +
                            " does not match model dimension " + std::to_string(weights.size()));
    }
    double z = bias;
    for (std::size_t j = 0; j < x.size(); ++j) z += weights[static_cast<Eigen::Index>(j)] * x[j];
    return z;
  }

  double predict_proba(std::span<const double> x) const { return sigmoid(linear_score(x)); }
};

inline double predict_proba(const LogisticModel& model, std::span<const double> x) {
  return model.predict_proba(x);
}

/// N / N_y(i) under InversePrevalence, 1 otherwise.
inline Eigen::VectorXd sample_weights(std::span<const BinaryLabel> y, ClassWeighting weighting) {
  Eigen::VectorXd s = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(y.size()));
  if (weighting == ClassWeighting::Uniform) return s;
  double n = static_cast<double>(y.size());
  double pos = 0;
  for (auto v : y) pos += is_positive(v);
  double neg = n - pos;
  for (std::size_t i = 0; i < y.size(); ++i) {
    double count = is_positive(y[i]) ? pos : neg;
    s[static_cast<Eigen::Index>(i)] = n / count;
  }
  return s;
}

inline Eigen::VectorXd to_numeric(std::span<const BinaryLabel> y) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(y.size()));
  for (std::size_t i = 0; i < y.size(); ++i) v[static_cast<Eigen::Index>(i)] = is_positive(y[i]);
  return v;
}

/// Penalized weighted negative log-likelihood over a fixed dataset.
class LogisticObjective {
 public:
  LogisticObjective(Eigen::MatrixXd x, Eigen::VectorXd y, Eigen::VectorXd s, Penalty penalty)
      : x_(std::move(x)), y_(std::move(y)), s_(std::move(s)), penalty_(penalty) {
    index_sparse_rows();
  }

  static LogisticObjective from_labels(const Eigen::MatrixXd& x, std::span<const BinaryLabel> y,
                                       Penalty penalty, ClassWeighting weighting) {
    return {x, to_numeric(y), sample_weights(y, weighting), penalty};
  }

  const Eigen::MatrixXd& features() const { return x_; }
  const Eigen::VectorXd& labels() const { return y_; }
  const Eigen::VectorXd& weights() const { return s_; }
  const Penalty& penalty() const { return penalty_; }
  Eigen::Index dim() const { return x_.cols(); }
  Eigen::Index rows() const { return x_.rows(); }

  Eigen::VectorXd scores(const Eigen::VectorXd& w, double b) const {
    Eigen::VectorXd eta = x_ * w;
    eta.array() += b;
    return eta;
  }

  double loss_from_scores(const Eigen::VectorXd& eta) const {
    double f = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) f += s_[i] * (softplus(eta[i]) - y_[i] * eta[i]);
    return f;
  }

  double penalty_value(const Eigen::VectorXd& w) const {
    switch (penalty_.kind) {
      case Penalty::Kind::L1: return penalty_.lambda() * w.lpNorm<1>();
      case Penalty::Kind::L2: return 0.5 * penalty_.lambda() * w.squaredNorm();
      case Penalty::Kind::None: return 0.0;
    }
    return 0.0;
  }

  double value(const Eigen::VectorXd& w, double b) const {
    return loss_from_scores(scores(w, b)) + penalty_value(w);
  }

  /// Gradient of the smooth (loss) part; last entry is the bias.
  Eigen::VectorXd loss_gradient(const Eigen::VectorXd& w, double b) const {
    Eigen::VectorXd eta = scores(w, b);
    Eigen::VectorXd r(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) r[i] = s_[i] * (sigmoid(eta[i]) - y_[i]);
    Eigen::VectorXd g(dim() + 1);
    g.head(dim()) = x_.transpose() * r;
    g[dim()] = r.sum();
    return g;
  }

  /// Full gradient. For L1 the penalty contributes lambda * sign(w_j), which
  /// is the derivative wherever no coordinate is exactly zero.
  Eigen::VectorXd gradient(const Eigen::VectorXd& w, double b) const {
    Eigen::VectorXd g = loss_gradient(w, b);
    double lambda = penalty_.lambda();
    for (Eigen::Index j = 0; j < dim(); ++j) {
      if (penalty_.kind == Penalty::Kind::L2) g[j] += lambda * w[j];
      if (penalty_.kind == Penalty::Kind::L1) g[j] += lambda * ((w[j] > 0) - (w[j] < 0));
    }
    return g;
  }

  /// Hessian of the smooth part plus the L2 term, bias last.
  Eigen::MatrixXd hessian(const Eigen::VectorXd& w, double b) const {
    Eigen::VectorXd eta = scores(w, b);
    Eigen::VectorXd curv(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      double p = sigmoid(eta[i]);
      curv[i] = s_[i] * p * (1.0 - p);
    }
    const Eigen::Index d = dim();
    Eigen::MatrixXd h(d + 1, d + 1);
    if (!nonzeros_.empty()) {
      // Bias as an always-present column d; fill the upper triangle.
      h.setZero();
      for (Eigen::Index i = 0; i < rows(); ++i) {
        const auto& nz = nonzeros_[static_cast<std::size_t>(i)];
        const double ci = curv[i];
        for (std::size_t a = 0; a < nz.size(); ++a) {
          const double va = ci * x_(i, nz[a]);
          for (std::size_t b = a; b < nz.size(); ++b) h(nz[a], nz[b]) += va * x_(i, nz[b]);
          h(nz[a], d) += va;
        }
        h(d, d) += ci;
      }
      h.triangularView<Eigen::StrictlyLower>() = h.transpose();
    } else {
      Eigen::MatrixXd weighted = curv.asDiagonal() * x_;
      h.topLeftCorner(d, d).noalias() = x_.transpose() * weighted;
      Eigen::VectorXd cross = weighted.colwise().sum().transpose();
      h.topRightCorner(d, 1) = cross;
      h.bottomLeftCorner(1, d) = cross.transpose();
      h(d, d) = curv.sum();
    }
    if (penalty_.kind == Penalty::Kind::L2) {
      h.topLeftCorner(d, d).diagonal().array() += penalty_.lambda();
    }
    return h;
  }

  /// Norm of the minimum-norm subgradient; zero exactly at the optimum.
  double optimality_residual(const Eigen::VectorXd& w, double b) const {
    Eigen::VectorXd g = loss_gradient(w, b);
    double lambda = penalty_.lambda();
    for (Eigen::Index j = 0; j < dim(); ++j) {
      if (penalty_.kind == Penalty::Kind::L2) {
        g[j] += lambda * w[j];
      } else if (penalty_.kind == Penalty::Kind::L1) {
        if (w[j] != 0.0) g[j] += lambda * (w[j] > 0 ? 1.0 : -1.0);
        else g[j] = std::max(std::abs(g[j]) - lambda, 0.0);
      }
    }
    return g.norm();
  }

 private:
  // Row-wise nonzero columns, kept only when at most a quarter of the
  // entries are nonzero (one-hot inputs).
  void index_sparse_rows() {
    if (x_.size() == 0 || (x_.array() != 0.0).count() * 4 > x_.size()) return;
    nonzeros_.resize(static_cast<std::size_t>(x_.rows()));
    for (Eigen::Index i = 0; i < x_.rows(); ++i)
      for (Eigen::Index j = 0; j < x_.cols(); ++j)
        if (x_(i, j) != 0.0) nonzeros_[static_cast<std::size_t>(i)].push_back(j);
  }

  Eigen::MatrixXd x_;
  Eigen::VectorXd y_;
  Eigen::VectorXd s_;
  Penalty penalty_;
  std::vector<std::vector<Eigen::Index>> nonzeros_;
};

namespace detail {

inline void validate_training_data(const Eigen::MatrixXd& x, std::span<const BinaryLabel> y) {
  if (static_cast<std::size_t>(x.rows()) != y.size()) {
    throw ValidationError("fit_logistic: " + std::to_string(x.rows()) + " rows but " +
                          std::to_string(y.size()) + " labels");
  }
  if (y.size() < 2) throw ValidationError("fit_logistic: need at least 2 samples");
  if (!x.allFinite()) throw ValidationError("fit_logistic: non-finite feature value");
  bool pos = false, neg = false;
  for (auto v : y) (is_positive(v) ? pos : neg) = true;
  if (!(pos && neg)) throw ValidationError("fit_logistic: degenerate labels (single class)");
}

/// Distinct (row, label) pairs in lexicographic order with multiplicities.
/// The order depends only on the multiset of pairs.
struct GroupedRows {
  Eigen::MatrixXd x;             // one row per group
  std::vector<bool> positive;    // label of each group
  std::vector<long> count;       // multiplicity
  std::vector<std::size_t> group_of;  // input row -> group
};

inline GroupedRows group_rows(const Eigen::MatrixXd& x, std::span<const BinaryLabel> y) {
  const Eigen::Index n = x.rows(), d = x.cols();
  const auto du = static_cast<std::size_t>(d);
  std::vector<double> rm(static_cast<std::size_t>(n) * du);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) rm[static_cast<std::size_t>(i) * du + static_cast<std::size_t>(j)] = x(i, j);
  auto cmp = [&](std::size_t a, std::size_t b) {
    const double* ra = rm.data() + a * du;
    const double* rb = rm.data() + b * du;
    for (std::size_t j = 0; j < du; ++j) {
      if (ra[j] < rb[j]) return -1;
      if (rb[j] < ra[j]) return 1;
    }
    return static_cast<int>(is_positive(y[a])) - static_cast<int>(is_positive(y[b]));
  };
  std::vector<std::size_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return cmp(a, b) < 0; });

  GroupedRows g;
  g.group_of.resize(static_cast<std::size_t>(n));
  std::vector<std::size_t> reps;
  for (auto i : order) {
    if (reps.empty() || cmp(reps.back(), i) != 0) {
      reps.push_back(i);
      g.positive.push_back(is_positive(y[i]));
      g.count.push_back(0);
    }
    ++g.count.back();
    g.group_of[i] = reps.size() - 1;
  }
  g.x.resize(static_cast<Eigen::Index>(reps.size()), d);
  for (std::size_t k = 0; k < reps.size(); ++k)
    g.x.row(static_cast<Eigen::Index>(k)) = x.row(static_cast<Eigen::Index>(reps[k]));
  return g;
}

/// Weighted objective over the groups, with `count` overriding the stored
/// multiplicities; zero-count groups are left out. Each group's mass is its
/// count times its class weight.
inline LogisticObjective grouped_objective(const GroupedRows& g, std::span<const long> count,
                                           ClassWeighting weighting, Penalty penalty) {
  long n = 0, pos = 0, m = 0;
  for (std::size_t k = 0; k < count.size(); ++k) {
    n += count[k];
    if (g.positive[k]) pos += count[k];
    if (count[k] > 0) ++m;
  }
  const double w_pos = weighting == ClassWeighting::InversePrevalence
                           ? static_cast<double>(n) / static_cast<double>(pos) : 1.0;
  const double w_neg = weighting == ClassWeighting::InversePrevalence
                           ? static_cast<double>(n) / static_cast<double>(n - pos) : 1.0;
  Eigen::MatrixXd xu(m, g.x.cols());
  Eigen::VectorXd yu(m), su(m);
  Eigen::Index r = 0;
  for (std::size_t k = 0; k < count.size(); ++k) {
    if (count[k] == 0) continue;
    xu.row(r) = g.x.row(static_cast<Eigen::Index>(k));
    yu[r] = g.positive[k] ? 1.0 : 0.0;
    su[r] = static_cast<double>(count[k]) * (g.positive[k] ? w_pos : w_neg);
    ++r;
  }
  return {std::move(xu), std::move(yu), std::move(su), penalty};
}

inline LogisticObjective aggregate(const Eigen::MatrixXd& x, std::span<const BinaryLabel> y,
                                   ClassWeighting weighting, Penalty penalty) {
  auto g = group_rows(x, y);
  return grouped_objective(g, g.count, weighting, penalty);
}

/// Damped Newton iterations for the smooth (L2 / unpenalized) objective.
inline FitReport newton_fit(const LogisticObjective& obj, Eigen::VectorXd& w, double& b,
                            const FitOptions& opt) {
  const Eigen::Index d = obj.dim();
  FitReport rep;
  double f = obj.value(w, b);
  for (int it = 0; it < opt.max_iter; ++it) {
    Eigen::VectorXd g = obj.gradient(w, b);
    double gnorm = g.norm();
    if (gnorm <= opt.tol) {
      rep.iterations = it;
      rep.converged = true;
      rep.final_gradient_norm = gnorm;
      return rep;
    }
    Eigen::MatrixXd h = obj.hessian(w, b);
    Eigen::VectorXd step;
    double ridge = 0.0;
    for (int attempt = 0; attempt < 12; ++attempt) {
      Eigen::MatrixXd hr = h;
      hr.diagonal().array() += ridge;
      Eigen::LDLT<Eigen::MatrixXd> ldlt(hr);
      if (ldlt.info() == Eigen::Success) {
        step = -ldlt.solve(g);
        if (step.allFinite() && g.dot(step) < 0.0) break;
      }
      ridge = ridge == 0.0 ? 1e-10 * std::max(1.0, h.diagonal().cwiseAbs().maxCoeff())
                           : ridge * 100.0;
      step.resize(0);
    }
    if (step.size() == 0) step = -g;

    double slope = g.dot(step);
    // Below this predicted decrease, objective differences are rounding
    // noise and the full Newton step is taken as is.
    const bool noise_level = -slope <= 1e-10 * std::max(1.0, std::abs(f));
    double t = 1.0;
    bool accepted = false;
    Eigen::VectorXd w_new;
    double b_new = b, f_new = f;
    for (int ls = 0; ls < 60; ++ls) {
      w_new = w + t * step.head(d);
      b_new = b + t * step[d];
      f_new = obj.value(w_new, b_new);
      if (f_new <= f + 1e-4 * t * slope || noise_level) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    rep.iterations = it + 1;
    if (!accepted) break;  // no further decrease representable
    w = std::move(w_new);
    b = b_new;
    f = f_new;
  }
  rep.final_gradient_norm = obj.gradient(w, b).norm();
  rep.converged = rep.final_gradient_norm <= opt.tol;
  return rep;
}

/// Cyclic coordinate descent with soft-thresholded Newton steps for L1.
/// Sweep order: bias, then features 0..d-1. Converged when the largest
/// coordinate change in a sweep is at most tol.
inline FitReport coordinate_descent_fit(const LogisticObjective& obj, Eigen::VectorXd& w,
                                        double& b, const FitOptions& opt) {
  const Eigen::MatrixXd& x = obj.features();
  const Eigen::VectorXd& y = obj.labels();
  const Eigen::VectorXd& s = obj.weights();
  const double lambda = obj.penalty().lambda();
  const Eigen::Index n = x.rows(), d = x.cols();
  Eigen::VectorXd eta = obj.scores(w, b);

  // One-dimensional composite objective along column `col` (or the bias
  // when col < 0), at displacement delta.
  auto line_value = [&](Eigen::Index col, double current, double delta) {
    double f = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double z = eta[i] + delta * (col < 0 ? 1.0 : x(i, col));
      f += s[i] * (softplus(z) - y[i] * z);
    }
    if (col >= 0) f += lambda * std::abs(current + delta);
    return f;
  };
  auto coordinate_step = [&](Eigen::Index col, double current) {
    double g = 0.0, h = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double v = col < 0 ? 1.0 : x(i, col);
      if (v == 0.0) continue;
      double p = sigmoid(eta[i]);
      g += s[i] * (p - y[i]) * v;
      h += s[i] * p * (1.0 - p) * v * v;
    }
    if (!(h > 1e-300)) return 0.0;
    double target;
    if (col < 0) {
      target = current - g / h;
    } else {
      double z = h * current - g;
      double shrunk = std::max(std::abs(z) - lambda, 0.0);
      target = (z > 0 ? shrunk : -shrunk) / h;
    }
    double delta = target - current;
    if (delta == 0.0) return 0.0;
    double f0 = line_value(col, current, 0.0);
    for (int ls = 0; ls < 50; ++ls) {
      if (line_value(col, current, delta) <= f0) return delta;
      delta *= 0.5;
    }
    return 0.0;
  };

  FitReport rep;
  for (int sweep = 0; sweep < opt.max_iter; ++sweep) {
    double max_change = 0.0;
    double db = coordinate_step(-1, b);
    if (db != 0.0) {
      b += db;
      eta.array() += db;
      max_change = std::abs(db);
    }
    for (Eigen::Index j = 0; j < d; ++j) {
      double dw = coordinate_step(j, w[j]);
      if (dw == 0.0) continue;
      w[j] += dw;
      eta += dw * x.col(j);
      max_change = std::max(max_change, std::abs(dw));
    }
    rep.iterations = sweep + 1;
    if (max_change <= opt.tol) {
      rep.converged = true;
      break;
    }
  }
  rep.final_gradient_norm = obj.optimality_residual(w, b);
  return rep;
}

}  // namespace detail

namespace detail {

inline LogisticModel fit_objective(const LogisticObjective& obj, ClassWeighting weighting,
                                   const FitOptions& options,
                                   std::vector<std::string> feature_names = {}) {
  const Penalty penalty = obj.penalty();
  const Eigen::Index d = obj.dim();
  if (feature_names.empty()) {
    for (Eigen::Index j = 0; j < d; ++j) feature_names.push_back("x" + std::to_string(j));
  }
  LogisticModel model;
  model.feature_names = std::move(feature_names);
  model.penalty = penalty;
  model.weighting = weighting;
  model.weights = Eigen::VectorXd::Zero(d);
  model.bias = 0.0;
  model.fit_report = penalty.kind == Penalty::Kind::L1
                         ? coordinate_descent_fit(obj, model.weights, model.bias, options)
                         : newton_fit(obj, model.weights, model.bias, options);
  return model;
}

}  // namespace detail

/// Fits a penalized logistic regression from zero initialization. L2 and
/// unpenalized fits use damped Newton steps (converged when the gradient norm
/// is at most tol); L1 fits use cyclic coordinate descent.
inline LogisticModel fit_logistic(const Eigen::MatrixXd& x, std::span<const BinaryLabel> y,
                                  Penalty penalty, ClassWeighting weighting,
                                  const FitOptions& options = {},
                                  std::vector<std::string> feature_names = {}) {
  detail::validate_training_data(x, y);
  if (!feature_names.empty() && static_cast<Eigen::Index>(feature_names.size()) != x.cols()) {
    throw ValidationError("fit_logistic: feature name count does not match columns");
  }
  return detail::fit_objective(detail::aggregate(x, y, weighting, penalty), weighting,
                               options, std::move(feature_names));
}


// ---------------------------------------------------------------------------
// Leave-one-out cross-validation

inline Eigen::MatrixXd drop_row(const Eigen::MatrixXd& x, Eigen::Index row) {
  Eigen::MatrixXd out(x.rows() - 1, x.cols());
  out.topRows(row) = x.topRows(row);
  out.bottomRows(x.rows() - row - 1) = x.bottomRows(x.rows() - row - 1);
  return out;
}

/// For each study, fits on all other studies and labels it Positive iff the
/// held-out probability is >= decision_threshold. A fold whose training
/// labels are single-class predicts that class. Studies sharing a (row,
/// label) pair share one fold fit; every fold objective is built from the
/// same grouping fit_logistic would compute on that fold's training rows.
inline std::vector<BinaryLabel> loocv_binary_predictions(const Eigen::MatrixXd& x,
                                                         std::span<const BinaryLabel> y,
                                                         Penalty penalty,
                                                         ClassWeighting weighting,
                                                         const FitOptions& options = {},
                                                         double decision_threshold = 0.5) {
  const Eigen::Index n = x.rows();
  if (static_cast<std::size_t>(n) != y.size()) {
    throw ValidationError("loocv: row and label counts differ");
  }
  if (n < 3) throw ValidationError("loocv: need at least 3 samples");
  if (!x.allFinite()) throw ValidationError("loocv: non-finite feature value");

  long total_pos = 0;
  for (auto v : y) total_pos += is_positive(v);

  const auto groups = detail::group_rows(x, y);
  std::vector<std::optional<BinaryLabel>> by_group(groups.count.size());
  std::vector<long> count = groups.count;
  std::vector<BinaryLabel> out(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = groups.group_of[static_cast<std::size_t>(i)];
    if (!by_group[k]) {
      const long fold_pos = total_pos - (groups.positive[k] ? 1 : 0);
      const long fold_n = n - 1;
      if (fold_pos == 0 || fold_pos == fold_n) {
        by_group[k] = fold_pos == 0 ? BinaryLabel::Negative : BinaryLabel::Positive;
      } else {
        --count[k];
        auto model = detail::fit_objective(
            detail::grouped_objective(groups, count, weighting, penalty), weighting, options);
        ++count[k];
        const Eigen::VectorXd row = x.row(i).transpose();
        double p = model.predict_proba(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())));
        by_group[k] = p >= decision_threshold ? BinaryLabel::Positive : BinaryLabel::Negative;
      }
    }
    out[static_cast<std::size_t>(i)] = *by_group[k];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Odds ratios

struct OddsRatioEntry {
  std::string feature_name;
  double coefficient = 0.0;
  double odds_ratio = 1.0;
  double std_error = 0.0;
  double statistic = 0.0;
  double p_value = 1.0;
};

struct OddsRatioTable {
  /// Entries with p < p_threshold, in feature order.
  std::vector<OddsRatioEntry> entries;
  /// Every L1-selected feature, before significance filtering.
  std::vector<OddsRatioEntry> selected;
  FitReport selection_report;
  FitReport refit_report;
};

inline double two_sided_normal_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

/// L1 fit selects features (|coefficient| > 1e-8); the selected features are
/// refit without penalty and tested with Wald statistics from the inverse
/// observed information.
inline OddsRatioTable odds_ratio_table(const Eigen::MatrixXd& x, std::span<const BinaryLabel> y,
                                       std::span<const std::string> feature_names,
                                       double alpha = 0.5, double p_threshold = 0.05,
                                       const FitOptions& options = {}) {
  if (static_cast<Eigen::Index>(feature_names.size()) != x.cols()) {
    throw ValidationError("odds_ratio_table: feature name count does not match columns");
  }
  OddsRatioTable table;
  auto lasso = fit_logistic(x, y, Penalty::l1(alpha), ClassWeighting::Uniform, options,
                            {feature_names.begin(), feature_names.end()});
  table.selection_report = lasso.fit_report;

  std::vector<Eigen::Index> keep;
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    if (std::abs(lasso.weights[j]) > 1e-8) keep.push_back(j);
  if (keep.empty()) return table;

  Eigen::MatrixXd xs(x.rows(), static_cast<Eigen::Index>(keep.size()));
  std::vector<std::string> names;
  for (std::size_t k = 0; k < keep.size(); ++k) {
    xs.col(static_cast<Eigen::Index>(k)) = x.col(keep[k]);
    names.push_back(feature_names[static_cast<std::size_t>(keep[k])]);
  }
  auto refit = fit_logistic(xs, y, Penalty::none(), ClassWeighting::Uniform, options, names);
  table.refit_report = refit.fit_report;

  auto info = LogisticObjective::from_labels(xs, y, Penalty::none(), ClassWeighting::Uniform)
                  .hessian(refit.weights, refit.bias);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(info);
  Eigen::MatrixXd cov;
  if (lu.isInvertible()) cov = lu.inverse();

  for (std::size_t k = 0; k < keep.size(); ++k) {
    auto kk = static_cast<Eigen::Index>(k);
    OddsRatioEntry e;
    e.feature_name = names[k];
    e.coefficient = refit.weights[kk];
    e.odds_ratio = std::exp(e.coefficient);
    double var = cov.size() ? cov(kk, kk) : std::numeric_limits<double>::infinity();
    e.std_error = var > 0.0 ? std::sqrt(var) : std::numeric_limits<double>::infinity();
    e.statistic = std::isfinite(e.std_error) ? e.coefficient / e.std_error : 0.0;
    e.p_value = std::isfinite(e.std_error) ? two_sided_normal_p(e.statistic) : 1.0;
    table.selected.push_back(e);
    if (e.p_value < p_threshold) table.entries.push_back(e);
  }
  return table;
}

// ---------------------------------------------------------------------------
// Thresholds

struct YoudenChoice {
  double threshold = 0.5;
  double youden_j = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
};

/// Candidate thresholds: 0, 1 and the midpoints between consecutive
/// distinct probabilities, ascending. A midpoint that rounds onto the lower
/// value is replaced by the upper value so the partition is preserved.
inline std::vector<double> youden_candidates(std::span<const double> probs) {
  std::vector<double> v(probs.begin(), probs.end());
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  std::vector<double> cand{0.0};
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    double mid = v[i] + (v[i + 1] - v[i]) / 2.0;
    if (!(mid > v[i])) mid = v[i + 1];
    cand.push_back(mid);
  }
  cand.push_back(1.0);
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
  return cand;
}

/// Threshold maximizing sensitivity + specificity - 1 with the rule
/// "positive iff p >= t"; ties go to the smallest threshold.
inline YoudenChoice youden_threshold(std::span<const double> probs,
                                     std::span<const BinaryLabel> truth) {
  if (probs.size() != truth.size()) throw ValidationError("youden: length mismatch");
  std::vector<std::pair<double, bool>> pts;
  long total_pos = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!(probs[i] >= 0.0 && probs[i] <= 1.0)) {
      throw ValidationError("youden: probability outside [0,1]");
    }
    pts.emplace_back(probs[i], is_positive(truth[i]));
    total_pos += is_positive(truth[i]);
  }
  const long total_neg = static_cast<long>(pts.size()) - total_pos;
  if (total_pos == 0 || total_neg == 0) {
    throw ValidationError("youden: cannot calibrate with single-class labels");
  }
  std::sort(pts.begin(), pts.end());
  // suffix[k] = (positives, negatives) among pts[k..]
  std::vector<std::pair<long, long>> suffix(pts.size() + 1, {0, 0});
  for (std::size_t k = pts.size(); k-- > 0;) {
    suffix[k] = suffix[k + 1];
    (pts[k].second ? suffix[k].first : suffix[k].second)++;
  }

  YoudenChoice best;
  bool first = true;
  for (double t : youden_candidates(probs)) {
    auto k = static_cast<std::size_t>(
        std::lower_bound(pts.begin(), pts.end(), std::make_pair(t, false)) - pts.begin());
    long tp = suffix[k].first;
    long fp = suffix[k].second;
    long tn = total_neg - fp;
    double sens = static_cast<double>(tp) / static_cast<double>(total_pos);
    double spec = static_cast<double>(tn) / static_cast<double>(total_neg);
    double j = sens + spec - 1.0;
    if (first || j > best.youden_j) {
      best = {t, j, sens, spec};
      first = false;
    }
  }
  return best;
}

struct ThresholdSet {
  std::array<std::optional<double>, kNumConditions> thresholds{};

  std::optional<double> get(Condition c) const { return thresholds[ordinal(c)]; }
  void set(Condition c, double t) { thresholds[ordinal(c)] = t; }
};

/// Per-condition Youden thresholds from a corpus carrying probabilities and
/// image truth.
inline ThresholdSet youden_thresholds(const Corpus& calibration,
                                      std::span<const Condition> conditions) {
  ThresholdSet set;
  for (auto c : conditions) {
    auto truth = calibration.truth_column(c);
    long pos = 0;
    for (auto t : truth) pos += is_positive(t);
    if (pos == 0 || pos == static_cast<long>(truth.size())) {
      throw ValidationError("cannot calibrate " + std::string(condition_name(c)) +
                            ": calibration labels are single-class");
    }
    set.set(c, youden_threshold(calibration.probability_column(c), truth).threshold);
  }
  return set;
}

/// Positive iff p >= t. Conditions without a calibrated threshold use
/// `fallback`.
inline BinaryLabels apply_thresholds(std::span<const double> probabilities,
                                     const ThresholdSet& set, double fallback = 0.5) {
  if (probabilities.size() != kNumConditions) {
    throw ValidationError("apply_thresholds: expected " + std::to_string(kNumConditions) +
                          " probabilities, got " + std::to_string(probabilities.size()));
  }
  BinaryLabels out;
  for (std::size_t i = 0; i < kNumConditions; ++i) {
    double t = set.thresholds[i].value_or(fallback);
    out[i] = probabilities[i] >= t ? BinaryLabel::Positive : BinaryLabel::Negative;
  }
  return out;
}

}  // namespace rad2img
