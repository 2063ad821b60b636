#pragma once

// Label-mapping strategies evaluated against image truth: fixed uncertainty
// mappings, logistic heads on one-hot report labels, thresholds and logistic
// heads on model probabilities.

#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "rad2img/corpus_io.hpp"
#include "rad2img/csv.hpp"
#include "rad2img/error.hpp"
#include "rad2img/glm.hpp"
#include "rad2img/label_model.hpp"
#include "rad2img/metrics.hpp"

namespace rad2img {

/// Binary predictions for a subset of conditions, indexed [condition][study].
struct PredictionTable {
  std::vector<std::string> ids;
  std::vector<Condition> conditions;
  std::vector<std::vector<BinaryLabel>> columns;

  const std::vector<BinaryLabel>& column(Condition c) const {
    for (std::size_t j = 0; j < conditions.size(); ++j)
      if (conditions[j] == c) return columns[j];
    throw ValidationError("predictions have no column for " + std::string(condition_name(c)));
  }
};

inline std::string write_predictions(const PredictionTable& p) {
  std::vector<std::string> header{"study_id"};
  for (auto c : p.conditions) header.emplace_back(condition_name(c));
  std::string out = csv::format_row(header);
  for (std::size_t i = 0; i < p.ids.size(); ++i) {
    std::vector<std::string> row{p.ids[i]};
    for (const auto& col : p.columns) row.emplace_back(is_positive(col[i]) ? "1" : "0");
    out += csv::format_row(row);
  }
  return out;
}

/// study_id followed by any non-empty subset of condition columns.
inline PredictionTable parse_predictions(std::string_view text,
                                         std::string_view source = "predictions") {
  auto t = csv::parse(text);
  if (t.header.size() < 2 || t.header[0] != "study_id") {
    throw ValidationError(std::string(source) + ": header must be study_id followed by conditions");
  }
  PredictionTable p;
  for (std::size_t j = 1; j < t.header.size(); ++j) {
    auto c = parse_condition(t.header[j]);
    if (!c) throw ValidationError(std::string(source) + ": unknown column '" + t.header[j] + "'");
    for (auto seen : p.conditions)
      if (seen == *c) throw ValidationError(std::string(source) + ": duplicate column '" + t.header[j] + "'");
    p.conditions.push_back(*c);
  }
  p.columns.resize(p.conditions.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    if (row.size() != t.header.size()) {
      throw ValidationError(std::string(source) + " line " + std::to_string(t.line_numbers[r]) +
                            ": expected " + std::to_string(t.header.size()) + " cells");
    }
    p.ids.push_back(row[0]);
    for (std::size_t j = 1; j < row.size(); ++j) {
      auto v = parse_binary_cell(row[j]);
      if (!v) throw ValidationError(detail::cell_error(source, t, r, j, "expected 1 or 0"));
      p.columns[j - 1].push_back(*v);
    }
  }
  return p;
}

/// Reorders `p` to follow the study order of `truth`; every truth study must
/// have a prediction.
inline PredictionTable align_predictions(const PredictionTable& p, const Corpus& truth) {
  std::unordered_map<std::string, std::size_t> at;
  for (std::size_t i = 0; i < p.ids.size(); ++i) at.emplace(p.ids[i], i);
  PredictionTable out;
  out.conditions = p.conditions;
  out.columns.resize(p.columns.size());
  for (const auto& s : truth.studies) {
    auto it = at.find(s.id);
    if (it == at.end()) throw ValidationError("no prediction for study '" + s.id + "'");
    out.ids.push_back(s.id);
    for (std::size_t j = 0; j < p.columns.size(); ++j) out.columns[j].push_back(p.columns[j][it->second]);
  }
  return out;
}

inline MetricsReport score_predictions(std::string name, const PredictionTable& p,
                                       const Corpus& truth) {
  std::vector<double> scores;
  for (std::size_t j = 0; j < p.conditions.size(); ++j)
    scores.push_back(f1_score(p.columns[j], truth.truth_column(p.conditions[j])));
  return make_metrics_report(std::move(name), p.conditions, scores,
                             positive_counts(truth, p.conditions));
}

// ---------------------------------------------------------------------------
// Fixed uncertainty mappings

struct ZeroOneResult {
  MetricsReport zeros;
  MetricsReport ones;
  MetricsReport best;  // per condition, the better of the two
  std::vector<UncertaintyPolicy> chosen;
  PredictionTable best_predictions;
};

inline ZeroOneResult zero_one_baseline(const Corpus& joined, std::span<const Condition> conditions) {
  if (!joined.has_report_labels() || !joined.has_image_truth()) {
    throw ValidationError("zero-one baseline: corpus needs report labels and image truth");
  }
  ZeroOneResult r;
  std::vector<double> z, o, b;
  r.best_predictions.conditions.assign(conditions.begin(), conditions.end());
  for (const auto& s : joined.studies) r.best_predictions.ids.push_back(s.id);
  for (auto c : conditions) {
    std::vector<BinaryLabel> pz, po;
    for (const auto& s : joined.studies) {
      auto l = (*s.report_labels)[ordinal(c)];
      pz.push_back(binarize_label(l, UncertaintyPolicy::Zeros));
      po.push_back(binarize_label(l, UncertaintyPolicy::Ones));
    }
    auto truth = joined.truth_column(c);
    double fz = f1_score(pz, truth), fo = f1_score(po, truth);
    z.push_back(fz);
    o.push_back(fo);
    bool ones = fo > fz;
    b.push_back(ones ? fo : fz);
    r.chosen.push_back(ones ? UncertaintyPolicy::Ones : UncertaintyPolicy::Zeros);
    r.best_predictions.columns.push_back(ones ? std::move(po) : std::move(pz));
  }
  auto counts = positive_counts(joined, conditions);
  r.zeros = make_metrics_report("Zeros", conditions, z, counts);
  r.ones = make_metrics_report("Ones", conditions, o, counts);
  r.best = make_metrics_report("Best", conditions, b, counts);
  return r;
}

// ---------------------------------------------------------------------------
// Logistic heads

inline Eigen::MatrixXd one_hot_matrix(const Corpus& corpus) {
  if (!corpus.has_report_labels()) throw ValidationError("corpus has no report label channel");
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(corpus.size()),
                                            static_cast<Eigen::Index>(kOneHotWidth));
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    auto f = encode_one_hot(*corpus.studies[i].report_labels);
    for (std::size_t j = 0; j < kOneHotWidth; ++j)
      if (f.bits[j]) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 1.0;
  }
  return x;
}

inline Eigen::MatrixXd probability_matrix(const Corpus& corpus) {
  if (!corpus.has_probabilities()) throw ValidationError("corpus has no probability channel");
  Eigen::MatrixXd x(static_cast<Eigen::Index>(corpus.size()),
                    static_cast<Eigen::Index>(kNumConditions));
  for (std::size_t i = 0; i < corpus.size(); ++i)
    for (std::size_t j = 0; j < kNumConditions; ++j)
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (*corpus.studies[i].probabilities)[j];
  return x;
}

inline std::vector<std::string> probability_feature_names() {
  std::vector<std::string> out;
  for (auto n : kConditionNames) out.emplace_back(std::string(n) + " Probability");
  return out;
}

struct HeadSettings {
  Penalty penalty = Penalty::l2(1.0);
  ClassWeighting weighting = ClassWeighting::InversePrevalence;
  FitOptions options{};
  double decision_threshold = 0.5;
};

/// LOOCV predictions of one logistic head per condition on shared features.
inline PredictionTable loocv_heads(const Eigen::MatrixXd& x, const Corpus& truth,
                                   std::span<const Condition> conditions,
                                   const HeadSettings& settings = {}) {
  PredictionTable p;
  for (const auto& s : truth.studies) p.ids.push_back(s.id);
  p.conditions.assign(conditions.begin(), conditions.end());
  for (auto c : conditions) {
    auto y = truth.truth_column(c);
    p.columns.push_back(loocv_binary_predictions(x, y, settings.penalty, settings.weighting,
                                                 settings.options, settings.decision_threshold));
  }
  return p;
}

/// One-hot report labels of all conditions -> image truth, per condition.
inline PredictionTable logreg_baseline(const Corpus& joined, std::span<const Condition> conditions,
                                       const HeadSettings& settings = {}) {
  if (!joined.has_image_truth()) throw ValidationError("logreg baseline: corpus needs image truth");
  return loocv_heads(one_hot_matrix(joined), joined, conditions, settings);
}

/// All 14 probabilities -> image truth, per condition.
inline PredictionTable visual_pipeline(const Corpus& joined, std::span<const Condition> conditions,
                                       const HeadSettings& settings = {}) {
  if (!joined.has_image_truth()) throw ValidationError("visual pipeline: corpus needs image truth");
  return loocv_heads(probability_matrix(joined), joined, conditions, settings);
}

inline PredictionTable threshold_pipeline(const Corpus& corpus, const ThresholdSet& thresholds,
                                          std::span<const Condition> conditions,
                                          double fallback = 0.5) {
  if (!corpus.has_probabilities()) throw ValidationError("corpus has no probability channel");
  PredictionTable p;
  p.conditions.assign(conditions.begin(), conditions.end());
  p.columns.resize(conditions.size());
  for (const auto& s : corpus.studies) {
    p.ids.push_back(s.id);
    auto labels = apply_thresholds(*s.probabilities, thresholds, fallback);
    for (std::size_t j = 0; j < conditions.size(); ++j)
      p.columns[j].push_back(labels[ordinal(conditions[j])]);
  }
  return p;
}

// ---------------------------------------------------------------------------
// Paired comparison

inline PairedBootstrapReport compare_predictions(const PredictionTable& a, const PredictionTable& b,
                                                 const Corpus& truth,
                                                 std::span<const Condition> conditions,
                                                 int replicates = 1000, double level = 0.95,
                                                 std::uint64_t seed = 0) {
  auto aa = align_predictions(a, truth);
  auto bb = align_predictions(b, truth);
  std::vector<std::vector<BinaryLabel>> ca, cb, ct;
  for (auto c : conditions) {
    ca.push_back(aa.column(c));
    cb.push_back(bb.column(c));
    ct.push_back(truth.truth_column(c));
  }
  auto counts = positive_counts(truth, conditions);
  std::vector<double> weights(counts.begin(), counts.end());
  return bootstrap_paired_f1_report(ca, cb, ct, conditions, weights, replicates, level, seed);
}

}  // namespace rad2img
