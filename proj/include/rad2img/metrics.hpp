#pragma once

// Agreement and evaluation statistics: F1, Cohen's kappa, averaging,
// evaluation-condition selection, disagreement counts, agreement bounds and
// the paired bootstrap.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "rad2img/error.hpp"
#include "rad2img/label_model.hpp"

namespace rad2img {

struct ConfusionCounts {
  long tp = 0;
  long fp = 0;
  long fn = 0;
  long tn = 0;

  long total() const { return tp + fp + fn + tn; }
  bool operator==(const ConfusionCounts&) const = default;
};

namespace detail {

inline void check_aligned(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw ValidationError(std::string(what) + ": length mismatch (" + std::to_string(a) +
                          " vs " + std::to_string(b) + ")");
  }
  if (a == 0) throw ValidationError(std::string(what) + ": empty input");
}

}  // namespace detail

inline ConfusionCounts confusion_counts(std::span<const BinaryLabel> pred,
                                        std::span<const BinaryLabel> truth) {
  detail::check_aligned(pred.size(), truth.size(), "confusion_counts");
  ConfusionCounts c;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    bool p = is_positive(pred[i]);
    bool t = is_positive(truth[i]);
    if (p && t) ++c.tp;
    else if (p) ++c.fp;
    else if (t) ++c.fn;
    else ++c.tn;
  }
  return c;
}

/// 2tp / (2tp + fp + fn). With no positives anywhere (tp = fp = fn = 0) the
/// score is 1.0; tp = 0 with any error is 0.0.
inline double f1_score(const ConfusionCounts& c) {
  if (c.tp == 0) return (c.fp + c.fn == 0) ? 1.0 : 0.0;
  return static_cast<double>(2 * c.tp) / static_cast<double>(2 * c.tp + c.fp + c.fn);
}

inline double f1_score(std::span<const BinaryLabel> pred, std::span<const BinaryLabel> truth) {
  return f1_score(confusion_counts(pred, truth));
}

/// Two-category kappa with marginal-product chance agreement. Evaluated in
/// integer arithmetic up to the final division. When chance agreement is 1
/// the result is 1.0 for perfect observed agreement and 0.0 otherwise.
inline double cohens_kappa(const ConfusionCounts& c) {
  const long long n = c.total();
  if (n == 0) throw ValidationError("cohens_kappa: empty input");
  const long long pred_pos = c.tp + c.fp, pred_neg = c.fn + c.tn;
  const long long true_pos = c.tp + c.fn, true_neg = c.fp + c.tn;
  const long long chance = pred_pos * true_pos + pred_neg * true_neg;  // pe * n^2
  const long long observed = (c.tp + c.tn) * n;                        // po * n^2
  const long long denom = n * n - chance;
  if (denom == 0) return observed == n * n ? 1.0 : 0.0;
  return static_cast<double>(observed - chance) / static_cast<double>(denom);
}

inline double cohens_kappa(std::span<const BinaryLabel> pred, std::span<const BinaryLabel> truth) {
  return cohens_kappa(confusion_counts(pred, truth));
}

inline double macro_average(std::span<const double> scores) {
  if (scores.empty()) throw ValidationError("macro_average: empty score list");
  double sum = 0.0;
  for (double s : scores) sum += s;
  return sum / static_cast<double>(scores.size());
}

inline double weighted_average(std::span<const double> scores, std::span<const double> weights) {
  if (scores.size() != weights.size()) {
    throw ValidationError("weighted_average: " + std::to_string(scores.size()) + " scores but " +
                          std::to_string(weights.size()) + " weights");
  }
  if (scores.empty()) throw ValidationError("weighted_average: empty score list");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (weights[i] < 0.0) throw ValidationError("weighted_average: negative weight");
    num += scores[i] * weights[i];
    den += weights[i];
  }
  if (!(den > 0.0)) throw ValidationError("weighted_average: total weight is zero");
  return num / den;
}

// ---------------------------------------------------------------------------
// Reports

struct ConditionScore {
  Condition condition;
  double score;
  long n_positive;
};

/// One score column over a set of evaluation conditions.
struct MetricsReport {
  std::string name;
  std::vector<ConditionScore> per_condition;
  double macro_average = 0.0;
  double weighted_average = 0.0;

  std::vector<double> scores() const {
    std::vector<double> s;
    for (const auto& c : per_condition) s.push_back(c.score);
    return s;
  }
};

inline MetricsReport make_metrics_report(std::string name, std::span<const Condition> conditions,
                                         std::span<const double> scores,
                                         std::span<const long> n_positive) {
  if (conditions.empty()) throw ValidationError("metrics report: empty evaluation set");
  if (conditions.size() != scores.size() || conditions.size() != n_positive.size()) {
    throw ValidationError("metrics report: conditions, scores and counts differ in length");
  }
  MetricsReport r;
  r.name = std::move(name);
  std::vector<double> weights;
  for (std::size_t i = 0; i < conditions.size(); ++i) {
    r.per_condition.push_back({conditions[i], scores[i], n_positive[i]});
    weights.push_back(static_cast<double>(n_positive[i]));
  }
  r.macro_average = macro_average(scores);
  r.weighted_average = weighted_average(scores, weights);
  return r;
}

/// Positive image-truth count per condition, canonical order.
inline std::array<long, kNumConditions> positive_counts(const Corpus& corpus) {
  if (!corpus.has_image_truth()) throw ValidationError("corpus has no image truth channel");
  std::array<long, kNumConditions> counts{};
  for (const auto& s : corpus.studies)
    for (std::size_t i = 0; i < kNumConditions; ++i) counts[i] += is_positive((*s.image_truth)[i]);
  return counts;
}

inline std::vector<long> positive_counts(const Corpus& corpus,
                                         std::span<const Condition> conditions) {
  auto all = positive_counts(corpus);
  std::vector<long> out;
  for (auto c : conditions) out.push_back(all[ordinal(c)]);
  return out;
}

/// Conditions with at least `min_positive` positive image labels, canonical order.
inline std::vector<Condition> select_evaluation_conditions(const Corpus& truth_corpus,
                                                           long min_positive = 50) {
  auto counts = positive_counts(truth_corpus);
  std::vector<Condition> out;
  for (auto c : kAllConditions)
    if (counts[ordinal(c)] >= min_positive) out.push_back(c);
  return out;
}

/// Per-condition F1 of a prediction matrix against the corpus truth.
inline MetricsReport f1_report(std::string name, std::span<const BinaryLabels> predictions,
                               const Corpus& truth, std::span<const Condition> conditions) {
  if (predictions.size() != truth.size()) {
    throw ValidationError("f1_report: " + std::to_string(predictions.size()) +
                          " predictions for " + std::to_string(truth.size()) + " studies");
  }
  std::vector<double> scores;
  for (auto c : conditions) {
    std::vector<BinaryLabel> pred;
    for (const auto& row : predictions) pred.push_back(row[ordinal(c)]);
    scores.push_back(f1_score(pred, truth.truth_column(c)));
  }
  auto counts = positive_counts(truth, conditions);
  return make_metrics_report(std::move(name), conditions, scores, counts);
}

// ---------------------------------------------------------------------------
// Report-vs-image comparisons

struct DisagreementCounts {
  Condition condition;
  long pos_image_neg_report = 0;
  long neg_image_pos_report = 0;
};

/// Counts the two disagreement directions per condition. Blank counts as
/// Negative; Uncertain report labels are excluded from both counts.
inline std::vector<DisagreementCounts> disagreement_counts(const Corpus& joined) {
  if (!joined.has_report_labels() || !joined.has_image_truth()) {
    throw ValidationError("disagreement_counts: corpus needs report labels and image truth");
  }
  std::vector<DisagreementCounts> out;
  for (auto c : kAllConditions) out.push_back({c, 0, 0});
  for (const auto& s : joined.studies) {
    for (std::size_t i = 0; i < kNumConditions; ++i) {
      auto r = (*s.report_labels)[i];
      if (r == ReportLabel::Uncertain) continue;
      bool report_pos = r == ReportLabel::Positive;
      bool image_pos = is_positive((*s.image_truth)[i]);
      if (image_pos && !report_pos) ++out[i].pos_image_neg_report;
      if (!image_pos && report_pos) ++out[i].neg_image_pos_report;
    }
  }
  return out;
}

struct AgreementBounds {
  Condition condition;
  double low_f1 = 0.0;
  double high_f1 = 0.0;
  double low_kappa = 0.0;
  double high_kappa = 0.0;
};

/// High scores resolve Uncertain to the image label, low scores to its
/// opposite.
inline std::vector<AgreementBounds> agreement_bounds(const Corpus& joined,
                                                     std::span<const Condition> conditions) {
  if (!joined.has_report_labels() || !joined.has_image_truth()) {
    throw ValidationError("agreement_bounds: corpus needs report labels and image truth");
  }
  std::vector<AgreementBounds> out;
  for (auto c : conditions) {
    std::vector<BinaryLabel> truth, high, low;
    for (const auto& s : joined.studies) {
      auto t = (*s.image_truth)[ordinal(c)];
      auto r = (*s.report_labels)[ordinal(c)];
      truth.push_back(t);
      high.push_back(binarize_label(r, UncertaintyPolicy::ToTruth, t));
      low.push_back(binarize_label(r, UncertaintyPolicy::ToOpposite, t));
    }
    out.push_back({c, f1_score(low, truth), f1_score(high, truth), cohens_kappa(low, truth),
                   cohens_kappa(high, truth)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Paired bootstrap

struct BootstrapResult {
  double mean_diff = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  int replicates = 0;
  std::uint64_t seed = 0;

  bool operator==(const BootstrapResult&) const = default;
};

/// Independent stream for one replicate; depends only on (seed, replicate).
inline std::mt19937_64 replicate_engine(std::uint64_t seed, std::uint64_t replicate) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(replicate),
                    static_cast<std::uint32_t>(replicate >> 32), 0x5eedu};
  return std::mt19937_64(seq);
}

/// Linear-interpolation empirical quantile of sorted data.
inline double sorted_quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw ValidationError("quantile of empty sample");
  double pos = q * static_cast<double>(sorted.size() - 1);
  auto lo = static_cast<std::size_t>(std::floor(pos));
  auto hi = std::min(lo + 1, sorted.size() - 1);
  double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

inline BootstrapResult summarize_bootstrap(std::vector<double> diffs, double level,
                                           std::uint64_t seed) {
  BootstrapResult r;
  r.replicates = static_cast<int>(diffs.size());
  r.seed = seed;
  double sum = 0.0;
  for (double d : diffs) sum += d;
  r.mean_diff = sum / static_cast<double>(diffs.size());
  std::sort(diffs.begin(), diffs.end());
  r.ci_low = sorted_quantile(diffs, (1.0 - level) / 2.0);
  r.ci_high = sorted_quantile(diffs, 1.0 - (1.0 - level) / 2.0);
  return r;
}

struct PairedBootstrapReport {
  std::vector<Condition> conditions;
  std::vector<BootstrapResult> per_condition;
  BootstrapResult macro;
  BootstrapResult weighted;
};

/// Paired bootstrap over several conditions at once: every replicate draws
/// one set of study indices and scores all conditions on it, so the average
/// differences are paired as well. Columns are indexed [condition][study].
inline PairedBootstrapReport bootstrap_paired_f1_report(
    std::span<const std::vector<BinaryLabel>> preds_a,
    std::span<const std::vector<BinaryLabel>> preds_b,
    std::span<const std::vector<BinaryLabel>> truth, std::span<const Condition> conditions,
    std::span<const double> weights, int replicates = 1000, double level = 0.95,
    std::uint64_t seed = 0) {
  const std::size_t k = conditions.size();
  if (k == 0) throw ValidationError("bootstrap: no conditions");
  if (preds_a.size() != k || preds_b.size() != k || truth.size() != k || weights.size() != k) {
    throw ValidationError("bootstrap: column count mismatch");
  }
  if (replicates < 1) throw ValidationError("bootstrap: replicates must be >= 1");
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("bootstrap: level must lie in (0,1)");
  const std::size_t n = truth[0].size();
  for (std::size_t j = 0; j < k; ++j) {
    detail::check_aligned(preds_a[j].size(), truth[j].size(), "bootstrap");
    detail::check_aligned(preds_b[j].size(), truth[j].size(), "bootstrap");
    if (truth[j].size() != n) throw ValidationError("bootstrap: ragged columns");
  }

  std::vector<std::vector<double>> diffs(k, std::vector<double>(replicates));
  std::vector<double> macro_diffs(replicates), weighted_diffs(replicates);
  std::vector<std::size_t> idx(n);
  std::vector<double> fa(k), fb(k);
  for (int r = 0; r < replicates; ++r) {
    auto rng = replicate_engine(seed, static_cast<std::uint64_t>(r));
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (auto& i : idx) i = pick(rng);
    for (std::size_t j = 0; j < k; ++j) {
      ConfusionCounts ca, cb;
      for (auto i : idx) {
        bool t = is_positive(truth[j][i]);
        bool a = is_positive(preds_a[j][i]);
        bool b = is_positive(preds_b[j][i]);
        (a ? (t ? ca.tp : ca.fp) : (t ? ca.fn : ca.tn))++;
        (b ? (t ? cb.tp : cb.fp) : (t ? cb.fn : cb.tn))++;
      }
      fa[j] = f1_score(ca);
      fb[j] = f1_score(cb);
      diffs[j][r] = fa[j] - fb[j];
    }
    macro_diffs[r] = macro_average(fa) - macro_average(fb);
    weighted_diffs[r] = weighted_average(fa, weights) - weighted_average(fb, weights);
  }

  PairedBootstrapReport out;
  out.conditions.assign(conditions.begin(), conditions.end());
  for (std::size_t j = 0; j < k; ++j)
    out.per_condition.push_back(summarize_bootstrap(std::move(diffs[j]), level, seed));
  out.macro = summarize_bootstrap(std::move(macro_diffs), level, seed);
  out.weighted = summarize_bootstrap(std::move(weighted_diffs), level, seed);
  return out;
}

/// F1(a) - F1(b) over `replicates` resamples of the studies; percentile CI.
inline BootstrapResult bootstrap_paired_f1_diff(std::span<const BinaryLabel> preds_a,
                                                std::span<const BinaryLabel> preds_b,
                                                std::span<const BinaryLabel> truth,
                                                int replicates = 1000, double level = 0.95,
                                                std::uint64_t seed = 0) {
  detail::check_aligned(preds_a.size(), truth.size(), "bootstrap");
  detail::check_aligned(preds_b.size(), truth.size(), "bootstrap");
  std::vector<std::vector<BinaryLabel>> a{{preds_a.begin(), preds_a.end()}};
  std::vector<std::vector<BinaryLabel>> b{{preds_b.begin(), preds_b.end()}};
  std::vector<std::vector<BinaryLabel>> t{{truth.begin(), truth.end()}};
  const Condition dummy[] = {Condition::NoFinding};
  const double w[] = {1.0};
  return bootstrap_paired_f1_report(a, b, t, dummy, w, replicates, level, seed).per_condition[0];
}

}  // namespace rad2img
