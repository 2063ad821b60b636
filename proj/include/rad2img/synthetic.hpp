#pragma once

// Seeded synthetic corpora with all four channels: image truth, report
// labels, teacher probabilities and impression text.
//
// Truth is drawn per condition; a hierarchy parent is optionally coupled to
// its children while keeping its marginal prevalence. Report labels are the
// truth passed through per-condition noise (uncertain / blank / flipped),
// after which a positive child report blanks its parent's report label.
// Impressions are rendered from the final report labels plus qualifier words
// that depend on the truth and that a label-only view cannot see.

#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "rad2img/error.hpp"
#include "rad2img/label_model.hpp"

namespace rad2img {

struct ConditionNoise {
  double prevalence = 0.3;
  // P(report label | image positive)
  double uncertain_pos = 0.0;
  double blank_pos = 0.0;
  double flip_pos = 0.0;  // reported Negative
  // P(report label | image negative)
  double uncertain_neg = 0.0;
  double blank_neg = 0.0;
  double flip_neg = 0.0;  // reported Positive
};

struct HierarchyPair {
  Condition child;
  Condition parent;
};

struct SyntheticSpec {
  std::array<ConditionNoise, kNumConditions> conditions{};
  std::vector<HierarchyPair> hierarchy;
  // P(parent image positive | some child image positive); 0 leaves the
  // parent independent of its children.
  double truth_coupling = 0.0;
  // No Finding truth becomes "no pathology positive" and its report label
  // becomes "no other label Positive or Uncertain" (Support Devices ignored).
  bool derive_no_finding = false;
  // Teacher logit = logit(prevalence) +/- margin + N(0, noise).
  double teacher_margin = 2.0;
  double teacher_noise = 1.0;
  // Probability that a qualifier word agrees with the image truth.
  double cue_fidelity = 0.85;
  std::array<std::string, kNumConditions> phrases{};

  void validate() const;
};

namespace detail {

inline bool is_rate(double r) { return r >= 0.0 && r <= 1.0; }

inline std::string default_phrase(Condition c) {
  std::string s(condition_name(c));
  for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return s;
}

inline bool excluded_from_no_finding(Condition c) {
  return c == Condition::NoFinding || c == Condition::SupportDevices;
}

/// P(parent positive | no child positive) that preserves the parent's
/// marginal prevalence under the coupling.
inline double uncoupled_parent_rate(const SyntheticSpec& spec, Condition parent) {
  double none = 1.0;
  for (const auto& h : spec.hierarchy)
    if (h.parent == parent) none *= 1.0 - spec.conditions[ordinal(h.child)].prevalence;
  const double any = 1.0 - none;
  const double pi = spec.conditions[ordinal(parent)].prevalence;
  return (pi - spec.truth_coupling * any) / (1.0 - any);
}

inline bool is_parent(const SyntheticSpec& spec, Condition c) {
  for (const auto& h : spec.hierarchy)
    if (h.parent == c) return true;
  return false;
}

}  // namespace detail

inline void SyntheticSpec::validate() const {
  for (auto c : kAllConditions) {
    const auto& n = conditions[ordinal(c)];
    const std::string name(condition_name(c));
    if (!(n.prevalence > 0.0 && n.prevalence < 1.0)) {
      throw ValidationError("synthetic spec: prevalence of " + name + " must lie in (0,1)");
    }
    for (double r : {n.uncertain_pos, n.blank_pos, n.flip_pos, n.uncertain_neg, n.blank_neg,
                     n.flip_neg}) {
      if (!detail::is_rate(r)) throw ValidationError("synthetic spec: rate outside [0,1] for " + name);
    }
    if (n.uncertain_pos + n.blank_pos + n.flip_pos > 1.0 ||
        n.uncertain_neg + n.blank_neg + n.flip_neg > 1.0) {
      throw ValidationError("synthetic spec: noise rates for " + name + " sum above 1");
    }
  }
  for (const auto& h : hierarchy) {
    if (h.child == h.parent) throw ValidationError("synthetic spec: condition is its own parent");
    if (h.parent == Condition::NoFinding || h.child == Condition::NoFinding) {
      throw ValidationError("synthetic spec: No Finding cannot take part in the hierarchy");
    }
    if (detail::is_parent(*this, h.child)) {
      throw ValidationError("synthetic spec: hierarchy deeper than one level");
    }
  }
  if (!detail::is_rate(truth_coupling) || truth_coupling >= 1.0) {
    throw ValidationError("synthetic spec: truth_coupling must lie in [0,1)");
  }
  if (truth_coupling > 0.0) {
    for (auto c : kAllConditions) {
      if (!detail::is_parent(*this, c)) continue;
      double q = detail::uncoupled_parent_rate(*this, c);
      if (!detail::is_rate(q)) {
        throw ValidationError("synthetic spec: coupling cannot preserve the prevalence of " +
                              std::string(condition_name(c)));
      }
    }
  }
  if (!(teacher_noise >= 0.0) || !std::isfinite(teacher_margin)) {
    throw ValidationError("synthetic spec: teacher noise must be >= 0 and margin finite");
  }
  if (!detail::is_rate(cue_fidelity)) throw ValidationError("synthetic spec: cue_fidelity outside [0,1]");
}

/// Every report label equals the truth; no hierarchy, no coupling.
inline SyntheticSpec noiseless_spec(double prevalence = 0.3) {
  SyntheticSpec s;
  for (auto& c : s.conditions) c = ConditionNoise{prevalence};
  s.truth_coupling = 0.0;
  for (auto c : kAllConditions) s.phrases[ordinal(c)] = detail::default_phrase(c);
  return s;
}

/// Prevalences roughly matching a 500-study expert-labeled test set, with
/// report noise dominated by omission, uncertainty and hierarchy blanking.
inline SyntheticSpec chexpert_like_spec() {
  SyntheticSpec s;
  auto set = [&](Condition c, double pi, double up, double bp, double fp, double un, double bn,
                 double fn) { s.conditions[ordinal(c)] = {pi, up, bp, fp, un, bn, fn}; };
  using C = Condition;
  set(C::NoFinding, 0.124, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
  set(C::EnlargedCardiomediastinum, 0.506, 0.10, 0.70, 0.05, 0.03, 0.90, 0.02);
  set(C::Cardiomegaly, 0.302, 0.08, 0.40, 0.05, 0.03, 0.80, 0.04);
  set(C::LungOpacity, 0.528, 0.05, 0.25, 0.04, 0.03, 0.85, 0.04);
  set(C::LungLesion, 0.040, 0.10, 0.30, 0.05, 0.02, 0.95, 0.01);
  set(C::Edema, 0.156, 0.20, 0.25, 0.05, 0.05, 0.80, 0.04);
  set(C::Consolidation, 0.066, 0.25, 0.30, 0.05, 0.05, 0.85, 0.03);
  set(C::Pneumonia, 0.030, 0.30, 0.30, 0.05, 0.05, 0.90, 0.02);
  set(C::Atelectasis, 0.306, 0.25, 0.25, 0.05, 0.08, 0.80, 0.04);
  set(C::Pneumothorax, 0.020, 0.10, 0.10, 0.05, 0.02, 0.50, 0.01);
  set(C::PleuralEffusion, 0.208, 0.12, 0.20, 0.05, 0.05, 0.60, 0.04);
  set(C::PleuralOther, 0.020, 0.15, 0.40, 0.05, 0.02, 0.95, 0.01);
  set(C::Fracture, 0.030, 0.10, 0.50, 0.05, 0.01, 0.95, 0.01);
  set(C::SupportDevices, 0.522, 0.02, 0.15, 0.03, 0.01, 0.90, 0.03);
  s.hierarchy = {{C::Cardiomegaly, C::EnlargedCardiomediastinum},
                 {C::LungLesion, C::LungOpacity},
                 {C::Edema, C::LungOpacity},
                 {C::Consolidation, C::LungOpacity},
                 {C::Pneumonia, C::LungOpacity},
                 {C::Atelectasis, C::LungOpacity}};
  s.truth_coupling = 0.9;
  s.derive_no_finding = true;
  for (auto c : kAllConditions) s.phrases[ordinal(c)] = detail::default_phrase(c);
  return s;
}

namespace detail {

inline double logit(double p) { return std::log(p / (1.0 - p)); }

inline const char* pick(std::mt19937_64& rng, std::initializer_list<const char*> words) {
  std::uniform_int_distribution<std::size_t> d(0, words.size() - 1);
  return *(words.begin() + d(rng));
}

inline ReportLabel noisy_report(const ConditionNoise& n, bool truth, double u) {
  const double unc = truth ? n.uncertain_pos : n.uncertain_neg;
  const double blank = truth ? n.blank_pos : n.blank_neg;
  const double flip = truth ? n.flip_pos : n.flip_neg;
  if (u < unc) return ReportLabel::Uncertain;
  if (u < unc + blank) return ReportLabel::Blank;
  if (u < unc + blank + flip) return truth ? ReportLabel::Negative : ReportLabel::Positive;
  return truth ? ReportLabel::Positive : ReportLabel::Negative;
}

}  // namespace detail

/// Deterministic in (spec, n, seed). Study ids are "s000001", ...
inline Corpus generate_synthetic_corpus(const SyntheticSpec& spec, std::size_t n,
                                        std::uint64_t seed) {
  spec.validate();
  if (n == 0) throw ValidationError("synthetic corpus: n must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::array<bool, kNumConditions> parent{};
  std::array<double, kNumConditions> uncoupled{};
  for (auto c : kAllConditions) {
    parent[ordinal(c)] = spec.truth_coupling > 0.0 && detail::is_parent(spec, c);
    if (parent[ordinal(c)]) uncoupled[ordinal(c)] = detail::uncoupled_parent_rate(spec, c);
  }

  Corpus corpus;
  corpus.provenance = "synthetic(seed=" + std::to_string(seed) + ")";
  corpus.studies.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    char id[32];
    std::snprintf(id, sizeof id, "s%06zu", k + 1);

    BinaryLabels truth{};
    std::array<bool, kNumConditions> t{};
    for (auto c : kAllConditions)
      if (!parent[ordinal(c)]) t[ordinal(c)] = unif(rng) < spec.conditions[ordinal(c)].prevalence;
    for (auto c : kAllConditions) {
      if (!parent[ordinal(c)]) continue;
      bool any_child = false;
      for (const auto& h : spec.hierarchy)
        if (h.parent == c && t[ordinal(h.child)]) any_child = true;
      t[ordinal(c)] = unif(rng) < (any_child ? spec.truth_coupling : uncoupled[ordinal(c)]);
    }
    if (spec.derive_no_finding) {
      bool pathology = false;
      for (auto c : kAllConditions)
        if (!detail::excluded_from_no_finding(c) && t[ordinal(c)]) pathology = true;
      t[ordinal(Condition::NoFinding)] = !pathology;
    }
    for (std::size_t i = 0; i < kNumConditions; ++i)
      truth[i] = t[i] ? BinaryLabel::Positive : BinaryLabel::Negative;

    ReportLabels report{};
    for (std::size_t i = 0; i < kNumConditions; ++i)
      report[i] = detail::noisy_report(spec.conditions[i], t[i], unif(rng));
    for (const auto& h : spec.hierarchy)
      if (report[ordinal(h.child)] == ReportLabel::Positive)
        report[ordinal(h.parent)] = ReportLabel::Blank;
    if (spec.derive_no_finding) {
      bool finding = false;
      for (auto c : kAllConditions) {
        if (detail::excluded_from_no_finding(c)) continue;
        auto r = report[ordinal(c)];
        if (r == ReportLabel::Positive || r == ReportLabel::Uncertain) finding = true;
      }
      report[ordinal(Condition::NoFinding)] = finding ? ReportLabel::Blank : ReportLabel::Positive;
    }

    Probabilities teacher{};
    for (std::size_t i = 0; i < kNumConditions; ++i) {
      double z = detail::logit(spec.conditions[i].prevalence) +
                 (t[i] ? spec.teacher_margin : -spec.teacher_margin) +
                 spec.teacher_noise * gauss(rng);
      teacher[i] = 1.0 / (1.0 + std::exp(-z));
    }

    std::string text;
    auto add = [&](const std::string& phrase) {
      if (!text.empty()) text += ". ";
      text += phrase;
    };
    for (auto c : kAllConditions) {
      const auto i = ordinal(c);
      const bool cue_truth = unif(rng) < spec.cue_fidelity ? t[i] : !t[i];
      const std::string& name = spec.phrases[i];
      if (c == Condition::NoFinding) {
        if (report[i] == ReportLabel::Positive) add("no acute cardiopulmonary process");
        else if (report[i] == ReportLabel::Negative) add("abnormal study");
        else if (report[i] == ReportLabel::Uncertain) add("possibly abnormal study");
        continue;
      }
      switch (report[i]) {
        case ReportLabel::Positive:
          add(std::string(cue_truth ? detail::pick(rng, {"new", "increased", "moderate"})
                                    : detail::pick(rng, {"residual", "decreased", "resolving"})) +
              " " + name);
          break;
        case ReportLabel::Uncertain:
          add(std::string(cue_truth ? detail::pick(rng, {"likely", "probable"})
                                    : detail::pick(rng, {"possible", "cannot exclude"})) +
              " " + name);
          break;
        case ReportLabel::Negative:
          add("no " + name);
          break;
        case ReportLabel::Blank:
          break;
      }
    }
    if (text.empty()) text = "study reviewed";

    Study s;
    s.id = id;
    s.impression = std::move(text);
    s.report_labels = report;
    s.image_truth = truth;
    s.probabilities = teacher;
    corpus.studies.push_back(std::move(s));
  }
  return corpus;
}

}  // namespace rad2img
