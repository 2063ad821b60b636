#pragma once

// Conditions, label vocabularies and the mapping from 4-class report labels
// to binary image labels.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "rad2img/error.hpp"

namespace rad2img {

/// The 14 observed conditions, in canonical order. Every vector, CSV column
/// list and model feature block uses this order.
enum class Condition : std::uint8_t {
  NoFinding,
  EnlargedCardiomediastinum,
  Cardiomegaly,
  LungOpacity,
  LungLesion,
  Edema,
  Consolidation,
  Pneumonia,
  Atelectasis,
  Pneumothorax,
  PleuralEffusion,
  PleuralOther,
  Fracture,
  SupportDevices,
};

inline constexpr std::size_t kNumConditions = 14;

inline constexpr std::array<Condition, kNumConditions> kAllConditions = {
    Condition::NoFinding,     Condition::EnlargedCardiomediastinum,
    Condition::Cardiomegaly,  Condition::LungOpacity,
    Condition::LungLesion,    Condition::Edema,
    Condition::Consolidation, Condition::Pneumonia,
    Condition::Atelectasis,   Condition::Pneumothorax,
    Condition::PleuralEffusion, Condition::PleuralOther,
    Condition::Fracture,      Condition::SupportDevices,
};

inline constexpr std::array<std::string_view, kNumConditions> kConditionNames = {
    "No Finding",     "Enlarged Cardiomediastinum",
    "Cardiomegaly",   "Lung Opacity",
    "Lung Lesion",    "Edema",
    "Consolidation",  "Pneumonia",
    "Atelectasis",    "Pneumothorax",
    "Pleural Effusion", "Pleural Other",
    "Fracture",       "Support Devices",
};

constexpr std::size_t ordinal(Condition c) { return static_cast<std::size_t>(c); }

constexpr std::string_view condition_name(Condition c) { return kConditionNames[ordinal(c)]; }

/// "No Finding" is the only condition whose labeler alphabet is {Positive, Blank}.
constexpr bool has_restricted_alphabet(Condition c) { return c == Condition::NoFinding; }

inline std::optional<Condition> parse_condition(std::string_view name) {
  for (std::size_t i = 0; i < kNumConditions; ++i) {
    if (kConditionNames[i] == name) return kAllConditions[i];
  }
  return std::nullopt;
}

enum class ReportLabel : std::uint8_t { Positive, Negative, Uncertain, Blank };
enum class BinaryLabel : std::uint8_t { Negative = 0, Positive = 1 };

constexpr std::string_view to_string(ReportLabel l) {
  switch (l) {
    case ReportLabel::Positive: return "Positive";
    case ReportLabel::Negative: return "Negative";
    case ReportLabel::Uncertain: return "Uncertain";
    case ReportLabel::Blank: return "Blank";
  }
  return "?";
}

constexpr BinaryLabel opposite(BinaryLabel l) {
  return l == BinaryLabel::Positive ? BinaryLabel::Negative : BinaryLabel::Positive;
}

constexpr bool is_positive(BinaryLabel l) { return l == BinaryLabel::Positive; }

using ReportLabels = std::array<ReportLabel, kNumConditions>;
using BinaryLabels = std::array<BinaryLabel, kNumConditions>;
using Probabilities = std::array<double, kNumConditions>;

struct Study {
  std::string id;
  std::optional<std::string> impression;
  std::optional<ReportLabels> report_labels;
  std::optional<BinaryLabels> image_truth;
  std::optional<Probabilities> probabilities;
};

struct Corpus {
  std::vector<Study> studies;
  std::string provenance;
  /// Non-fatal ingestion findings (e.g. labeler alphabet violations).
  std::vector<std::string> warnings;

  std::size_t size() const { return studies.size(); }
  bool empty() const { return studies.empty(); }

  template <typename Pred>
  bool all_of(Pred pred) const {
    if (studies.empty()) return false;
    for (const auto& s : studies)
      if (!pred(s)) return false;
    return true;
  }
  bool has_impressions() const {
    return all_of([](const Study& s) { return s.impression.has_value(); });
  }
  bool has_report_labels() const {
    return all_of([](const Study& s) { return s.report_labels.has_value(); });
  }
  bool has_image_truth() const {
    return all_of([](const Study& s) { return s.image_truth.has_value(); });
  }
  bool has_probabilities() const {
    return all_of([](const Study& s) { return s.probabilities.has_value(); });
  }

  /// Column of truth labels for one condition. Requires the truth channel.
  std::vector<BinaryLabel> truth_column(Condition c) const {
    if (!has_image_truth()) throw ValidationError("corpus has no image truth channel");
    std::vector<BinaryLabel> out;
    out.reserve(studies.size());
    for (const auto& s : studies) out.push_back((*s.image_truth)[ordinal(c)]);
    return out;
  }

  std::vector<double> probability_column(Condition c) const {
    if (!has_probabilities()) throw ValidationError("corpus has no probability channel");
    std::vector<double> out;
    out.reserve(studies.size());
    for (const auto& s : studies) out.push_back((*s.probabilities)[ordinal(c)]);
    return out;
  }
};

/// Checks id uniqueness and probability range. Throws ValidationError.
inline void validate(const Corpus& corpus) {
  std::unordered_set<std::string> seen;
  for (const auto& s : corpus.studies) {
    if (!seen.insert(s.id).second) throw ValidationError("duplicate study id '" + s.id + "'");
    if (s.probabilities) {
      for (std::size_t i = 0; i < kNumConditions; ++i) {
        double p = (*s.probabilities)[i];
        if (!(p >= 0.0 && p <= 1.0)) {
          throw ValidationError("study '" + s.id + "': probability for " +
                                std::string(kConditionNames[i]) + " outside [0,1]");
        }
      }
    }
  }
}

/// True when a labeler-sourced label vector uses Negative or Uncertain for
/// "No Finding".
inline bool violates_no_finding_alphabet(const ReportLabels& labels) {
  auto nf = labels[ordinal(Condition::NoFinding)];
  return nf == ReportLabel::Negative || nf == ReportLabel::Uncertain;
}

// ---------------------------------------------------------------------------
// One-hot encoding

/// Indicator classes; Blank is the all-zero reference category.
enum class OneHotClass : std::uint8_t { Positive, Negative, Uncertain };

inline constexpr std::size_t kOneHotClasses = 3;
inline constexpr std::size_t kOneHotWidth = kNumConditions * kOneHotClasses;

constexpr std::size_t one_hot_index(Condition c, OneHotClass k) {
  return ordinal(c) * kOneHotClasses + static_cast<std::size_t>(k);
}

constexpr std::pair<Condition, OneHotClass> one_hot_feature(std::size_t index) {
  return {kAllConditions[index / kOneHotClasses],
          static_cast<OneHotClass>(index % kOneHotClasses)};
}

/// "<Condition> <Class>", e.g. "Atelectasis Positive".
inline std::string one_hot_feature_name(std::size_t index) {
  auto [c, k] = one_hot_feature(index);
  static constexpr std::array<std::string_view, 3> kClassNames = {"Positive", "Negative",
                                                                  "Uncertain"};
  std::string name(condition_name(c));
  name += ' ';
  name += kClassNames[static_cast<std::size_t>(k)];
  return name;
}

inline std::vector<std::string> one_hot_feature_names() {
  std::vector<std::string> names;
  names.reserve(kOneHotWidth);
  for (std::size_t i = 0; i < kOneHotWidth; ++i) names.push_back(one_hot_feature_name(i));
  return names;
}

struct OneHotFeatures {
  std::array<std::uint8_t, kOneHotWidth> bits{};

  std::size_t count() const {
    std::size_t n = 0;
    for (auto b : bits) n += b;
    return n;
  }
};

inline OneHotFeatures encode_one_hot(std::span<const ReportLabel> labels) {
  if (labels.size() != kNumConditions) {
    throw ValidationError("encode_one_hot: expected " + std::to_string(kNumConditions) +
                          " labels, got " + std::to_string(labels.size()));
  }
  OneHotFeatures out;
  for (std::size_t i = 0; i < kNumConditions; ++i) {
    auto c = kAllConditions[i];
    switch (labels[i]) {
      case ReportLabel::Positive: out.bits[one_hot_index(c, OneHotClass::Positive)] = 1; break;
      case ReportLabel::Negative: out.bits[one_hot_index(c, OneHotClass::Negative)] = 1; break;
      case ReportLabel::Uncertain: out.bits[one_hot_index(c, OneHotClass::Uncertain)] = 1; break;
      case ReportLabel::Blank: break;
    }
  }
  return out;
}

/// Inverse of encode_one_hot. Throws if a condition has more than one bit set.
inline ReportLabels decode_one_hot(const OneHotFeatures& features) {
  ReportLabels out;
  out.fill(ReportLabel::Blank);
  for (std::size_t i = 0; i < kNumConditions; ++i) {
    int set = 0;
    for (std::size_t k = 0; k < kOneHotClasses; ++k) {
      if (features.bits[i * kOneHotClasses + k]) {
        ++set;
        out[i] = static_cast<ReportLabel>(k);  // OneHotClass shares the first three values
      }
    }
    if (set > 1) {
      throw ValidationError("decode_one_hot: multiple indicators set for " +
                            std::string(kConditionNames[i]));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Binarization

enum class UncertaintyPolicy : std::uint8_t { Zeros, Ones, ToTruth, ToOpposite };

constexpr bool requires_truth(UncertaintyPolicy p) {
  return p == UncertaintyPolicy::ToTruth || p == UncertaintyPolicy::ToOpposite;
}

constexpr std::string_view to_string(UncertaintyPolicy p) {
  switch (p) {
    case UncertaintyPolicy::Zeros: return "zeros";
    case UncertaintyPolicy::Ones: return "ones";
    case UncertaintyPolicy::ToTruth: return "to-truth";
    case UncertaintyPolicy::ToOpposite: return "to-opposite";
  }
  return "?";
}

/// Blank maps to Negative before the policy is consulted; only Uncertain
/// depends on the policy.
inline BinaryLabel binarize_label(ReportLabel label, UncertaintyPolicy policy,
                                  std::optional<BinaryLabel> truth = std::nullopt) {
  switch (label) {
    case ReportLabel::Positive: return BinaryLabel::Positive;
    case ReportLabel::Negative:
    case ReportLabel::Blank: return BinaryLabel::Negative;
    case ReportLabel::Uncertain: break;
  }
  switch (policy) {
    case UncertaintyPolicy::Zeros: return BinaryLabel::Negative;
    case UncertaintyPolicy::Ones: return BinaryLabel::Positive;
    case UncertaintyPolicy::ToTruth:
    case UncertaintyPolicy::ToOpposite:
      if (!truth) {
        throw ValidationError("uncertainty policy '" + std::string(to_string(policy)) +
                              "' requires image truth");
      }
      return policy == UncertaintyPolicy::ToTruth ? *truth : opposite(*truth);
  }
  return BinaryLabel::Negative;
}

inline BinaryLabels binarize(std::span<const ReportLabel> labels, UncertaintyPolicy policy,
                             std::optional<std::span<const BinaryLabel>> truth = std::nullopt) {
  if (labels.size() != kNumConditions) {
    throw ValidationError("binarize: expected " + std::to_string(kNumConditions) +
                          " labels, got " + std::to_string(labels.size()));
  }
  if (requires_truth(policy) && !truth) {
    throw ValidationError("uncertainty policy '" + std::string(to_string(policy)) +
                          "' requires image truth");
  }
  if (truth && truth->size() != kNumConditions) {
    throw ValidationError("binarize: truth length " + std::to_string(truth->size()) +
                          " does not match " + std::to_string(kNumConditions));
  }
  BinaryLabels out;
  for (std::size_t i = 0; i < kNumConditions; ++i) {
    std::optional<BinaryLabel> t;
    if (truth) t = (*truth)[i];
    out[i] = binarize_label(labels[i], policy, t);
  }
  return out;
}

}  // namespace rad2img
