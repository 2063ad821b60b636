#pragma once

// Label, truth, probability and impression files.
//
// All label files are CSV with a `study_id` column followed by the 14
// condition columns (any order on input, canonical order on output).
//   report labels: "1.0" Positive, "0.0" Negative, "-1.0" Uncertain, "" Blank
//   image truth:   "1" Positive, "0" Negative (no blanks)
//   probabilities: reals in [0,1]
//   impressions:   study_id,impression

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "rad2img/csv.hpp"
#include "rad2img/error.hpp"
#include "rad2img/label_model.hpp"

namespace rad2img {

/// Shortest "%.17g" rendering; parses back to the identical double.
inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

inline std::optional<double> parse_real(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

/// Maps header columns to canonical condition slots. Returns, for each CSV
/// column after study_id, the condition ordinal.
inline std::vector<std::size_t> condition_columns(const csv::Table& t, std::string_view source) {
  if (t.header.empty()) throw ValidationError(std::string(source) + ": missing header");
  if (trim(t.header[0]) != "study_id") {
    throw ValidationError(std::string(source) + ": first column must be 'study_id'");
  }
  std::vector<std::size_t> slots;
  std::array<bool, kNumConditions> seen{};
  for (std::size_t j = 1; j < t.header.size(); ++j) {
    auto name = trim(t.header[j]);
    auto c = parse_condition(name);
    if (!c) {
      throw ValidationError(std::string(source) + ": unknown column '" + std::string(name) + "'");
    }
    if (seen[ordinal(*c)]) {
      throw ValidationError(std::string(source) + ": duplicate column '" + std::string(name) + "'");
    }
    seen[ordinal(*c)] = true;
    slots.push_back(ordinal(*c));
  }
  for (std::size_t i = 0; i < kNumConditions; ++i) {
    if (!seen[i]) {
      throw ValidationError(std::string(source) + ": missing column '" +
                            std::string(kConditionNames[i]) + "'");
    }
  }
  return slots;
}

inline std::string cell_error(std::string_view source, const csv::Table& t, std::size_t row,
                              std::size_t col, std::string_view what) {
  return std::string(source) + ": row " + std::to_string(row + 1) + " (line " +
         std::to_string(t.line_numbers[row]) + "), column '" + std::string(trim(t.header[col])) +
         "': " + std::string(what);
}

/// Shared driver for the three 14-column formats.
template <typename Cell, typename Assign>
Corpus parse_condition_file(const csv::Table& t, std::string_view source, Cell parse_cell,
                            Assign assign) {
  auto slots = condition_columns(t, source);
  Corpus corpus;
  corpus.provenance = std::string(source);
  std::unordered_set<std::string> ids;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    if (row.size() != t.header.size()) {
      throw ValidationError(std::string(source) + ": row " + std::to_string(r + 1) + " (line " +
                            std::to_string(t.line_numbers[r]) + ") has " +
                            std::to_string(row.size()) + " cells, expected " +
                            std::to_string(t.header.size()));
    }
    Study s;
    s.id = std::string(trim(row[0]));
    if (s.id.empty()) throw ValidationError(cell_error(source, t, r, 0, "empty study id"));
    if (!ids.insert(s.id).second) {
      throw ValidationError(cell_error(source, t, r, 0, "duplicate study id '" + s.id + "'"));
    }
    using Value = decltype(parse_cell(std::string_view{}));
    std::array<typename Value::value_type, kNumConditions> values{};
    for (std::size_t j = 1; j < row.size(); ++j) {
      auto v = parse_cell(trim(row[j]));
      if (!v) {
        throw ValidationError(cell_error(source, t, r, j, "invalid value '" + row[j] + "'"));
      }
      values[slots[j - 1]] = *v;
    }
    assign(s, values);
    corpus.studies.push_back(std::move(s));
  }
  return corpus;
}

template <typename Format>
std::string write_condition_file(const Corpus& corpus, Format format_row) {
  std::vector<std::string> header{"study_id"};
  for (auto name : kConditionNames) header.emplace_back(name);
  std::string out = csv::format_row(header);
  for (const auto& s : corpus.studies) {
    std::vector<std::string> row{s.id};
    format_row(s, row);
    out += csv::format_row(row);
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Report labels

inline std::optional<ReportLabel> parse_report_cell(std::string_view cell) {
  if (cell.empty()) return ReportLabel::Blank;
  auto v = detail::parse_real(cell);
  if (!v) return std::nullopt;
  if (*v == 1.0) return ReportLabel::Positive;
  if (*v == 0.0) return ReportLabel::Negative;
  if (*v == -1.0) return ReportLabel::Uncertain;
  return std::nullopt;
}

inline std::string_view format_report_cell(ReportLabel l) {
  switch (l) {
    case ReportLabel::Positive: return "1.0";
    case ReportLabel::Negative: return "0.0";
    case ReportLabel::Uncertain: return "-1.0";
    case ReportLabel::Blank: return "";
  }
  return "";
}

/// Labeler output. "No Finding" outside {Positive, Blank} is kept and
/// recorded in corpus.warnings.
inline Corpus parse_report_labels(std::string_view text, std::string_view source = "report labels") {
  auto corpus = detail::parse_condition_file(
      csv::parse(text), source, parse_report_cell,
      [](Study& s, const ReportLabels& v) { s.report_labels = v; });
  for (const auto& s : corpus.studies) {
    if (violates_no_finding_alphabet(*s.report_labels)) {
      corpus.warnings.push_back(
          "study '" + s.id + "': No Finding labeled " +
          std::string(to_string((*s.report_labels)[ordinal(Condition::NoFinding)])) +
          " (labeler alphabet is Positive/Blank)");
    }
  }
  return corpus;
}

inline Corpus ingest_report_labels(const std::filesystem::path& path) {
  return parse_report_labels(csv::read_file(path), path.string());
}

inline std::string write_report_labels(const Corpus& corpus) {
  return detail::write_condition_file(corpus, [](const Study& s, std::vector<std::string>& row) {
    if (!s.report_labels) throw ValidationError("study '" + s.id + "' has no report labels");
    for (auto l : *s.report_labels) row.emplace_back(format_report_cell(l));
  });
}

// ---------------------------------------------------------------------------
// Image truth (also used for binary prediction files)

inline std::optional<BinaryLabel> parse_binary_cell(std::string_view cell) {
  auto v = detail::parse_real(cell);
  if (!v) return std::nullopt;
  if (*v == 1.0) return BinaryLabel::Positive;
  if (*v == 0.0) return BinaryLabel::Negative;
  return std::nullopt;
}

inline Corpus parse_image_truth(std::string_view text, std::string_view source = "image truth") {
  return detail::parse_condition_file(csv::parse(text), source, parse_binary_cell,
                                      [](Study& s, const BinaryLabels& v) { s.image_truth = v; });
}

inline Corpus ingest_image_truth(const std::filesystem::path& path) {
  return parse_image_truth(csv::read_file(path), path.string());
}

inline std::string write_image_truth(const Corpus& corpus) {
  return detail::write_condition_file(corpus, [](const Study& s, std::vector<std::string>& row) {
    if (!s.image_truth) throw ValidationError("study '" + s.id + "' has no image truth");
    for (auto l : *s.image_truth) row.emplace_back(is_positive(l) ? "1" : "0");
  });
}

// ---------------------------------------------------------------------------
// Probabilities

inline std::optional<double> parse_probability_cell(std::string_view cell) {
  auto v = detail::parse_real(cell);
  if (!v || !std::isfinite(*v) || *v < 0.0 || *v > 1.0) return std::nullopt;
  return v;
}

inline Corpus parse_probabilities(std::string_view text, std::string_view source = "probabilities") {
  return detail::parse_condition_file(
      csv::parse(text), source, parse_probability_cell,
      [](Study& s, const Probabilities& v) { s.probabilities = v; });
}

inline Corpus ingest_probabilities(const std::filesystem::path& path) {
  return parse_probabilities(csv::read_file(path), path.string());
}

inline std::string write_probabilities(const Corpus& corpus) {
  return detail::write_condition_file(corpus, [](const Study& s, std::vector<std::string>& row) {
    if (!s.probabilities) throw ValidationError("study '" + s.id + "' has no probabilities");
    for (double p : *s.probabilities) row.push_back(format_real(p));
  });
}

// ---------------------------------------------------------------------------
// Impressions

inline Corpus parse_impressions(std::string_view text, std::string_view source = "impressions") {
  auto t = csv::parse(text);
  if (t.header.size() != 2 || detail::trim(t.header[0]) != "study_id" ||
      detail::trim(t.header[1]) != "impression") {
    throw ValidationError(std::string(source) + ": header must be 'study_id,impression'");
  }
  Corpus corpus;
  corpus.provenance = std::string(source);
  std::unordered_set<std::string> ids;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    if (row.size() != 2) {
      throw ValidationError(std::string(source) + ": row " + std::to_string(r + 1) +
                            " must have 2 cells");
    }
    Study s;
    s.id = std::string(detail::trim(row[0]));
    if (s.id.empty() || !ids.insert(s.id).second) {
      throw ValidationError(detail::cell_error(source, t, r, 0, "empty or duplicate study id"));
    }
    s.impression = row[1];
    corpus.studies.push_back(std::move(s));
  }
  return corpus;
}

inline Corpus ingest_impressions(const std::filesystem::path& path) {
  return parse_impressions(csv::read_file(path), path.string());
}

inline std::string write_impressions(const Corpus& corpus) {
  std::string out = csv::format_row({"study_id", "impression"});
  for (const auto& s : corpus.studies) {
    if (!s.impression) throw ValidationError("study '" + s.id + "' has no impression");
    out += csv::format_row({s.id, *s.impression});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Joining

struct JoinResult {
  Corpus corpus;
  std::vector<std::size_t> dropped;  // per input corpus
};

/// Inner join on study id, in the order of the first corpus. A channel
/// present in more than one input must agree.
inline JoinResult join_corpora(std::span<const Corpus> corpora) {
  if (corpora.empty()) throw ValidationError("join: no corpora");
  std::vector<std::unordered_map<std::string, const Study*>> index(corpora.size());
  for (std::size_t k = 0; k < corpora.size(); ++k)
    for (const auto& s : corpora[k].studies) index[k].emplace(s.id, &s);

  JoinResult result;
  std::string provenance;
  for (std::size_t k = 0; k < corpora.size(); ++k) {
    if (k) provenance += " + ";
    provenance += corpora[k].provenance;
    result.corpus.warnings.insert(result.corpus.warnings.end(), corpora[k].warnings.begin(),
                                  corpora[k].warnings.end());
  }
  result.corpus.provenance = provenance;

  auto merge = [](auto& into, const auto& from, const std::string& id, const char* channel) {
    if (!from) return;
    if (into && *into != *from) {
      throw ValidationError("join: conflicting " + std::string(channel) + " for study '" + id + "'");
    }
    into = from;
  };

  for (const auto& first : corpora[0].studies) {
    Study merged = first;
    bool everywhere = true;
    for (std::size_t k = 1; k < corpora.size() && everywhere; ++k) {
      auto it = index[k].find(first.id);
      if (it == index[k].end()) {
        everywhere = false;
        break;
      }
      const Study& other = *it->second;
      merge(merged.impression, other.impression, first.id, "impression");
      merge(merged.report_labels, other.report_labels, first.id, "report labels");
      merge(merged.image_truth, other.image_truth, first.id, "image truth");
      merge(merged.probabilities, other.probabilities, first.id, "probabilities");
    }
    if (everywhere) result.corpus.studies.push_back(std::move(merged));
  }
  if (result.corpus.studies.empty()) throw ValidationError("join: no study ids in common");
  for (const auto& c : corpora) result.dropped.push_back(c.size() - result.corpus.size());
  return result;
}

}  // namespace rad2img
