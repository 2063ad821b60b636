#pragma once

// Result tables and their CSV / JSON / markdown renderings.
//
// CSV and JSON carry full precision; markdown rounds to 3 decimals. Column
// order is fixed: `condition`, the score columns, then `n_positive`.

#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rad2img/corpus_io.hpp"
#include "rad2img/csv.hpp"
#include "rad2img/error.hpp"
#include "rad2img/label_model.hpp"
#include "rad2img/metrics.hpp"

namespace rad2img {

enum class Format { Csv, Json, Markdown };

inline Format parse_format(std::string_view s) {
  if (s == "csv") return Format::Csv;
  if (s == "json") return Format::Json;
  if (s == "markdown" || s == "md") return Format::Markdown;
  throw ValidationError("unknown format '" + std::string(s) + "' (csv, json, markdown)");
}

struct Column {
  std::string key;    // csv / json name
  std::string title;  // markdown header
  bool integer = false;
};

struct TableRow {
  std::string label;
  std::vector<double> values;
  std::optional<long> n_positive;
};

struct Table {
  std::string title;
  std::vector<Column> columns;
  std::vector<TableRow> rows;

  bool operator==(const Table& o) const {
    if (columns.size() != o.columns.size() || rows.size() != o.rows.size()) return false;
    for (std::size_t j = 0; j < columns.size(); ++j)
      if (columns[j].key != o.columns[j].key) return false;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].label != o.rows[i].label || rows[i].values != o.rows[i].values ||
          rows[i].n_positive != o.rows[i].n_positive) {
        return false;
      }
    }
    return true;
  }
};

/// Condition rows plus "Average" and "Weighted Average" rows. All columns
/// must score the same conditions in the same order.
inline Table table_from_reports(std::string title, std::span<const MetricsReport> reports,
                                std::span<const Column> columns) {
  if (reports.empty() || reports[0].per_condition.empty()) {
    throw ValidationError("cannot emit a report with an empty evaluation set");
  }
  if (columns.size() != reports.size()) throw ValidationError("column/report count mismatch");
  Table t;
  t.title = std::move(title);
  t.columns.assign(columns.begin(), columns.end());
  const auto& first = reports[0].per_condition;
  for (std::size_t i = 0; i < first.size(); ++i) {
    TableRow row{std::string(condition_name(first[i].condition)), {}, first[i].n_positive};
    for (const auto& r : reports) {
      if (r.per_condition.size() != first.size() ||
          r.per_condition[i].condition != first[i].condition) {
        throw ValidationError("report columns score different conditions");
      }
      row.values.push_back(r.per_condition[i].score);
    }
    t.rows.push_back(std::move(row));
  }
  TableRow avg{"Average", {}, std::nullopt}, wavg{"Weighted Average", {}, std::nullopt};
  for (const auto& r : reports) {
    avg.values.push_back(r.macro_average);
    wavg.values.push_back(r.weighted_average);
  }
  t.rows.push_back(std::move(avg));
  t.rows.push_back(std::move(wavg));
  return t;
}

/// Single score column named "score".
inline Table table_from_report(const MetricsReport& report) {
  const Column col{"score", report.name.empty() ? "Score" : report.name};
  return table_from_reports(report.name, std::span(&report, 1), std::span(&col, 1));
}

namespace detail {

inline std::string fixed3(double v) {
  if (!std::isfinite(v)) return format_real(v);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

inline std::string render_value(double v, bool integer) {
  if (integer && std::isfinite(v) && v == std::floor(v)) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.0f", v);
    return buf;
  }
  return format_real(v);
}

}  // namespace detail

inline std::string emit_csv(const Table& t) {
  std::vector<std::string> header{"condition"};
  for (const auto& c : t.columns) header.push_back(c.key);
  header.push_back("n_positive");
  std::string out = csv::format_row(header);
  for (const auto& r : t.rows) {
    std::vector<std::string> row{r.label};
    for (std::size_t j = 0; j < r.values.size(); ++j)
      row.push_back(detail::render_value(r.values[j], t.columns[j].integer));
    row.push_back(r.n_positive ? std::to_string(*r.n_positive) : "");
    out += csv::format_row(row);
  }
  return out;
}

inline nlohmann::json table_to_json(const Table& t) {
  nlohmann::json j;
  j["title"] = t.title;
  j["columns"] = nlohmann::json::array();
  for (const auto& c : t.columns) j["columns"].push_back(c.key);
  j["rows"] = nlohmann::json::array();
  for (const auto& r : t.rows) {
    nlohmann::json row;
    row["condition"] = r.label;
    for (std::size_t k = 0; k < r.values.size(); ++k) {
      if (std::isfinite(r.values[k])) row[t.columns[k].key] = r.values[k];
      else row[t.columns[k].key] = nullptr;
    }
    row["n_positive"] = r.n_positive ? nlohmann::json(*r.n_positive) : nlohmann::json(nullptr);
    j["rows"].push_back(std::move(row));
  }
  return j;
}

inline std::string emit_json(const Table& t) { return table_to_json(t).dump(2) + "\n"; }

inline std::string emit_markdown(const Table& t) {
  std::string out;
  if (!t.title.empty()) out += "### " + t.title + "\n\n";
  out += "| Condition (n = # positive) |";
  for (const auto& c : t.columns) out += " " + c.title + " |";
  out += "\n|---|";
  for (std::size_t j = 0; j < t.columns.size(); ++j) out += "---:|";
  out += "\n";
  for (const auto& r : t.rows) {
    out += "| " + r.label;
    if (r.n_positive) out += " (n=" + std::to_string(*r.n_positive) + ")";
    out += " |";
    for (std::size_t j = 0; j < r.values.size(); ++j) {
      out += " " + (t.columns[j].integer ? detail::render_value(r.values[j], true)
                                         : detail::fixed3(r.values[j])) + " |";
    }
    out += "\n";
  }
  return out;
}

inline std::string emit(const Table& t, Format f) {
  switch (f) {
    case Format::Csv: return emit_csv(t);
    case Format::Json: return emit_json(t);
    case Format::Markdown: return emit_markdown(t);
  }
  return {};
}

inline std::string emit_metrics_report(const MetricsReport& report, Format f) {
  return emit(table_from_report(report), f);
}

// ---------------------------------------------------------------------------
// Free-form record tables (one row per record, string or numeric cells)

struct RecordTable {
  std::string title;
  std::vector<std::string> columns;
  std::vector<std::vector<nlohmann::json>> rows;
};

namespace detail {

inline std::string render_cell(const nlohmann::json& v, bool markdown) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  double d = v.get<double>();
  if (!markdown) return format_real(d);
  if (d != 0.0 && std::abs(d) < 1e-3) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2e", d);
    return buf;
  }
  return fixed3(d);
}

}  // namespace detail

inline std::string emit(const RecordTable& t, Format f) {
  switch (f) {
    case Format::Csv: {
      std::string out = csv::format_row(t.columns);
      for (const auto& r : t.rows) {
        std::vector<std::string> cells;
        for (const auto& v : r) cells.push_back(detail::render_cell(v, false));
        out += csv::format_row(cells);
      }
      return out;
    }
    case Format::Json: {
      nlohmann::json j;
      j["title"] = t.title;
      j["columns"] = t.columns;
      j["rows"] = nlohmann::json::array();
      for (const auto& r : t.rows) {
        nlohmann::json row = nlohmann::json::object();
        for (std::size_t k = 0; k < t.columns.size(); ++k) row[t.columns[k]] = r[k];
        j["rows"].push_back(std::move(row));
      }
      return j.dump(2) + "\n";
    }
    case Format::Markdown: {
      std::string out;
      if (!t.title.empty()) out += "### " + t.title + "\n\n";
      out += "|";
      for (const auto& c : t.columns) out += " " + c + " |";
      out += "\n|";
      for (std::size_t k = 0; k < t.columns.size(); ++k) out += "---|";
      out += "\n";
      for (const auto& r : t.rows) {
        out += "|";
        for (const auto& v : r) out += " " + detail::render_cell(v, true) + " |";
        out += "\n";
      }
      return out;
    }
  }
  return {};
}

// ---------------------------------------------------------------------------
// Parsing back (used by tools and round-trip checks)

inline Table parse_table_csv(std::string_view text) {
  auto raw = csv::parse(text);
  if (raw.header.size() < 2 || raw.header.front() != "condition" ||
      raw.header.back() != "n_positive") {
    throw ValidationError("table csv: header must start with 'condition' and end with 'n_positive'");
  }
  Table t;
  for (std::size_t j = 1; j + 1 < raw.header.size(); ++j)
    t.columns.push_back({raw.header[j], raw.header[j], false});
  for (const auto& row : raw.rows) {
    if (row.size() != raw.header.size()) throw ValidationError("table csv: ragged row");
    TableRow r;
    r.label = row.front();
    for (std::size_t j = 1; j + 1 < row.size(); ++j) {
      auto v = detail::parse_real(row[j]);
      if (!v) throw ValidationError("table csv: bad value '" + row[j] + "'");
      r.values.push_back(*v);
    }
    if (!row.back().empty()) r.n_positive = std::stol(row.back());
    t.rows.push_back(std::move(r));
  }
  return t;
}

inline Table parse_table_json(std::string_view text) {
  auto j = nlohmann::json::parse(text);
  Table t;
  t.title = j.value("title", "");
  for (const auto& k : j.at("columns")) {
    auto key = k.get<std::string>();
    t.columns.push_back({key, key, false});
  }
  for (const auto& row : j.at("rows")) {
    TableRow r;
    r.label = row.at("condition").get<std::string>();
    for (const auto& c : t.columns) {
      const auto& v = row.at(c.key);
      r.values.push_back(v.is_null() ? std::nan("") : v.get<double>());
    }
    if (!row.at("n_positive").is_null()) r.n_positive = row.at("n_positive").get<long>();
    t.rows.push_back(std::move(r));
  }
  return t;
}

}  // namespace rad2img
