#pragma once

// JSON documents for fitted models and thresholds.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "rad2img/distill.hpp"
#include "rad2img/error.hpp"
#include "rad2img/glm.hpp"
#include "rad2img/label_model.hpp"

namespace rad2img {

using nlohmann::json;

inline std::string to_string(Penalty::Kind k) {
  switch (k) {
    case Penalty::Kind::L1: return "l1";
    case Penalty::Kind::L2: return "l2";
    case Penalty::Kind::None: return "none";
  }
  return "none";
}

inline std::string to_string(ClassWeighting w) {
  return w == ClassWeighting::InversePrevalence ? "inverse_prevalence" : "uniform";
}

inline json to_json_doc(const LogisticModel& m) {
  json j;
  j["type"] = "logistic_model";
  j["feature_names"] = m.feature_names;
  j["weights"] = std::vector<double>(m.weights.data(), m.weights.data() + m.weights.size());
  j["bias"] = m.bias;
  j["penalty"] = {{"kind", to_string(m.penalty.kind)}, {"alpha", m.penalty.alpha}, {"c", m.penalty.c}};
  j["weighting"] = to_string(m.weighting);
  j["fit_report"] = {{"iterations", m.fit_report.iterations},
                     {"final_gradient_norm", m.fit_report.final_gradient_norm},
                     {"converged", m.fit_report.converged}};
  return j;
}

inline LogisticModel logistic_model_from_json(const json& j) {
  try {
    if (j.at("type") != "logistic_model") throw ValidationError("not a logistic_model document");
    LogisticModel m;
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    auto w = j.at("weights").get<std::vector<double>>();
    if (w.size() != m.feature_names.size()) {
      throw ValidationError("logistic model: weights and feature names differ in length");
    }
    m.weights = Eigen::Map<Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
    m.bias = j.at("bias").get<double>();
    const auto& p = j.at("penalty");
    auto kind = p.at("kind").get<std::string>();
    if (kind == "l1") m.penalty = Penalty::l1(p.at("alpha").get<double>());
    else if (kind == "l2") m.penalty = Penalty::l2(p.at("c").get<double>());
    else m.penalty = Penalty::none();
    m.weighting = j.at("weighting") == "inverse_prevalence" ? ClassWeighting::InversePrevalence
                                                            : ClassWeighting::Uniform;
    const auto& r = j.at("fit_report");
    m.fit_report = {r.at("iterations").get<int>(), r.at("final_gradient_norm").get<double>(),
                    r.at("converged").get<bool>()};
    return m;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("logistic model document: ") + e.what());
  }
}

inline json to_json_doc(const TrainConfig& c) {
  return {{"learning_rate", c.learning_rate}, {"batch_size", c.batch_size},
          {"split_fraction", c.split_fraction}, {"patience", c.patience},
          {"max_epochs", c.max_epochs}, {"seed", c.seed},
          {"max_ngram", c.max_ngram}, {"min_count", c.min_count}};
}

inline json to_json_doc(const StudentModel& m, const TrainConfig& config) {
  json j;
  j["type"] = "student_model";
  j["conditions"] = std::vector<std::string>(kConditionNames.begin(), kConditionNames.end());
  j["vocabulary"] = {{"entries", m.vocabulary.entries()},
                     {"max_ngram", m.vocabulary.max_n()},
                     {"min_count", m.vocabulary.min_count()}};
  json rows = json::array();
  for (Eigen::Index c = 0; c < m.weights.rows(); ++c) {
    std::vector<double> row(static_cast<std::size_t>(m.weights.cols()));
    for (Eigen::Index f = 0; f < m.weights.cols(); ++f) row[static_cast<std::size_t>(f)] = m.weights(c, f);
    rows.push_back(std::move(row));
  }
  j["weights"] = std::move(rows);
  j["biases"] = std::vector<double>(m.biases.data(), m.biases.data() + m.biases.size());
  j["config"] = to_json_doc(config);
  return j;
}

inline StudentModel student_model_from_json(const json& j) {
  try {
    if (j.at("type") != "student_model") throw ValidationError("not a student_model document");
    const auto& v = j.at("vocabulary");
    auto entries = v.at("entries").get<std::vector<std::string>>();
    if (!std::is_sorted(entries.begin(), entries.end())) {
      throw ValidationError("student model: vocabulary entries must be sorted");
    }
    StudentModel m = StudentModel::zeros(
        Vocabulary(std::move(entries), v.at("max_ngram").get<int>(), v.at("min_count").get<int>()));
    const auto& rows = j.at("weights");
    if (rows.size() != kNumConditions) throw ValidationError("student model: need 14 weight rows");
    for (std::size_t c = 0; c < kNumConditions; ++c) {
      auto row = rows[c].get<std::vector<double>>();
      if (row.size() != m.vocabulary.size()) {
        throw ValidationError("student model: weight row length does not match vocabulary");
      }
      for (std::size_t f = 0; f < row.size(); ++f)
        m.weights(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(f)) = row[f];
    }
    auto b = j.at("biases").get<std::vector<double>>();
    if (b.size() != kNumConditions) throw ValidationError("student model: need 14 biases");
    for (std::size_t c = 0; c < kNumConditions; ++c) m.biases[static_cast<Eigen::Index>(c)] = b[c];
    return m;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("student model document: ") + e.what());
  }
}

inline json to_json_doc(const ThresholdSet& t) {
  json j;
  j["type"] = "threshold_set";
  json th = json::object();
  for (auto c : kAllConditions)
    if (auto v = t.get(c)) th[std::string(condition_name(c))] = *v;
  j["thresholds"] = std::move(th);
  return j;
}

inline ThresholdSet threshold_set_from_json(const json& j) {
  try {
    if (j.at("type") != "threshold_set") throw ValidationError("not a threshold_set document");
    ThresholdSet t;
    for (const auto& [name, value] : j.at("thresholds").items()) {
      auto c = parse_condition(name);
      if (!c) throw ValidationError("threshold set: unknown condition '" + name + "'");
      double v = value.get<double>();
      if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("threshold set: value outside [0,1]");
      t.set(*c, v);
    }
    return t;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("threshold set document: ") + e.what());
  }
}

inline json parse_json_document(std::string_view text, std::string_view source) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string(source) + ": invalid JSON: " + e.what());
  }
}

}  // namespace rad2img
