#pragma once

// Linear n-gram student trained on teacher probabilities with soft-target
// cross-entropy. One sigmoid head per condition over binary n-gram presence
// features.

#include <Eigen/Dense>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rad2img/error.hpp"
#include "rad2img/glm.hpp"
#include "rad2img/label_model.hpp"

namespace rad2img {

/// Lowercase ASCII, split on every run of non-alphanumeric bytes.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char ch : text) {
    auto u = static_cast<unsigned char>(ch);
    if (u < 0x80 && std::isalnum(u)) {
      cur.push_back(static_cast<char>(std::tolower(u)));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

/// Distinct n-grams (n = 1..max_n) of a token list; bigrams join with a space.
inline std::vector<std::string> ngrams(const std::vector<std::string>& tokens, int max_n) {
  std::vector<std::string> out;
  for (int n = 1; n <= max_n; ++n) {
    for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= tokens.size(); ++i) {
      std::string g = tokens[i];
      for (int k = 1; k < n; ++k) {
        g += ' ';
        g += tokens[i + static_cast<std::size_t>(k)];
      }
      out.push_back(std::move(g));
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(std::vector<std::string> sorted_entries, int max_n, int min_count)
      : entries_(std::move(sorted_entries)), max_n_(max_n), min_count_(min_count) {
    for (std::size_t i = 0; i < entries_.size(); ++i) index_.emplace(entries_[i], static_cast<int>(i));
  }

  std::size_t size() const { return entries_.size(); }
  int max_n() const { return max_n_; }
  int min_count() const { return min_count_; }
  const std::vector<std::string>& entries() const { return entries_; }

  std::optional<int> index_of(const std::string& ngram) const {
    auto it = index_.find(ngram);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  /// Sorted indices of in-vocabulary n-grams present in the text.
  std::vector<int> featurize(std::string_view text) const {
    std::vector<int> out;
    for (const auto& g : ngrams(tokenize(text), max_n_))
      if (auto i = index_of(g)) out.push_back(*i);
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  std::vector<std::string> entries_;
  std::unordered_map<std::string, int> index_;
  int max_n_ = 2;
  int min_count_ = 1;
};

/// n-grams whose document frequency is at least min_count, indexed in
/// lexicographic order.
inline Vocabulary build_vocabulary(std::span<const std::string> texts, int max_n = 2,
                                   int min_count = 1) {
  if (texts.empty()) throw ValidationError("build_vocabulary: empty corpus");
  if (max_n < 1 || max_n > 2) throw ValidationError("build_vocabulary: n-gram range must be 1 or 2");
  if (min_count < 1) throw ValidationError("build_vocabulary: min_count must be >= 1");
  std::map<std::string, int> df;
  for (const auto& t : texts)
    for (auto& g : ngrams(tokenize(t), max_n)) ++df[g];
  std::vector<std::string> kept;
  for (const auto& [g, c] : df)
    if (c >= min_count) kept.push_back(g);
  return {std::move(kept), max_n, min_count};
}

struct TrainConfig {
  double learning_rate = 0.1;
  int batch_size = 18;
  double split_fraction = 0.85;
  int patience = 5;
  int max_epochs = 100;
  std::uint64_t seed = 0;
  int max_ngram = 2;
  int min_count = 1;

  void validate() const {
    if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be > 0");
    if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
    if (!(split_fraction > 0.0 && split_fraction < 1.0)) {
      throw ValidationError("split_fraction must lie in (0,1)");
    }
    if (patience < 1) throw ValidationError("patience must be >= 1");
    if (max_epochs < 1) throw ValidationError("max_epochs must be >= 1");
  }
};

struct StudentModel {
  Vocabulary vocabulary;
  Eigen::MatrixXd weights;  // kNumConditions x vocabulary.size()
  Eigen::VectorXd biases;   // kNumConditions

  static StudentModel zeros(Vocabulary vocab) {
    StudentModel m;
    auto d = static_cast<Eigen::Index>(vocab.size());
    m.vocabulary = std::move(vocab);
    m.weights = Eigen::MatrixXd::Zero(kNumConditions, d);
    m.biases = Eigen::VectorXd::Zero(kNumConditions);
    return m;
  }

  Eigen::VectorXd logits(std::span<const int> features) const {
    Eigen::VectorXd z = biases;
    for (int f : features) z += weights.col(f);
    return z;
  }
};

inline Probabilities predict_student(const StudentModel& model, std::string_view text) {
  Eigen::VectorXd z = model.logits(model.vocabulary.featurize(text));
  Probabilities out;
  for (std::size_t c = 0; c < kNumConditions; ++c) out[c] = sigmoid(z[static_cast<Eigen::Index>(c)]);
  return out;
}

/// A featurized study with its teacher targets.
struct DistillExample {
  std::string id;
  std::vector<int> features;
  Probabilities target{};
};

/// Soft-target cross-entropy, -[p log q + (1-p) log(1-q)] with q = sigmoid(z),
/// written as softplus(z) - p z.
inline double soft_cross_entropy(double logit, double target) {
  return softplus(logit) - target * logit;
}

/// Mean over examples and conditions.
inline double distill_loss(const StudentModel& model, std::span<const DistillExample> batch) {
  if (batch.empty()) return 0.0;
  double total = 0.0;
  for (const auto& ex : batch) {
    Eigen::VectorXd z = model.logits(ex.features);
    for (std::size_t c = 0; c < kNumConditions; ++c)
      total += soft_cross_entropy(z[static_cast<Eigen::Index>(c)], ex.target[c]);
  }
  return total / static_cast<double>(batch.size() * kNumConditions);
}

struct StudentGradient {
  Eigen::MatrixXd weights;
  Eigen::VectorXd biases;
};

/// Dense gradient of distill_loss.
inline StudentGradient distill_gradient(const StudentModel& model,
                                        std::span<const DistillExample> batch) {
  StudentGradient g{Eigen::MatrixXd::Zero(model.weights.rows(), model.weights.cols()),
                    Eigen::VectorXd::Zero(model.biases.size())};
  if (batch.empty()) return g;
  const double scale = 1.0 / static_cast<double>(batch.size() * kNumConditions);
  for (const auto& ex : batch) {
    Eigen::VectorXd z = model.logits(ex.features);
    Eigen::VectorXd dz(z.size());
    for (Eigen::Index c = 0; c < z.size(); ++c)
      dz[c] = (sigmoid(z[c]) - ex.target[static_cast<std::size_t>(c)]) * scale;
    g.biases += dz;
    for (int f : ex.features) g.weights.col(f) += dz;
  }
  return g;
}

struct TrainingHistory {
  std::vector<double> train_loss;  // index 0 is the initial (zero) model
  std::vector<double> val_loss;
  int best_epoch = 0;
  int epochs_run = 0;
  std::vector<std::string> train_ids;
  std::vector<std::string> val_ids;
};

struct TrainResult {
  StudentModel model;
  TrainingHistory history;
};

namespace detail {

inline void check_finite_loss(const StudentModel& model, std::span<const DistillExample> batch) {
  for (const auto& ex : batch) {
    Eigen::VectorXd z = model.logits(ex.features);
    for (std::size_t c = 0; c < kNumConditions; ++c) {
      if (!std::isfinite(soft_cross_entropy(z[static_cast<Eigen::Index>(c)], ex.target[c]))) {
        throw ValidationError("train_student: non-finite loss at study '" + ex.id + "'");
      }
    }
  }
}

}  // namespace detail

/// Mini-batch gradient descent on the mean soft cross-entropy. Each head
/// takes steps of learning_rate times its own batch-mean gradient. The split,
/// the vocabulary (built from the training part only) and the per-epoch
/// shuffles are all driven by config.seed. Training stops after `patience`
/// epochs without a validation improvement and returns the best-validation
/// model. With no validation studies the training loss is monitored instead.
inline TrainResult train_student(const Corpus& corpus, const TrainConfig& config) {
  config.validate();
  if (corpus.empty()) throw ValidationError("train_student: empty corpus");
  if (!corpus.has_impressions()) throw ValidationError("train_student: corpus lacks impressions");
  if (!corpus.has_probabilities()) {
    throw ValidationError("train_student: corpus lacks teacher probabilities");
  }
  validate(corpus);

  const std::size_t n = corpus.size();
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  auto n_train = static_cast<std::size_t>(std::llround(config.split_fraction * static_cast<double>(n)));
  n_train = std::clamp<std::size_t>(n_train, 1, n);

  std::vector<std::string> train_texts;
  for (std::size_t k = 0; k < n_train; ++k) train_texts.push_back(*corpus.studies[order[k]].impression);
  auto vocab = build_vocabulary(train_texts, config.max_ngram, config.min_count);

  auto make_example = [&](const Study& s) {
    return DistillExample{s.id, vocab.featurize(*s.impression), *s.probabilities};
  };
  std::vector<DistillExample> train, val;
  TrainingHistory hist;
  for (std::size_t k = 0; k < n; ++k) {
    const auto& s = corpus.studies[order[k]];
    if (k < n_train) {
      train.push_back(make_example(s));
      hist.train_ids.push_back(s.id);
    } else {
      val.push_back(make_example(s));
      hist.val_ids.push_back(s.id);
    }
  }
  const auto& monitor = val.empty() ? train : val;

  StudentModel model = StudentModel::zeros(std::move(vocab));
  detail::check_finite_loss(model, train);
  hist.train_loss.push_back(distill_loss(model, train));
  hist.val_loss.push_back(distill_loss(model, monitor));
  StudentModel best = model;
  double best_loss = hist.val_loss.back();
  int since_best = 0;

  std::vector<std::size_t> perm(train.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  const auto batch = static_cast<std::size_t>(config.batch_size);
  Eigen::MatrixXd dz(kNumConditions, static_cast<Eigen::Index>(batch));

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t start = 0; start < perm.size(); start += batch) {
      const std::size_t end = std::min(start + batch, perm.size());
      const double step = config.learning_rate / static_cast<double>(end - start);
      for (std::size_t k = start; k < end; ++k) {
        const auto& ex = train[perm[k]];
        Eigen::VectorXd z = model.logits(ex.features);
        for (std::size_t c = 0; c < kNumConditions; ++c) {
          auto ci = static_cast<Eigen::Index>(c);
          dz(ci, static_cast<Eigen::Index>(k - start)) = sigmoid(z[ci]) - ex.target[c];
        }
      }
      for (std::size_t k = start; k < end; ++k) {
        Eigen::VectorXd g = step * dz.col(static_cast<Eigen::Index>(k - start));
        model.biases -= g;
        for (int f : train[perm[k]].features) model.weights.col(f) -= g;
      }
    }
    hist.epochs_run = epoch;
    double tl = distill_loss(model, train);
    if (!std::isfinite(tl)) detail::check_finite_loss(model, train);
    hist.train_loss.push_back(tl);
    hist.val_loss.push_back(distill_loss(model, monitor));
    if (hist.val_loss.back() < best_loss) {
      best_loss = hist.val_loss.back();
      best = model;
      hist.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  return {std::move(best), std::move(hist)};
}

}  // namespace rad2img
