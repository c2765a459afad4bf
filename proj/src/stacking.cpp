#include "sepolml/stacking.hpp"

#include <algorithm>
#include <cmath>

#include "sepolml/errors.hpp"
#include "sepolml/rng.hpp"

namespace sepolml {

namespace {

const char* const kBaseKinds[] = {kRandomForestKind, kSvmKind, kMlpKind};
constexpr size_t kBaseCount = 3;

FeatureRow one_hot_block(const std::vector<int>& base_predictions, int label_count) {
  FeatureRow features(kBaseCount * static_cast<size_t>(label_count), 0.0);
  for (size_t base = 0; base < kBaseCount; ++base) {
    features[base * static_cast<size_t>(label_count) +
             static_cast<size_t>(base_predictions[base])] = 1.0;
  }
  return features;
}

}  // namespace

StackingClassifier::StackingClassifier(StackingConfig config, std::uint64_t seed, int label_count)
    : config_(config), seed_(seed), label_count_(label_count) {
  if (config_.folds < 2) throw ConfigError("stacking needs at least two folds");
  if (config_.meta_iterations < 1) throw ConfigError("stacking meta iterations must be positive");
  if (config_.meta_learning_rate <= 0.0) {
    throw ConfigError("stacking meta learning rate must be positive");
  }
  if (label_count_ < 2) throw ConfigError("stacking needs at least two labels");
}

void StackingClassifier::fit(const FeatureRows& rows, const std::vector<int>& labels) {
  if (rows.empty()) throw Error("cannot fit a stacking model on an empty training set");
  if (rows.size() != labels.size()) throw Error("rows and labels differ in length");
  if (rows.size() < static_cast<size_t>(config_.folds)) {
    throw Error("stacking needs at least as many rows as folds");
  }

  // Fold assignment: shuffled order dealt round-robin across folds.
  std::vector<size_t> order(rows.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng fold_rng(derive_seed(seed_, 1));
  fold_rng.shuffle(order);
  std::vector<int> fold_of(rows.size());
  for (size_t position = 0; position < order.size(); ++position) {
    fold_of[order[position]] = static_cast<int>(position % static_cast<size_t>(config_.folds));
  }

  // Out-of-fold base predictions become the meta training set.
  std::vector<std::vector<int>> oof_predictions(rows.size(), std::vector<int>(kBaseCount, 0));
  for (int fold = 0; fold < config_.folds; ++fold) {
    FeatureRows train_rows;
    std::vector<int> train_labels;
    std::vector<size_t> holdout;
    for (size_t i = 0; i < rows.size(); ++i) {
      if (fold_of[i] == fold) {
        holdout.push_back(i);
      } else {
        train_rows.push_back(rows[i]);
        train_labels.push_back(labels[i]);
      }
    }
    for (size_t base = 0; base < kBaseCount; ++base) {
      auto model = make_classifier(kBaseKinds[base],
                                   derive_seed(seed_, 10 + base, static_cast<std::uint64_t>(fold)),
                                   label_count_);
      model->fit(train_rows, train_labels);
      for (size_t i : holdout) oof_predictions[i][base] = model->predict_one(rows[i]);
    }
  }

  // Meta-learner: multinomial logistic regression on one-hot predictions,
  // zero init, full-batch gradient descent.
  const size_t meta_dim = kBaseCount * static_cast<size_t>(label_count_) + 1;  // +1 bias
  meta_weights_.assign(static_cast<size_t>(label_count_), std::vector<double>(meta_dim, 0.0));
  FeatureRows meta_rows;
  meta_rows.reserve(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    meta_rows.push_back(one_hot_block(oof_predictions[i], label_count_));
  }

  std::vector<double> logits(static_cast<size_t>(label_count_));
  std::vector<std::vector<double>> gradient(static_cast<size_t>(label_count_),
                                            std::vector<double>(meta_dim, 0.0));
  const double scale = 1.0 / static_cast<double>(rows.size());
  for (int iteration = 0; iteration < config_.meta_iterations; ++iteration) {
    for (auto& row : gradient) std::fill(row.begin(), row.end(), 0.0);
    for (size_t i = 0; i < meta_rows.size(); ++i) {
      const auto& z = meta_rows[i];
      for (int cls = 0; cls < label_count_; ++cls) {
        double sum = meta_weights_[static_cast<size_t>(cls)][meta_dim - 1];
        for (size_t j = 0; j < z.size(); ++j) {
          sum += meta_weights_[static_cast<size_t>(cls)][j] * z[j];
        }
        logits[static_cast<size_t>(cls)] = sum;
      }
      const double peak = *std::max_element(logits.begin(), logits.end());
      double denom = 0.0;
      for (double value : logits) denom += std::exp(value - peak);
      for (int cls = 0; cls < label_count_; ++cls) {
        double delta = std::exp(logits[static_cast<size_t>(cls)] - peak) / denom;
        if (cls == labels[i]) delta -= 1.0;
        auto& grad_row = gradient[static_cast<size_t>(cls)];
        for (size_t j = 0; j < z.size(); ++j) grad_row[j] += delta * z[j];
        grad_row[meta_dim - 1] += delta;
      }
    }
    for (int cls = 0; cls < label_count_; ++cls) {
      auto& w = meta_weights_[static_cast<size_t>(cls)];
      const auto& grad_row = gradient[static_cast<size_t>(cls)];
      for (size_t j = 0; j < meta_dim; ++j) {
        w[j] -= config_.meta_learning_rate * scale * grad_row[j];
      }
    }
  }

  // Prediction-time bases see all training rows.
  bases_.clear();
  for (size_t base = 0; base < kBaseCount; ++base) {
    auto model = make_classifier(kBaseKinds[base], derive_seed(seed_, 20 + base), label_count_);
    model->fit(rows, labels);
    bases_.push_back(std::move(model));
  }
}

FeatureRow StackingClassifier::meta_features(const FeatureRow& row) const {
  std::vector<int> predictions(kBaseCount, 0);
  for (size_t base = 0; base < kBaseCount; ++base) {
    predictions[base] = bases_[base]->predict_one(row);
  }
  return one_hot_block(predictions, label_count_);
}

int StackingClassifier::predict_one(const FeatureRow& row) const {
  if (bases_.size() != kBaseCount || meta_weights_.empty()) {
    throw Error("stacking model used before fitting");
  }
  const FeatureRow z = meta_features(row);
  std::vector<double> scores(static_cast<size_t>(label_count_), 0.0);
  for (int cls = 0; cls < label_count_; ++cls) {
    const auto& w = meta_weights_[static_cast<size_t>(cls)];
    double sum = w.back();
    for (size_t j = 0; j < z.size(); ++j) sum += w[j] * z[j];
    scores[static_cast<size_t>(cls)] = sum;
  }
  return argmax_label(scores);
}

nlohmann::ordered_json StackingClassifier::to_json() const {
  nlohmann::ordered_json out;
  out["kind"] = kind();
  out["label_count"] = label_count_;
  out["seed"] = seed_;
  out["config"] = {{"folds", config_.folds},
                   {"meta_iterations", config_.meta_iterations},
                   {"meta_learning_rate", config_.meta_learning_rate}};
  out["meta_weights"] = meta_weights_;
  out["bases"] = nlohmann::ordered_json::array();
  for (const auto& base : bases_) out["bases"].push_back(base->to_json());
  return out;
}

std::unique_ptr<Classifier> StackingClassifier::from_json(const nlohmann::json& parsed) {
  try {
    StackingConfig config;
    config.folds = parsed.at("config").at("folds").get<int>();
    config.meta_iterations = parsed.at("config").at("meta_iterations").get<int>();
    config.meta_learning_rate = parsed.at("config").at("meta_learning_rate").get<double>();
    auto model = std::make_unique<StackingClassifier>(
        config, parsed.at("seed").get<std::uint64_t>(), parsed.at("label_count").get<int>());
    model->meta_weights_ = parsed.at("meta_weights").get<std::vector<std::vector<double>>>();
    for (const auto& base_json : parsed.at("bases")) {
      model->bases_.push_back(classifier_from_json(base_json));
    }
    if (model->bases_.size() != kBaseCount) {
      throw Error("stacking JSON must contain exactly three base models");
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed stacking JSON: ") + e.what());
  }
}

}  // namespace sepolml
