#include "sepolml/model.hpp"

#include <cmath>

#include "sepolml/errors.hpp"
#include "sepolml/mlp.hpp"
#include "sepolml/random_forest.hpp"
#include "sepolml/stacking.hpp"
#include "sepolml/svm.hpp"

namespace sepolml {

void Standardizer::fit(const FeatureRows& rows) {
  if (rows.empty()) throw Error("cannot standardize an empty training set");
  const size_t dim = rows.front().size();
  means_.assign(dim, 0.0);
  scales_.assign(dim, 1.0);
  for (const auto& row : rows) {
    if (row.size() != dim) throw DimensionMismatchError(dim, row.size());
    for (size_t j = 0; j < dim; ++j) means_[j] += row[j];
  }
  for (auto& mean : means_) mean /= static_cast<double>(rows.size());
  std::vector<double> variances(dim, 0.0);
  for (const auto& row : rows) {
    for (size_t j = 0; j < dim; ++j) {
      const double delta = row[j] - means_[j];
      variances[j] += delta * delta;
    }
  }
  for (size_t j = 0; j < dim; ++j) {
    const double stddev = std::sqrt(variances[j] / static_cast<double>(rows.size()));
    scales_[j] = stddev > 0.0 ? stddev : 1.0;
  }
}

FeatureRow Standardizer::transform(const FeatureRow& row) const {
  if (row.size() != means_.size()) throw DimensionMismatchError(means_.size(), row.size());
  FeatureRow out(row.size());
  for (size_t j = 0; j < row.size(); ++j) out[j] = (row[j] - means_[j]) / scales_[j];
  return out;
}

FeatureRows Standardizer::transform(const FeatureRows& rows) const {
  FeatureRows out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(transform(row));
  return out;
}

nlohmann::ordered_json Standardizer::to_json() const {
  return {{"means", means_}, {"scales", scales_}};
}

Standardizer Standardizer::from_json(const nlohmann::json& parsed) {
  Standardizer standardizer;
  try {
    standardizer.means_ = parsed.at("means").get<std::vector<double>>();
    standardizer.scales_ = parsed.at("scales").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed standardizer JSON: ") + e.what());
  }
  if (standardizer.means_.size() != standardizer.scales_.size()) {
    throw Error("standardizer means and scales differ in length");
  }
  return standardizer;
}

std::vector<int> Classifier::predict(const FeatureRows& rows) const {
  std::vector<int> predictions;
  predictions.reserve(rows.size());
  for (const auto& row : rows) predictions.push_back(predict_one(row));
  return predictions;
}

int argmax_label(const std::vector<double>& scores) {
  int best = 0;
  for (size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[static_cast<size_t>(best)]) best = static_cast<int>(i);
  }
  return best;
}

std::unique_ptr<Classifier> make_classifier(const std::string& kind, std::uint64_t seed,
                                            int label_count) {
  if (kind == kRandomForestKind) {
    return std::make_unique<RandomForestClassifier>(RandomForestConfig{}, seed, label_count);
  }
  if (kind == kSvmKind) {
    return std::make_unique<LinearSvmClassifier>(LinearSvmConfig{}, seed, label_count);
  }
  if (kind == kMlpKind) {
    return std::make_unique<MlpClassifier>(MlpConfig{}, seed, label_count);
  }
  if (kind == kStackingKind) {
    return std::make_unique<StackingClassifier>(StackingConfig{}, seed, label_count);
  }
  throw ConfigError("unknown model kind '" + kind + "'");
}

std::unique_ptr<Classifier> classifier_from_json(const nlohmann::json& parsed) {
  std::string kind;
  try {
    kind = parsed.at("kind").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("model JSON lacks a kind: ") + e.what());
  }
  if (kind == kRandomForestKind) return RandomForestClassifier::from_json(parsed);
  if (kind == kSvmKind) return LinearSvmClassifier::from_json(parsed);
  if (kind == kMlpKind) return MlpClassifier::from_json(parsed);
  if (kind == kStackingKind) return StackingClassifier::from_json(parsed);
  throw Error("unknown model kind '" + kind + "' in model JSON");
}

}  // namespace sepolml
