#pragma once

#include "sepolml/model.hpp"

namespace sepolml {

struct LinearSvmConfig {
  double regularization = 1e-4;  // lambda in the hinge objective
  int epochs = 50;
};

/// One-vs-rest linear SVM trained with the projection-free Pegasos update:
/// step size 1/(lambda * t), weights shrunk by (1 - eta * lambda) every
/// step and bumped by eta * y * x on margin violations. Inputs are
/// standardized internally and a constant column provides the bias.
/// Prediction takes the class with the largest margin (ties to the lowest
/// label).
class LinearSvmClassifier : public Classifier {
 public:
  LinearSvmClassifier(LinearSvmConfig config, std::uint64_t seed, int label_count);

  std::string kind() const override { return kSvmKind; }
  void fit(const FeatureRows& rows, const std::vector<int>& labels) override;
  int predict_one(const FeatureRow& row) const override;
  nlohmann::ordered_json to_json() const override;
  static std::unique_ptr<Classifier> from_json(const nlohmann::json& parsed);

  /// Per-class margins for a raw (unstandardized) row.
  std::vector<double> decision_values(const FeatureRow& row) const;

 private:
  LinearSvmConfig config_;
  std::uint64_t seed_ = 0;
  int label_count_ = 0;
  Standardizer standardizer_;
  std::vector<std::vector<double>> weights_;  // [class][dim + 1], last is bias
};

}  // namespace sepolml
