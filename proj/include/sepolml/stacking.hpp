#pragma once

#include "sepolml/model.hpp"

namespace sepolml {

struct StackingConfig {
  int folds = 5;
  int meta_iterations = 500;
  double meta_learning_rate = 0.5;
};

/// Stacked ensemble over the three base models (forest, svm, mlp). Base
/// predictions for the meta-learner come from out-of-fold predictions so the
/// meta-model never sees a base's training-set fit of the same row; the
/// meta-learner is a zero-initialized multinomial logistic regression over
/// the concatenated one-hot base predictions, trained with full-batch
/// gradient descent. After the fold pass, the bases are refit on the full
/// training set for prediction time.
class StackingClassifier : public Classifier {
 public:
  StackingClassifier(StackingConfig config, std::uint64_t seed, int label_count);

  std::string kind() const override { return kStackingKind; }
  void fit(const FeatureRows& rows, const std::vector<int>& labels) override;
  int predict_one(const FeatureRow& row) const override;
  nlohmann::ordered_json to_json() const override;
  static std::unique_ptr<Classifier> from_json(const nlohmann::json& parsed);

 private:
  FeatureRow meta_features(const FeatureRow& row) const;

  StackingConfig config_;
  std::uint64_t seed_ = 0;
  int label_count_ = 0;
  std::vector<std::unique_ptr<Classifier>> bases_;
  std::vector<std::vector<double>> meta_weights_;  // [class][3 * label_count + 1]
};

}  // namespace sepolml
