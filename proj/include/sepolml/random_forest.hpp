#pragma once

#include "sepolml/model.hpp"

namespace sepolml {

struct RandomForestConfig {
  int tree_count = 100;
  int max_depth = 0;  // 0 grows trees until pure or too small to split
  int min_samples_split = 2;
};

/// Bagged CART trees with Gini splits. Each tree bootstraps the training
/// rows and examines ceil(sqrt(dim)) candidate features per node; candidate
/// thresholds are midpoints between consecutive distinct values. Equal-gain
/// ties resolve to the lowest feature index, then the lowest threshold, and
/// voting ties to the lowest label, so training and prediction are fully
/// deterministic for a given seed.
class RandomForestClassifier : public Classifier {
 public:
  RandomForestClassifier(RandomForestConfig config, std::uint64_t seed, int label_count);

  std::string kind() const override { return kRandomForestKind; }
  void fit(const FeatureRows& rows, const std::vector<int>& labels) override;
  int predict_one(const FeatureRow& row) const override;
  nlohmann::ordered_json to_json() const override;
  static std::unique_ptr<Classifier> from_json(const nlohmann::json& parsed);

  size_t tree_count() const { return trees_.size(); }

 private:
  // Interior nodes carry (feature, threshold, children); leaves carry label.
  struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int label = -1;
  };
  using Tree = std::vector<TreeNode>;

  friend class ForestBuilder;

  RandomForestConfig config_;
  std::uint64_t seed_ = 0;
  int label_count_ = 0;
  std::vector<Tree> trees_;
};

}  // namespace sepolml
