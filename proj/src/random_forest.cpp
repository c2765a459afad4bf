#include "sepolml/random_forest.hpp"

#include <algorithm>
#include <cmath>

#include "sepolml/errors.hpp"
#include "sepolml/rng.hpp"

namespace sepolml {

namespace {

double gini_from_counts(const std::vector<size_t>& counts, size_t total) {
  if (total == 0) return 0.0;
  double impurity = 1.0;
  for (size_t count : counts) {
    const double p = static_cast<double>(count) / static_cast<double>(total);
    impurity -= p * p;
  }
  return impurity;
}

int majority_label(const std::vector<size_t>& counts) {
  size_t best_count = 0;
  int best_label = 0;
  for (size_t label = 0; label < counts.size(); ++label) {
    if (counts[label] > best_count) {
      best_count = counts[label];
      best_label = static_cast<int>(label);
    }
  }
  return best_label;
}

}  // namespace

/// Grows one forest; split out of the classifier so the recursive state
/// stays together.
class ForestBuilder {
 public:
  ForestBuilder(const FeatureRows& rows, const std::vector<int>& labels,
                const RandomForestConfig& config, int label_count)
      : rows_(rows), labels_(labels), config_(config), label_count_(label_count) {
    dimension_ = rows.front().size();
    candidates_per_node_ = static_cast<size_t>(
        std::ceil(std::sqrt(static_cast<double>(dimension_))));
    feature_pool_.resize(dimension_);
    for (size_t i = 0; i < dimension_; ++i) feature_pool_[i] = static_cast<int>(i);
  }

  RandomForestClassifier::Tree build(Rng& rng) {
    RandomForestClassifier::Tree tree;
    std::vector<size_t> indices(rows_.size());
    for (auto& index : indices) index = static_cast<size_t>(rng.below(rows_.size()));
    grow(tree, indices, 0, rng);
    return tree;
  }

 private:
  std::vector<size_t> label_counts(const std::vector<size_t>& indices) const {
    std::vector<size_t> counts(static_cast<size_t>(label_count_), 0);
    for (size_t index : indices) counts[static_cast<size_t>(labels_[index])] += 1;
    return counts;
  }

  int leaf(RandomForestClassifier::Tree& tree, const std::vector<size_t>& counts) {
    RandomForestClassifier::TreeNode node;
    node.label = majority_label(counts);
    tree.push_back(node);
    return static_cast<int>(tree.size() - 1);
  }

  struct Split {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;
  };

  /// Sweeps sorted values of one feature, scoring the midpoint between each
  /// pair of distinct neighbors. Thresholds that rounding pushed onto the
  /// upper value fall back to the lower value so `x <= t` reproduces the
  /// swept partition exactly.
  void sweep_feature(int feature, const std::vector<size_t>& indices,
                     const std::vector<size_t>& total_counts, double parent_gini,
                     Split& best) const {
    std::vector<std::pair<double, int>> ordered;
    ordered.reserve(indices.size());
    for (size_t index : indices) {
      ordered.emplace_back(rows_[index][static_cast<size_t>(feature)], labels_[index]);
    }
    std::sort(ordered.begin(), ordered.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    std::vector<size_t> left_counts(static_cast<size_t>(label_count_), 0);
    std::vector<size_t> right_counts = total_counts;
    const size_t n = ordered.size();
    for (size_t i = 1; i < n; ++i) {
      const auto& [value, label] = ordered[i - 1];
      left_counts[static_cast<size_t>(label)] += 1;
      right_counts[static_cast<size_t>(label)] -= 1;
      if (value == ordered[i].first) continue;

      double threshold = value + (ordered[i].first - value) / 2.0;
      if (threshold >= ordered[i].first) threshold = value;

      const double left_gini = gini_from_counts(left_counts, i);
      const double right_gini = gini_from_counts(right_counts, n - i);
      const double weighted = (static_cast<double>(i) * left_gini +
                               static_cast<double>(n - i) * right_gini) /
                              static_cast<double>(n);
      const double gain = parent_gini - weighted;
      if (gain > best.gain) {
        best.gain = gain;
        best.feature = feature;
        best.threshold = threshold;
      }
    }
  }

  int grow(RandomForestClassifier::Tree& tree, const std::vector<size_t>& indices, int depth,
           Rng& rng) {
    const std::vector<size_t> counts = label_counts(indices);
    const size_t present =
        static_cast<size_t>(std::count_if(counts.begin(), counts.end(),
                                          [](size_t count) { return count > 0; }));
    if (present <= 1 || indices.size() < static_cast<size_t>(config_.min_samples_split) ||
        (config_.max_depth > 0 && depth >= config_.max_depth)) {
      return leaf(tree, counts);
    }

    // Draw the candidate features, then visit them in ascending order so
    // equal gains resolve to the lowest index.
    std::vector<int> candidates;
    candidates.reserve(candidates_per_node_);
    for (size_t i = 0; i < candidates_per_node_; ++i) {
      const size_t j = i + static_cast<size_t>(rng.below(dimension_ - i));
      std::swap(feature_pool_[i], feature_pool_[j]);
      candidates.push_back(feature_pool_[i]);
    }
    std::sort(candidates.begin(), candidates.end());

    const double parent_gini = gini_from_counts(counts, indices.size());
    Split best;
    for (int feature : candidates) sweep_feature(feature, indices, counts, parent_gini, best);
    if (best.feature < 0) return leaf(tree, counts);

    std::vector<size_t> left_indices;
    std::vector<size_t> right_indices;
    for (size_t index : indices) {
      (rows_[index][static_cast<size_t>(best.feature)] <= best.threshold ? left_indices
                                                                         : right_indices)
          .push_back(index);
    }
    if (left_indices.empty() || right_indices.empty()) return leaf(tree, counts);

    const int node_index = static_cast<int>(tree.size());
    tree.emplace_back();
    tree[static_cast<size_t>(node_index)].feature = best.feature;
    tree[static_cast<size_t>(node_index)].threshold = best.threshold;
    const int left = grow(tree, left_indices, depth + 1, rng);
    const int right = grow(tree, right_indices, depth + 1, rng);
    tree[static_cast<size_t>(node_index)].left = left;
    tree[static_cast<size_t>(node_index)].right = right;
    return node_index;
  }

  const FeatureRows& rows_;
  const std::vector<int>& labels_;
  const RandomForestConfig& config_;
  int label_count_;
  size_t dimension_ = 0;
  size_t candidates_per_node_ = 0;
  std::vector<int> feature_pool_;
};

RandomForestClassifier::RandomForestClassifier(RandomForestConfig config, std::uint64_t seed,
                                               int label_count)
    : config_(config), seed_(seed), label_count_(label_count) {
  if (config_.tree_count < 1) throw ConfigError("random forest needs at least one tree");
  if (label_count_ < 2) throw ConfigError("random forest needs at least two labels");
}

void RandomForestClassifier::fit(const FeatureRows& rows, const std::vector<int>& labels) {
  if (rows.empty()) throw Error("cannot fit a random forest on an empty training set");
  if (rows.size() != labels.size()) throw Error("rows and labels differ in length");
  trees_.clear();
  trees_.reserve(static_cast<size_t>(config_.tree_count));
  ForestBuilder builder(rows, labels, config_, label_count_);
  for (int tree_index = 0; tree_index < config_.tree_count; ++tree_index) {
    Rng rng(derive_seed(seed_, static_cast<std::uint64_t>(tree_index)));
    trees_.push_back(builder.build(rng));
  }
}

int RandomForestClassifier::predict_one(const FeatureRow& row) const {
  if (trees_.empty()) throw Error("random forest used before fitting");
  std::vector<double> votes(static_cast<size_t>(label_count_), 0.0);
  for (const auto& tree : trees_) {
    size_t node = 0;
    while (tree[node].label < 0) {
      if (static_cast<size_t>(tree[node].feature) >= row.size()) {
        throw DimensionMismatchError(static_cast<size_t>(tree[node].feature) + 1, row.size());
      }
      node = static_cast<size_t>(row[static_cast<size_t>(tree[node].feature)] <=
                                         tree[node].threshold
                                     ? tree[node].left
                                     : tree[node].right);
    }
    votes[static_cast<size_t>(tree[node].label)] += 1.0;
  }
  return argmax_label(votes);
}

nlohmann::ordered_json RandomForestClassifier::to_json() const {
  nlohmann::ordered_json out;
  out["kind"] = kind();
  out["label_count"] = label_count_;
  out["seed"] = seed_;
  out["config"] = {{"tree_count", config_.tree_count},
                   {"max_depth", config_.max_depth},
                   {"min_samples_split", config_.min_samples_split}};
  out["trees"] = nlohmann::ordered_json::array();
  for (const auto& tree : trees_) {
    nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
    for (const auto& node : tree) {
      nodes.push_back({node.feature, node.threshold, node.left, node.right, node.label});
    }
    out["trees"].push_back(std::move(nodes));
  }
  return out;
}

std::unique_ptr<Classifier> RandomForestClassifier::from_json(const nlohmann::json& parsed) {
  try {
    RandomForestConfig config;
    config.tree_count = parsed.at("config").at("tree_count").get<int>();
    config.max_depth = parsed.at("config").at("max_depth").get<int>();
    config.min_samples_split = parsed.at("config").at("min_samples_split").get<int>();
    auto model = std::make_unique<RandomForestClassifier>(
        config, parsed.at("seed").get<std::uint64_t>(), parsed.at("label_count").get<int>());
    for (const auto& tree_json : parsed.at("trees")) {
      Tree tree;
      for (const auto& node_json : tree_json) {
        TreeNode node;
        node.feature = node_json.at(0).get<int>();
        node.threshold = node_json.at(1).get<double>();
        node.left = node_json.at(2).get<int>();
        node.right = node_json.at(3).get<int>();
        node.label = node_json.at(4).get<int>();
        tree.push_back(node);
      }
      model->trees_.push_back(std::move(tree));
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed random forest JSON: ") + e.what());
  }
}

}  // namespace sepolml
