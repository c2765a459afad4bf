#pragma once

#include <string>
#include <vector>

#include "sepolml/dataset.hpp"
#include "sepolml/embedding.hpp"

namespace sepolml {

/// Fixes the feature layout shared by training and prediction. A rule maps
/// to [subject embedding ‖ object embedding ‖ class embedding ‖ permission
/// multi-hot]; an example is the element-wise mean over its rules with the
/// rule count (scaled by 1/6) appended. Total width:
/// 3 * embedding_dimensions + vocabulary size + 1.
struct FeatureSpec {
  int embedding_dimensions = 0;
  std::vector<Permission> permission_vocabulary;  // sorted, unique

  size_t feature_dimension() const {
    return 3 * static_cast<size_t>(embedding_dimensions) + permission_vocabulary.size() + 1;
  }

  /// Vocabulary = every permission appearing in the dataset's rules.
  static FeatureSpec from_dataset(const LabeledDataset& dataset, int embedding_dimensions);
};

struct FeatureMatrix {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;  // parallel to rows; -1 for unlabeled examples
  std::vector<std::string> example_ids;
};

/// Throws Error for an example with no rules and MissingNodeError when a
/// rule references a node absent from the embeddings. Permissions outside
/// the vocabulary contribute nothing (they can only appear at prediction
/// time, on policies unseen during training).
std::vector<double> featurize_example(const LabeledExample& example,
                                      const NodeEmbeddings& embeddings, const FeatureSpec& spec);

FeatureMatrix featurize_dataset(const LabeledDataset& dataset, const NodeEmbeddings& embeddings,
                                const FeatureSpec& spec);

}  // namespace sepolml
