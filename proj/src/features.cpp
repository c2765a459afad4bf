#include "sepolml/features.hpp"

#include <algorithm>
#include <set>

#include "sepolml/errors.hpp"

namespace sepolml {

namespace {

// Rules always span six or fewer statements, so this keeps the count
// feature in step with the embedding/multi-hot value range.
constexpr double kRuleCountScale = 1.0 / 6.0;

void accumulate_embedding(std::vector<double>& row, size_t offset,
                          const NodeEmbeddings& embeddings, const std::string& key) {
  const auto vector = embeddings.vector_for(key);
  for (size_t i = 0; i < vector.size(); ++i) row[offset + i] += static_cast<double>(vector[i]);
}

}  // namespace

FeatureSpec FeatureSpec::from_dataset(const LabeledDataset& dataset, int embedding_dimensions) {
  std::set<Permission> vocabulary;
  for (const auto& example : dataset.examples) {
    for (const auto& statement : example.rules) {
      if (const auto* allow = std::get_if<AllowRule>(&statement)) {
        vocabulary.insert(allow->permissions.begin(), allow->permissions.end());
      }
    }
  }
  FeatureSpec spec;
  spec.embedding_dimensions = embedding_dimensions;
  spec.permission_vocabulary.assign(vocabulary.begin(), vocabulary.end());
  return spec;
}

std::vector<double> featurize_example(const LabeledExample& example,
                                      const NodeEmbeddings& embeddings, const FeatureSpec& spec) {
  if (example.rules.empty()) {
    throw Error("example '" + example.example_id + "' has no rules to featurize");
  }
  const size_t d = static_cast<size_t>(spec.embedding_dimensions);
  const size_t perm_offset = 3 * d;
  std::vector<double> row(spec.feature_dimension(), 0.0);

  for (const auto& statement : example.rules) {
    if (const auto* allow = std::get_if<AllowRule>(&statement)) {
      accumulate_embedding(row, 0, embeddings, "subject:" + allow->source);
      accumulate_embedding(row, d, embeddings,
                           "object:" + allow->target + ":" + allow->security_class);
      accumulate_embedding(row, 2 * d, embeddings, "class:" + allow->security_class);
      for (const auto& perm : allow->permissions) {
        const auto it = std::lower_bound(spec.permission_vocabulary.begin(),
                                         spec.permission_vocabulary.end(), perm);
        if (it != spec.permission_vocabulary.end() && *it == perm) {
          row[perm_offset + static_cast<size_t>(
                                std::distance(spec.permission_vocabulary.begin(), it))] += 1.0;
        }
      }
    } else if (const auto* transition = std::get_if<TypeTransitionRule>(&statement)) {
      accumulate_embedding(row, 0, embeddings, "subject:" + transition->source_domain);
      accumulate_embedding(
          row, d, embeddings,
          "object:" + transition->target_type + ":" + transition->security_class);
      accumulate_embedding(row, 2 * d, embeddings, "class:" + transition->security_class);
      // transitions carry no permissions; their multi-hot block stays zero
    }
  }

  const double rule_count = static_cast<double>(example.rules.size());
  for (auto& value : row) value /= rule_count;
  row.back() = rule_count * kRuleCountScale;
  return row;
}

FeatureMatrix featurize_dataset(const LabeledDataset& dataset, const NodeEmbeddings& embeddings,
                                const FeatureSpec& spec) {
  FeatureMatrix matrix;
  matrix.rows.reserve(dataset.examples.size());
  matrix.labels.reserve(dataset.examples.size());
  matrix.example_ids.reserve(dataset.examples.size());
  for (const auto& example : dataset.examples) {
    matrix.rows.push_back(featurize_example(example, embeddings, spec));
    matrix.labels.push_back(example.label);
    matrix.example_ids.push_back(example.example_id);
  }
  return matrix;
}

}  // namespace sepolml
