#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "sepolml/graph.hpp"
#include "sepolml/rng.hpp"

namespace sepolml {

/// Vose alias table: O(n) build, O(1) sampling from a discrete distribution.
class AliasTable {
 public:
  AliasTable() = default;
  /// Weights need not be normalized; they must be nonnegative with a
  /// positive sum.
  explicit AliasTable(const std::vector<double>& weights);

  size_t size() const { return prob_.size(); }
  bool empty() const { return prob_.empty(); }
  int sample(Rng& rng) const;

  /// Exact probability of drawing outcome `i`, reconstructed from the
  /// table itself (not the input weights).
  double outcome_probability(size_t i) const;

 private:
  std::vector<double> prob_;   // acceptance threshold per bucket
  std::vector<int> alias_;     // fallback outcome per bucket
};

struct Node2vecConfig {
  int dimensions = 64;
  int walks_per_node = 10;
  int walk_length = 40;
  int window = 5;
  double return_param = 1.0;   // p: low values keep walks local
  double inout_param = 0.5;    // q: low values push walks outward
  int negative_samples = 5;
  int epochs = 5;
  double learning_rate = 0.025;
  std::uint64_t seed = 42;
};

/// Unnormalized second-order step weights over adjacency[cur] for a walk
/// that arrived at `cur` from `prev`: 1/p for returning to prev, 1 for a
/// common neighbor of prev and cur, 1/q otherwise. Adjacency lists must be
/// sorted (as produced by PolicyGraph::undirected_view).
std::vector<double> node2vec_step_weights(const std::vector<std::vector<int>>& adjacency,
                                          int prev, int cur, double return_param,
                                          double inout_param);

/// Biased random walks, walks_per_node per start node, in iteration-major
/// order (all nodes' walk 0, then walk 1, ...). Each walk draws from its own
/// generator seeded by derive_seed(seed, start, walk_index), so the corpus
/// is independent of scheduling. The first step is uniform; later steps use
/// second-order alias tables. Isolated nodes yield single-node walks.
std::vector<std::vector<int>> generate_walks(const std::vector<std::vector<int>>& adjacency,
                                             const Node2vecConfig& config);

/// Trained node vectors keyed by the graph's canonical node keys.
class NodeEmbeddings {
 public:
  NodeEmbeddings() = default;
  NodeEmbeddings(int dimensions, std::uint64_t seed) : dimensions_(dimensions), seed_(seed) {}

  int dimensions() const { return dimensions_; }
  std::uint64_t seed() const { return seed_; }
  size_t size() const { return keys_.size(); }
  const std::vector<std::string>& keys() const { return keys_; }

  bool contains(const std::string& key) const { return index_.contains(key); }
  /// Throws MissingNodeError when the key was not embedded.
  std::span<const float> vector_for(const std::string& key) const;
  const std::vector<float>* try_vector(const std::string& key) const;

  void insert(const std::string& key, std::vector<float> vector);

  void save(const std::filesystem::path& path) const;
  static NodeEmbeddings load(const std::filesystem::path& path);

 private:
  int dimensions_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<std::string> keys_;
  std::vector<std::vector<float>> vectors_;
  std::unordered_map<std::string, size_t> index_;
};

/// Runs the full embedding pass over a policy graph: undirected view,
/// biased walks, then skip-gram with negative sampling. Single-threaded and
/// bitwise reproducible for a given (graph, config).
NodeEmbeddings train_node_embeddings(const PolicyGraph& graph, const Node2vecConfig& config);

/// Throws ZeroVectorError when either vector has zero norm.
double cosine_similarity(std::span<const float> a, std::span<const float> b);

}  // namespace sepolml
