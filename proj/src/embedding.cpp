#include "sepolml/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "sepolml/errors.hpp"

namespace sepolml {

namespace {

// Sub-seed stream tags so initialization, walk generation, and negative
// sampling never share a generator.
constexpr std::uint64_t kInitStream = 0x1001;
constexpr std::uint64_t kTrainStream = 0x1002;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

AliasTable::AliasTable(const std::vector<double>& weights) {
  if (weights.empty()) throw std::invalid_argument("alias table needs at least one weight");
  double sum = 0.0;
  for (double w : weights) {
    if (w < 0.0 || !std::isfinite(w)) {
      throw std::invalid_argument("alias table weights must be finite and nonnegative");
    }
    sum += w;
  }
  if (sum <= 0.0) throw std::invalid_argument("alias table weights must have positive sum");

  const size_t n = weights.size();
  prob_.assign(n, 0.0);
  alias_.assign(n, 0);
  std::vector<double> scaled(n);
  for (size_t i = 0; i < n; ++i) scaled[i] = weights[i] * static_cast<double>(n) / sum;

  std::vector<int> small;
  std::vector<int> large;
  for (size_t i = 0; i < n; ++i) {
    (scaled[i] < 1.0 ? small : large).push_back(static_cast<int>(i));
  }
  while (!small.empty() && !large.empty()) {
    const int s = small.back();
    const int l = large.back();
    small.pop_back();
    prob_[static_cast<size_t>(s)] = scaled[static_cast<size_t>(s)];
    alias_[static_cast<size_t>(s)] = l;
    scaled[static_cast<size_t>(l)] =
        (scaled[static_cast<size_t>(l)] + scaled[static_cast<size_t>(s)]) - 1.0;
    if (scaled[static_cast<size_t>(l)] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  for (int i : large) prob_[static_cast<size_t>(i)] = 1.0;
  for (int i : small) prob_[static_cast<size_t>(i)] = 1.0;  // numerical leftovers
}

int AliasTable::sample(Rng& rng) const {
  const size_t bucket = static_cast<size_t>(rng.below(prob_.size()));
  return rng.unit() < prob_[bucket] ? static_cast<int>(bucket) : alias_[bucket];
}

double AliasTable::outcome_probability(size_t i) const {
  double mass = prob_[i];
  for (size_t j = 0; j < prob_.size(); ++j) {
    if (alias_[j] == static_cast<int>(i) && prob_[j] < 1.0) mass += 1.0 - prob_[j];
  }
  return mass / static_cast<double>(prob_.size());
}

std::vector<double> node2vec_step_weights(const std::vector<std::vector<int>>& adjacency,
                                          int prev, int cur, double return_param,
                                          double inout_param) {
  const auto& neighbors = adjacency[static_cast<size_t>(cur)];
  const auto& prev_neighbors = adjacency[static_cast<size_t>(prev)];
  std::vector<double> weights(neighbors.size());
  for (size_t i = 0; i < neighbors.size(); ++i) {
    const int candidate = neighbors[i];
    if (candidate == prev) {
      weights[i] = 1.0 / return_param;
    } else if (std::binary_search(prev_neighbors.begin(), prev_neighbors.end(), candidate)) {
      weights[i] = 1.0;
    } else {
      weights[i] = 1.0 / inout_param;
    }
  }
  return weights;
}

std::vector<std::vector<int>> generate_walks(const std::vector<std::vector<int>>& adjacency,
                                             const Node2vecConfig& config) {
  const size_t n = adjacency.size();

  // One alias table per directed edge (prev -> cur), keyed by packed ids.
  std::unordered_map<std::uint64_t, AliasTable> step_tables;
  auto pack = [](int prev, int cur) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(prev)) << 32) |
           static_cast<std::uint32_t>(cur);
  };
  for (size_t cur = 0; cur < n; ++cur) {
    for (int prev : adjacency[cur]) {
      step_tables.emplace(pack(prev, static_cast<int>(cur)),
                          AliasTable(node2vec_step_weights(adjacency, prev, static_cast<int>(cur),
                                                           config.return_param,
                                                           config.inout_param)));
    }
  }

  std::vector<std::vector<int>> walks;
  walks.reserve(n * static_cast<size_t>(config.walks_per_node));
  for (int walk_index = 0; walk_index < config.walks_per_node; ++walk_index) {
    for (size_t start = 0; start < n; ++start) {
      Rng rng(derive_seed(config.seed, start, static_cast<std::uint64_t>(walk_index)));
      std::vector<int> walk;
      walk.reserve(static_cast<size_t>(config.walk_length));
      walk.push_back(static_cast<int>(start));
      const auto& first_neighbors = adjacency[start];
      if (!first_neighbors.empty() && config.walk_length > 1) {
        walk.push_back(first_neighbors[rng.below(first_neighbors.size())]);
        while (walk.size() < static_cast<size_t>(config.walk_length)) {
          const int prev = walk[walk.size() - 2];
          const int cur = walk.back();
          const auto& table = step_tables.at(pack(prev, cur));
          walk.push_back(adjacency[static_cast<size_t>(cur)][static_cast<size_t>(table.sample(rng))]);
        }
      }
      walks.push_back(std::move(walk));
    }
  }
  return walks;
}

std::span<const float> NodeEmbeddings::vector_for(const std::string& key) const {
  auto it = index_.find(key);
  if (it == index_.end()) throw MissingNodeError(key);
  return vectors_[it->second];
}

const std::vector<float>* NodeEmbeddings::try_vector(const std::string& key) const {
  auto it = index_.find(key);
  return it == index_.end() ? nullptr : &vectors_[it->second];
}

void NodeEmbeddings::insert(const std::string& key, std::vector<float> vector) {
  if (dimensions_ == 0) dimensions_ = static_cast<int>(vector.size());
  if (vector.size() != static_cast<size_t>(dimensions_)) {
    throw DimensionMismatchError(static_cast<size_t>(dimensions_), vector.size());
  }
  index_.emplace(key, keys_.size());
  keys_.push_back(key);
  vectors_.push_back(std::move(vector));
}

void NodeEmbeddings::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write embeddings to " + path.string());
  out << "node2vec " << keys_.size() << " " << dimensions_ << " " << seed_ << "\n";
  char buffer[64];
  for (size_t i = 0; i < keys_.size(); ++i) {
    out << keys_[i];
    for (float value : vectors_[i]) {
      // %.9g round-trips any float exactly.
      std::snprintf(buffer, sizeof(buffer), "%.9g", static_cast<double>(value));
      out << ' ' << buffer;
    }
    out << '\n';
  }
  if (!out) throw Error("failed writing embeddings to " + path.string());
}

NodeEmbeddings NodeEmbeddings::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read embeddings from " + path.string());
  std::string magic;
  size_t count = 0;
  int dimensions = 0;
  std::uint64_t seed = 0;
  if (!(in >> magic >> count >> dimensions >> seed) || magic != "node2vec" || dimensions <= 0) {
    throw Error("malformed embedding header in " + path.string());
  }
  NodeEmbeddings embeddings(dimensions, seed);
  for (size_t i = 0; i < count; ++i) {
    std::string key;
    if (!(in >> key)) throw Error("truncated embedding file " + path.string());
    std::vector<float> vector(static_cast<size_t>(dimensions));
    for (auto& value : vector) {
      if (!(in >> value)) throw Error("truncated embedding row in " + path.string());
    }
    embeddings.insert(key, std::move(vector));
  }
  return embeddings;
}

NodeEmbeddings train_node_embeddings(const PolicyGraph& graph, const Node2vecConfig& config) {
  const auto adjacency = graph.undirected_view();
  const size_t n = adjacency.size();
  NodeEmbeddings embeddings(config.dimensions, config.seed);
  if (n == 0) return embeddings;

  const auto walks = generate_walks(adjacency, config);

  // Noise distribution: occurrence counts raised to 3/4.
  std::vector<double> counts(n, 0.0);
  for (const auto& walk : walks) {
    for (int node : walk) counts[static_cast<size_t>(node)] += 1.0;
  }
  std::vector<double> noise_weights(n);
  for (size_t i = 0; i < n; ++i) noise_weights[i] = std::pow(counts[i], 0.75);
  const AliasTable noise_table(noise_weights);

  const size_t d = static_cast<size_t>(config.dimensions);
  std::vector<std::vector<float>> in_vectors(n, std::vector<float>(d));
  std::vector<std::vector<float>> out_vectors(n, std::vector<float>(d));
  Rng init_rng(derive_seed(config.seed, kInitStream));
  const float spread = 1.0f / static_cast<float>(config.dimensions);
  for (auto& row : in_vectors) {
    for (auto& value : row) value = (init_rng.unit_float() - 0.5f) * spread;
  }
  for (auto& row : out_vectors) {
    for (auto& value : row) value = (init_rng.unit_float() - 0.5f) * spread;
  }

  // Count context pairs once so the learning rate can decay linearly over
  // the full schedule.
  std::uint64_t pairs_per_epoch = 0;
  for (const auto& walk : walks) {
    const long long len = static_cast<long long>(walk.size());
    for (long long i = 0; i < len; ++i) {
      const long long lo = std::max<long long>(0, i - config.window);
      const long long hi = std::min<long long>(len - 1, i + config.window);
      pairs_per_epoch += static_cast<std::uint64_t>(hi - lo);
    }
  }
  if (pairs_per_epoch == 0) throw DegenerateCorpusError();
  const double total_steps =
      static_cast<double>(pairs_per_epoch) * static_cast<double>(config.epochs);

  Rng train_rng(derive_seed(config.seed, kTrainStream));
  std::vector<float> gradient(d);
  std::uint64_t step = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (const auto& walk : walks) {
      const long long len = static_cast<long long>(walk.size());
      for (long long i = 0; i < len; ++i) {
        const size_t center = static_cast<size_t>(walk[static_cast<size_t>(i)]);
        auto& center_vec = in_vectors[center];
        const long long lo = std::max<long long>(0, i - config.window);
        const long long hi = std::min<long long>(len - 1, i + config.window);
        for (long long j = lo; j <= hi; ++j) {
          if (j == i) continue;
          const size_t context = static_cast<size_t>(walk[static_cast<size_t>(j)]);
          const double lr =
              config.learning_rate *
              std::max(1.0 - static_cast<double>(step) / total_steps, 1e-4);
          ++step;
          std::fill(gradient.begin(), gradient.end(), 0.0f);

          auto push_sample = [&](size_t target, double label) {
            auto& target_vec = out_vectors[target];
            double dot = 0.0;
            for (size_t k = 0; k < d; ++k) {
              dot += static_cast<double>(center_vec[k]) * static_cast<double>(target_vec[k]);
            }
            const float g = static_cast<float>(lr * (label - sigmoid(dot)));
            for (size_t k = 0; k < d; ++k) {
              gradient[k] += g * target_vec[k];
              target_vec[k] += g * center_vec[k];
            }
          };

          push_sample(context, 1.0);
          for (int s = 0; s < config.negative_samples; ++s) {
            const size_t negative = static_cast<size_t>(noise_table.sample(train_rng));
            if (negative == context) continue;
            push_sample(negative, 0.0);
          }
          for (size_t k = 0; k < d; ++k) center_vec[k] += gradient[k];
        }
      }
    }
  }

  for (size_t i = 0; i < n; ++i) {
    embeddings.insert(graph.node_key(static_cast<int>(i)), std::move(in_vectors[i]));
  }
  return embeddings;
}

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) throw DimensionMismatchError(a.size(), b.size());
  double dot = 0.0;
  double norm_a = 0.0;
  double norm_b = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    norm_a += static_cast<double>(a[i]) * static_cast<double>(a[i]);
    norm_b += static_cast<double>(b[i]) * static_cast<double>(b[i]);
  }
  if (norm_a == 0.0 || norm_b == 0.0) throw ZeroVectorError();
  return dot / (std::sqrt(norm_a) * std::sqrt(norm_b));
}

}  // namespace sepolml
