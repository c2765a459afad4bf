#pragma once

#include <array>

#include "sepolml/model.hpp"

namespace sepolml {

struct MlpConfig {
  int hidden_units = 64;
  int epochs = 200;
  int batch_size = 16;
  double learning_rate = 0.01;
  double momentum = 0.9;
};

/// One-hidden-layer network: input -> ReLU(hidden) -> softmax(output), all
/// double precision. Weights start Glorot-uniform, biases at zero. The
/// network is separate from the classifier so its analytic gradients can be
/// checked against finite differences directly.
class MlpNetwork {
 public:
  MlpNetwork() = default;
  MlpNetwork(int input_units, int hidden_units, int output_units, std::uint64_t seed);

  int input_units() const { return input_units_; }
  int hidden_units() const { return hidden_units_; }
  int output_units() const { return output_units_; }

  /// Softmax class probabilities for one row.
  std::vector<double> probabilities(const FeatureRow& row) const;

  /// Mean cross-entropy, computed in log-space so it stays finite.
  double mean_loss(const FeatureRows& rows, const std::vector<int>& labels) const;

  struct Gradients {
    std::vector<double> w1, b1, w2, b2;
  };
  /// Batch-mean gradients of the cross-entropy loss.
  Gradients gradients(const FeatureRows& rows, const std::vector<int>& labels) const;

  /// Parameter blocks in the same order as Gradients: w1, b1, w2, b2.
  std::array<std::vector<double>*, 4> parameter_blocks() {
    return {&w1_, &b1_, &w2_, &b2_};
  }
  std::array<const std::vector<double>*, 4> parameter_blocks() const {
    return {&w1_, &b1_, &w2_, &b2_};
  }

  nlohmann::ordered_json to_json() const;
  static MlpNetwork from_json(const nlohmann::json& parsed);

 private:
  void forward(const FeatureRow& row, std::vector<double>& hidden_pre,
               std::vector<double>& hidden, std::vector<double>& logits) const;

  int input_units_ = 0;
  int hidden_units_ = 0;
  int output_units_ = 0;
  std::vector<double> w1_;  // hidden x input, row-major
  std::vector<double> b1_;
  std::vector<double> w2_;  // output x hidden, row-major
  std::vector<double> b2_;
};

/// Softmax classifier over the network above: standardized inputs,
/// mini-batch SGD with classical momentum, fixed learning rate. Throws
/// NonFiniteLossError if the objective ever diverges.
class MlpClassifier : public Classifier {
 public:
  MlpClassifier(MlpConfig config, std::uint64_t seed, int label_count);

  std::string kind() const override { return kMlpKind; }
  void fit(const FeatureRows& rows, const std::vector<int>& labels) override;
  int predict_one(const FeatureRow& row) const override;
  nlohmann::ordered_json to_json() const override;
  static std::unique_ptr<Classifier> from_json(const nlohmann::json& parsed);

  /// Class probabilities for a raw (unstandardized) row.
  std::vector<double> probabilities(const FeatureRow& row) const;

 private:
  MlpConfig config_;
  std::uint64_t seed_ = 0;
  int label_count_ = 0;
  Standardizer standardizer_;
  MlpNetwork network_;
};

}  // namespace sepolml
