#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

namespace sepolml {

using FeatureRow = std::vector<double>;
using FeatureRows = std::vector<FeatureRow>;

/// Per-column zero-mean/unit-variance scaling, fit on training data only.
/// Constant columns keep their mean subtracted and divide by 1.
class Standardizer {
 public:
  void fit(const FeatureRows& rows);
  FeatureRow transform(const FeatureRow& row) const;
  FeatureRows transform(const FeatureRows& rows) const;

  bool fitted() const { return !means_.empty(); }
  nlohmann::ordered_json to_json() const;
  static Standardizer from_json(const nlohmann::json& parsed);

 private:
  std::vector<double> means_;
  std::vector<double> scales_;
};

/// Multi-class classifier over fixed-width feature rows. Implementations
/// are single-threaded and deterministic for a given seed.
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual std::string kind() const = 0;
  virtual void fit(const FeatureRows& rows, const std::vector<int>& labels) = 0;
  virtual int predict_one(const FeatureRow& row) const = 0;
  virtual nlohmann::ordered_json to_json() const = 0;

  std::vector<int> predict(const FeatureRows& rows) const;
};

inline constexpr const char* kRandomForestKind = "random_forest";
inline constexpr const char* kSvmKind = "svm";
inline constexpr const char* kMlpKind = "mlp";
inline constexpr const char* kStackingKind = "stacking";

/// Factory over the four model kinds; throws ConfigError for unknown names.
std::unique_ptr<Classifier> make_classifier(const std::string& kind, std::uint64_t seed,
                                            int label_count);

/// Rebuilds a trained classifier from its to_json() form.
std::unique_ptr<Classifier> classifier_from_json(const nlohmann::json& parsed);

/// Shared argmax convention: highest score wins, ties go to the lowest
/// label index.
int argmax_label(const std::vector<double>& scores);

}  // namespace sepolml
