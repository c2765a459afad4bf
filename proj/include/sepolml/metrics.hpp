#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "json.hpp"

namespace sepolml {

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  size_t support = 0;
};

/// Confusion convention: confusion[true_label][predicted_label]. All ratios
/// define 0/0 as 0. Macro averages run over labels with nonzero support;
/// weighted averages weight every label by its support, which makes
/// weighted recall identically equal to accuracy.
struct MetricsReport {
  std::vector<std::vector<size_t>> confusion;
  std::vector<ClassMetrics> per_label;
  double accuracy = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  double weighted_precision = 0.0;
  double weighted_recall = 0.0;
  double weighted_f1 = 0.0;
  size_t total = 0;
};

MetricsReport metrics_from_confusion(const std::vector<std::vector<size_t>>& confusion);

/// Builds the confusion matrix from parallel truth/prediction vectors;
/// labels must lie in [0, label_count).
MetricsReport compute_metrics(const std::vector<int>& truth, const std::vector<int>& predicted,
                              int label_count);

nlohmann::ordered_json metrics_to_json(const MetricsReport& report);
MetricsReport metrics_from_json(const nlohmann::json& parsed);

}  // namespace sepolml
