#include "sepolml/metrics.hpp"

#include "sepolml/errors.hpp"

namespace sepolml {

namespace {

double ratio(double numerator, double denominator) {
  return denominator == 0.0 ? 0.0 : numerator / denominator;
}

}  // namespace

MetricsReport metrics_from_confusion(const std::vector<std::vector<size_t>>& confusion) {
  const size_t k = confusion.size();
  for (const auto& row : confusion) {
    if (row.size() != k) throw Error("confusion matrix must be square");
  }

  MetricsReport report;
  report.confusion = confusion;
  report.per_label.resize(k);

  std::vector<size_t> row_sums(k, 0);
  std::vector<size_t> column_sums(k, 0);
  size_t diagonal = 0;
  for (size_t t = 0; t < k; ++t) {
    for (size_t p = 0; p < k; ++p) {
      row_sums[t] += confusion[t][p];
      column_sums[p] += confusion[t][p];
      report.total += confusion[t][p];
    }
    diagonal += confusion[t][t];
  }
  report.accuracy = ratio(static_cast<double>(diagonal), static_cast<double>(report.total));

  size_t supported_labels = 0;
  for (size_t label = 0; label < k; ++label) {
    ClassMetrics& m = report.per_label[label];
    m.support = row_sums[label];
    const double tp = static_cast<double>(confusion[label][label]);
    m.precision = ratio(tp, static_cast<double>(column_sums[label]));
    m.recall = ratio(tp, static_cast<double>(row_sums[label]));
    m.f1 = ratio(2.0 * m.precision * m.recall, m.precision + m.recall);

    if (m.support > 0) {
      ++supported_labels;
      report.macro_precision += m.precision;
      report.macro_recall += m.recall;
      report.macro_f1 += m.f1;
      const double weight = static_cast<double>(m.support);
      report.weighted_precision += weight * m.precision;
      report.weighted_recall += weight * m.recall;
      report.weighted_f1 += weight * m.f1;
    }
  }
  if (supported_labels > 0) {
    report.macro_precision /= static_cast<double>(supported_labels);
    report.macro_recall /= static_cast<double>(supported_labels);
    report.macro_f1 /= static_cast<double>(supported_labels);
  }
  if (report.total > 0) {
    report.weighted_precision /= static_cast<double>(report.total);
    report.weighted_recall /= static_cast<double>(report.total);
    report.weighted_f1 /= static_cast<double>(report.total);
  }
  return report;
}

MetricsReport compute_metrics(const std::vector<int>& truth, const std::vector<int>& predicted,
                              int label_count) {
  if (truth.size() != predicted.size()) {
    throw Error("truth and prediction vectors differ in length");
  }
  if (label_count <= 0) throw Error("label count must be positive");
  std::vector<std::vector<size_t>> confusion(
      static_cast<size_t>(label_count), std::vector<size_t>(static_cast<size_t>(label_count), 0));
  for (size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] >= label_count || predicted[i] < 0 ||
        predicted[i] >= label_count) {
      throw Error("label outside [0, " + std::to_string(label_count) + ") at row " +
                  std::to_string(i));
    }
    ++confusion[static_cast<size_t>(truth[i])][static_cast<size_t>(predicted[i])];
  }
  return metrics_from_confusion(confusion);
}

nlohmann::ordered_json metrics_to_json(const MetricsReport& report) {
  nlohmann::ordered_json out;
  out["total"] = report.total;
  out["accuracy"] = report.accuracy;
  out["macro"] = {{"precision", report.macro_precision},
                  {"recall", report.macro_recall},
                  {"f1", report.macro_f1}};
  out["weighted"] = {{"precision", report.weighted_precision},
                     {"recall", report.weighted_recall},
                     {"f1", report.weighted_f1}};
  out["per_label"] = nlohmann::ordered_json::array();
  for (const auto& m : report.per_label) {
    out["per_label"].push_back({{"precision", m.precision},
                                {"recall", m.recall},
                                {"f1", m.f1},
                                {"support", m.support}});
  }
  out["confusion"] = report.confusion;
  return out;
}

MetricsReport metrics_from_json(const nlohmann::json& parsed) {
  try {
    std::vector<std::vector<size_t>> confusion =
        parsed.at("confusion").get<std::vector<std::vector<size_t>>>();
    return metrics_from_confusion(confusion);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed metrics JSON: ") + e.what());
  }
}

}  // namespace sepolml
