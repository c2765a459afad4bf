#include "sepolml/svm.hpp"

#include "sepolml/errors.hpp"
#include "sepolml/rng.hpp"

namespace sepolml {

LinearSvmClassifier::LinearSvmClassifier(LinearSvmConfig config, std::uint64_t seed,
                                         int label_count)
    : config_(config), seed_(seed), label_count_(label_count) {
  if (config_.regularization <= 0.0) throw ConfigError("svm regularization must be positive");
  if (config_.epochs < 1) throw ConfigError("svm needs at least one epoch");
  if (label_count_ < 2) throw ConfigError("svm needs at least two labels");
}

void LinearSvmClassifier::fit(const FeatureRows& rows, const std::vector<int>& labels) {
  if (rows.empty()) throw Error("cannot fit an svm on an empty training set");
  if (rows.size() != labels.size()) throw Error("rows and labels differ in length");
  standardizer_.fit(rows);
  const FeatureRows scaled = standardizer_.transform(rows);
  const size_t dim = scaled.front().size();
  const double lambda = config_.regularization;

  weights_.assign(static_cast<size_t>(label_count_), std::vector<double>(dim + 1, 0.0));
  for (int cls = 0; cls < label_count_; ++cls) {
    auto& w = weights_[static_cast<size_t>(cls)];
    std::vector<size_t> order(scaled.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(derive_seed(seed_, static_cast<std::uint64_t>(cls)));
    std::uint64_t t = 0;
    for (int epoch = 0; epoch < config_.epochs; ++epoch) {
      rng.shuffle(order);
      for (size_t index : order) {
        ++t;
        const double eta = 1.0 / (lambda * static_cast<double>(t));
        const auto& x = scaled[index];
        const double y = labels[index] == cls ? 1.0 : -1.0;
        double margin = w[dim];  // bias via implicit constant feature
        for (size_t j = 0; j < dim; ++j) margin += w[j] * x[j];

        const double shrink = 1.0 - eta * lambda;
        for (auto& value : w) value *= shrink;
        if (y * margin < 1.0) {
          for (size_t j = 0; j < dim; ++j) w[j] += eta * y * x[j];
          w[dim] += eta * y;
        }
      }
    }
  }
}

std::vector<double> LinearSvmClassifier::decision_values(const FeatureRow& row) const {
  if (weights_.empty()) throw Error("svm used before fitting");
  const FeatureRow scaled = standardizer_.transform(row);
  std::vector<double> margins(static_cast<size_t>(label_count_), 0.0);
  for (int cls = 0; cls < label_count_; ++cls) {
    const auto& w = weights_[static_cast<size_t>(cls)];
    double margin = w[scaled.size()];
    for (size_t j = 0; j < scaled.size(); ++j) margin += w[j] * scaled[j];
    margins[static_cast<size_t>(cls)] = margin;
  }
  return margins;
}

int LinearSvmClassifier::predict_one(const FeatureRow& row) const {
  return argmax_label(decision_values(row));
}

nlohmann::ordered_json LinearSvmClassifier::to_json() const {
  nlohmann::ordered_json out;
  out["kind"] = kind();
  out["label_count"] = label_count_;
  out["seed"] = seed_;
  out["config"] = {{"regularization", config_.regularization}, {"epochs", config_.epochs}};
  out["standardizer"] = standardizer_.to_json();
  out["weights"] = weights_;
  return out;
}

std::unique_ptr<Classifier> LinearSvmClassifier::from_json(const nlohmann::json& parsed) {
  try {
    LinearSvmConfig config;
    config.regularization = parsed.at("config").at("regularization").get<double>();
    config.epochs = parsed.at("config").at("epochs").get<int>();
    auto model = std::make_unique<LinearSvmClassifier>(
        config, parsed.at("seed").get<std::uint64_t>(), parsed.at("label_count").get<int>());
    model->standardizer_ = Standardizer::from_json(parsed.at("standardizer"));
    model->weights_ = parsed.at("weights").get<std::vector<std::vector<double>>>();
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed svm JSON: ") + e.what());
  }
}

}  // namespace sepolml
