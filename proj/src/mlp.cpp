#include "sepolml/mlp.hpp"

#include <algorithm>
#include <cmath>

#include "sepolml/errors.hpp"
#include "sepolml/rng.hpp"

namespace sepolml {

namespace {

/// log(sum(exp(z))) and the stabilizing max, reused by loss and gradients.
std::pair<double, double> log_sum_exp(const std::vector<double>& logits) {
  const double peak = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - peak);
  return {std::log(sum), peak};
}

}  // namespace

MlpNetwork::MlpNetwork(int input_units, int hidden_units, int output_units, std::uint64_t seed)
    : input_units_(input_units), hidden_units_(hidden_units), output_units_(output_units) {
  if (input_units < 1 || hidden_units < 1 || output_units < 2) {
    throw ConfigError("mlp layer sizes must be positive with at least two outputs");
  }
  w1_.resize(static_cast<size_t>(hidden_units) * static_cast<size_t>(input_units));
  b1_.assign(static_cast<size_t>(hidden_units), 0.0);
  w2_.resize(static_cast<size_t>(output_units) * static_cast<size_t>(hidden_units));
  b2_.assign(static_cast<size_t>(output_units), 0.0);

  Rng rng(seed);
  const double limit1 = std::sqrt(6.0 / static_cast<double>(input_units + hidden_units));
  for (auto& weight : w1_) weight = rng.range(-limit1, limit1);
  const double limit2 = std::sqrt(6.0 / static_cast<double>(hidden_units + output_units));
  for (auto& weight : w2_) weight = rng.range(-limit2, limit2);
}

void MlpNetwork::forward(const FeatureRow& row, std::vector<double>& hidden_pre,
                         std::vector<double>& hidden, std::vector<double>& logits) const {
  if (row.size() != static_cast<size_t>(input_units_)) {
    throw DimensionMismatchError(static_cast<size_t>(input_units_), row.size());
  }
  hidden_pre.assign(static_cast<size_t>(hidden_units_), 0.0);
  for (int h = 0; h < hidden_units_; ++h) {
    double sum = b1_[static_cast<size_t>(h)];
    const size_t base = static_cast<size_t>(h) * static_cast<size_t>(input_units_);
    for (int i = 0; i < input_units_; ++i) {
      sum += w1_[base + static_cast<size_t>(i)] * row[static_cast<size_t>(i)];
    }
    hidden_pre[static_cast<size_t>(h)] = sum;
  }
  hidden = hidden_pre;
  for (auto& value : hidden) value = std::max(value, 0.0);

  logits.assign(static_cast<size_t>(output_units_), 0.0);
  for (int o = 0; o < output_units_; ++o) {
    double sum = b2_[static_cast<size_t>(o)];
    const size_t base = static_cast<size_t>(o) * static_cast<size_t>(hidden_units_);
    for (int h = 0; h < hidden_units_; ++h) {
      sum += w2_[base + static_cast<size_t>(h)] * hidden[static_cast<size_t>(h)];
    }
    logits[static_cast<size_t>(o)] = sum;
  }
}

std::vector<double> MlpNetwork::probabilities(const FeatureRow& row) const {
  std::vector<double> hidden_pre;
  std::vector<double> hidden;
  std::vector<double> logits;
  forward(row, hidden_pre, hidden, logits);
  const auto [lse, peak] = log_sum_exp(logits);
  std::vector<double> probs(logits.size());
  for (size_t o = 0; o < logits.size(); ++o) probs[o] = std::exp(logits[o] - peak - lse);
  return probs;
}

double MlpNetwork::mean_loss(const FeatureRows& rows, const std::vector<int>& labels) const {
  if (rows.empty() || rows.size() != labels.size()) {
    throw Error("mlp loss needs matching, nonempty rows and labels");
  }
  std::vector<double> hidden_pre;
  std::vector<double> hidden;
  std::vector<double> logits;
  double total = 0.0;
  for (size_t i = 0; i < rows.size(); ++i) {
    forward(rows[i], hidden_pre, hidden, logits);
    const auto [lse, peak] = log_sum_exp(logits);
    total += (lse + peak) - logits[static_cast<size_t>(labels[i])];
  }
  return total / static_cast<double>(rows.size());
}

MlpNetwork::Gradients MlpNetwork::gradients(const FeatureRows& rows,
                                            const std::vector<int>& labels) const {
  if (rows.empty() || rows.size() != labels.size()) {
    throw Error("mlp gradients need matching, nonempty rows and labels");
  }
  Gradients grads;
  grads.w1.assign(w1_.size(), 0.0);
  grads.b1.assign(b1_.size(), 0.0);
  grads.w2.assign(w2_.size(), 0.0);
  grads.b2.assign(b2_.size(), 0.0);

  std::vector<double> hidden_pre;
  std::vector<double> hidden;
  std::vector<double> logits;
  std::vector<double> delta_hidden(static_cast<size_t>(hidden_units_));
  for (size_t i = 0; i < rows.size(); ++i) {
    forward(rows[i], hidden_pre, hidden, logits);
    const auto [lse, peak] = log_sum_exp(logits);

    // d(loss)/d(logit_o) = softmax_o - 1[o == label]
    for (int o = 0; o < output_units_; ++o) {
      double delta = std::exp(logits[static_cast<size_t>(o)] - peak - lse);
      if (o == labels[i]) delta -= 1.0;
      grads.b2[static_cast<size_t>(o)] += delta;
      const size_t base = static_cast<size_t>(o) * static_cast<size_t>(hidden_units_);
      for (int h = 0; h < hidden_units_; ++h) {
        grads.w2[base + static_cast<size_t>(h)] += delta * hidden[static_cast<size_t>(h)];
      }
    }

    for (int h = 0; h < hidden_units_; ++h) {
      if (hidden_pre[static_cast<size_t>(h)] <= 0.0) {
        delta_hidden[static_cast<size_t>(h)] = 0.0;
        continue;
      }
      double sum = 0.0;
      for (int o = 0; o < output_units_; ++o) {
        double delta = std::exp(logits[static_cast<size_t>(o)] - peak - lse);
        if (o == labels[i]) delta -= 1.0;
        sum += delta * w2_[static_cast<size_t>(o) * static_cast<size_t>(hidden_units_) +
                           static_cast<size_t>(h)];
      }
      delta_hidden[static_cast<size_t>(h)] = sum;
    }

    for (int h = 0; h < hidden_units_; ++h) {
      const double delta = delta_hidden[static_cast<size_t>(h)];
      if (delta == 0.0) continue;
      grads.b1[static_cast<size_t>(h)] += delta;
      const size_t base = static_cast<size_t>(h) * static_cast<size_t>(input_units_);
      for (int in = 0; in < input_units_; ++in) {
        grads.w1[base + static_cast<size_t>(in)] += delta * rows[i][static_cast<size_t>(in)];
      }
    }
  }

  const double scale = 1.0 / static_cast<double>(rows.size());
  for (auto* block : {&grads.w1, &grads.b1, &grads.w2, &grads.b2}) {
    for (auto& value : *block) value *= scale;
  }
  return grads;
}

nlohmann::ordered_json MlpNetwork::to_json() const {
  nlohmann::ordered_json out;
  out["input_units"] = input_units_;
  out["hidden_units"] = hidden_units_;
  out["output_units"] = output_units_;
  out["w1"] = w1_;
  out["b1"] = b1_;
  out["w2"] = w2_;
  out["b2"] = b2_;
  return out;
}

MlpNetwork MlpNetwork::from_json(const nlohmann::json& parsed) {
  MlpNetwork network;
  try {
    network.input_units_ = parsed.at("input_units").get<int>();
    network.hidden_units_ = parsed.at("hidden_units").get<int>();
    network.output_units_ = parsed.at("output_units").get<int>();
    network.w1_ = parsed.at("w1").get<std::vector<double>>();
    network.b1_ = parsed.at("b1").get<std::vector<double>>();
    network.w2_ = parsed.at("w2").get<std::vector<double>>();
    network.b2_ = parsed.at("b2").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed mlp JSON: ") + e.what());
  }
  const size_t w1_expected =
      static_cast<size_t>(network.hidden_units_) * static_cast<size_t>(network.input_units_);
  const size_t w2_expected =
      static_cast<size_t>(network.output_units_) * static_cast<size_t>(network.hidden_units_);
  if (network.w1_.size() != w1_expected || network.w2_.size() != w2_expected ||
      network.b1_.size() != static_cast<size_t>(network.hidden_units_) ||
      network.b2_.size() != static_cast<size_t>(network.output_units_)) {
    throw Error("mlp JSON layer sizes disagree with weight array lengths");
  }
  return network;
}

MlpClassifier::MlpClassifier(MlpConfig config, std::uint64_t seed, int label_count)
    : config_(config), seed_(seed), label_count_(label_count) {
  if (config_.hidden_units < 1) throw ConfigError("mlp needs at least one hidden unit");
  if (config_.epochs < 1) throw ConfigError("mlp needs at least one epoch");
  if (config_.batch_size < 1) throw ConfigError("mlp batch size must be positive");
  if (label_count_ < 2) throw ConfigError("mlp needs at least two labels");
}

void MlpClassifier::fit(const FeatureRows& rows, const std::vector<int>& labels) {
  if (rows.empty()) throw Error("cannot fit an mlp on an empty training set");
  if (rows.size() != labels.size()) throw Error("rows and labels differ in length");
  standardizer_.fit(rows);
  const FeatureRows scaled = standardizer_.transform(rows);
  const int input_units = static_cast<int>(scaled.front().size());

  network_ = MlpNetwork(input_units, config_.hidden_units, label_count_, derive_seed(seed_, 0));
  MlpNetwork::Gradients velocity;
  velocity.w1.assign(static_cast<size_t>(config_.hidden_units) *
                         static_cast<size_t>(input_units), 0.0);
  velocity.b1.assign(static_cast<size_t>(config_.hidden_units), 0.0);
  velocity.w2.assign(static_cast<size_t>(label_count_) *
                         static_cast<size_t>(config_.hidden_units), 0.0);
  velocity.b2.assign(static_cast<size_t>(label_count_), 0.0);

  Rng rng(derive_seed(seed_, 1));
  std::vector<size_t> order(scaled.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  FeatureRows batch_rows;
  std::vector<int> batch_labels;
  const size_t batch_size = static_cast<size_t>(config_.batch_size);
  for (int epoch = 0; epoch < config_.epochs; ++epoch) {
    rng.shuffle(order);
    for (size_t start = 0; start < order.size(); start += batch_size) {
      const size_t end = std::min(start + batch_size, order.size());
      batch_rows.clear();
      batch_labels.clear();
      for (size_t i = start; i < end; ++i) {
        batch_rows.push_back(scaled[order[i]]);
        batch_labels.push_back(labels[order[i]]);
      }
      const auto grads = network_.gradients(batch_rows, batch_labels);
      const auto params = network_.parameter_blocks();
      const std::array<const std::vector<double>*, 4> grad_blocks = {&grads.w1, &grads.b1,
                                                                     &grads.w2, &grads.b2};
      std::array<std::vector<double>*, 4> velocity_blocks = {&velocity.w1, &velocity.b1,
                                                             &velocity.w2, &velocity.b2};
      for (size_t block = 0; block < params.size(); ++block) {
        auto& param = *params[block];
        auto& vel = *velocity_blocks[block];
        const auto& grad = *grad_blocks[block];
        for (size_t j = 0; j < param.size(); ++j) {
          vel[j] = config_.momentum * vel[j] - config_.learning_rate * grad[j];
          param[j] += vel[j];
        }
      }
    }
    const double loss = network_.mean_loss(scaled, labels);
    if (!std::isfinite(loss)) {
      throw NonFiniteLossError("epoch " + std::to_string(epoch) + " of mlp training");
    }
  }
}

std::vector<double> MlpClassifier::probabilities(const FeatureRow& row) const {
  if (network_.input_units() == 0) throw Error("mlp used before fitting");
  return network_.probabilities(standardizer_.transform(row));
}

int MlpClassifier::predict_one(const FeatureRow& row) const {
  return argmax_label(probabilities(row));
}

nlohmann::ordered_json MlpClassifier::to_json() const {
  nlohmann::ordered_json out;
  out["kind"] = kind();
  out["label_count"] = label_count_;
  out["seed"] = seed_;
  out["config"] = {{"hidden_units", config_.hidden_units},
                   {"epochs", config_.epochs},
                   {"batch_size", config_.batch_size},
                   {"learning_rate", config_.learning_rate},
                   {"momentum", config_.momentum}};
  out["standardizer"] = standardizer_.to_json();
  out["network"] = network_.to_json();
  return out;
}

std::unique_ptr<Classifier> MlpClassifier::from_json(const nlohmann::json& parsed) {
  try {
    MlpConfig config;
    config.hidden_units = parsed.at("config").at("hidden_units").get<int>();
    config.epochs = parsed.at("config").at("epochs").get<int>();
    config.batch_size = parsed.at("config").at("batch_size").get<int>();
    config.learning_rate = parsed.at("config").at("learning_rate").get<double>();
    config.momentum = parsed.at("config").at("momentum").get<double>();
    auto model = std::make_unique<MlpClassifier>(config, parsed.at("seed").get<std::uint64_t>(),
                                                 parsed.at("label_count").get<int>());
    model->standardizer_ = Standardizer::from_json(parsed.at("standardizer"));
    model->network_ = MlpNetwork::from_json(parsed.at("network"));
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed mlp JSON: ") + e.what());
  }
}

}  // namespace sepolml
