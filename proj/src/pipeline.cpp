#include "sepolml/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "sepolml/dataset.hpp"
#include "sepolml/errors.hpp"
#include "sepolml/features.hpp"
#include "sepolml/graph.hpp"
#include "sepolml/model_io.hpp"
#include "sepolml/parser.hpp"
#include "sepolml/rng.hpp"
#include "sepolml/version.hpp"

namespace sepolml {

namespace {

// Stage tags for fanning the run seed out via derive_seed.
constexpr std::uint64_t kGeneratorStream = 1;
constexpr std::uint64_t kEmbeddingStream = 2;
constexpr std::uint64_t kSplitStream = 3;
constexpr std::uint64_t kModelStream = 4;

const std::set<std::string> kKnownModelKinds = {kRandomForestKind, kSvmKind, kMlpKind,
                                                kStackingKind};

void require_keys(const nlohmann::json& object, const std::set<std::string>& allowed,
                  const std::string& context) {
  for (const auto& [key, value] : object.items()) {
    if (!allowed.contains(key)) {
      throw ConfigError("unknown key '" + key + "' in " + context);
    }
  }
}

std::vector<std::pair<std::string, std::string>> string_pairs(const nlohmann::json& array,
                                                              const std::string& context) {
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& entry : array) {
    if (!entry.is_array() || entry.size() != 2 || !entry[0].is_string() ||
        !entry[1].is_string()) {
      throw ConfigError(context + " entries must be [string, string] pairs");
    }
    pairs.emplace_back(entry[0].get<std::string>(), entry[1].get<std::string>());
  }
  return pairs;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw Error("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return buffer.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error("cannot write " + path.string());
  file << text;
  if (!file) throw Error("failed writing " + path.string());
}

std::string two_decimals(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.2f", value);
  return buffer;
}

}  // namespace

RunConfig RunConfig::from_json(const nlohmann::json& parsed, const std::string& source_name) {
  if (!parsed.is_object()) throw ConfigError(source_name + " must hold a JSON object");
  require_keys(parsed,
               {"seed", "output_dir", "examples_per_label", "test_fraction", "models",
                "embedding", "generator"},
               source_name);

  RunConfig config;
  config.generator = GeneratorConfig::defaults();
  try {
    if (parsed.contains("seed")) {
      if (!parsed["seed"].is_number_unsigned()) {
        throw ConfigError("seed must be a nonnegative integer in " + source_name);
      }
      config.seed = parsed["seed"].get<std::uint64_t>();
    }
    if (parsed.contains("output_dir")) {
      config.output_dir = parsed["output_dir"].get<std::string>();
    }
    if (parsed.contains("examples_per_label")) {
      config.examples_per_label = parsed["examples_per_label"].get<int>();
    }
    if (parsed.contains("test_fraction")) {
      config.test_fraction = parsed["test_fraction"].get<double>();
    }
    if (parsed.contains("models")) {
      config.models = parsed["models"].get<std::vector<std::string>>();
    }
    if (parsed.contains("embedding")) {
      const auto& embedding = parsed["embedding"];
      require_keys(embedding,
                   {"dimensions", "walks_per_node", "walk_length", "window", "return_param",
                    "inout_param", "negative_samples", "epochs", "learning_rate"},
                   "embedding section of " + source_name);
      auto& e = config.embedding;
      if (embedding.contains("dimensions")) e.dimensions = embedding["dimensions"].get<int>();
      if (embedding.contains("walks_per_node")) {
        e.walks_per_node = embedding["walks_per_node"].get<int>();
      }
      if (embedding.contains("walk_length")) e.walk_length = embedding["walk_length"].get<int>();
      if (embedding.contains("window")) e.window = embedding["window"].get<int>();
      if (embedding.contains("return_param")) {
        e.return_param = embedding["return_param"].get<double>();
      }
      if (embedding.contains("inout_param")) e.inout_param = embedding["inout_param"].get<double>();
      if (embedding.contains("negative_samples")) {
        e.negative_samples = embedding["negative_samples"].get<int>();
      }
      if (embedding.contains("epochs")) e.epochs = embedding["epochs"].get<int>();
      if (embedding.contains("learning_rate")) {
        e.learning_rate = embedding["learning_rate"].get<double>();
      }
    }
    if (parsed.contains("generator")) {
      const auto& generator = parsed["generator"];
      require_keys(generator,
                   {"subject_domains", "sensitive_data_types", "critical_file_types",
                    "network_classes", "exclusive_role_pairs", "system_process_resources",
                    "privileged_permissions", "path_conventions"},
                   "generator section of " + source_name);
      auto& g = config.generator;
      if (generator.contains("subject_domains")) {
        g.subject_domains = generator["subject_domains"].get<std::vector<std::string>>();
      }
      if (generator.contains("sensitive_data_types")) {
        g.sensitive_data_types = generator["sensitive_data_types"].get<std::vector<std::string>>();
      }
      if (generator.contains("critical_file_types")) {
        g.critical_file_types = generator["critical_file_types"].get<std::vector<std::string>>();
      }
      if (generator.contains("network_classes")) {
        g.network_classes = generator["network_classes"].get<std::vector<std::string>>();
      }
      if (generator.contains("exclusive_role_pairs")) {
        g.exclusive_role_pairs =
            string_pairs(generator["exclusive_role_pairs"], "exclusive_role_pairs");
      }
      if (generator.contains("system_process_resources")) {
        g.system_process_resources =
            string_pairs(generator["system_process_resources"], "system_process_resources");
      }
      if (generator.contains("privileged_permissions")) {
        g.privileged_permissions =
            generator["privileged_permissions"].get<std::vector<std::string>>();
      }
      if (generator.contains("path_conventions")) {
        g.path_conventions = string_pairs(generator["path_conventions"], "path_conventions");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed value in " + source_name + ": " + e.what());
  }
  return config;
}

RunConfig RunConfig::from_json_file(const std::filesystem::path& path) {
  std::ifstream file(path);
  if (!file) throw ConfigError("cannot read config file " + path.string());
  nlohmann::json parsed;
  try {
    file >> parsed;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  return from_json(parsed, path.string());
}

void RunConfig::validate() const {
  if (!seed.has_value()) {
    throw ConfigError("a seed is required (set \"seed\" in the config file or pass --seed)");
  }
  if (examples_per_label < 1) throw ConfigError("examples_per_label must be at least 1");
  if (test_fraction <= 0.0 || test_fraction >= 1.0) {
    throw ConfigError("test_fraction must be inside (0, 1)");
  }
  if (models.empty()) throw ConfigError("at least one model kind is required");
  std::set<std::string> seen;
  for (const auto& kind : models) {
    if (!kKnownModelKinds.contains(kind)) throw ConfigError("unknown model kind '" + kind + "'");
    if (!seen.insert(kind).second) throw ConfigError("model kind '" + kind + "' listed twice");
  }
  const auto& e = embedding;
  if (e.dimensions < 2) throw ConfigError("embedding dimensions must be at least 2");
  if (e.walks_per_node < 1) throw ConfigError("walks_per_node must be at least 1");
  if (e.walk_length < 1) throw ConfigError("walk_length must be at least 1");
  if (e.window < 1) throw ConfigError("window must be at least 1");
  if (e.negative_samples < 0) throw ConfigError("negative_samples must be nonnegative");
  if (e.epochs < 1) throw ConfigError("embedding epochs must be at least 1");
  if (e.learning_rate <= 0.0) throw ConfigError("embedding learning_rate must be positive");
  if (e.return_param <= 0.0 || e.inout_param <= 0.0) {
    throw ConfigError("walk bias parameters must be positive");
  }
  generator.validate();
}

std::uint64_t RunConfig::seed_value() const {
  if (!seed.has_value()) {
    throw ConfigError("a seed is required (set \"seed\" in the config file or pass --seed)");
  }
  return *seed;
}

std::uint64_t RunConfig::generator_seed() const {
  return derive_seed(seed_value(), kGeneratorStream);
}
std::uint64_t RunConfig::embedding_seed() const {
  return derive_seed(seed_value(), kEmbeddingStream);
}
std::uint64_t RunConfig::split_seed() const { return derive_seed(seed_value(), kSplitStream); }
std::uint64_t RunConfig::model_seed(const std::string& kind) const {
  return derive_seed(seed_value(), kModelStream, fnv1a64(kind));
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char byte : data) {
    hash ^= byte;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string file_hash(const std::filesystem::path& path) {
  const std::string bytes = read_text_file(path);
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "fnv1a:%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return buffer;
}

RunManifest RunManifest::load(const std::filesystem::path& path) {
  RunManifest manifest;
  manifest.tool_version = kToolVersion;
  std::ifstream file(path);
  if (!file) return manifest;
  nlohmann::json parsed;
  try {
    file >> parsed;
    manifest.tool_version = parsed.at("tool_version").get<std::string>();
    manifest.seed = parsed.at("seed").get<std::uint64_t>();
    for (const auto& [name, stage_json] : parsed.at("stages").items()) {
      Stage stage;
      stage.inputs = stage_json.at("inputs").get<std::map<std::string, std::string>>();
      stage.outputs = stage_json.at("outputs").get<std::map<std::string, std::string>>();
      manifest.stages.emplace(name, std::move(stage));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed manifest " + path.string() + ": " + e.what());
  }
  return manifest;
}

void RunManifest::save(const std::filesystem::path& path) const {
  nlohmann::ordered_json out;
  out["format"] = "sepolml-manifest";
  out["tool_version"] = tool_version;
  out["seed"] = seed;
  out["stages"] = nlohmann::ordered_json::object();
  for (const auto& [name, stage] : stages) {
    out["stages"][name] = {{"inputs", stage.inputs}, {"outputs", stage.outputs}};
  }
  write_text_file(path, out.dump(2) + "\n");
}

Pipeline::Pipeline(RunConfig config) : config_(std::move(config)) {
  config_.validate();
  manifest_ = RunManifest::load(manifest_path());
  manifest_.tool_version = kToolVersion;
  manifest_.seed = config_.seed_value();
}

void Pipeline::require_fresh(const std::string& artifact, const std::string& consumer) {
  for (const auto& [producer, stage] : manifest_.stages) {
    const auto it = stage.outputs.find(artifact);
    if (it == stage.outputs.end()) continue;
    const auto path = config_.output_dir / artifact;
    if (!std::filesystem::exists(path)) {
      throw Error(artifact + " is missing; re-run '" + producer + "' before '" + consumer + "'");
    }
    if (file_hash(path) != it->second) {
      throw Error(artifact + " has changed since '" + producer + "' wrote it; re-run '" +
                  producer + "' before '" + consumer + "'");
    }
    return;
  }
  // Untracked artifacts (hand-supplied inputs) skip the freshness check.
}

void Pipeline::record_stage(const std::string& stage_name, const std::vector<std::string>& inputs,
                            const std::vector<std::string>& outputs) {
  RunManifest::Stage stage;
  for (const auto& name : inputs) stage.inputs[name] = file_hash(config_.output_dir / name);
  for (const auto& name : outputs) stage.outputs[name] = file_hash(config_.output_dir / name);
  manifest_.stages[stage_name] = std::move(stage);
  manifest_.save(manifest_path());
}

void Pipeline::run_generate() {
  std::filesystem::create_directories(config_.output_dir);
  GeneratorConfig generator = config_.generator;
  generator.seed = config_.generator_seed();
  generator.examples_per_label = config_.examples_per_label;
  const LabeledDataset dataset = generate_dataset(generator);

  write_text_file(corpus_path(), corpus_policy_text(dataset));
  write_dataset_csv(dataset, dataset_path());
  write_instance_names(dataset, instances_path());
  record_stage("generate", {}, {"corpus.te", "dataset.csv", "instances.json"});
}

void Pipeline::run_embed() {
  std::filesystem::create_directories(config_.output_dir);
  require_fresh("corpus.te", "embed");
  const std::string corpus_text = read_text_file(corpus_path());
  const PolicyDocument doc =
      parse_document(corpus_text, ParseMode::Lenient, corpus_path().string());
  const PolicyGraph graph = build_graph(doc);

  Node2vecConfig embedding = config_.embedding;
  embedding.seed = config_.embedding_seed();
  const NodeEmbeddings embeddings = train_node_embeddings(graph, embedding);
  embeddings.save(embeddings_path());
  record_stage("embed", {"corpus.te"}, {"embeddings.txt"});
}

LabeledDataset Pipeline::load_labeled_dataset() {
  LabeledDataset dataset = read_dataset_csv(dataset_path());
  if (std::filesystem::exists(instances_path())) {
    read_instance_names(dataset, instances_path());
  }
  return dataset;
}

void Pipeline::run_train() {
  require_fresh("dataset.csv", "train");
  require_fresh("instances.json", "train");
  require_fresh("embeddings.txt", "train");
  const LabeledDataset dataset = load_labeled_dataset();
  const NodeEmbeddings embeddings = NodeEmbeddings::load(embeddings_path());
  const SplitIndices split =
      stratified_split(dataset, config_.test_fraction, config_.split_seed());

  LabeledDataset train_subset;
  for (size_t index : split.train) train_subset.examples.push_back(dataset.examples[index]);
  const FeatureSpec spec =
      FeatureSpec::from_dataset(train_subset, embeddings.dimensions());
  const FeatureMatrix train = featurize_dataset(train_subset, embeddings, spec);

  nlohmann::ordered_json split_json;
  split_json["format"] = "sepolml-split";
  split_json["test_fraction"] = config_.test_fraction;
  split_json["train"] = nlohmann::ordered_json::array();
  split_json["test"] = nlohmann::ordered_json::array();
  for (size_t index : split.train) {
    split_json["train"].push_back(dataset.examples[index].example_id);
  }
  for (size_t index : split.test) split_json["test"].push_back(dataset.examples[index].example_id);
  write_text_file(split_path(), split_json.dump(2) + "\n");

  std::vector<std::string> outputs = {"split.json"};
  for (const auto& kind : config_.models) {
    auto model = make_classifier(kind, config_.model_seed(kind), kViolationLabelCount);
    model->fit(train.rows, train.labels);
    ModelBundle bundle;
    bundle.model = std::move(model);
    bundle.feature_spec = spec;
    bundle.label_count = kViolationLabelCount;
    save_model(bundle, model_path(kind));
    outputs.push_back(model_path(kind).filename().string());
  }
  record_stage("train", {"dataset.csv", "instances.json", "embeddings.txt"}, outputs);
}

void Pipeline::run_evaluate() {
  require_fresh("dataset.csv", "evaluate");
  require_fresh("instances.json", "evaluate");
  require_fresh("embeddings.txt", "evaluate");
  require_fresh("split.json", "evaluate");
  const LabeledDataset dataset = load_labeled_dataset();
  const NodeEmbeddings embeddings = NodeEmbeddings::load(embeddings_path());

  nlohmann::json split_json;
  {
    std::ifstream file(split_path());
    if (!file) throw Error("cannot read split file " + split_path().string());
    try {
      file >> split_json;
    } catch (const nlohmann::json::exception& e) {
      throw Error("malformed split file: " + std::string(e.what()));
    }
  }
  std::map<std::string, size_t> index_of;
  for (size_t i = 0; i < dataset.examples.size(); ++i) {
    index_of[dataset.examples[i].example_id] = i;
  }
  LabeledDataset test_subset;
  try {
    for (const auto& id_json : split_json.at("test")) {
      const std::string id = id_json.get<std::string>();
      const auto it = index_of.find(id);
      if (it == index_of.end()) {
        throw Error("split names example '" + id + "' absent from the dataset");
      }
      test_subset.examples.push_back(dataset.examples[it->second]);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed split file: " + std::string(e.what()));
  }
  if (test_subset.examples.empty()) throw Error("split file lists no test examples");

  std::vector<std::string> inputs = {"dataset.csv", "instances.json", "embeddings.txt",
                                     "split.json"};
  std::vector<std::string> outputs;
  for (const auto& kind : config_.models) {
    require_fresh(model_path(kind).filename().string(), "evaluate");
    const ModelBundle bundle = load_model(model_path(kind));
    if (bundle.feature_spec.embedding_dimensions != embeddings.dimensions()) {
      throw DimensionMismatchError(
          static_cast<size_t>(bundle.feature_spec.embedding_dimensions),
          static_cast<size_t>(embeddings.dimensions()));
    }
    const FeatureMatrix test = featurize_dataset(test_subset, embeddings, bundle.feature_spec);
    const std::vector<int> predictions = bundle.model->predict(test.rows);
    const MetricsReport report =
        compute_metrics(test.labels, predictions, bundle.label_count);
    write_text_file(metrics_path(kind), metrics_to_json(report).dump(2) + "\n");

    std::string csv = "example_id,true_class,predicted_class\n";
    for (size_t i = 0; i < predictions.size(); ++i) {
      csv += test.example_ids[i] + "," + std::to_string(test.labels[i]) + "," +
             std::to_string(predictions[i]) + "\n";
    }
    write_text_file(predictions_path(kind), csv);
    inputs.push_back(model_path(kind).filename().string());
    outputs.push_back(metrics_path(kind).filename().string());
    outputs.push_back(predictions_path(kind).filename().string());
  }
  record_stage("evaluate", inputs, outputs);
}

std::map<std::string, MetricsReport> Pipeline::load_metrics() const {
  std::map<std::string, MetricsReport> results;
  for (const auto& kind : config_.models) {
    std::ifstream file(metrics_path(kind));
    if (!file) throw Error("cannot read metrics file " + metrics_path(kind).string());
    nlohmann::json parsed;
    try {
      file >> parsed;
    } catch (const nlohmann::json::exception& e) {
      throw Error("malformed metrics file: " + std::string(e.what()));
    }
    results.emplace(kind, metrics_from_json(parsed));
  }
  return results;
}

std::string Pipeline::run_report() {
  std::vector<std::string> inputs;
  std::vector<std::pair<std::string, MetricsReport>> results;
  for (const auto& kind : config_.models) {
    require_fresh(metrics_path(kind).filename().string(), "report");
    inputs.push_back(metrics_path(kind).filename().string());
  }
  const auto loaded = load_metrics();
  for (const auto& kind : config_.models) results.emplace_back(kind, loaded.at(kind));

  const std::string text = format_report(results);
  write_text_file(report_path(), text);
  record_stage("report", inputs, {"report.txt"});
  return text;
}

void Pipeline::run_all() {
  run_generate();
  run_embed();
  run_train();
  run_evaluate();
  run_report();
}

std::string format_report(const std::vector<std::pair<std::string, MetricsReport>>& results) {
  std::ostringstream out;
  out << "Model          | Accuracy | Macro Avg (P/R/F1) | Weighted Avg (P/R/F1)\n";
  out << "---------------|----------|--------------------|----------------------\n";
  for (const auto& [kind, report] : results) {
    char line[160];
    std::snprintf(line, sizeof(line), "%-14s |     %s | %s / %s / %s | %s / %s / %s\n",
                  kind.c_str(), two_decimals(report.accuracy).c_str(),
                  two_decimals(report.macro_precision).c_str(),
                  two_decimals(report.macro_recall).c_str(),
                  two_decimals(report.macro_f1).c_str(),
                  two_decimals(report.weighted_precision).c_str(),
                  two_decimals(report.weighted_recall).c_str(),
                  two_decimals(report.weighted_f1).c_str());
    out << line;
  }

  for (const auto& [kind, report] : results) {
    out << "\nPer-label recall — " << kind << ":\n";
    for (size_t label = 0; label < report.per_label.size(); ++label) {
      const auto& m = report.per_label[label];
      std::string description = "label " + std::to_string(label);
      if (report.per_label.size() == static_cast<size_t>(kViolationLabelCount)) {
        description = violation_label_description(static_cast<int>(label));
      }
      char line[160];
      std::snprintf(line, sizeof(line), "  %2zu  %-66s %s", label,
                    description.substr(0, 66).c_str(), two_decimals(m.recall).c_str());
      out << line;
      if (m.support > 0 && m.recall < 0.5) out << "  [LOW RECALL]";
      out << "\n";
    }
  }
  return out.str();
}

std::vector<PredictedExample> predict_policy_file(const std::filesystem::path& policy_path,
                                                  const std::filesystem::path& model_file,
                                                  const std::filesystem::path& embeddings_file,
                                                  std::vector<std::string>* warnings) {
  const ModelBundle bundle = load_model(model_file);
  const NodeEmbeddings embeddings = NodeEmbeddings::load(embeddings_file);
  if (embeddings.dimensions() != bundle.feature_spec.embedding_dimensions) {
    throw DimensionMismatchError(static_cast<size_t>(bundle.feature_spec.embedding_dimensions),
                                 static_cast<size_t>(embeddings.dimensions()));
  }

  const std::string text = read_text_file(policy_path);
  const PolicyDocument doc = parse_document(text, ParseMode::Lenient, policy_path.string());
  std::vector<PredictedExample> predictions;
  for (const auto& example : split_into_examples(doc)) {
    if (example.rules.empty()) {
      if (warnings != nullptr) {
        warnings->push_back("group '" + example.example_id +
                            "' holds declarations only; skipped");
      }
      continue;
    }
    const FeatureRow row = featurize_example(example, embeddings, bundle.feature_spec);
    PredictedExample prediction;
    prediction.example_id = example.example_id;
    prediction.predicted = bundle.model->predict_one(row);
    prediction.rule_count = example.rules.size();
    predictions.push_back(std::move(prediction));
  }
  return predictions;
}

}  // namespace sepolml
