#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sepolml/embedding.hpp"
#include "sepolml/generator.hpp"
#include "sepolml/metrics.hpp"

namespace sepolml {

/// Effective settings for a run. A seed is mandatory — it fans out to every
/// stage through derive_seed, so one number pins the corpus, the walks, the
/// split, and the model training. Loaded from JSON and then overridden by
/// command-line flags before validate().
struct RunConfig {
  std::optional<std::uint64_t> seed;
  std::filesystem::path output_dir = "out";
  int examples_per_label = 41;
  double test_fraction = 0.2;
  std::vector<std::string> models = {"random_forest", "svm", "mlp"};
  Node2vecConfig embedding;      // seed field is ignored; derived from run seed
  GeneratorConfig generator;     // seed/examples_per_label overridden by run values

  /// Strict parse: unknown keys are configuration errors.
  static RunConfig from_json(const nlohmann::json& parsed, const std::string& source_name);
  static RunConfig from_json_file(const std::filesystem::path& path);

  void validate() const;  // throws ConfigError

  std::uint64_t seed_value() const;
  std::uint64_t generator_seed() const;
  std::uint64_t embedding_seed() const;
  std::uint64_t split_seed() const;
  std::uint64_t model_seed(const std::string& kind) const;
};

std::uint64_t fnv1a64(std::string_view data);
/// "fnv1a:<16 hex digits>" over the file's bytes.
std::string file_hash(const std::filesystem::path& path);

/// Records which stage produced which artifact (by content hash) so a later
/// stage can detect out-of-band edits and name the stage to re-run.
struct RunManifest {
  struct Stage {
    std::map<std::string, std::string> inputs;   // artifact name -> hash
    std::map<std::string, std::string> outputs;  // artifact name -> hash
  };

  std::string tool_version;
  std::uint64_t seed = 0;
  std::map<std::string, Stage> stages;

  static RunManifest load(const std::filesystem::path& path);  // absent file -> empty manifest
  void save(const std::filesystem::path& path) const;
};

/// Stage runner over one output directory. Stages read and write fixed
/// artifact names inside config.output_dir and keep manifest.json current.
class Pipeline {
 public:
  explicit Pipeline(RunConfig config);

  const RunConfig& config() const { return config_; }

  std::filesystem::path corpus_path() const { return config_.output_dir / "corpus.te"; }
  std::filesystem::path dataset_path() const { return config_.output_dir / "dataset.csv"; }
  std::filesystem::path instances_path() const { return config_.output_dir / "instances.json"; }
  std::filesystem::path embeddings_path() const { return config_.output_dir / "embeddings.txt"; }
  std::filesystem::path split_path() const { return config_.output_dir / "split.json"; }
  std::filesystem::path model_path(const std::string& kind) const {
    return config_.output_dir / ("model_" + kind + ".json");
  }
  std::filesystem::path metrics_path(const std::string& kind) const {
    return config_.output_dir / ("metrics_" + kind + ".json");
  }
  std::filesystem::path predictions_path(const std::string& kind) const {
    return config_.output_dir / ("predictions_" + kind + ".csv");
  }
  std::filesystem::path report_path() const { return config_.output_dir / "report.txt"; }
  std::filesystem::path manifest_path() const { return config_.output_dir / "manifest.json"; }

  void run_generate();
  void run_embed();
  void run_train();
  void run_evaluate();
  std::string run_report();  // returns the rendered report text
  void run_all();

  /// Metrics loaded back from the evaluate artifacts, keyed by model kind.
  std::map<std::string, MetricsReport> load_metrics() const;

 private:
  LabeledDataset load_labeled_dataset();
  void require_fresh(const std::string& artifact, const std::string& consumer);
  void record_stage(const std::string& stage, const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs);

  RunConfig config_;
  RunManifest manifest_;
};

/// Renders the cross-model comparison table plus the per-label recall
/// appendix; any label with recall below 0.5 is flagged.
std::string format_report(const std::vector<std::pair<std::string, MetricsReport>>& results);

struct PredictedExample {
  std::string example_id;
  int predicted = 0;
  size_t rule_count = 0;
};

/// Applies a saved model to unlabeled policy text: parses leniently, splits
/// examples at blank lines, featurizes against the given embeddings, and
/// predicts. Statement groups without rules are skipped (reported via the
/// optional warnings sink).
std::vector<PredictedExample> predict_policy_file(const std::filesystem::path& policy_path,
                                                  const std::filesystem::path& model_file,
                                                  const std::filesystem::path& embeddings_file,
                                                  std::vector<std::string>* warnings = nullptr);

}  // namespace sepolml
