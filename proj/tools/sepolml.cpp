// Command-line front end: policy parsing/graphing utilities plus the staged
// corpus -> embeddings -> models -> report pipeline.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sepolml/dataset.hpp"
#include "sepolml/errors.hpp"
#include "sepolml/graph.hpp"
#include "sepolml/parser.hpp"
#include "sepolml/pipeline.hpp"
#include "sepolml/version.hpp"

namespace {

using namespace sepolml;

std::string read_text_file(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw Error("cannot read " + path);
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return buffer.str();
}

// Command-line values layered on top of the (optional) config file.
struct RunOverrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir;
  std::optional<int> examples_per_label;
  std::optional<double> test_fraction;
  std::vector<std::string> models;
  std::optional<int> dimensions;
  std::optional<int> walks_per_node;
  std::optional<int> walk_length;
  std::optional<int> window;
  std::optional<double> return_param;
  std::optional<double> inout_param;
  std::optional<int> negative_samples;
  std::optional<int> embed_epochs;
  std::optional<double> embed_learning_rate;
};

void add_run_options(CLI::App* cmd, RunOverrides& overrides) {
  cmd->add_option("--config", overrides.config_path, "JSON run configuration file")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", overrides.seed, "Run seed (required here or in the config)");
  cmd->add_option("--output-dir", overrides.output_dir, "Artifact directory (default: out)");
  cmd->add_option("--examples-per-label", overrides.examples_per_label,
                  "Examples generated per violation class");
  cmd->add_option("--test-fraction", overrides.test_fraction,
                  "Held-out fraction per class, inside (0, 1)");
  cmd->add_option("--models", overrides.models,
                  "Model kinds: random_forest, svm, mlp, stacking")
      ->delimiter(',');
  cmd->add_option("--dimensions", overrides.dimensions, "Embedding dimensions");
  cmd->add_option("--walks-per-node", overrides.walks_per_node, "Random walks per node");
  cmd->add_option("--walk-length", overrides.walk_length, "Steps per random walk");
  cmd->add_option("--window", overrides.window, "Skip-gram context window");
  cmd->add_option("--return-param", overrides.return_param, "Walk return bias p");
  cmd->add_option("--inout-param", overrides.inout_param, "Walk in-out bias q");
  cmd->add_option("--negative-samples", overrides.negative_samples,
                  "Negative samples per positive pair");
  cmd->add_option("--embed-epochs", overrides.embed_epochs, "Embedding training epochs");
  cmd->add_option("--embed-learning-rate", overrides.embed_learning_rate,
                  "Embedding initial learning rate");
}

RunConfig build_config(const RunOverrides& overrides) {
  RunConfig config;
  if (overrides.config_path.empty()) {
    config.generator = GeneratorConfig::defaults();
  } else {
    config = RunConfig::from_json_file(overrides.config_path);
  }
  if (overrides.seed) config.seed = *overrides.seed;
  if (overrides.output_dir) config.output_dir = *overrides.output_dir;
  if (overrides.examples_per_label) config.examples_per_label = *overrides.examples_per_label;
  if (overrides.test_fraction) config.test_fraction = *overrides.test_fraction;
  if (!overrides.models.empty()) config.models = overrides.models;
  if (overrides.dimensions) config.embedding.dimensions = *overrides.dimensions;
  if (overrides.walks_per_node) config.embedding.walks_per_node = *overrides.walks_per_node;
  if (overrides.walk_length) config.embedding.walk_length = *overrides.walk_length;
  if (overrides.window) config.embedding.window = *overrides.window;
  if (overrides.return_param) config.embedding.return_param = *overrides.return_param;
  if (overrides.inout_param) config.embedding.inout_param = *overrides.inout_param;
  if (overrides.negative_samples) config.embedding.negative_samples = *overrides.negative_samples;
  if (overrides.embed_epochs) config.embedding.epochs = *overrides.embed_epochs;
  if (overrides.embed_learning_rate) {
    config.embedding.learning_rate = *overrides.embed_learning_rate;
  }
  return config;
}

void print_warnings(const PolicyDocument& doc) {
  for (const auto& warning : doc.warnings) {
    std::cerr << "warning: " << doc.source_name << ":" << warning.span.line << ":"
              << warning.span.column << ": " << warning.message << "\n";
  }
}

int run(int argc, char** argv) {
  CLI::App app{"SELinux type-enforcement policy analysis and violation classification"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  // parse ------------------------------------------------------------
  std::string parse_file;
  std::string parse_mode = "strict";
  auto* parse_cmd = app.add_subcommand("parse", "Parse a policy file and print canonical text");
  parse_cmd->add_option("file", parse_file, "Policy file (.te subset)")
      ->required()
      ->check(CLI::ExistingFile);
  parse_cmd->add_option("--mode", parse_mode, "strict or lenient")
      ->check(CLI::IsMember({"strict", "lenient"}));

  // graph ------------------------------------------------------------
  std::string graph_file;
  std::string graph_format = "json";
  auto* graph_cmd = app.add_subcommand("graph", "Build the policy graph and export it");
  graph_cmd->add_option("file", graph_file, "Policy file (.te subset)")
      ->required()
      ->check(CLI::ExistingFile);
  graph_cmd->add_option("--format", graph_format, "json or cypher")
      ->check(CLI::IsMember({"json", "cypher"}));

  // staged pipeline commands ------------------------------------------
  RunOverrides overrides;
  auto* generate_cmd =
      app.add_subcommand("generate", "Generate a labeled synthetic policy corpus");
  auto* embed_cmd = app.add_subcommand("embed", "Learn node embeddings from the corpus graph");
  auto* train_cmd = app.add_subcommand("train", "Split the dataset and train the models");
  auto* evaluate_cmd =
      app.add_subcommand("evaluate", "Score the trained models on the held-out split");
  auto* report_cmd = app.add_subcommand("report", "Render the cross-model comparison report");
  auto* pipeline_cmd = app.add_subcommand("pipeline", "Run every stage in order");
  for (auto* cmd : {generate_cmd, embed_cmd, train_cmd, evaluate_cmd, report_cmd, pipeline_cmd}) {
    add_run_options(cmd, overrides);
  }

  // predict ------------------------------------------------------------
  std::string predict_file;
  std::string predict_model;
  std::string predict_embeddings;
  auto* predict_cmd =
      app.add_subcommand("predict", "Classify the examples in an unlabeled policy file");
  predict_cmd->add_option("file", predict_file, "Policy file (.te subset)")
      ->required()
      ->check(CLI::ExistingFile);
  predict_cmd->add_option("--model", predict_model, "Saved model file")
      ->required()
      ->check(CLI::ExistingFile);
  predict_cmd->add_option("--embeddings", predict_embeddings, "Saved embeddings file")
      ->required()
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (parse_cmd->parsed()) {
    const auto mode = parse_mode == "strict" ? ParseMode::Strict : ParseMode::Lenient;
    const PolicyDocument doc = parse_document(read_text_file(parse_file), mode, parse_file);
    print_warnings(doc);
    std::cout << serialize(doc);
    return 0;
  }
  if (graph_cmd->parsed()) {
    const PolicyDocument doc =
        parse_document(read_text_file(graph_file), ParseMode::Lenient, graph_file);
    print_warnings(doc);
    const PolicyGraph graph = build_graph(doc);
    if (graph_format == "json") {
      std::cout << export_json(graph) << "\n";
    } else {
      std::cout << export_cypher(graph) << "\n";
    }
    return 0;
  }
  if (predict_cmd->parsed()) {
    std::vector<std::string> warnings;
    const auto predictions =
        predict_policy_file(predict_file, predict_model, predict_embeddings, &warnings);
    for (const auto& warning : warnings) std::cerr << "warning: " << warning << "\n";
    std::cout << "example_id,predicted_class,description\n";
    for (const auto& p : predictions) {
      std::cout << p.example_id << "," << p.predicted << ","
                << violation_label_description(p.predicted) << "\n";
    }
    return 0;
  }

  Pipeline pipeline(build_config(overrides));
  if (generate_cmd->parsed()) {
    pipeline.run_generate();
    std::cout << "wrote " << pipeline.corpus_path().string() << ", "
              << pipeline.dataset_path().string() << ", " << pipeline.instances_path().string()
              << "\n";
  } else if (embed_cmd->parsed()) {
    pipeline.run_embed();
    std::cout << "wrote " << pipeline.embeddings_path().string() << "\n";
  } else if (train_cmd->parsed()) {
    pipeline.run_train();
    std::cout << "wrote " << pipeline.split_path().string();
    for (const auto& kind : pipeline.config().models) {
      std::cout << ", " << pipeline.model_path(kind).string();
    }
    std::cout << "\n";
  } else if (evaluate_cmd->parsed()) {
    pipeline.run_evaluate();
    for (const auto& kind : pipeline.config().models) {
      std::cout << "wrote " << pipeline.metrics_path(kind).string() << " and "
                << pipeline.predictions_path(kind).string() << "\n";
    }
  } else if (report_cmd->parsed()) {
    std::cout << pipeline.run_report();
  } else if (pipeline_cmd->parsed()) {
    pipeline.run_generate();
    pipeline.run_embed();
    pipeline.run_train();
    pipeline.run_evaluate();
    std::cout << pipeline.run_report();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const sepolml::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const sepolml::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
