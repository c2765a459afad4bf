#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "sepolml/errors.hpp"
#include "sepolml/model_io.hpp"
#include "sepolml/pipeline.hpp"
#include "sepolml/rng.hpp"

using namespace sepolml;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  return dir;
}

// Small but non-trivial settings so pipeline tests stay fast.
RunConfig tiny_config(const std::filesystem::path& dir, std::uint64_t seed = 4242) {
  RunConfig config;
  config.generator = GeneratorConfig::defaults();
  config.seed = seed;
  config.output_dir = dir;
  config.examples_per_label = 3;
  config.test_fraction = 0.34;
  config.models = {"random_forest"};
  config.embedding.dimensions = 8;
  config.embedding.walks_per_node = 3;
  config.embedding.walk_length = 10;
  config.embedding.epochs = 2;
  return config;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  REQUIRE(file);
  return std::string(std::istreambuf_iterator<char>(file), {});
}

}  // namespace

TEST_CASE("fnv1a64 matches the published reference vectors") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("file hashes are prefixed 16-digit hex") {
  const auto path = std::filesystem::temp_directory_path() / "sepolml_hash_probe.txt";
  {
    std::ofstream file(path, std::ios::binary);
    file << "abc";
  }
  const std::string hash = file_hash(path);
  CHECK(hash.size() == std::string("fnv1a:").size() + 16);
  CHECK(hash.starts_with("fnv1a:"));
  char expected[32];
  std::snprintf(expected, sizeof(expected), "fnv1a:%016llx",
                static_cast<unsigned long long>(fnv1a64("abc")));
  CHECK(hash == expected);
  std::filesystem::remove(path);
}

TEST_CASE("run config parses from JSON and rejects unknown keys") {
  const auto parsed = nlohmann::json::parse(R"({
    "seed": 7,
    "output_dir": "artifacts",
    "examples_per_label": 5,
    "test_fraction": 0.25,
    "models": ["svm", "mlp"],
    "embedding": {"dimensions": 12, "window": 3},
    "generator": {"network_classes": ["tcp_socket", "udp_socket", "rawip_socket"]}
  })");
  const RunConfig config = RunConfig::from_json(parsed, "test");
  CHECK(config.seed_value() == 7);
  CHECK(config.output_dir == "artifacts");
  CHECK(config.examples_per_label == 5);
  CHECK(config.test_fraction == doctest::Approx(0.25));
  CHECK(config.models == std::vector<std::string>{"svm", "mlp"});
  CHECK(config.embedding.dimensions == 12);
  CHECK(config.embedding.window == 3);
  CHECK(config.embedding.walks_per_node == 10);  // untouched default
  CHECK(config.generator.network_classes.size() == 3);
  CHECK_NOTHROW(config.validate());

  CHECK_THROWS_AS(RunConfig::from_json(nlohmann::json::parse(R"({"sedd": 7})"), "test"),
                  ConfigError);
  CHECK_THROWS_AS(
      RunConfig::from_json(nlohmann::json::parse(R"({"embedding": {"dims": 2}})"), "test"),
      ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json(nlohmann::json::parse(R"({"seed": -3})"), "test"),
                  ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json(nlohmann::json::parse(R"({"seed": "42"})"), "test"),
                  ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json(nlohmann::json::parse(R"([1, 2])"), "test"), ConfigError);
  CHECK_THROWS_AS(
      RunConfig::from_json(
          nlohmann::json::parse(R"({"generator": {"path_conventions": [["/etc"]]}})"), "test"),
      ConfigError);
}

TEST_CASE("run config validation enforces ranges and uniqueness") {
  const auto dir = fresh_dir("sepolml_cfg_validate");
  RunConfig config = tiny_config(dir);
  CHECK_NOTHROW(config.validate());

  RunConfig broken = config;
  broken.seed.reset();
  CHECK_THROWS_AS(broken.validate(), ConfigError);
  CHECK_THROWS_AS(broken.seed_value(), ConfigError);

  broken = config;
  broken.test_fraction = 1.0;
  CHECK_THROWS_AS(broken.validate(), ConfigError);

  broken = config;
  broken.examples_per_label = 0;
  CHECK_THROWS_AS(broken.validate(), ConfigError);

  broken = config;
  broken.models = {"random_forest", "random_forest"};
  CHECK_THROWS_AS(broken.validate(), ConfigError);

  broken = config;
  broken.models = {"gradient_boosting"};
  CHECK_THROWS_AS(broken.validate(), ConfigError);

  broken = config;
  broken.models.clear();
  CHECK_THROWS_AS(broken.validate(), ConfigError);

  broken = config;
  broken.embedding.dimensions = 1;
  CHECK_THROWS_AS(broken.validate(), ConfigError);

  broken = config;
  broken.embedding.return_param = 0.0;
  CHECK_THROWS_AS(broken.validate(), ConfigError);
}

TEST_CASE("stage seeds are distinct deterministic streams") {
  RunConfig config;
  config.seed = 42;
  CHECK(config.generator_seed() == derive_seed(42, 1));
  CHECK(config.embedding_seed() == derive_seed(42, 2));
  CHECK(config.split_seed() == derive_seed(42, 3));
  CHECK(config.model_seed("svm") == derive_seed(42, 4, fnv1a64("svm")));
  CHECK(config.model_seed("svm") != config.model_seed("mlp"));
  CHECK(config.generator_seed() != config.embedding_seed());
}

TEST_CASE("manifest round-trips through disk") {
  const auto dir = fresh_dir("sepolml_manifest_rt");
  std::filesystem::create_directories(dir);
  RunManifest manifest;
  manifest.tool_version = "0.1.0";
  manifest.seed = 11;
  manifest.stages["generate"].outputs["corpus.te"] = "fnv1a:0123456789abcdef";
  manifest.stages["embed"].inputs["corpus.te"] = "fnv1a:0123456789abcdef";
  manifest.save(dir / "manifest.json");

  const RunManifest loaded = RunManifest::load(dir / "manifest.json");
  CHECK(loaded.tool_version == "0.1.0");
  CHECK(loaded.seed == 11);
  REQUIRE(loaded.stages.contains("generate"));
  CHECK(loaded.stages.at("generate").outputs.at("corpus.te") == "fnv1a:0123456789abcdef");
  CHECK(loaded.stages.at("embed").inputs.at("corpus.te") == "fnv1a:0123456789abcdef");

  // An absent manifest is an empty one, not an error.
  const RunManifest absent = RunManifest::load(dir / "no_such_manifest.json");
  CHECK(absent.stages.empty());

  {
    std::ofstream file(dir / "manifest.json");
    file << "{not json";
  }
  CHECK_THROWS_AS(RunManifest::load(dir / "manifest.json"), Error);
}

TEST_CASE("pipeline stages chain and produce every artifact") {
  const auto dir = fresh_dir("sepolml_pipe_full");
  Pipeline pipeline(tiny_config(dir));

  pipeline.run_generate();
  CHECK(std::filesystem::exists(pipeline.corpus_path()));
  CHECK(std::filesystem::exists(pipeline.dataset_path()));
  CHECK(std::filesystem::exists(pipeline.instances_path()));
  CHECK(std::filesystem::exists(pipeline.manifest_path()));

  pipeline.run_embed();
  CHECK(std::filesystem::exists(pipeline.embeddings_path()));

  pipeline.run_train();
  CHECK(std::filesystem::exists(pipeline.split_path()));
  CHECK(std::filesystem::exists(pipeline.model_path("random_forest")));

  pipeline.run_evaluate();
  CHECK(std::filesystem::exists(pipeline.metrics_path("random_forest")));
  CHECK(std::filesystem::exists(pipeline.predictions_path("random_forest")));

  const std::string report = pipeline.run_report();
  CHECK(std::filesystem::exists(pipeline.report_path()));
  CHECK(report.find("random_forest") != std::string::npos);
  CHECK(report.find("Accuracy") != std::string::npos);
  CHECK(report.find("Per-label recall") != std::string::npos);
  CHECK(report.find("No anomalies") != std::string::npos);

  const auto metrics = pipeline.load_metrics();
  REQUIRE(metrics.contains("random_forest"));
  CHECK(metrics.at("random_forest").total == 11);  // one held-out example per label

  // split.json lists disjoint train/test ids covering the corpus.
  const auto split_json = nlohmann::json::parse(slurp(pipeline.split_path()));
  CHECK(split_json.at("train").size() == 22);
  CHECK(split_json.at("test").size() == 11);

  // predictions CSV has a header plus one row per test example.
  const std::string predictions = slurp(pipeline.predictions_path("random_forest"));
  CHECK(predictions.starts_with("example_id,true_class,predicted_class\n"));
  CHECK(std::count(predictions.begin(), predictions.end(), '\n') == 12);
}

TEST_CASE("pipelines with one seed are bitwise reproducible") {
  const auto dir_a = fresh_dir("sepolml_pipe_rep_a");
  const auto dir_b = fresh_dir("sepolml_pipe_rep_b");
  Pipeline a(tiny_config(dir_a));
  Pipeline b(tiny_config(dir_b));
  a.run_generate();
  a.run_embed();
  b.run_generate();
  b.run_embed();
  CHECK(slurp(a.corpus_path()) == slurp(b.corpus_path()));
  CHECK(slurp(a.dataset_path()) == slurp(b.dataset_path()));
  CHECK(slurp(a.embeddings_path()) == slurp(b.embeddings_path()));

  const auto dir_c = fresh_dir("sepolml_pipe_rep_c");
  Pipeline c(tiny_config(dir_c, 4243));
  c.run_generate();
  CHECK(slurp(a.corpus_path()) != slurp(c.corpus_path()));
}

TEST_CASE("stale inputs name the stage to re-run") {
  const auto dir = fresh_dir("sepolml_pipe_stale");
  Pipeline pipeline(tiny_config(dir));
  pipeline.run_generate();
  pipeline.run_embed();

  {
    std::ofstream file(pipeline.corpus_path(), std::ios::app);
    file << "# tampered\n";
  }
  try {
    pipeline.run_embed();
    FAIL_CHECK("expected a staleness error");
  } catch (const Error& e) {
    const std::string message = e.what();
    CHECK(message.find("corpus.te") != std::string::npos);
    CHECK(message.find("'generate'") != std::string::npos);
    CHECK(message.find("'embed'") != std::string::npos);
  }

  // A tracked artifact that disappeared is also reported.
  std::filesystem::remove(pipeline.embeddings_path());
  try {
    pipeline.run_train();
    FAIL_CHECK("expected a missing-artifact error");
  } catch (const Error& e) {
    const std::string message = e.what();
    CHECK(message.find("embeddings.txt") != std::string::npos);
    CHECK(message.find("'embed'") != std::string::npos);
  }
}

TEST_CASE("model bundles round-trip and reject foreign files") {
  const auto dir = fresh_dir("sepolml_bundle_rt");
  Pipeline pipeline(tiny_config(dir));
  pipeline.run_generate();
  pipeline.run_embed();
  pipeline.run_train();

  const ModelBundle bundle = load_model(pipeline.model_path("random_forest"));
  CHECK(bundle.model->kind() == "random_forest");
  CHECK(bundle.label_count == 11);
  CHECK(bundle.feature_spec.embedding_dimensions == 8);
  CHECK(!bundle.feature_spec.permission_vocabulary.empty());

  auto tampered = nlohmann::json::parse(slurp(pipeline.model_path("random_forest")));
  tampered["format"] = "something-else";
  const auto tampered_path = dir / "tampered.json";
  {
    std::ofstream file(tampered_path);
    file << tampered.dump();
  }
  CHECK_THROWS_AS(load_model(tampered_path), Error);

  tampered = nlohmann::json::parse(slurp(pipeline.model_path("random_forest")));
  tampered["format_version"] = 999;
  {
    std::ofstream file(tampered_path);
    file << tampered.dump();
  }
  CHECK_THROWS_AS(load_model(tampered_path), Error);
}

TEST_CASE("report formatting flags weak recall only for supported labels") {
  // Identity confusion except label 1, whose two examples both land on 0;
  // label 2 has no support at all and must not be flagged.
  std::vector<std::vector<size_t>> confusion(11, std::vector<size_t>(11, 0));
  for (size_t label = 0; label < 11; ++label) confusion[label][label] = 4;
  confusion[1][1] = 0;
  confusion[1][0] = 2;
  confusion[2][2] = 0;
  const MetricsReport report = metrics_from_confusion(confusion);
  REQUIRE(report.per_label[1].recall < 0.5);
  REQUIRE(report.per_label[2].support == 0);

  const std::string text = format_report({{"random_forest", report}});
  CHECK(text.find("random_forest") != std::string::npos);
  size_t flags = 0;
  size_t at = 0;
  while ((at = text.find("[LOW RECALL]", at)) != std::string::npos) {
    ++flags;
    at += 1;
  }
  CHECK(flags == 1);
  // All eleven label descriptions appear in the appendix.
  CHECK(text.find("No anomalies") != std::string::npos);
  CHECK(text.find("Improper privilege assignment") != std::string::npos);
  CHECK(text.find("Missing necessary file access for system processes") != std::string::npos);
}

TEST_CASE("prediction on raw policy files skips rule-less groups") {
  const auto dir = fresh_dir("sepolml_pipe_predict");
  Pipeline pipeline(tiny_config(dir));
  pipeline.run_generate();
  pipeline.run_embed();
  pipeline.run_train();

  // The corpus plus one trailing declarations-only group.
  const auto probe = dir / "probe.te";
  {
    std::ofstream file(probe);
    file << slurp(pipeline.corpus_path()) << "\ntype floating_t;\n";
  }
  std::vector<std::string> warnings;
  const auto predictions = predict_policy_file(probe, pipeline.model_path("random_forest"),
                                               pipeline.embeddings_path(), &warnings);
  CHECK(predictions.size() == 33);  // 3 examples x 11 labels, all rule-bearing
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("declarations only") != std::string::npos);
  for (const auto& prediction : predictions) {
    CHECK(prediction.predicted >= 0);
    CHECK(prediction.predicted < 11);
    CHECK(prediction.rule_count > 0);
  }

  // Embeddings of another width are rejected up front.
  RunConfig narrow = tiny_config(fresh_dir("sepolml_pipe_predict_narrow"));
  narrow.embedding.dimensions = 4;
  Pipeline other(narrow);
  other.run_generate();
  other.run_embed();
  CHECK_THROWS_AS(predict_policy_file(probe, pipeline.model_path("random_forest"),
                                      other.embeddings_path(), nullptr),
                  DimensionMismatchError);
}
