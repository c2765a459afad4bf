#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "sepolml/dataset.hpp"
#include "sepolml/errors.hpp"
#include "sepolml/generator.hpp"
#include "sepolml/oracle.hpp"
#include "sepolml/parser.hpp"

using namespace sepolml;

namespace {

LabeledExample example_from(const std::string& rules_text,
                            const std::string& declarations_text = "",
                            std::map<std::string, std::string> instances = {}) {
  LabeledExample example;
  example.example_id = "fixture";
  example.declarations = parse_document(declarations_text, ParseMode::Lenient).statements;
  example.rules = parse_document(rules_text, ParseMode::Lenient).statements;
  example.instance_names = std::move(instances);
  return example;
}

const OracleContext& default_context() {
  static const OracleContext context = OracleContext::from_config(GeneratorConfig::defaults());
  return context;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("stem_of strips the freshness suffix and the type suffix") {
  CHECK(stem_of("financial_data_e12_t") == "financial_data");
  CHECK(stem_of("shadow_e0_t") == "shadow");
  CHECK(stem_of("httpd_t") == "httpd");
  CHECK(stem_of("x_t") == "x");
  CHECK(stem_of("t") == "t");
  CHECK(stem_of("no_suffix") == "no_suffix");
  CHECK(stem_of("odd_e5x_t") == "odd_e5x");  // non-numeric marker is not a suffix
}

TEST_CASE("detector recognizes each violation pattern in isolation") {
  const auto& ctx = default_context();

  // 1: same subject reads and writes a sensitive data type.
  CHECK(baseline_detect(
            example_from("allow web_server_e1_t financial_data_e1_t:file { read write };\n"),
            ctx) == 1);
  // Read-only access to the same type is benign.
  CHECK(baseline_detect(
            example_from("allow web_server_e1_t financial_data_e1_t:file { read };\n"), ctx) ==
        0);

  // 9: one (source, executable, class) transitioning into two domains.
  CHECK(baseline_detect(
            example_from("type_transition a_t exec_t:process b_t;\n"
                         "type_transition a_t exec_t:process c_t;\n"),
            ctx) == 9);
  // Distinct executables do not contradict.
  CHECK(baseline_detect(
            example_from("type_transition a_t exec1_t:process b_t;\n"
                         "type_transition a_t exec2_t:process c_t;\n"),
            ctx) == 0);

  // 5: exactly two of the three grants a domain transition needs.
  CHECK(baseline_detect(example_from("allow start_t exec_t:file execute;\n"
                                     "allow new_t exec_t:file entrypoint;\n"),
                        ctx) == 5);
  // The complete triple is healthy.
  CHECK(baseline_detect(example_from("allow start_t exec_t:file execute;\n"
                                     "allow new_t exec_t:file entrypoint;\n"
                                     "allow start_t new_t:process transition;\n"),
                        ctx) == 0);

  // 8: one subject may transition into both halves of an exclusive pair.
  CHECK(baseline_detect(
            example_from("allow a_t payment_initiator_e2_t:process transition;\n"
                         "allow a_t payment_approver_e2_t:process transition;\n"),
            ctx) == 8);

  // 3: modification permission on a critical file type.
  CHECK(baseline_detect(example_from("allow a_t shadow_e3_t:file { write };\n"), ctx) == 3);
  CHECK(baseline_detect(example_from("allow a_t shadow_e3_t:file { read getattr };\n"), ctx) ==
        0);

  // 7: name_connect on a network endpoint class.
  CHECK(baseline_detect(example_from("allow a_t b_t:tcp_socket name_connect;\n"), ctx) == 7);

  // 2: capability-style privileged permission.
  CHECK(baseline_detect(example_from("allow a_t a_t:capability { setuid sys_admin };\n"),
                        ctx) == 2);

  // 4: an executable type used as a network endpoint.
  CHECK(baseline_detect(example_from("allow a_t web_exec_e4_t:tcp_socket { read write bind };\n"),
                        ctx) == 4);

  // 6: instance path convention disagrees with the type stem.
  CHECK(baseline_detect(example_from("allow a_t var_thing_e5_t:file { relabelfrom relabelto };\n",
                                     "", {{"var_thing_e5_t", "/etc/thing.cfg"}}),
                        ctx) == 6);
  // Matching convention word is benign.
  CHECK(baseline_detect(example_from("allow a_t db_conf_e5_t:file { relabelfrom relabelto };\n",
                                     "", {{"db_conf_e5_t", "/etc/db.cfg"}}),
                        ctx) == 0);

  // 10: system process and its resource coexist with no access path.
  CHECK(baseline_detect(example_from("allow logrotate_e6_t scratch_t:file read;\n",
                                     "type logrotate_e6_t;\ntype system_log_store_e6_t;\n"),
                        ctx) == 10);
  // Granting the access removes the finding.
  CHECK(baseline_detect(
            example_from("allow logrotate_e6_t system_log_store_e6_t:file { read open };\n",
                         "type logrotate_e6_t;\ntype system_log_store_e6_t;\n"),
            ctx) == 0);
}

TEST_CASE("detector priority follows the fixed order") {
  const auto& ctx = default_context();
  // Contradictory transitions (9) outrank a sensitive read/write (1).
  CHECK(baseline_detect(
            example_from("type_transition a_t exec_t:process b_t;\n"
                         "type_transition a_t exec_t:process c_t;\n"
                         "allow a_t payroll_data_e7_t:file { read write };\n"),
            ctx) == 9);
  // A broken transition (5) outranks critical file modification (3).
  CHECK(baseline_detect(example_from("allow start_t exec_t:file execute;\n"
                                     "allow new_t exec_t:file entrypoint;\n"
                                     "allow start_t sudoers_e8_t:file write;\n"),
                        ctx) == 5);
  // Critical modification (3) outranks privileged assignment (2).
  CHECK(baseline_detect(example_from("allow a_t passwd_file_e9_t:file write;\n"
                                     "allow a_t a_t:capability setuid;\n"),
                        ctx) == 3);
}

TEST_CASE("every violation label has a distinct description") {
  std::set<std::string> descriptions;
  for (int label = 0; label < kViolationLabelCount; ++label) {
    descriptions.insert(violation_label_description(label));
  }
  CHECK(descriptions.size() == static_cast<size_t>(kViolationLabelCount));
  CHECK(violation_label_description(0) == "No anomalies");
  CHECK(violation_label_description(10) ==
        "Missing necessary file access for system processes");
  CHECK_THROWS_AS(violation_label_description(11), ConfigError);
  CHECK_THROWS_AS(violation_label_description(-1), ConfigError);
}

TEST_CASE("generated corpora are balanced, deterministic, and label-consistent") {
  GeneratorConfig config = GeneratorConfig::defaults();
  config.examples_per_label = 4;
  config.seed = 123;

  const LabeledDataset dataset = generate_dataset(config);
  REQUIRE(dataset.examples.size() == 4 * kViolationLabelCount);
  const auto counts = dataset.label_counts();
  REQUIRE(counts.size() == kViolationLabelCount);
  for (const auto count : counts) CHECK(count == 4);

  // Determinism: the same config reproduces the exact corpus text.
  CHECK(corpus_policy_text(generate_dataset(config)) == corpus_policy_text(dataset));

  // A different seed produces different text.
  GeneratorConfig other = config;
  other.seed = 124;
  CHECK(corpus_policy_text(generate_dataset(other)) != corpus_policy_text(dataset));

  // The rule-based detector agrees with every label (the generator already
  // enforces this; recheck here against an independently built context).
  CHECK(validate_dataset(dataset, OracleContext::from_config(config)).empty());

  // Example ids are unique and no type name leaks across examples.
  std::set<std::string> ids;
  std::map<std::string, std::string> owner_of_type;
  for (const auto& example : dataset.examples) {
    CHECK(ids.insert(example.example_id).second);
    for (const auto& statement : example.declarations) {
      if (const auto* decl = std::get_if<TypeDecl>(&statement)) {
        const auto [it, fresh] = owner_of_type.emplace(decl->name, example.example_id);
        CHECK(fresh);
      }
    }
  }
}

TEST_CASE("oracle agreement holds across seeds and sizes") {
  for (const std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    for (const int per_label : {3, 11}) {
      GeneratorConfig config = GeneratorConfig::defaults();
      config.examples_per_label = per_label;
      config.seed = seed;
      const LabeledDataset dataset = generate_dataset(config);
      CHECK(validate_dataset(dataset, OracleContext::from_config(config)).empty());
    }
  }
}

TEST_CASE("pool validation rejects malformed configurations") {
  auto base = GeneratorConfig::defaults();

  auto broken = base;
  broken.sensitive_data_types.clear();
  CHECK_THROWS_AS(broken.validate(), ConfigError);

  broken = base;
  broken.critical_file_types.push_back(base.sensitive_data_types.front());  // cross-pool clash
  CHECK_THROWS_AS(broken.validate(), ConfigError);

  broken = base;
  broken.path_conventions.front().first = "var/log";  // not absolute
  CHECK_THROWS_AS(broken.validate(), ConfigError);

  broken = base;
  broken.path_conventions.front().first = "/var/log/";  // trailing slash
  CHECK_THROWS_AS(broken.validate(), ConfigError);

  broken = base;
  broken.exclusive_role_pairs.push_back({"twin", "twin"});  // identical halves
  CHECK_THROWS_AS(broken.validate(), ConfigError);

  broken = base;
  broken.privileged_permissions.push_back("read");  // collides with structural perms
  CHECK_THROWS_AS(broken.validate(), ConfigError);

  CHECK_NOTHROW(base.validate());
}

TEST_CASE("generate_example rejects labels outside the taxonomy") {
  const auto config = GeneratorConfig::defaults();
  CHECK_THROWS_AS(generate_example(config, 11, 0, 0), ConfigError);
  CHECK_THROWS_AS(generate_example(config, -1, 0, 0), ConfigError);
}

TEST_CASE("dataset CSV round-trips examples, labels, and rule order") {
  GeneratorConfig config = GeneratorConfig::defaults();
  config.examples_per_label = 2;
  config.seed = 9;
  const LabeledDataset dataset = generate_dataset(config);

  const auto csv_path = temp_file("sepolml_dataset_roundtrip.csv");
  write_dataset_csv(dataset, csv_path);
  const LabeledDataset reloaded = read_dataset_csv(csv_path);

  REQUIRE(reloaded.examples.size() == dataset.examples.size());
  for (size_t i = 0; i < dataset.examples.size(); ++i) {
    const auto& original = dataset.examples[i];
    const auto& copy = reloaded.examples[i];
    CHECK(copy.example_id == original.example_id);
    CHECK(copy.label == original.label);
    REQUIRE(copy.rules.size() == original.rules.size());
    for (size_t r = 0; r < original.rules.size(); ++r) {
      CHECK(serialize(copy.rules[r]) == serialize(original.rules[r]));
    }
  }
  std::filesystem::remove(csv_path);
}

TEST_CASE("instance names travel in the sidecar file") {
  GeneratorConfig config = GeneratorConfig::defaults();
  config.examples_per_label = 2;
  config.seed = 31;
  const LabeledDataset dataset = generate_dataset(config);

  size_t with_instances = 0;
  for (const auto& example : dataset.examples) {
    if (!example.instance_names.empty()) ++with_instances;
  }
  REQUIRE(with_instances > 0);  // the mislabeling class always carries instances

  const auto csv_path = temp_file("sepolml_sidecar_dataset.csv");
  const auto sidecar_path = temp_file("sepolml_sidecar_instances.json");
  write_dataset_csv(dataset, csv_path);
  write_instance_names(dataset, sidecar_path);

  LabeledDataset reloaded = read_dataset_csv(csv_path);
  read_instance_names(reloaded, sidecar_path);
  for (size_t i = 0; i < dataset.examples.size(); ++i) {
    CHECK(reloaded.examples[i].instance_names == dataset.examples[i].instance_names);
  }
  std::filesystem::remove(csv_path);
  std::filesystem::remove(sidecar_path);
}

TEST_CASE("malformed dataset CSVs are rejected") {
  const auto path = temp_file("sepolml_bad_dataset.csv");
  auto write_file = [&](const std::string& text) {
    std::ofstream file(path);
    file << text;
  };

  write_file("wrong,header,entirely,now\n");
  CHECK_THROWS_AS(read_dataset_csv(path), Error);

  write_file("example_id,rule_index,rule_text,violation_class\nex,0,allow a b:file read;,99\n");
  CHECK_THROWS_AS(read_dataset_csv(path), Error);

  write_file("example_id,rule_index,rule_text,violation_class\nex,0,type a;,1\n");
  CHECK_THROWS_AS(read_dataset_csv(path), Error);

  write_file(
      "example_id,rule_index,rule_text,violation_class\n"
      "ex,0,allow a b:file read;,1\n"
      "ex,1,allow a b:file write;,2\n");  // conflicting labels for one example
  CHECK_THROWS_AS(read_dataset_csv(path), Error);

  std::filesystem::remove(path);
}

TEST_CASE("corpus text splits back into the same examples") {
  GeneratorConfig config = GeneratorConfig::defaults();
  config.examples_per_label = 2;
  config.seed = 55;
  const LabeledDataset dataset = generate_dataset(config);

  const PolicyDocument doc =
      parse_document(corpus_policy_text(dataset), ParseMode::Lenient, "corpus");
  const auto groups = split_into_examples(doc);
  REQUIRE(groups.size() == dataset.examples.size());
  for (size_t i = 0; i < groups.size(); ++i) {
    CHECK(groups[i].label == -1);
    REQUIRE(groups[i].rules.size() == dataset.examples[i].rules.size());
    for (size_t r = 0; r < groups[i].rules.size(); ++r) {
      CHECK(serialize(groups[i].rules[r]) == serialize(dataset.examples[i].rules[r]));
    }
  }
}

TEST_CASE("stratified split is per-label, sorted, and seed-stable") {
  LabeledDataset dataset;
  auto add = [&](int label, int count) {
    for (int i = 0; i < count; ++i) {
      LabeledExample example;
      example.example_id = "l" + std::to_string(label) + "_" + std::to_string(i);
      example.label = label;
      example.rules = parse_document("allow a b:file read;", ParseMode::Lenient).statements;
      dataset.examples.push_back(std::move(example));
    }
  };
  add(0, 5);
  add(1, 10);

  const SplitIndices split = stratified_split(dataset, 0.2, 99);
  CHECK(split.test.size() == 3);    // round(5*0.2)=1 plus round(10*0.2)=2
  CHECK(split.train.size() == 12);
  CHECK(std::is_sorted(split.train.begin(), split.train.end()));
  CHECK(std::is_sorted(split.test.begin(), split.test.end()));

  std::set<size_t> all(split.train.begin(), split.train.end());
  all.insert(split.test.begin(), split.test.end());
  CHECK(all.size() == dataset.examples.size());

  int label0_test = 0;
  for (const auto index : split.test) {
    if (dataset.examples[index].label == 0) ++label0_test;
  }
  CHECK(label0_test == 1);

  const SplitIndices again = stratified_split(dataset, 0.2, 99);
  CHECK(again.train == split.train);
  CHECK(again.test == split.test);

  CHECK_THROWS_AS(stratified_split(dataset, 0.0, 1), ConfigError);
  CHECK_THROWS_AS(stratified_split(dataset, 1.0, 1), ConfigError);

  add(2, 1);  // a one-example label cannot be split
  CHECK_THROWS_AS(stratified_split(dataset, 0.2, 1), LabelTooSmallError);
}
