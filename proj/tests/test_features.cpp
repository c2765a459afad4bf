#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <vector>

#include "sepolml/errors.hpp"
#include "sepolml/features.hpp"

using namespace sepolml;

namespace {

NodeEmbeddings toy_embeddings() {
  NodeEmbeddings embeddings(2, 0);
  embeddings.insert("subject:web_t", {1.0f, 2.0f});
  embeddings.insert("object:data_t:file", {10.0f, 20.0f});
  embeddings.insert("object:log_t:file", {100.0f, 200.0f});
  embeddings.insert("class:file", {0.5f, 0.25f});
  return embeddings;
}

AllowRule allow(const std::string& source, const std::string& target, const std::string& cls,
                std::vector<Permission> perms) {
  AllowRule rule;
  rule.source = source;
  rule.target = target;
  rule.security_class = cls;
  rule.permissions = std::move(perms);
  return rule;
}

}  // namespace

TEST_CASE("example features are the element-wise mean over rules") {
  // Hand-computed fixture. Layout with d=2 and vocabulary {read, write}:
  //   [subject(2) | object(2) | class(2) | read | write | count/6]
  // Rule 1: subject (1,2), object (10,20), class (0.5,0.25), perms {read,write}
  // Rule 2: subject (1,2), object (100,200), class (0.5,0.25), perms {write}
  // Mean:   (1,2 | 55,110 | 0.5,0.25 | 0.5 | 1.0), appended count 2/6.
  LabeledExample example;
  example.example_id = "fixture";
  example.rules.emplace_back(allow("web_t", "data_t", "file", {"read", "write"}));
  example.rules.emplace_back(allow("web_t", "log_t", "file", {"write"}));

  FeatureSpec spec;
  spec.embedding_dimensions = 2;
  spec.permission_vocabulary = {"read", "write"};
  REQUIRE(spec.feature_dimension() == 9);

  const auto row = featurize_example(example, toy_embeddings(), spec);
  REQUIRE(row.size() == 9);
  CHECK(row[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(row[1] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(row[2] == doctest::Approx(55.0).epsilon(1e-12));
  CHECK(row[3] == doctest::Approx(110.0).epsilon(1e-12));
  CHECK(row[4] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(row[5] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(row[6] == doctest::Approx(0.5).epsilon(1e-12));   // read in 1 of 2 rules
  CHECK(row[7] == doctest::Approx(1.0).epsilon(1e-12));   // write in both rules
  CHECK(row[8] == doctest::Approx(2.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("transition rules contribute embeddings but no permissions") {
  LabeledExample example;
  example.example_id = "tt";
  TypeTransitionRule tt;
  tt.source_domain = "web_t";
  tt.target_type = "data_t";
  tt.security_class = "file";
  tt.new_type = "web_t";
  example.rules.emplace_back(tt);

  FeatureSpec spec;
  spec.embedding_dimensions = 2;
  spec.permission_vocabulary = {"read", "write"};
  const auto row = featurize_example(example, toy_embeddings(), spec);
  CHECK(row[0] == doctest::Approx(1.0));
  CHECK(row[2] == doctest::Approx(10.0));
  CHECK(row[4] == doctest::Approx(0.5));
  CHECK(row[6] == 0.0);
  CHECK(row[7] == 0.0);
  CHECK(row[8] == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("permissions outside the vocabulary are ignored") {
  LabeledExample example;
  example.rules.emplace_back(allow("web_t", "data_t", "file", {"read", "execute_no_trans"}));
  FeatureSpec spec;
  spec.embedding_dimensions = 2;
  spec.permission_vocabulary = {"read", "write"};
  const auto row = featurize_example(example, toy_embeddings(), spec);
  CHECK(row[6] == doctest::Approx(1.0));  // read
  CHECK(row[7] == 0.0);                   // write absent; unknown perm dropped
}

TEST_CASE("a rule-less example cannot be featurized") {
  LabeledExample example;
  example.example_id = "empty";
  FeatureSpec spec;
  spec.embedding_dimensions = 2;
  CHECK_THROWS_AS(featurize_example(example, toy_embeddings(), spec), Error);
}

TEST_CASE("a rule naming an unembedded node is an error") {
  LabeledExample example;
  example.rules.emplace_back(allow("ghost_t", "data_t", "file", {"read"}));
  FeatureSpec spec;
  spec.embedding_dimensions = 2;
  spec.permission_vocabulary = {"read"};
  CHECK_THROWS_AS(featurize_example(example, toy_embeddings(), spec), MissingNodeError);
}

TEST_CASE("the vocabulary is the sorted union of dataset permissions") {
  LabeledDataset dataset;
  LabeledExample a;
  a.rules.emplace_back(allow("s", "t", "file", {"write", "read"}));
  LabeledExample b;
  b.rules.emplace_back(allow("s", "t", "file", {"append", "read"}));
  dataset.examples = {a, b};
  const FeatureSpec spec = FeatureSpec::from_dataset(dataset, 4);
  CHECK(spec.embedding_dimensions == 4);
  CHECK(spec.permission_vocabulary == std::vector<Permission>{"append", "read", "write"});
  CHECK(spec.feature_dimension() == 3 * 4 + 3 + 1);
}

TEST_CASE("featurize_dataset keeps rows, labels, and ids parallel") {
  LabeledDataset dataset;
  LabeledExample a;
  a.example_id = "a";
  a.label = 3;
  a.rules.emplace_back(allow("web_t", "data_t", "file", {"read"}));
  LabeledExample b;
  b.example_id = "b";
  b.label = 7;
  b.rules.emplace_back(allow("web_t", "log_t", "file", {"write"}));
  dataset.examples = {a, b};

  FeatureSpec spec;
  spec.embedding_dimensions = 2;
  spec.permission_vocabulary = {"read", "write"};
  const FeatureMatrix matrix = featurize_dataset(dataset, toy_embeddings(), spec);
  REQUIRE(matrix.rows.size() == 2);
  CHECK(matrix.labels == std::vector<int>{3, 7});
  CHECK(matrix.example_ids == std::vector<std::string>{"a", "b"});
  CHECK(matrix.rows[0].size() == spec.feature_dimension());
}
