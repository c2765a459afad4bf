#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "sepolml/parser.hpp"

namespace sepolml {

/// Violation classes assigned to policy examples. 0 is the benign baseline.
inline constexpr int kViolationLabelCount = 11;

/// Human-readable description of a violation class; throws ConfigError for
/// labels outside [0, 10].
const std::string& violation_label_description(int label);

/// One policy example: a small self-contained set of declarations plus the
/// access/transition rules that carry its violation label. Instance names
/// optionally bind a type to a concrete resource (such as a file path) and
/// travel in a sidecar file, not in the rule CSV.
struct LabeledExample {
  std::string example_id;
  std::vector<Statement> declarations;  // type/attribute statements
  std::vector<Statement> rules;         // allow/type_transition statements
  int label = 0;
  std::map<std::string, std::string> instance_names;  // type -> instance
};

struct LabeledDataset {
  std::vector<LabeledExample> examples;

  std::vector<size_t> label_counts() const;  // indexed by label, size 11
  size_t rule_count() const;
};

/// Policy text of one example: declarations then rules, canonical form, one
/// statement per line.
std::string example_policy_text(const LabeledExample& example);

/// Whole corpus as parseable policy text, examples separated by one blank
/// line (the blank line is what groups rules back into examples).
std::string corpus_policy_text(const LabeledDataset& dataset);

/// CSV schema: example_id,rule_index,rule_text,violation_class — one row
/// per rule, canonical rule text, RFC-4180 quoting.
void write_dataset_csv(const LabeledDataset& dataset, const std::filesystem::path& path);
LabeledDataset read_dataset_csv(const std::filesystem::path& path);

/// Sidecar JSON mapping example_id -> {type -> instance name}. Only
/// examples with instance names appear.
void write_instance_names(const LabeledDataset& dataset, const std::filesystem::path& path);
void read_instance_names(LabeledDataset& dataset, const std::filesystem::path& path);

/// Splits parsed policy text into examples at blank-line boundaries (a gap
/// of two or more source lines between consecutive statements). Labels are
/// set to -1; declarations and rules are separated by statement kind.
std::vector<LabeledExample> split_into_examples(const PolicyDocument& doc);

struct SplitIndices {
  std::vector<size_t> train;
  std::vector<size_t> test;
};

/// Deterministic per-label split. Each label present must have at least two
/// examples (else LabelTooSmallError); its test share is
/// round(count * test_fraction) clamped to [1, count - 1], drawn after a
/// seeded per-label shuffle. Returned indices are sorted.
SplitIndices stratified_split(const LabeledDataset& dataset, double test_fraction,
                              std::uint64_t seed);

}  // namespace sepolml
