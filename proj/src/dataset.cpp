#include "sepolml/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "sepolml/errors.hpp"
#include "sepolml/rng.hpp"

namespace sepolml {

namespace {

const std::array<std::string, kViolationLabelCount> kLabelDescriptions = {
    "No anomalies",
    "Separation of Duty (SoD) violation - single subject with read and write access to "
    "sensitive data",
    "Improper privilege assignment",
    "Critical system file modification",
    "Incorrect type usage",
    "Domain transition issues",
    "Mislabeled files or processes",
    "Unauthorized network access",
    "Separation of Duty (SoD) violation - single subject with access to multiple mutually "
    "exclusive roles",
    "Contradictory type transitions for the same process",
    "Missing necessary file access for system processes",
};

bool is_rule(const Statement& statement) {
  return std::holds_alternative<AllowRule>(statement) ||
         std::holds_alternative<TypeTransitionRule>(statement);
}

std::string csv_field(const std::string& value) {
  if (value.find_first_of(",\"\n") == std::string::npos) return value;
  std::string quoted = "\"";
  for (char c : value) {
    if (c == '"') quoted += "\"\"";
    else quoted.push_back(c);
  }
  return quoted + "\"";
}

/// Splits one CSV record; the input must contain no raw newlines (rule text
/// is single-line canonical form, so quoted newlines never occur here).
std::vector<std::string> parse_csv_record(const std::string& line, size_t line_number) {
  std::vector<std::string> fields;
  std::string field;
  bool in_quotes = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"' && field.empty()) {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  if (in_quotes) {
    throw Error("unterminated quoted field at line " + std::to_string(line_number));
  }
  fields.push_back(std::move(field));
  return fields;
}

}  // namespace

const std::string& violation_label_description(int label) {
  if (label < 0 || label >= kViolationLabelCount) {
    throw ConfigError("violation label " + std::to_string(label) + " outside [0, 10]");
  }
  return kLabelDescriptions[static_cast<size_t>(label)];
}

std::vector<size_t> LabeledDataset::label_counts() const {
  std::vector<size_t> counts(kViolationLabelCount, 0);
  for (const auto& example : examples) {
    if (example.label >= 0 && example.label < kViolationLabelCount) {
      ++counts[static_cast<size_t>(example.label)];
    }
  }
  return counts;
}

size_t LabeledDataset::rule_count() const {
  size_t count = 0;
  for (const auto& example : examples) count += example.rules.size();
  return count;
}

std::string example_policy_text(const LabeledExample& example) {
  std::string out;
  for (const auto& statement : example.declarations) {
    out += serialize(statement);
    out += '\n';
  }
  for (const auto& statement : example.rules) {
    out += serialize(statement);
    out += '\n';
  }
  return out;
}

std::string corpus_policy_text(const LabeledDataset& dataset) {
  std::string out;
  for (size_t i = 0; i < dataset.examples.size(); ++i) {
    if (i > 0) out += '\n';
    out += example_policy_text(dataset.examples[i]);
  }
  return out;
}

void write_dataset_csv(const LabeledDataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write dataset to " + path.string());
  out << "example_id,rule_index,rule_text,violation_class\n";
  for (const auto& example : dataset.examples) {
    for (size_t i = 0; i < example.rules.size(); ++i) {
      out << csv_field(example.example_id) << ',' << i << ','
          << csv_field(serialize(example.rules[i])) << ',' << example.label << '\n';
    }
  }
  if (!out) throw Error("failed writing dataset to " + path.string());
}

LabeledDataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read dataset from " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error("empty dataset file " + path.string());
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "example_id,rule_index,rule_text,violation_class") {
    throw Error("unexpected CSV header in " + path.string() + ": '" + line + "'");
  }

  LabeledDataset dataset;
  std::map<std::string, size_t> example_index;
  std::vector<std::vector<std::pair<size_t, Statement>>> pending_rules;
  size_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = parse_csv_record(line, line_number);
    if (fields.size() != 4) {
      throw Error("expected 4 CSV fields at line " + std::to_string(line_number) + ", got " +
                  std::to_string(fields.size()));
    }
    const std::string& example_id = fields[0];
    size_t rule_index = 0;
    int label = 0;
    try {
      rule_index = static_cast<size_t>(std::stoul(fields[1]));
      label = std::stoi(fields[3]);
    } catch (const std::exception&) {
      throw Error("non-numeric index or label at line " + std::to_string(line_number));
    }
    if (label < 0 || label >= kViolationLabelCount) {
      throw Error("violation class " + std::to_string(label) + " outside [0, 10] at line " +
                  std::to_string(line_number));
    }

    PolicyDocument rule_doc = parse_document(fields[2], ParseMode::Lenient, path.string());
    if (rule_doc.statements.size() != 1 || !is_rule(rule_doc.statements.front())) {
      throw Error("rule_text at line " + std::to_string(line_number) +
                  " is not a single allow/type_transition rule");
    }

    auto [it, inserted] = example_index.try_emplace(example_id, dataset.examples.size());
    if (inserted) {
      LabeledExample example;
      example.example_id = example_id;
      example.label = label;
      dataset.examples.push_back(std::move(example));
      pending_rules.emplace_back();
    } else if (dataset.examples[it->second].label != label) {
      throw Error("example '" + example_id + "' has conflicting labels " +
                  std::to_string(dataset.examples[it->second].label) + " and " +
                  std::to_string(label));
    }
    pending_rules[it->second].emplace_back(rule_index, std::move(rule_doc.statements.front()));
  }

  for (size_t i = 0; i < dataset.examples.size(); ++i) {
    auto& rules = pending_rules[i];
    std::sort(rules.begin(), rules.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [index, statement] : rules) {
      dataset.examples[i].rules.push_back(std::move(statement));
    }
  }
  if (dataset.examples.empty()) throw Error("dataset " + path.string() + " has no rows");
  return dataset;
}

void write_instance_names(const LabeledDataset& dataset, const std::filesystem::path& path) {
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  for (const auto& example : dataset.examples) {
    if (example.instance_names.empty()) continue;
    nlohmann::ordered_json entry = nlohmann::ordered_json::object();
    for (const auto& [type_name, instance] : example.instance_names) {
      entry[type_name] = instance;
    }
    out[example.example_id] = std::move(entry);
  }
  std::ofstream file(path);
  if (!file) throw Error("cannot write instance names to " + path.string());
  file << out.dump(2) << '\n';
  if (!file) throw Error("failed writing instance names to " + path.string());
}

void read_instance_names(LabeledDataset& dataset, const std::filesystem::path& path) {
  std::ifstream file(path);
  if (!file) throw Error("cannot read instance names from " + path.string());
  nlohmann::json parsed;
  try {
    file >> parsed;
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed instance name file " + path.string() + ": " + e.what());
  }
  if (!parsed.is_object()) throw Error("instance name file must hold a JSON object");

  std::map<std::string, LabeledExample*> by_id;
  for (auto& example : dataset.examples) by_id[example.example_id] = &example;
  for (const auto& [example_id, entry] : parsed.items()) {
    auto it = by_id.find(example_id);
    if (it == by_id.end()) continue;  // stale sidecar rows are harmless
    if (!entry.is_object()) throw Error("instance entry for '" + example_id + "' must be an object");
    for (const auto& [type_name, instance] : entry.items()) {
      if (!instance.is_string()) {
        throw Error("instance name for type '" + type_name + "' must be a string");
      }
      it->second->instance_names[type_name] = instance.get<std::string>();
    }
  }
}

std::vector<LabeledExample> split_into_examples(const PolicyDocument& doc) {
  std::vector<LabeledExample> examples;
  int last_line = -10;
  for (const auto& statement : doc.statements) {
    const SourceSpan span = statement_span(statement);
    if (examples.empty() || span.line - last_line >= 2) {
      LabeledExample example;
      example.example_id = "example_" + std::to_string(examples.size());
      example.label = -1;
      examples.push_back(std::move(example));
    }
    last_line = span.line;
    if (is_rule(statement)) {
      examples.back().rules.push_back(statement);
    } else {
      examples.back().declarations.push_back(statement);
    }
  }
  return examples;
}

SplitIndices stratified_split(const LabeledDataset& dataset, double test_fraction,
                              std::uint64_t seed) {
  if (test_fraction <= 0.0 || test_fraction >= 1.0) {
    throw ConfigError("test fraction must be inside (0, 1)");
  }
  std::vector<std::vector<size_t>> by_label(kViolationLabelCount);
  for (size_t i = 0; i < dataset.examples.size(); ++i) {
    const int label = dataset.examples[i].label;
    if (label < 0 || label >= kViolationLabelCount) {
      throw Error("example '" + dataset.examples[i].example_id + "' has invalid label " +
                  std::to_string(label));
    }
    by_label[static_cast<size_t>(label)].push_back(i);
  }

  SplitIndices split;
  for (int label = 0; label < kViolationLabelCount; ++label) {
    auto& indices = by_label[static_cast<size_t>(label)];
    if (indices.empty()) continue;
    if (indices.size() < 2) throw LabelTooSmallError(label, indices.size());
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(label)));
    rng.shuffle(indices);
    size_t test_count = static_cast<size_t>(
        std::llround(static_cast<double>(indices.size()) * test_fraction));
    test_count = std::clamp<size_t>(test_count, 1, indices.size() - 1);
    for (size_t i = 0; i < indices.size(); ++i) {
      (i < test_count ? split.test : split.train).push_back(indices[i]);
    }
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  if (split.train.empty() || split.test.empty()) {
    throw Error("stratified split produced an empty partition");
  }
  return split;
}

}  // namespace sepolml
