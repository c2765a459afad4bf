#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "sepolml/dataset.hpp"
#include "sepolml/generator.hpp"

namespace sepolml {

/// Strips the generator's freshness suffix: "financial_data_e12_t" ->
/// "financial_data", "httpd_t" -> "httpd", anything else unchanged.
std::string stem_of(const std::string& type_name);

/// Name-pool knowledge the rule-based detector matches against.
struct OracleContext {
  std::set<std::string> sensitive_stems;
  std::set<std::string> critical_stems;
  std::set<std::string> network_classes;
  std::set<std::string> privileged_permissions;
  std::vector<std::pair<std::string, std::string>> exclusive_role_pairs;
  std::map<std::string, std::string> system_process_resources;  // proc stem -> resource stem
  std::vector<std::pair<std::string, std::string>> path_conventions;

  static OracleContext from_config(const GeneratorConfig& config);
};

/// Deterministic pattern-matching detector over one example's statements.
/// Checks violation classes in fixed priority order (9, 5, 1, 8, 3, 7, 2,
/// 4, 6, 10) and returns the first match, or 0 when nothing matches. Used
/// both as the labeling ground truth check and as the non-learning baseline.
int baseline_detect(const LabeledExample& example, const OracleContext& context);

struct OracleMismatch {
  std::string example_id;
  int expected = 0;
  int detected = 0;
};

/// Runs the detector over every example and reports label disagreements.
std::vector<OracleMismatch> validate_dataset(const LabeledDataset& dataset,
                                             const OracleContext& context);

}  // namespace sepolml
