#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sepolml/dataset.hpp"

namespace sepolml {

/// Name pools and sizing for synthetic corpus generation. Every violation
/// class draws from its own pool so the stem of a type name identifies the
/// security role the type plays; pools must therefore stay pairwise
/// disjoint (validate() enforces this).
struct GeneratorConfig {
  int examples_per_label = 41;
  std::uint64_t seed = 42;

  /// Stems for process domains acting as rule subjects.
  std::vector<std::string> subject_domains;
  /// Stems for data types whose confidentiality matters (read+write by one
  /// subject is the duty-separation violation).
  std::vector<std::string> sensitive_data_types;
  /// Stems for system files that must never be modified by ordinary
  /// domains.
  std::vector<std::string> critical_file_types;
  /// Security classes describing network endpoints.
  std::vector<std::string> network_classes;
  /// Pairs of mutually exclusive roles; one subject transitioning into
  /// both is the role-separation violation.
  std::vector<std::pair<std::string, std::string>> exclusive_role_pairs;
  /// System process stem -> resource stem it must be able to reach.
  std::vector<std::pair<std::string, std::string>> system_process_resources;
  /// Capability permissions that ordinary domains must not hold.
  std::vector<std::string> privileged_permissions;
  /// Filesystem prefix -> expected final word of a type stem labeled for
  /// that location (e.g. "/etc" -> "conf").
  std::vector<std::pair<std::string, std::string>> path_conventions;

  static GeneratorConfig defaults();

  /// Throws ConfigError on empty pools, bad sizing, or stem collisions
  /// across pools.
  void validate() const;
};

/// Deterministically generates one example of the given violation class.
/// `ordinal` must be unique across the corpus; it salts fresh type names so
/// examples never share types.
LabeledExample generate_example(const GeneratorConfig& config, int label, int index, int ordinal);

/// Balanced corpus: examples_per_label examples of every violation class,
/// in label-major order. The result is checked against the rule-based
/// detector before returning, so a delivered corpus is always consistent
/// with its labels.
LabeledDataset generate_dataset(const GeneratorConfig& config);

}  // namespace sepolml
