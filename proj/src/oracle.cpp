#include "sepolml/oracle.hpp"

#include <algorithm>
#include <cctype>

namespace sepolml {

namespace {

bool has_perm(const AllowRule& rule, const std::string& perm) {
  return std::find(rule.permissions.begin(), rule.permissions.end(), perm) !=
         rule.permissions.end();
}

std::vector<const AllowRule*> allow_rules(const LabeledExample& example) {
  std::vector<const AllowRule*> rules;
  for (const auto& statement : example.rules) {
    if (const auto* allow = std::get_if<AllowRule>(&statement)) rules.push_back(allow);
  }
  return rules;
}

std::vector<const TypeTransitionRule*> transition_rules(const LabeledExample& example) {
  std::vector<const TypeTransitionRule*> rules;
  for (const auto& statement : example.rules) {
    if (const auto* transition = std::get_if<TypeTransitionRule>(&statement)) {
      rules.push_back(transition);
    }
  }
  return rules;
}

/// All type names the example mentions, declared or referenced.
std::vector<std::string> type_universe(const LabeledExample& example) {
  std::set<std::string> seen;
  for (const auto& statement : example.declarations) {
    if (const auto* decl = std::get_if<TypeDecl>(&statement)) seen.insert(decl->name);
  }
  for (const auto& statement : example.rules) {
    if (const auto* allow = std::get_if<AllowRule>(&statement)) {
      seen.insert(allow->source);
      seen.insert(allow->target);
    } else if (const auto* transition = std::get_if<TypeTransitionRule>(&statement)) {
      seen.insert(transition->source_domain);
      seen.insert(transition->target_type);
      seen.insert(transition->new_type);
    }
  }
  return {seen.begin(), seen.end()};
}

std::string last_word(const std::string& stem) {
  const size_t pos = stem.rfind('_');
  return pos == std::string::npos ? stem : stem.substr(pos + 1);
}

// Permissions whose presence on a file rule means the subject can alter the
// target, used by the critical-file check.
const std::vector<std::string> kModificationPerms = {"write", "append", "unlink", "rename",
                                                     "setattr"};

// The three access grants a complete domain transition needs: the new
// domain's entrypoint on the executable, the starting domain's execute on
// the executable, and the starting domain's transition into the new domain.
struct TransitionTriple {
  bool entrypoint = false;
  bool execute = false;
  bool transition = false;

  int present() const {
    return static_cast<int>(entrypoint) + static_cast<int>(execute) +
           static_cast<int>(transition);
  }
};

TransitionTriple triple_state(const std::vector<const AllowRule*>& allows,
                              const std::string& start, const std::string& executable,
                              const std::string& new_domain) {
  TransitionTriple state;
  for (const auto* rule : allows) {
    if (rule->security_class == "file" && rule->source == new_domain &&
        rule->target == executable && has_perm(*rule, "entrypoint")) {
      state.entrypoint = true;
    }
    if (rule->security_class == "file" && rule->source == start && rule->target == executable &&
        has_perm(*rule, "execute")) {
      state.execute = true;
    }
    if (rule->security_class == "process" && rule->source == start && rule->target == new_domain &&
        has_perm(*rule, "transition")) {
      state.transition = true;
    }
  }
  return state;
}

// 9: two transitions from the same (source, executable, class) into
// different domains leave the resulting context ambiguous.
bool detect_contradictory_transitions(const LabeledExample& example) {
  const auto transitions = transition_rules(example);
  for (size_t i = 0; i < transitions.size(); ++i) {
    for (size_t j = i + 1; j < transitions.size(); ++j) {
      if (transitions[i]->source_domain == transitions[j]->source_domain &&
          transitions[i]->target_type == transitions[j]->target_type &&
          transitions[i]->security_class == transitions[j]->security_class &&
          transitions[i]->new_type != transitions[j]->new_type) {
        return true;
      }
    }
  }
  return false;
}

// 5: some (start, executable, new domain) assignment holds exactly two of
// the three grants a working domain transition needs — a broken, partially
// wired transition. A complete triple (all three) is healthy, one grant
// alone is unrelated access.
bool detect_broken_transition(const LabeledExample& example) {
  const auto allows = allow_rules(example);
  if (allows.empty()) return false;
  const auto types = type_universe(example);
  for (const auto& start : types) {
    for (const auto& executable : types) {
      if (executable == start) continue;
      for (const auto& new_domain : types) {
        if (new_domain == start || new_domain == executable) continue;
        if (triple_state(allows, start, executable, new_domain).present() == 2) return true;
      }
    }
  }
  return false;
}

// 1: one subject holding both read and write on a sensitive data type.
bool detect_sensitive_read_write(const LabeledExample& example, const OracleContext& context) {
  const auto allows = allow_rules(example);
  std::map<std::pair<std::string, std::string>, std::pair<bool, bool>> access;
  for (const auto* rule : allows) {
    if (!context.sensitive_stems.contains(stem_of(rule->target))) continue;
    auto& [can_read, can_write] = access[{rule->source, rule->target}];
    can_read = can_read || has_perm(*rule, "read");
    can_write = can_write || has_perm(*rule, "write");
  }
  return std::any_of(access.begin(), access.end(),
                     [](const auto& entry) { return entry.second.first && entry.second.second; });
}

// 8: one subject allowed to transition into both halves of a mutually
// exclusive role pair.
bool detect_exclusive_roles(const LabeledExample& example, const OracleContext& context) {
  const auto allows = allow_rules(example);
  std::map<std::string, std::set<std::string>> role_entries;  // subject -> role stems
  for (const auto* rule : allows) {
    if (rule->security_class == "process" && has_perm(*rule, "transition")) {
      role_entries[rule->source].insert(stem_of(rule->target));
    }
  }
  for (const auto& [subject, stems] : role_entries) {
    for (const auto& [first, second] : context.exclusive_role_pairs) {
      if (stems.contains(first) && stems.contains(second)) return true;
    }
  }
  return false;
}

// 3: any modifying permission on a critical system file type.
bool detect_critical_modification(const LabeledExample& example, const OracleContext& context) {
  for (const auto* rule : allow_rules(example)) {
    if (!context.critical_stems.contains(stem_of(rule->target))) continue;
    for (const auto& perm : kModificationPerms) {
      if (has_perm(*rule, perm)) return true;
    }
  }
  return false;
}

// 7: a connect grant on a network endpoint class.
bool detect_network_access(const LabeledExample& example, const OracleContext& context) {
  for (const auto* rule : allow_rules(example)) {
    if (context.network_classes.contains(rule->security_class) && has_perm(*rule, "name_connect")) {
      return true;
    }
  }
  return false;
}

// 2: capability-style privileged permissions granted to a domain.
bool detect_privileged_assignment(const LabeledExample& example, const OracleContext& context) {
  for (const auto* rule : allow_rules(example)) {
    for (const auto& perm : rule->permissions) {
      if (context.privileged_permissions.contains(perm)) return true;
    }
  }
  return false;
}

// 4: an executable file type used as a network endpoint.
bool detect_incorrect_type_usage(const LabeledExample& example, const OracleContext& context) {
  for (const auto* rule : allow_rules(example)) {
    if (context.network_classes.contains(rule->security_class) &&
        stem_of(rule->target).ends_with("_exec")) {
      return true;
    }
  }
  return false;
}

// 6: a type whose concrete instance lives under a filesystem prefix whose
// naming convention disagrees with the type stem's final word.
bool detect_mislabeled_instance(const LabeledExample& example, const OracleContext& context) {
  for (const auto& [type_name, instance] : example.instance_names) {
    std::string expected_word;
    size_t best_prefix = 0;
    for (const auto& [prefix, word] : context.path_conventions) {
      if (instance.starts_with(prefix + "/") && prefix.size() > best_prefix) {
        best_prefix = prefix.size();
        expected_word = word;
      }
    }
    if (expected_word.empty()) continue;
    if (last_word(stem_of(type_name)) != expected_word) return true;
  }
  return false;
}

// 10: a system process domain present alongside its required resource type
// with no allow rule granting it access to that resource.
bool detect_missing_system_access(const LabeledExample& example, const OracleContext& context) {
  const auto types = type_universe(example);
  const auto allows = allow_rules(example);
  const std::vector<std::string> needed_perms = {"read", "write", "append", "open"};
  for (const auto& process_type : types) {
    const auto pair = context.system_process_resources.find(stem_of(process_type));
    if (pair == context.system_process_resources.end()) continue;
    for (const auto& resource_type : types) {
      if (stem_of(resource_type) != pair->second) continue;
      bool reachable = false;
      for (const auto* rule : allows) {
        if (rule->source != process_type || rule->target != resource_type) continue;
        for (const auto& perm : needed_perms) {
          if (has_perm(*rule, perm)) {
            reachable = true;
            break;
          }
        }
        if (reachable) break;
      }
      if (!reachable) return true;
    }
  }
  return false;
}

}  // namespace

std::string stem_of(const std::string& type_name) {
  // "<stem>_e<digits>_t" -> stem
  if (type_name.size() > 2 && type_name.ends_with("_t")) {
    const std::string base = type_name.substr(0, type_name.size() - 2);
    const size_t marker = base.rfind("_e");
    if (marker != std::string::npos && marker + 2 < base.size()) {
      const std::string digits = base.substr(marker + 2);
      if (std::all_of(digits.begin(), digits.end(),
                      [](unsigned char c) { return std::isdigit(c) != 0; })) {
        return base.substr(0, marker);
      }
    }
    return base;
  }
  return type_name;
}

OracleContext OracleContext::from_config(const GeneratorConfig& config) {
  OracleContext context;
  context.sensitive_stems.insert(config.sensitive_data_types.begin(),
                                 config.sensitive_data_types.end());
  context.critical_stems.insert(config.critical_file_types.begin(),
                                config.critical_file_types.end());
  context.network_classes.insert(config.network_classes.begin(), config.network_classes.end());
  context.privileged_permissions.insert(config.privileged_permissions.begin(),
                                        config.privileged_permissions.end());
  context.exclusive_role_pairs = config.exclusive_role_pairs;
  for (const auto& [process, resource] : config.system_process_resources) {
    context.system_process_resources.emplace(process, resource);
  }
  context.path_conventions = config.path_conventions;
  return context;
}

int baseline_detect(const LabeledExample& example, const OracleContext& context) {
  if (detect_contradictory_transitions(example)) return 9;
  if (detect_broken_transition(example)) return 5;
  if (detect_sensitive_read_write(example, context)) return 1;
  if (detect_exclusive_roles(example, context)) return 8;
  if (detect_critical_modification(example, context)) return 3;
  if (detect_network_access(example, context)) return 7;
  if (detect_privileged_assignment(example, context)) return 2;
  if (detect_incorrect_type_usage(example, context)) return 4;
  if (detect_mislabeled_instance(example, context)) return 6;
  if (detect_missing_system_access(example, context)) return 10;
  return 0;
}

std::vector<OracleMismatch> validate_dataset(const LabeledDataset& dataset,
                                             const OracleContext& context) {
  std::vector<OracleMismatch> mismatches;
  for (const auto& example : dataset.examples) {
    const int detected = baseline_detect(example, context);
    if (detected != example.label) {
      mismatches.push_back({example.example_id, example.label, detected});
    }
  }
  return mismatches;
}

}  // namespace sepolml
