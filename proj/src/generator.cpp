#include "sepolml/generator.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "sepolml/errors.hpp"
#include "sepolml/oracle.hpp"
#include "sepolml/rng.hpp"

namespace sepolml {

namespace {

template <class T>
const T& pick(Rng& rng, const std::vector<T>& pool) {
  return pool[rng.below(pool.size())];
}

/// Accumulates one example: fresh type names are declared on first use and
/// salted with the example ordinal so no two examples share a type.
class ExampleBuilder {
 public:
  ExampleBuilder(std::string example_id, int label, int ordinal) : ordinal_(ordinal) {
    example_.example_id = std::move(example_id);
    example_.label = label;
  }

  TypeName fresh(const std::string& stem) {
    TypeName name = stem + "_e" + std::to_string(ordinal_) + "_t";
    if (declared_.insert(name).second) {
      TypeDecl decl;
      decl.name = name;
      example_.declarations.emplace_back(std::move(decl));
    }
    return name;
  }

  void allow(const TypeName& source, const TypeName& target, const SecurityClassName& cls,
             std::vector<Permission> permissions) {
    AllowRule rule;
    rule.source = source;
    rule.target = target;
    rule.security_class = cls;
    rule.permissions = std::move(permissions);
    example_.rules.emplace_back(std::move(rule));
  }

  void transition(const TypeName& source, const TypeName& target, const SecurityClassName& cls,
                  const TypeName& new_type) {
    TypeTransitionRule rule;
    rule.source_domain = source;
    rule.target_type = target;
    rule.security_class = cls;
    rule.new_type = new_type;
    example_.rules.emplace_back(std::move(rule));
  }

  void instance(const TypeName& type_name, std::string instance_name) {
    example_.instance_names[type_name] = std::move(instance_name);
  }

  std::string salt() const { return std::to_string(ordinal_); }

  LabeledExample take() { return std::move(example_); }

 private:
  int ordinal_;
  LabeledExample example_;
  std::set<TypeName> declared_;
};

// Benign policies: plain resource reads, or a correctly wired domain
// transition plus the access the new domain needs.
void gen_no_anomaly(ExampleBuilder& b, Rng& rng, const GeneratorConfig& config) {
  const std::string& subject = pick(rng, config.subject_domains);
  switch (rng.below(3)) {
    case 0: {
      // Correctly labeled resource: the instance path agrees with the stem.
      const auto& [prefix, word] = pick(rng, config.path_conventions);
      const TypeName source = b.fresh(subject);
      const TypeName target = b.fresh(subject + "_" + word);
      b.allow(source, target, "file", {"read", "getattr", "open"});
      b.instance(target, prefix + "/" + subject + b.salt());
      break;
    }
    case 1: {
      const TypeName source = b.fresh(subject);
      b.allow(source, b.fresh(subject + "_content"), "file", {"read", "getattr"});
      b.allow(source, b.fresh(subject + "_cache"), "file", {"read", "open"});
      break;
    }
    default: {
      const TypeName parent = b.fresh(subject);
      const TypeName executable = b.fresh(subject + "_exec");
      const TypeName child = b.fresh(subject + "_worker");
      b.allow(child, executable, "file", {"entrypoint"});
      b.allow(parent, executable, "file", {"execute"});
      b.allow(parent, child, "process", {"transition"});
      b.transition(parent, executable, "process", child);
      b.allow(child, b.fresh(subject + "_content"), "file", {"read", "getattr"});
      break;
    }
  }
}

// 1: one subject reads and writes the same sensitive data type.
void gen_sensitive_read_write(ExampleBuilder& b, Rng& rng, const GeneratorConfig& config) {
  const TypeName source = b.fresh(pick(rng, config.subject_domains));
  const TypeName target = b.fresh(pick(rng, config.sensitive_data_types));
  b.allow(source, target, "file", {"read", "write"});
  if (rng.below(2) == 1) {
    b.allow(source, b.fresh(stem_of(source) + "_cache"), "file", {"getattr"});
  }
}

// 2: capability permissions no ordinary domain should hold.
void gen_privileged_assignment(ExampleBuilder& b, Rng& rng, const GeneratorConfig& config) {
  const TypeName source = b.fresh(pick(rng, config.subject_domains));
  std::vector<Permission> perms = {pick(rng, config.privileged_permissions)};
  if (rng.below(2) == 1 && config.privileged_permissions.size() > 1) {
    const Permission& extra = pick(rng, config.privileged_permissions);
    if (extra != perms.front()) perms.push_back(extra);
  }
  b.allow(source, source, "capability", std::move(perms));
}

// 3: write access to a critical system file type.
void gen_critical_modification(ExampleBuilder& b, Rng& rng, const GeneratorConfig& config) {
  const TypeName source = b.fresh(pick(rng, config.subject_domains));
  const TypeName target = b.fresh(pick(rng, config.critical_file_types));
  std::vector<Permission> perms = {"write"};
  if (rng.below(2) == 1) perms.push_back("unlink");
  b.allow(source, target, "file", std::move(perms));
}

// 4: an executable file type addressed as a network endpoint.
void gen_incorrect_type_usage(ExampleBuilder& b, Rng& rng, const GeneratorConfig& config) {
  const TypeName source = b.fresh(pick(rng, config.subject_domains));
  const TypeName target = b.fresh(pick(rng, config.subject_domains) + "_exec");
  b.allow(source, target, pick(rng, config.network_classes), {"read", "write", "bind"});
}

// 5: a declared transition whose wiring is incomplete; one of the three
// required grants is missing.
void gen_broken_transition(ExampleBuilder& b, Rng& rng, const GeneratorConfig& config) {
  const std::string& subject = pick(rng, config.subject_domains);
  const TypeName parent = b.fresh(subject);
  const TypeName executable = b.fresh(subject + "_exec");
  const TypeName child = b.fresh(subject + "_worker");
  const auto omitted = rng.below(3);
  if (omitted != 0) b.allow(child, executable, "file", {"entrypoint"});
  if (omitted != 1) b.allow(parent, executable, "file", {"execute"});
  if (omitted != 2) b.allow(parent, child, "process", {"transition"});
  b.transition(parent, executable, "process", child);
}

// 6: the type stem promises one filesystem location, the instance lives in
// another.
void gen_mislabeled_instance(ExampleBuilder& b, Rng& rng, const GeneratorConfig& config) {
  const std::string& subject = pick(rng, config.subject_domains);
  const auto& stem_convention = pick(rng, config.path_conventions);
  const auto* home_convention = &pick(rng, config.path_conventions);
  while (home_convention->second == stem_convention.second) {
    home_convention = &pick(rng, config.path_conventions);
  }
  const TypeName source = b.fresh(subject);
  const TypeName target = b.fresh(subject + "_" + stem_convention.second);
  b.allow(source, target, "file", {"relabelfrom", "relabelto"});
  b.instance(target, home_convention->first + "/" + subject + b.salt());
}

// 7: a connect grant on a network class.
void gen_network_access(ExampleBuilder& b, Rng& rng, const GeneratorConfig& config) {
  const std::string& subject = pick(rng, config.subject_domains);
  const TypeName source = b.fresh(subject);
  const TypeName target = b.fresh(subject + "_port");
  b.allow(source, target, pick(rng, config.network_classes), {"name_connect"});
}

// 8: one subject may transition into both halves of an exclusive role pair.
void gen_exclusive_roles(ExampleBuilder& b, Rng& rng, const GeneratorConfig& config) {
  const TypeName source = b.fresh(pick(rng, config.subject_domains));
  const auto& pair = pick(rng, config.exclusive_role_pairs);
  b.allow(source, b.fresh(pair.first), "process", {"transition"});
  b.allow(source, b.fresh(pair.second), "process", {"transition"});
}

// 9: the same (source, executable) transitions into two different domains.
void gen_contradictory_transitions(ExampleBuilder& b, Rng& rng, const GeneratorConfig& config) {
  const std::string& subject = pick(rng, config.subject_domains);
  const TypeName parent = b.fresh(subject);
  const TypeName executable = b.fresh(subject + "_exec");
  b.transition(parent, executable, "process", b.fresh(subject + "_worker"));
  b.transition(parent, executable, "process", b.fresh(subject + "_helper"));
}

// 10: a system process domain is fully wired up but never granted the
// resource access it needs to do its job.
void gen_missing_system_access(ExampleBuilder& b, Rng& rng, const GeneratorConfig& config) {
  const auto& [process_stem, resource_stem] = pick(rng, config.system_process_resources);
  const TypeName launcher = b.fresh(process_stem + "_launcher");
  const TypeName executable = b.fresh(process_stem + "_exec");
  const TypeName daemon = b.fresh(process_stem);
  b.fresh(resource_stem);  // declared, never granted
  b.allow(daemon, executable, "file", {"entrypoint"});
  b.allow(launcher, executable, "file", {"execute"});
  b.allow(launcher, daemon, "process", {"transition"});
}

void require_nonempty(const std::string& pool, size_t size) {
  if (size == 0) throw ConfigError("generator pool '" + pool + "' is empty");
}

}  // namespace

GeneratorConfig GeneratorConfig::defaults() {
  GeneratorConfig config;
  config.subject_domains = {"web_server",    "db_engine",   "mail_agent",   "ftp_daemon",
                            "app_runtime",   "cache_service", "auth_broker", "proxy_gateway"};
  config.sensitive_data_types = {"financial_data", "customer_records", "payroll_data",
                                 "medical_history", "secret_config"};
  config.critical_file_types = {"shadow", "passwd_file", "sshd_config", "boot_loader", "sudoers"};
  config.network_classes = {"tcp_socket", "udp_socket"};
  config.exclusive_role_pairs = {{"payment_initiator", "payment_approver"},
                                 {"db_admin", "db_auditor"},
                                 {"release_builder", "release_signer"}};
  config.system_process_resources = {{"logrotate", "system_log_store"},
                                     {"cron_daemon", "crontab_spool"},
                                     {"backup_agent", "backup_archive"},
                                     {"mail_queue", "mail_spool"}};
  config.privileged_permissions = {"setuid", "setgid", "sys_admin",
                                   "sys_module", "dac_override", "sys_ptrace"};
  config.path_conventions = {{"/var/log", "log"},
                             {"/etc", "conf"},
                             {"/var/www", "content"},
                             {"/var/spool", "spool"},
                             {"/srv/data", "data"}};
  return config;
}

void GeneratorConfig::validate() const {
  if (examples_per_label < 1) throw ConfigError("examples_per_label must be at least 1");
  require_nonempty("subject_domains", subject_domains.size());
  require_nonempty("sensitive_data_types", sensitive_data_types.size());
  require_nonempty("critical_file_types", critical_file_types.size());
  require_nonempty("network_classes", network_classes.size());
  require_nonempty("exclusive_role_pairs", exclusive_role_pairs.size());
  require_nonempty("system_process_resources", system_process_resources.size());
  require_nonempty("privileged_permissions", privileged_permissions.size());
  if (path_conventions.size() < 2) {
    throw ConfigError("path_conventions needs at least two entries");
  }

  // The detector reads security roles off type stems, so a stem reused
  // across pools would make labels ambiguous.
  std::map<std::string, std::string> stem_owner;
  auto claim = [&](const std::string& stem, const std::string& pool) {
    auto [it, inserted] = stem_owner.emplace(stem, pool);
    if (!inserted) {
      throw ConfigError("stem '" + stem + "' appears in both '" + it->second + "' and '" + pool +
                        "'");
    }
  };
  for (const auto& stem : subject_domains) claim(stem, "subject_domains");
  for (const auto& stem : sensitive_data_types) claim(stem, "sensitive_data_types");
  for (const auto& stem : critical_file_types) claim(stem, "critical_file_types");
  for (const auto& [a, b] : exclusive_role_pairs) {
    if (a == b) throw ConfigError("exclusive role pair '" + a + "' pairs a role with itself");
    claim(a, "exclusive_role_pairs");
    claim(b, "exclusive_role_pairs");
  }
  for (const auto& [process, resource] : system_process_resources) {
    claim(process, "system_process_resources");
    claim(resource, "system_process_resources");
  }

  std::set<std::string> convention_words;
  for (const auto& [prefix, word] : path_conventions) {
    if (prefix.empty() || prefix.front() != '/' || prefix.back() == '/') {
      throw ConfigError("path convention prefix '" + prefix + "' must be absolute with no "
                        "trailing slash");
    }
    convention_words.insert(word);
  }
  if (convention_words.size() < 2) {
    throw ConfigError("path_conventions needs at least two distinct words");
  }
  for (const auto& [a, word_a] : path_conventions) {
    for (const auto& [b, word_b] : path_conventions) {
      if (a != b && b.starts_with(a + "/")) {
        throw ConfigError("path convention prefixes '" + a + "' and '" + b + "' nest");
      }
    }
  }

  const std::set<std::string> structural_perms = {
      "read",    "write",   "getattr",    "open",       "append",       "unlink",
      "execute", "entrypoint", "transition", "name_connect", "relabelfrom", "relabelto", "bind"};
  for (const auto& perm : privileged_permissions) {
    if (structural_perms.contains(perm)) {
      throw ConfigError("privileged permission '" + perm +
                        "' collides with a structural permission");
    }
  }
}

LabeledExample generate_example(const GeneratorConfig& config, int label, int index,
                                int ordinal) {
  char id[32];
  std::snprintf(id, sizeof(id), "ex%02d_%04d", label, index);
  ExampleBuilder builder(id, label, ordinal);
  Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(label),
                      static_cast<std::uint64_t>(index)));
  switch (label) {
    case 0: gen_no_anomaly(builder, rng, config); break;
    case 1: gen_sensitive_read_write(builder, rng, config); break;
    case 2: gen_privileged_assignment(builder, rng, config); break;
    case 3: gen_critical_modification(builder, rng, config); break;
    case 4: gen_incorrect_type_usage(builder, rng, config); break;
    case 5: gen_broken_transition(builder, rng, config); break;
    case 6: gen_mislabeled_instance(builder, rng, config); break;
    case 7: gen_network_access(builder, rng, config); break;
    case 8: gen_exclusive_roles(builder, rng, config); break;
    case 9: gen_contradictory_transitions(builder, rng, config); break;
    case 10: gen_missing_system_access(builder, rng, config); break;
    default: throw ConfigError("violation label " + std::to_string(label) + " outside [0, 10]");
  }
  return builder.take();
}

LabeledDataset generate_dataset(const GeneratorConfig& config) {
  config.validate();
  LabeledDataset dataset;
  dataset.examples.reserve(static_cast<size_t>(config.examples_per_label) * kViolationLabelCount);
  for (int label = 0; label < kViolationLabelCount; ++label) {
    for (int index = 0; index < config.examples_per_label; ++index) {
      const int ordinal = label * config.examples_per_label + index;
      dataset.examples.push_back(generate_example(config, label, index, ordinal));
    }
  }

  const auto mismatches = validate_dataset(dataset, OracleContext::from_config(config));
  if (!mismatches.empty()) {
    const auto& first = mismatches.front();
    throw Error("generated corpus is inconsistent with the detector: example '" +
                first.example_id + "' labeled " + std::to_string(first.expected) +
                " but detected as " + std::to_string(first.detected) + " (" +
                std::to_string(mismatches.size()) + " total)");
  }
  return dataset;
}

}  // namespace sepolml
