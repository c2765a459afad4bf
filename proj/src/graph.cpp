#include "sepolml/graph.hpp"

#include <algorithm>

#include "json.hpp"

namespace sepolml {

namespace {

void merge_permissions(std::vector<Permission>& into, const std::vector<Permission>& from) {
  for (const auto& perm : from) {
    if (std::find(into.begin(), into.end(), perm) == into.end()) into.push_back(perm);
  }
}

void union_sorted(std::vector<Permission>& into, const std::vector<Permission>& from) {
  for (const auto& perm : from) {
    auto it = std::lower_bound(into.begin(), into.end(), perm);
    if (it == into.end() || *it != perm) into.insert(it, perm);
  }
}

Edge* find_edge(std::vector<Edge>& edges, int from, int to, EdgeRelation relation,
                const std::string& security_class) {
  for (auto& edge : edges) {
    if (edge.from == from && edge.to == to && edge.relation == relation &&
        edge.security_class == security_class) {
      return &edge;
    }
  }
  return nullptr;
}

std::string cypher_quote(const std::string& text) {
  std::string out = "'";
  for (char c : text) {
    if (c == '\'' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('\'');
  return out;
}

std::string cypher_list(const std::vector<Permission>& permissions) {
  std::string out = "[";
  for (size_t i = 0; i < permissions.size(); ++i) {
    if (i > 0) out += ", ";
    out += cypher_quote(permissions[i]);
  }
  return out + "]";
}

}  // namespace

const char* node_kind_name(NodeKind kind) {
  switch (kind) {
    case NodeKind::Subject: return "subject";
    case NodeKind::Object: return "object";
    case NodeKind::SecurityClass: return "class";
  }
  return "?";
}

const char* edge_relation_name(EdgeRelation relation) {
  switch (relation) {
    case EdgeRelation::Allow: return "ALLOW";
    case EdgeRelation::Transition: return "TRANSITION";
    case EdgeRelation::InstanceOf: return "INSTANCE_OF";
  }
  return "?";
}

std::optional<int> PolicyGraph::find_subject(const std::string& type_name) const {
  auto it = subject_index_.find(type_name);
  if (it == subject_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<int> PolicyGraph::find_object(const std::string& type_name,
                                            const std::string& class_name) const {
  auto it = object_index_.find({type_name, class_name});
  if (it == object_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<int> PolicyGraph::find_security_class(const std::string& class_name) const {
  auto it = class_index_.find(class_name);
  if (it == class_index_.end()) return std::nullopt;
  return it->second;
}

std::string PolicyGraph::node_key(int id) const {
  const Node& node = nodes_.at(static_cast<size_t>(id));
  switch (node.kind) {
    case NodeKind::Subject: return "subject:" + node.type_name;
    case NodeKind::Object: return "object:" + node.type_name + ":" + node.class_name;
    case NodeKind::SecurityClass: return "class:" + node.class_name;
  }
  return "?";
}

GraphStats PolicyGraph::stats() const {
  GraphStats stats;
  stats.node_count = nodes_.size();
  stats.edge_count = edges_.size();
  stats.merged_duplicate_rules = merged_duplicate_rules_;
  for (const auto& node : nodes_) {
    switch (node.kind) {
      case NodeKind::Subject: ++stats.subject_count; break;
      case NodeKind::Object: ++stats.object_count; break;
      case NodeKind::SecurityClass: ++stats.class_count; break;
    }
  }
  for (const auto& edge : edges_) {
    switch (edge.relation) {
      case EdgeRelation::Allow: ++stats.allow_count; break;
      case EdgeRelation::Transition: ++stats.transition_count; break;
      case EdgeRelation::InstanceOf: ++stats.instance_of_count; break;
    }
  }
  return stats;
}

std::vector<std::vector<int>> PolicyGraph::undirected_view() const {
  std::vector<std::vector<int>> adjacency(nodes_.size());
  for (const auto& edge : edges_) {
    if (edge.from == edge.to) {
      adjacency[static_cast<size_t>(edge.from)].push_back(edge.to);
      continue;
    }
    adjacency[static_cast<size_t>(edge.from)].push_back(edge.to);
    adjacency[static_cast<size_t>(edge.to)].push_back(edge.from);
  }
  for (auto& neighbors : adjacency) {
    std::sort(neighbors.begin(), neighbors.end());
    neighbors.erase(std::unique(neighbors.begin(), neighbors.end()), neighbors.end());
  }
  return adjacency;
}

int PolicyGraph::intern_subject(const std::string& type_name) {
  auto it = subject_index_.find(type_name);
  if (it != subject_index_.end()) return it->second;
  const int id = static_cast<int>(nodes_.size());
  Node node;
  node.id = id;
  node.kind = NodeKind::Subject;
  node.type_name = type_name;
  nodes_.push_back(std::move(node));
  subject_index_.emplace(type_name, id);
  return id;
}

int PolicyGraph::intern_object(const std::string& type_name, const std::string& class_name,
                               const std::map<std::string, std::string>& instance_names) {
  auto it = object_index_.find({type_name, class_name});
  if (it != object_index_.end()) return it->second;
  const int id = static_cast<int>(nodes_.size());
  Node node;
  node.id = id;
  node.kind = NodeKind::Object;
  node.type_name = type_name;
  node.class_name = class_name;
  if (auto name_it = instance_names.find(type_name); name_it != instance_names.end()) {
    node.instance_name = name_it->second;
  }
  nodes_.push_back(std::move(node));
  object_index_.emplace(std::make_pair(type_name, class_name), id);
  return id;
}

int PolicyGraph::intern_security_class(const std::string& class_name) {
  auto it = class_index_.find(class_name);
  if (it != class_index_.end()) return it->second;
  const int id = static_cast<int>(nodes_.size());
  Node node;
  node.id = id;
  node.kind = NodeKind::SecurityClass;
  node.class_name = class_name;
  nodes_.push_back(std::move(node));
  class_index_.emplace(class_name, id);
  return id;
}

PolicyGraph build_graph(const PolicyDocument& doc,
                        const std::map<std::string, std::string>& instance_names) {
  PolicyGraph graph;

  auto link_instance = [&](int object_id, int class_id, const std::string& class_name) {
    if (find_edge(graph.edges_, object_id, class_id, EdgeRelation::InstanceOf, class_name) !=
        nullptr) {
      return;
    }
    Edge edge;
    edge.from = object_id;
    edge.to = class_id;
    edge.relation = EdgeRelation::InstanceOf;
    edge.security_class = class_name;
    graph.edges_.push_back(std::move(edge));
  };

  for (const auto& statement : doc.statements) {
    if (const auto* allow = std::get_if<AllowRule>(&statement)) {
      const int subject = graph.intern_subject(allow->source);
      const int object = graph.intern_object(allow->target, allow->security_class, instance_names);
      const int cls = graph.intern_security_class(allow->security_class);
      union_sorted(graph.nodes_[static_cast<size_t>(cls)].permissions, allow->permissions);

      if (Edge* existing = find_edge(graph.edges_, subject, object, EdgeRelation::Allow,
                                     allow->security_class)) {
        merge_permissions(existing->permissions, allow->permissions);
        ++graph.merged_duplicate_rules_;
      } else {
        Edge edge;
        edge.from = subject;
        edge.to = object;
        edge.relation = EdgeRelation::Allow;
        edge.security_class = allow->security_class;
        edge.permissions = allow->permissions;
        graph.edges_.push_back(std::move(edge));
      }
      link_instance(object, cls, allow->security_class);
    } else if (const auto* transition = std::get_if<TypeTransitionRule>(&statement)) {
      const int subject = graph.intern_subject(transition->source_domain);
      const int object =
          graph.intern_object(transition->target_type, transition->security_class, instance_names);
      const int cls = graph.intern_security_class(transition->security_class);
      const int new_subject = graph.intern_subject(transition->new_type);

      if (Edge* existing = find_edge(graph.edges_, subject, new_subject, EdgeRelation::Transition,
                                     transition->security_class)) {
        ++graph.merged_duplicate_rules_;
        (void)existing;
      } else {
        Edge edge;
        edge.from = subject;
        edge.to = new_subject;
        edge.relation = EdgeRelation::Transition;
        edge.security_class = transition->security_class;
        edge.via_type = transition->target_type;
        graph.edges_.push_back(std::move(edge));
      }
      link_instance(object, cls, transition->security_class);
    }
  }
  return graph;
}

std::string export_json(const PolicyGraph& graph) {
  nlohmann::ordered_json out;
  out["nodes"] = nlohmann::ordered_json::array();
  for (const auto& node : graph.nodes()) {
    nlohmann::ordered_json record;
    record["id"] = node.id;
    record["kind"] = node_kind_name(node.kind);
    switch (node.kind) {
      case NodeKind::Subject:
        record["name"] = node.type_name;
        break;
      case NodeKind::Object:
        record["type"] = node.type_name;
        record["class"] = node.class_name;
        if (!node.instance_name.empty()) record["instance"] = node.instance_name;
        break;
      case NodeKind::SecurityClass:
        record["name"] = node.class_name;
        record["permissions"] = node.permissions;
        break;
    }
    out["nodes"].push_back(std::move(record));
  }

  std::vector<Edge> edges = graph.edges();
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return std::tie(a.from, a.to, a.relation, a.security_class) <
           std::tie(b.from, b.to, b.relation, b.security_class);
  });
  out["edges"] = nlohmann::ordered_json::array();
  for (const auto& edge : edges) {
    nlohmann::ordered_json record;
    record["from"] = edge.from;
    record["to"] = edge.to;
    record["relation"] = edge_relation_name(edge.relation);
    record["class"] = edge.security_class;
    if (edge.relation == EdgeRelation::Allow) record["permissions"] = edge.permissions;
    if (edge.relation == EdgeRelation::Transition) record["via"] = edge.via_type;
    out["edges"].push_back(std::move(record));
  }
  return out.dump();
}

std::string export_cypher(const PolicyGraph& graph) {
  if (graph.nodes().empty()) return "";
  std::vector<std::string> clauses;
  for (const auto& node : graph.nodes()) {
    const std::string var = "n" + std::to_string(node.id);
    switch (node.kind) {
      case NodeKind::Subject:
        clauses.push_back("CREATE (" + var + ":Subject {name: " + cypher_quote(node.type_name) +
                          "})");
        break;
      case NodeKind::Object: {
        std::string clause = "CREATE (" + var + ":Object {type: " + cypher_quote(node.type_name) +
                             ", class: " + cypher_quote(node.class_name);
        if (!node.instance_name.empty()) {
          clause += ", instance: " + cypher_quote(node.instance_name);
        }
        clauses.push_back(clause + "})");
        break;
      }
      case NodeKind::SecurityClass:
        clauses.push_back("CREATE (" + var + ":Class {name: " + cypher_quote(node.class_name) +
                          ", permissions: " + cypher_list(node.permissions) + "})");
        break;
    }
  }

  std::vector<Edge> edges = graph.edges();
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return std::tie(a.from, a.to, a.relation, a.security_class) <
           std::tie(b.from, b.to, b.relation, b.security_class);
  });
  for (const auto& edge : edges) {
    std::string clause =
        "CREATE (n" + std::to_string(edge.from) + ")-[:" + edge_relation_name(edge.relation);
    switch (edge.relation) {
      case EdgeRelation::Allow:
        clause += " {class: " + cypher_quote(edge.security_class) +
                  ", permissions: " + cypher_list(edge.permissions) + "}";
        break;
      case EdgeRelation::Transition:
        clause += " {class: " + cypher_quote(edge.security_class) +
                  ", via: " + cypher_quote(edge.via_type) + "}";
        break;
      case EdgeRelation::InstanceOf:
        break;
    }
    clause += "]->(n" + std::to_string(edge.to) + ")";
    clauses.push_back(clause);
  }

  std::string out;
  for (size_t i = 0; i < clauses.size(); ++i) {
    out += clauses[i];
    out += (i + 1 == clauses.size()) ? ";" : "\n";
  }
  return out;
}

}  // namespace sepolml
