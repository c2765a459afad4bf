#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sepolml/parser.hpp"

namespace sepolml {

enum class NodeKind { Subject, Object, SecurityClass };
enum class EdgeRelation { Allow, Transition, InstanceOf };

const char* node_kind_name(NodeKind kind);
const char* edge_relation_name(EdgeRelation relation);

/// A vertex of the policy graph. Identity depends on kind:
///   Subject       — type_name (a domain acting as process)
///   Object        — (type_name, class_name); the same type under two classes
///                   is two distinct resources
///   SecurityClass — class_name
/// A type appearing both as rule source and rule target yields two nodes,
/// one Subject and one Object.
struct Node {
  int id = 0;
  NodeKind kind = NodeKind::Subject;
  std::string type_name;      // subjects and objects
  std::string class_name;     // objects and security classes
  std::string instance_name;  // objects only, optional (e.g. a file path)
  std::vector<Permission> permissions;  // security classes only: sorted union
};

struct Edge {
  int from = 0;
  int to = 0;
  EdgeRelation relation = EdgeRelation::Allow;
  SecurityClassName security_class;
  std::vector<Permission> permissions;  // allow edges: merged, first-seen order
  TypeName via_type;                    // transition edges: the entrypoint type
};

struct GraphStats {
  size_t node_count = 0;
  size_t subject_count = 0;
  size_t object_count = 0;
  size_t class_count = 0;
  size_t edge_count = 0;
  size_t allow_count = 0;
  size_t transition_count = 0;
  size_t instance_of_count = 0;
  size_t merged_duplicate_rules = 0;  // rules folded into an existing edge
};

class PolicyGraph {
 public:
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }

  std::optional<int> find_subject(const std::string& type_name) const;
  std::optional<int> find_object(const std::string& type_name,
                                 const std::string& class_name) const;
  std::optional<int> find_security_class(const std::string& class_name) const;

  /// Stable textual identity used by embedding files:
  /// "subject:NAME", "object:TYPE:CLASS", "class:NAME".
  std::string node_key(int id) const;

  GraphStats stats() const;

  /// Sorted, deduplicated adjacency lists over all edges, ignoring direction.
  /// Index = node id. Isolated nodes get empty lists.
  std::vector<std::vector<int>> undirected_view() const;

 private:
  friend PolicyGraph build_graph(const PolicyDocument&,
                                 const std::map<std::string, std::string>&);

  int intern_subject(const std::string& type_name);
  int intern_object(const std::string& type_name, const std::string& class_name,
                    const std::map<std::string, std::string>& instance_names);
  int intern_security_class(const std::string& class_name);

  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::map<std::string, int> subject_index_;                      // type -> id
  std::map<std::pair<std::string, std::string>, int> object_index_;  // (type, class) -> id
  std::map<std::string, int> class_index_;                        // class -> id
  size_t merged_duplicate_rules_ = 0;
};

/// Builds the Subject/Object/SecurityClass graph from parsed statements.
///
///   allow S T : C P;            Subject(S) --ALLOW{C,P}--> Object(T,C),
///                               Object(T,C) --INSTANCE_OF--> SecurityClass(C)
///   type_transition S T : C N;  Subject(S) --TRANSITION{via T}--> Subject(N),
///                               Object(T,C) --INSTANCE_OF--> SecurityClass(C)
///
/// Declarations contribute no nodes on their own. Edges deduplicate on
/// (from, to, relation, security_class); permissions merge in first-seen
/// order and each fold increments merged_duplicate_rules. SecurityClass
/// nodes accumulate the sorted union of all permissions named against them.
/// `instance_names` optionally attaches a concrete instance (such as a file
/// path) to the object node of the given type.
PolicyGraph build_graph(const PolicyDocument& doc,
                        const std::map<std::string, std::string>& instance_names = {});

/// Compact JSON {"nodes":[...],"edges":[...]}, nodes by id, edges sorted by
/// (from, to, relation, security_class). Byte-stable for a given graph.
std::string export_json(const PolicyGraph& graph);

/// One multi-clause Cypher CREATE query, one clause per line, terminated
/// with ';'. Empty graph yields "".
std::string export_cypher(const PolicyGraph& graph);

}  // namespace sepolml
