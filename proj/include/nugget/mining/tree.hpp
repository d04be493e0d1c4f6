#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "nugget/core/json.hpp"
#include "nugget/core/types.hpp"

namespace nugget::mining {

enum class NodeKind { query, passage };

struct Node {
  std::size_t index = 0;
  NodeKind kind = NodeKind::query;
  std::optional<std::size_t> parent;
  std::size_t depth = 0;
  // Query text for query nodes.
  std::string query;
  // Set for passage nodes.
  std::optional<Passage> passage;
};

// Alternating query/passage tree rooted at the question. Attachment enforces
// the invariants: kinds alternate along every edge, query texts are unique
// after whitespace/case normalisation, passage ids are unique.
class SearchTree {
 public:
  explicit SearchTree(std::string root_query);

  const Node& root() const { return nodes_.front(); }
  const Node& node(std::size_t index) const { return nodes_.at(index); }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  std::size_t size() const noexcept { return nodes_.size(); }

  bool has_query(std::string_view text) const;
  bool has_passage(const std::string& passage_id) const;

  // Both throw SchemaViolation if the parent has the wrong kind or the node
  // already exists. Return the new node's index.
  std::size_t attach_query(std::size_t parent, std::string text);
  std::size_t attach_passage(std::size_t parent, Passage passage);

  std::vector<std::size_t> children(std::size_t index) const;
  // Query texts in insertion order, root first.
  std::vector<std::string> query_texts() const;
  // Passage nodes in insertion order.
  std::vector<Passage> passages() const;

  // Re-checks every structural invariant; throws SchemaViolation.
  void validate() const;

 private:
  std::vector<Node> nodes_;
  std::unordered_map<std::string, std::size_t> query_keys_;
  std::unordered_map<std::string, std::size_t> passage_ids_;
};

std::string_view to_string(NodeKind kind) noexcept;

void to_json(Json& j, const SearchTree& tree);
// Rebuilds through attach_*, so a malformed file is rejected.
SearchTree tree_from_json(const Json& j);

}  // namespace nugget::mining
