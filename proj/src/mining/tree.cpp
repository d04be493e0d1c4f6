#include "nugget/mining/tree.hpp"

#include "nugget/core/error.hpp"
#include "nugget/core/text.hpp"

namespace nugget::mining {

namespace {

std::string query_key(std::string_view text) { return text::normalize_whitespace_lower(text); }

}  // namespace

std::string_view to_string(NodeKind kind) noexcept { return kind == NodeKind::query ? "query" : "passage"; }

SearchTree::SearchTree(std::string root_query) {
  query_keys_.emplace(query_key(root_query), 0);
  nodes_.push_back(Node{0, NodeKind::query, std::nullopt, 0, std::move(root_query), std::nullopt});
}

bool SearchTree::has_query(std::string_view text) const { return query_keys_.contains(query_key(text)); }

bool SearchTree::has_passage(const std::string& passage_id) const { return passage_ids_.contains(passage_id); }

std::size_t SearchTree::attach_query(std::size_t parent, std::string text) {
  if (parent >= nodes_.size() || nodes_[parent].kind != NodeKind::passage)
    throw Error(ErrorCode::SchemaViolation, "a query node must hang below a passage node");
  auto key = query_key(text);
  if (query_keys_.contains(key)) throw Error(ErrorCode::SchemaViolation, "query already in tree: " + text);
  const std::size_t index = nodes_.size();
  query_keys_.emplace(std::move(key), index);
  nodes_.push_back(Node{index, NodeKind::query, parent, nodes_[parent].depth + 1, std::move(text), std::nullopt});
  return index;
}

std::size_t SearchTree::attach_passage(std::size_t parent, Passage passage) {
  if (parent >= nodes_.size() || nodes_[parent].kind != NodeKind::query)
    throw Error(ErrorCode::SchemaViolation, "a passage node must hang below a query node");
  if (passage_ids_.contains(passage.id))
    throw Error(ErrorCode::SchemaViolation, "passage already in tree: " + passage.id);
  const std::size_t index = nodes_.size();
  passage_ids_.emplace(passage.id, index);
  nodes_.push_back(Node{index, NodeKind::passage, parent, nodes_[parent].depth + 1, {}, std::move(passage)});
  return index;
}

std::vector<std::size_t> SearchTree::children(std::size_t index) const {
  std::vector<std::size_t> out;
  for (const auto& n : nodes_)
    if (n.parent == index) out.push_back(n.index);
  return out;
}

std::vector<std::string> SearchTree::query_texts() const {
  std::vector<std::string> out;
  for (const auto& n : nodes_)
    if (n.kind == NodeKind::query) out.push_back(n.query);
  return out;
}

std::vector<Passage> SearchTree::passages() const {
  std::vector<Passage> out;
  for (const auto& n : nodes_)
    if (n.kind == NodeKind::passage) out.push_back(*n.passage);
  return out;
}

void SearchTree::validate() const {
  if (nodes_.empty() || nodes_[0].kind != NodeKind::query || nodes_[0].parent)
    throw Error(ErrorCode::SchemaViolation, "tree root must be a parentless query node");
  std::unordered_map<std::string, int> queries, passages;
  for (const auto& n : nodes_) {
    if (n.index != 0) {
      if (!n.parent || *n.parent >= n.index)
        throw Error(ErrorCode::SchemaViolation, "node " + std::to_string(n.index) + " has no earlier parent");
      const auto& p = nodes_[*n.parent];
      if (p.kind == n.kind) throw Error(ErrorCode::SchemaViolation, "edge into node " + std::to_string(n.index) + " does not alternate kinds");
      if (n.depth != p.depth + 1) throw Error(ErrorCode::SchemaViolation, "depth mismatch at node " + std::to_string(n.index));
    }
    if (n.kind == NodeKind::query) {
      if (n.passage) throw Error(ErrorCode::SchemaViolation, "query node carries a passage");
      if (++queries[query_key(n.query)] > 1) throw Error(ErrorCode::SchemaViolation, "duplicate query " + n.query);
    } else {
      if (!n.passage) throw Error(ErrorCode::SchemaViolation, "passage node without passage");
      if (++passages[n.passage->id] > 1) throw Error(ErrorCode::SchemaViolation, "duplicate passage " + n.passage->id);
    }
  }
}

void to_json(Json& j, const SearchTree& tree) {
  j = Json::array();
  for (const auto& n : tree.nodes()) {
    Json node{{"index", n.index}, {"kind", to_string(n.kind)}, {"depth", n.depth}};
    node["parent"] = n.parent ? Json(*n.parent) : Json(nullptr);
    if (n.kind == NodeKind::query)
      node["query"] = n.query;
    else
      node["passage"] = *n.passage;
    j.push_back(std::move(node));
  }
}

SearchTree tree_from_json(const Json& j) {
  try {
    if (!j.is_array() || j.empty()) throw Error(ErrorCode::SchemaViolation, "tree must be a non-empty node array");
    SearchTree tree(j.at(0).at("query").get<std::string>());
    for (std::size_t i = 1; i < j.size(); ++i) {
      const auto& node = j.at(i);
      if (node.at("index").get<std::size_t>() != i) throw Error(ErrorCode::SchemaViolation, "tree nodes out of order");
      const auto parent = node.at("parent").get<std::size_t>();
      const auto kind = node.at("kind").get<std::string>();
      if (kind == "query")
        tree.attach_query(parent, node.at("query").get<std::string>());
      else if (kind == "passage")
        tree.attach_passage(parent, node.at("passage").get<Passage>());
      else
        throw Error(ErrorCode::SchemaViolation, "unknown node kind " + kind);
    }
    return tree;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::SchemaViolation, std::string("search tree: ") + e.what());
  }
}

}  // namespace nugget::mining
