#include "exsel/thesaurus.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "json.hpp"

namespace exsel {

using nlohmann::json;

Thesaurus Thesaurus::from_records(std::vector<NodeRecord> records) {
  if (records.empty()) throw ParseError("thesaurus has no nodes");

  Thesaurus t;
  std::unordered_map<std::string, std::int32_t> by_id;
  t.nodes_.reserve(records.size());
  for (auto& rec : records) {
    if (rec.id.empty()) throw ParseError("thesaurus node with empty id");
    if (rec.word && !rec.children.empty())
      throw ParseError("thesaurus node '" + rec.id + "' has both a word and children");
    if (!rec.word && rec.children.empty())
      throw ParseError("thesaurus node '" + rec.id + "' has neither a word nor children");
    auto idx = static_cast<std::int32_t>(t.nodes_.size());
    if (!by_id.emplace(rec.id, idx).second)
      throw ParseError("duplicate thesaurus node id '" + rec.id + "'");
    Node n;
    n.id = rec.id;
    if (rec.word) n.word = *rec.word;
    t.nodes_.push_back(std::move(n));
  }

  for (std::size_t i = 0; i < records.size(); ++i) {
    for (const auto& child : records[i].children) {
      auto it = by_id.find(child);
      if (it == by_id.end())
        throw ParseError("node '" + records[i].id + "' references unknown child '" + child + "'");
      auto& c = t.nodes_[it->second];
      if (c.parent >= 0) throw ParseError("node '" + child + "' has more than one parent");
      if (it->second == static_cast<std::int32_t>(i))
        throw ParseError("node '" + child + "' is its own child");
      c.parent = static_cast<std::int32_t>(i);
      t.nodes_[i].children.push_back(it->second);
    }
  }

  for (std::size_t i = 0; i < t.nodes_.size(); ++i) {
    if (t.nodes_[i].parent >= 0) continue;
    if (t.root_ >= 0)
      throw ParseError("thesaurus has more than one root ('" + t.nodes_[t.root_].id + "', '" +
                       t.nodes_[i].id + "')");
    t.root_ = static_cast<std::int32_t>(i);
  }
  if (t.root_ < 0) throw ParseError("thesaurus has no root (cycle)");

  // Depth-first from the root; anything unreached sits on a detached cycle.
  std::vector<std::int32_t> stack{t.root_};
  std::size_t reached = 0;
  int leaf_depth = -1;
  while (!stack.empty()) {
    auto cur = stack.back();
    stack.pop_back();
    ++reached;
    auto& node = t.nodes_[cur];
    if (node.children.empty()) {
      if (leaf_depth < 0) leaf_depth = node.depth;
      if (node.depth != leaf_depth)
        throw ParseError("leaf '" + node.id + "' at depth " + std::to_string(node.depth) +
                         ", expected uniform depth " + std::to_string(leaf_depth));
      continue;
    }
    for (auto c : node.children) {
      t.nodes_[c].depth = node.depth + 1;
      stack.push_back(c);
    }
  }
  if (reached != t.nodes_.size()) throw ParseError("thesaurus is not connected (cycle detected)");
  if (leaf_depth < 1) throw ParseError("thesaurus depth must be at least 1");
  t.depth_ = leaf_depth;

  for (std::size_t i = 0; i < t.nodes_.size(); ++i) {
    const auto& node = t.nodes_[i];
    if (!node.children.empty()) continue;
    auto leaf = static_cast<std::int32_t>(t.leaves_.size());
    if (!t.leaf_index_.emplace(node.word, leaf).second)
      throw ParseError("word '" + node.word + "' maps to more than one leaf");
    t.leaves_.push_back(static_cast<std::int32_t>(i));
  }

  const auto stride = static_cast<std::size_t>(t.depth_ + 1);
  t.ancestors_.resize(t.leaves_.size() * stride);
  for (std::size_t leaf = 0; leaf < t.leaves_.size(); ++leaf) {
    auto cur = t.leaves_[leaf];
    for (int d = t.depth_; d >= 0; --d) {
      t.ancestors_[leaf * stride + d] = cur;
      cur = t.nodes_[cur].parent;
    }
  }
  return t;
}

Thesaurus Thesaurus::load_jsonl(std::istream& in) {
  std::vector<NodeRecord> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), lineno);
    }
    if (!j.is_object() || !j.contains("id") || !j["id"].is_string())
      throw ParseError("thesaurus record needs a string \"id\"", lineno);
    NodeRecord rec;
    rec.id = j["id"].get<std::string>();
    if (j.contains("word")) {
      if (!j["word"].is_string()) throw ParseError("\"word\" must be a string", lineno);
      rec.word = j["word"].get<std::string>();
    }
    if (j.contains("children")) {
      if (!j["children"].is_array()) throw ParseError("\"children\" must be an array", lineno);
      for (const auto& c : j["children"]) {
        if (!c.is_string()) throw ParseError("child ids must be strings", lineno);
        rec.children.push_back(c.get<std::string>());
      }
    }
    records.push_back(std::move(rec));
  }
  return from_records(std::move(records));
}

Thesaurus Thesaurus::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open thesaurus file '" + path + "'");
  try {
    return load_jsonl(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void Thesaurus::save_jsonl(std::ostream& out) const {
  // Pre-order from the root so the file reads top-down.
  std::vector<std::int32_t> stack{root_};
  while (!stack.empty()) {
    auto cur = stack.back();
    stack.pop_back();
    const auto& node = nodes_[cur];
    json j;
    j["id"] = node.id;
    if (node.children.empty()) {
      j["word"] = node.word;
    } else {
      auto& arr = j["children"] = json::array();
      for (auto c : node.children) arr.push_back(nodes_[c].id);
      for (auto it = node.children.rbegin(); it != node.children.rend(); ++it) stack.push_back(*it);
    }
    out << j.dump() << '\n';
  }
}

std::int32_t Thesaurus::find_leaf(std::string_view word) const {
  auto it = leaf_index_.find(std::string(word));
  return it == leaf_index_.end() ? -1 : it->second;
}

int Thesaurus::path_length(std::int32_t leaf_a, std::int32_t leaf_b) const noexcept {
  if (leaf_a == leaf_b) return 0;
  const auto stride = static_cast<std::size_t>(depth_ + 1);
  const auto* a = &ancestors_[static_cast<std::size_t>(leaf_a) * stride];
  const auto* b = &ancestors_[static_cast<std::size_t>(leaf_b) * stride];
  int d = depth_;
  while (a[d] != b[d]) --d;
  return 2 * (depth_ - d);
}

std::optional<int> Thesaurus::path_length(std::string_view a, std::string_view b) const {
  auto la = find_leaf(a);
  auto lb = find_leaf(b);
  if (la < 0 || lb < 0) return std::nullopt;
  return path_length(la, lb);
}

int Thesaurus::sim(std::string_view a, std::string_view b) const {
  if (a == b) return kMaxSim;
  auto len = path_length(a, b);
  return len ? sim_from_length(*len) : 0;
}

}  // namespace exsel
