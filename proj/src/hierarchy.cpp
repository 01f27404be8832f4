#include "hgf/hierarchy.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace hgf {

HierarchyTree::HierarchyTree(std::vector<TreeNode> nodes, int root, int num_vertices)
    : nodes_(std::move(nodes)), root_(root), n_(num_vertices) {
  if (root_ < 0 || root_ >= size()) throw std::invalid_argument("hierarchy root out of range");
  for (auto& nd : nodes_) {
    nd.parent = -1;
    nd.level = 0;
    nd.path.clear();
    nd.members.clear();
  }
  std::vector<char> seen(nodes_.size(), 0);
  std::vector<int> order{root_};
  seen[static_cast<std::size_t>(root_)] = 1;
  nodes_[static_cast<std::size_t>(root_)].level = 1;
  nodes_[static_cast<std::size_t>(root_)].path = {1};
  // BFS with ordered children yields lexicographic Λ order within each level.
  for (std::size_t k = 0; k < order.size(); ++k) {
    const int id = order[k];
    const TreeNode& nd = nodes_[static_cast<std::size_t>(id)];
    for (std::size_t c = 0; c < nd.children.size(); ++c) {
      const int child = nd.children[c];
      if (child < 0 || child >= size()) throw std::invalid_argument("hierarchy child index out of range");
      if (seen[static_cast<std::size_t>(child)]) throw std::invalid_argument("hierarchy node referenced twice");
      seen[static_cast<std::size_t>(child)] = 1;
      TreeNode& ch = nodes_[static_cast<std::size_t>(child)];
      ch.parent = id;
      ch.level = nd.level + 1;
      ch.path = nd.path;
      ch.path.push_back(static_cast<int>(c) + 1);
      order.push_back(child);
    }
  }
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    TreeNode& nd = nodes_[static_cast<std::size_t>(*it)];
    if (nd.children.empty()) {
      if (nd.vertex >= 0) nd.members = {nd.vertex};
    } else {
      for (int c : nd.children) {
        const auto& cm = nodes_[static_cast<std::size_t>(c)].members;
        nd.members.insert(nd.members.end(), cm.begin(), cm.end());
      }
      std::sort(nd.members.begin(), nd.members.end());
    }
    const auto lvl = static_cast<std::size_t>(nd.level);
    if (levels_.size() < lvl) levels_.resize(lvl);
  }
  for (int id : order) levels_[static_cast<std::size_t>(node(id).level - 1)].push_back(id);
}

const std::vector<int>& HierarchyTree::level_nodes(int j) const {
  if (j < 1 || j > num_levels()) throw std::out_of_range("level out of range: " + std::to_string(j));
  return levels_[static_cast<std::size_t>(j - 1)];
}

int HierarchyTree::max_children() const {
  int h = 1;
  for (const auto& nd : nodes_) h = std::max(h, static_cast<int>(nd.children.size()));
  return h;
}

std::vector<int> HierarchyTree::level_sizes() const {
  std::vector<int> out;
  for (const auto& lv : levels_) out.push_back(static_cast<int>(lv.size()));
  return out;
}

bool operator==(const HierarchyTree& a, const HierarchyTree& b) {
  if (a.n_ != b.n_ || a.num_levels() != b.num_levels()) return false;
  // Compare shape and leaf labels in tree order; node ids are an internal detail.
  for (int j = 1; j <= a.num_levels(); ++j) {
    const auto& la = a.level_nodes(j);
    const auto& lb = b.level_nodes(j);
    if (la.size() != lb.size()) return false;
    for (std::size_t k = 0; k < la.size(); ++k) {
      const TreeNode& x = a.node(la[k]);
      const TreeNode& y = b.node(lb[k]);
      if (x.children.size() != y.children.size() || x.vertex != y.vertex || x.members != y.members)
        return false;
    }
  }
  return true;
}

namespace {

std::string path_string(const std::vector<int>& path) {
  std::string s = "(";
  for (std::size_t i = 0; i < path.size(); ++i) s += (i ? "," : "") + std::to_string(path[i]);
  return s + ")";
}

int ancestor_at_level(const HierarchyTree& t, int id, int level) {
  while (t.node(id).level > level) id = t.node(id).parent;
  return id;
}

}  // namespace

std::vector<Violation> validate_hierarchy(const HierarchyTree& t, int n) {
  std::vector<Violation> out;
  if (t.size() == 0 || t.root() < 0) {
    out.push_back({{}, "coverage", "empty tree"});
    return out;
  }
  const int K = t.num_levels();
  std::map<int, std::vector<int>> occurrences;  // vertex -> leaf node ids (tree order)
  for (int j = 1; j <= K; ++j) {
    for (int id : t.level_nodes(j)) {
      const TreeNode& nd = t.node(id);
      if (!nd.children.empty()) continue;
      if (nd.vertex < 0) {
        out.push_back({nd.path, "empty cluster", "internal node without children"});
        continue;
      }
      if (nd.vertex >= n) {
        out.push_back({nd.path, "vertex range", "vertex " + std::to_string(nd.vertex) + " >= n"});
        continue;
      }
      if (nd.level != K)
        out.push_back({nd.path, "leaf depth",
                       "leaf at level " + std::to_string(nd.level) + ", expected " + std::to_string(K)});
      occurrences[nd.vertex].push_back(id);
    }
  }
  for (const auto& [v, leaves] : occurrences) {
    for (std::size_t k = 1; k < leaves.size(); ++k) {
      // Report at the coarsest level where the two copies sit in different clusters.
      int level = 1;
      while (level < K && ancestor_at_level(t, leaves[0], level) == ancestor_at_level(t, leaves[k], level))
        ++level;
      const int a = ancestor_at_level(t, leaves[0], level);
      const int b = ancestor_at_level(t, leaves[k], level);
      out.push_back({t.node(b).path, "not a partition",
                     "vertex " + std::to_string(v) + " also in " + path_string(t.node(a).path)});
    }
  }
  std::vector<int> missing;
  for (int v = 0; v < n; ++v)
    if (!occurrences.count(v)) missing.push_back(v);
  if (!missing.empty()) {
    std::string detail = std::to_string(missing.size()) + " vertices missing:";
    for (std::size_t k = 0; k < std::min<std::size_t>(missing.size(), 10); ++k)
      detail += " " + std::to_string(missing[k]);
    out.push_back({t.node(t.root()).path, "coverage", detail});
  }
  return out;
}

std::string format_violation(const Violation& v) {
  return v.rule + " at " + path_string(v.path) + ": " + v.detail;
}

PartitionPermutation PartitionPermutation::identity(const HierarchyTree& t) {
  PartitionPermutation pp;
  pp.per_node.resize(static_cast<std::size_t>(t.size()));
  for (int id = 0; id < t.size(); ++id) {
    auto& p = pp.per_node[static_cast<std::size_t>(id)];
    p.resize(static_cast<std::size_t>(t.num_children(id)));
    std::iota(p.begin(), p.end(), 0);
  }
  return pp;
}

PartitionPermutation PartitionPermutation::random(const HierarchyTree& t, std::mt19937_64& rng) {
  PartitionPermutation pp = identity(t);
  for (auto& p : pp.per_node) std::shuffle(p.begin(), p.end(), rng);
  return pp;
}

HierarchyTree apply_partition_permutation(const HierarchyTree& t, const PartitionPermutation& pp) {
  if (pp.per_node.size() != static_cast<std::size_t>(t.size()))
    throw std::invalid_argument("partition permutation does not match tree size");
  std::vector<TreeNode> nodes = t.nodes();
  for (int id = 0; id < t.size(); ++id) {
    const auto& perm = pp.per_node[static_cast<std::size_t>(id)];
    const auto& old = t.node(id).children;
    if (perm.size() != old.size())
      throw std::invalid_argument("partition permutation shape mismatch at node " + std::to_string(id));
    std::vector<char> used(old.size(), 0);
    auto& fresh = nodes[static_cast<std::size_t>(id)].children;
    for (std::size_t l = 0; l < perm.size(); ++l) {
      const int src = perm[l];
      if (src < 0 || static_cast<std::size_t>(src) >= old.size() || used[static_cast<std::size_t>(src)])
        throw std::invalid_argument("partition permutation is not a bijection");
      used[static_cast<std::size_t>(src)] = 1;
      fresh[l] = old[static_cast<std::size_t>(src)];
    }
  }
  return HierarchyTree(std::move(nodes), t.root(), t.num_vertices());
}

HierarchyTree relabel_vertices(const HierarchyTree& t, const Permutation& p) {
  if (p.size() != t.num_vertices()) throw std::invalid_argument("permutation length mismatch");
  std::vector<TreeNode> nodes = t.nodes();
  for (auto& nd : nodes)
    if (nd.vertex >= 0) nd.vertex = p(nd.vertex);
  return HierarchyTree(std::move(nodes), t.root(), t.num_vertices());
}

Graph coarsen_graph(const Graph& g, const std::vector<int>& assignment, int num_clusters) {
  if (assignment.size() != static_cast<std::size_t>(g.num_nodes()))
    throw std::invalid_argument("assignment must cover every node");
  for (int c : assignment)
    if (c < 0 || c >= num_clusters) throw std::out_of_range("cluster id out of range");
  std::map<std::pair<int, int>, double> acc;
  const auto& a = g.adjacency();
  for (Eigen::Index p = 0; p < a.outerSize(); ++p) {
    for (SparseMatrix::InnerIterator it(a, p); it; ++it) {
      if (it.col() <= p) continue;  // pairs p < q only
      const int i = assignment[static_cast<std::size_t>(p)];
      const int j = assignment[static_cast<std::size_t>(it.col())];
      acc[{std::min(i, j), std::max(i, j)}] += it.value();
    }
  }
  std::vector<Edge> edges;
  edges.reserve(acc.size());
  for (const auto& [key, w] : acc) edges.push_back({key.first, key.second, w});
  return Graph::from_edges(num_clusters, edges);
}

namespace {

// One greedy grouping round; returns clusters as ordered lists of super-node ids.
std::vector<std::vector<int>> group_super_nodes(const Graph& g, int h) {
  const int n = g.num_nodes();
  const auto& a = g.adjacency();
  const auto& w = g.degrees();
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return w[x] > w[y]; });

  std::vector<int> assigned(static_cast<std::size_t>(n), -1);
  std::vector<std::vector<int>> clusters;
  std::vector<std::pair<double, int>> nbrs;
  for (int s : order) {
    if (assigned[static_cast<std::size_t>(s)] >= 0) continue;
    const int cid = static_cast<int>(clusters.size());
    std::vector<int> cluster{s};
    assigned[static_cast<std::size_t>(s)] = cid;
    nbrs.clear();
    for (SparseMatrix::InnerIterator it(a, s); it; ++it)
      if (it.col() != s) nbrs.emplace_back(it.value(), static_cast<int>(it.col()));
    std::sort(nbrs.begin(), nbrs.end(), [](const auto& x, const auto& y) {
      return x.first != y.first ? x.first > y.first : x.second < y.second;
    });
    for (const auto& [wt, u] : nbrs) {
      if (static_cast<int>(cluster.size()) >= h) break;
      if (assigned[static_cast<std::size_t>(u)] >= 0) continue;
      assigned[static_cast<std::size_t>(u)] = cid;
      cluster.push_back(u);
    }
    clusters.push_back(std::move(cluster));
  }

  // Super-nodes that absorbed nothing join the smallest cluster with room.
  std::vector<std::vector<int>> grouped;
  std::vector<int> orphans;
  for (auto& c : clusters) {
    if (c.size() == 1)
      orphans.push_back(c.front());
    else
      grouped.push_back(std::move(c));
  }
  using Slot = std::pair<std::size_t, std::size_t>;  // (size, cluster index)
  std::priority_queue<Slot, std::vector<Slot>, std::greater<>> room;
  for (std::size_t k = 0; k < grouped.size(); ++k)
    if (static_cast<int>(grouped[k].size()) < h) room.emplace(grouped[k].size(), k);
  std::vector<int> leftover;
  for (int s : orphans) {
    if (room.empty()) {
      leftover.push_back(s);
      continue;
    }
    auto [sz, k] = room.top();
    room.pop();
    grouped[k].push_back(s);
    if (static_cast<int>(grouped[k].size()) < h) room.emplace(grouped[k].size(), k);
  }
  for (std::size_t k = 0; k < leftover.size(); k += static_cast<std::size_t>(h)) {
    const auto end = std::min(leftover.size(), k + static_cast<std::size_t>(h));
    grouped.emplace_back(leftover.begin() + static_cast<std::ptrdiff_t>(k),
                         leftover.begin() + static_cast<std::ptrdiff_t>(end));
  }
  for (auto& c : grouped) std::sort(c.begin(), c.end());
  std::sort(grouped.begin(), grouped.end(), [](const auto& x, const auto& y) { return x.front() < y.front(); });
  return grouped;
}

}  // namespace

HierarchyTree build_hierarchy(const Graph& g, const HierarchyOptions& opts) {
  const int h = opts.max_children;
  if (h < 2) throw std::invalid_argument("max children h must be >= 2");
  if (opts.max_levels != 0 && opts.max_levels < 2) throw std::invalid_argument("max levels must be >= 2");
  const int n = g.num_nodes();
  if (n < 1) throw std::invalid_argument("graph has no nodes");

  std::vector<TreeNode> nodes(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) nodes[static_cast<std::size_t>(v)].vertex = v;
  std::vector<int> current(static_cast<std::size_t>(n));
  std::iota(current.begin(), current.end(), 0);

  Graph cur = g;
  int levels = 1;
  while (cur.num_nodes() > h && (opts.max_levels == 0 || levels + 2 <= opts.max_levels)) {
    const auto clusters = group_super_nodes(cur, h);
    std::vector<int> assignment(static_cast<std::size_t>(cur.num_nodes()), -1);
    std::vector<int> next;
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      TreeNode nd;
      for (int s : clusters[c]) {
        assignment[static_cast<std::size_t>(s)] = static_cast<int>(c);
        nd.children.push_back(current[static_cast<std::size_t>(s)]);
      }
      next.push_back(static_cast<int>(nodes.size()));
      nodes.push_back(std::move(nd));
    }
    cur = coarsen_graph(cur, assignment, static_cast<int>(clusters.size()));
    current = std::move(next);
    ++levels;
  }
  int root = current.front();
  if (current.size() > 1) {
    TreeNode top;
    top.children = current;
    root = static_cast<int>(nodes.size());
    nodes.push_back(std::move(top));
  }
  return HierarchyTree(std::move(nodes), root, n);
}

HierarchyTree balanced_tree(int n, int h) {
  if (n < 1) throw std::invalid_argument("balanced_tree needs n >= 1");
  if (h < 2) throw std::invalid_argument("balanced_tree needs h >= 2");
  std::vector<TreeNode> nodes(static_cast<std::size_t>(n));
  std::vector<int> current(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) {
    nodes[static_cast<std::size_t>(v)].vertex = v;
    current[static_cast<std::size_t>(v)] = v;
  }
  while (current.size() > 1) {
    std::vector<int> next;
    const std::size_t step = current.size() > static_cast<std::size_t>(h) ? static_cast<std::size_t>(h) : current.size();
    for (std::size_t k = 0; k < current.size(); k += step) {
      TreeNode nd;
      nd.children.assign(current.begin() + static_cast<std::ptrdiff_t>(k),
                         current.begin() + static_cast<std::ptrdiff_t>(std::min(current.size(), k + step)));
      next.push_back(static_cast<int>(nodes.size()));
      nodes.push_back(std::move(nd));
    }
    current = std::move(next);
  }
  return HierarchyTree(std::move(nodes), current.front(), n);
}

namespace {

using nlohmann::json;

json node_to_json(const HierarchyTree& t, int id) {
  const TreeNode& nd = t.node(id);
  if (nd.children.empty()) {
    if (nd.vertex >= 0) return json{{"leaf", nd.vertex}};
    return json{{"children", json::array()}};
  }
  json kids = json::array();
  for (int c : nd.children) kids.push_back(node_to_json(t, c));
  return json{{"children", std::move(kids)}};
}

int node_from_json(const json& j, std::vector<TreeNode>& nodes) {
  if (!j.is_object()) throw std::runtime_error("hierarchy node must be an object");
  const bool has_leaf = j.contains("leaf");
  const bool has_children = j.contains("children");
  if (has_leaf == has_children || j.size() != 1)
    throw std::runtime_error("hierarchy node needs exactly one of 'leaf' or 'children'");
  const int id = static_cast<int>(nodes.size());
  nodes.emplace_back();
  if (has_leaf) {
    if (!j["leaf"].is_number_integer()) throw std::runtime_error("'leaf' must be an integer");
    nodes[static_cast<std::size_t>(id)].vertex = j["leaf"].get<int>();
  } else {
    if (!j["children"].is_array()) throw std::runtime_error("'children' must be an array");
    std::vector<int> kids;
    for (const auto& c : j["children"]) kids.push_back(node_from_json(c, nodes));
    nodes[static_cast<std::size_t>(id)].children = std::move(kids);
  }
  return id;
}

}  // namespace

std::string hierarchy_to_json(const HierarchyTree& t) {
  json j{{"n", t.num_vertices()}, {"root", node_to_json(t, t.root())}};
  return j.dump();
}

HierarchyTree hierarchy_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("hierarchy JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("n") || !j.contains("root") || !j["n"].is_number_integer())
    throw std::runtime_error("hierarchy JSON needs integer 'n' and 'root'");
  std::vector<TreeNode> nodes;
  const int root = node_from_json(j["root"], nodes);
  return HierarchyTree(std::move(nodes), root, j["n"].get<int>());
}

HierarchyTree load_hierarchy(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open hierarchy: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return hierarchy_from_json(ss.str());
}

}  // namespace hgf
