#pragma once

#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "hgf/graph.hpp"

namespace hgf {

// One cluster s_Λ of a K-hierarchical clustering.
struct TreeNode {
  std::vector<int> children;  // ordered; empty for leaves
  int vertex = -1;            // graph node for a leaf, -1 otherwise

  // Derived by HierarchyTree.
  int parent = -1;
  int level = 0;               // dim(Λ); the root is level 1
  std::vector<int> path;       // Λ as 1-based child positions, path[0] == 1 for the root
  std::vector<int> members;    // s_Λ, sorted (duplicates kept so validation can see them)
};

// Rooted tree of nested clusters. Level K holds the leaves.
//
// The tree may be structurally invalid (overlapping or missing vertices,
// leaves above level K); validate_hierarchy() reports such problems and the
// framelet constructions refuse to run on them.
class HierarchyTree {
 public:
  HierarchyTree() = default;
  // `nodes` reference each other through `children`; derived fields are recomputed.
  HierarchyTree(std::vector<TreeNode> nodes, int root, int num_vertices);

  int num_vertices() const { return n_; }
  int num_levels() const { return static_cast<int>(levels_.size()); }
  int root() const { return root_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  const TreeNode& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  bool is_leaf(int id) const { return node(id).children.empty(); }
  int num_children(int id) const { return static_cast<int>(node(id).children.size()); }

  // Nodes with dim(Λ) == j in tree order (lexicographic in Λ), j in [1, K].
  const std::vector<int>& level_nodes(int j) const;
  // max L_Λ over internal nodes (1 for a single-node tree).
  int max_children() const;
  // Per level cluster counts, level 1 first.
  std::vector<int> level_sizes() const;

  friend bool operator==(const HierarchyTree& a, const HierarchyTree& b);

 private:
  std::vector<TreeNode> nodes_;
  int root_ = -1;
  int n_ = 0;
  std::vector<std::vector<int>> levels_;
};

struct Violation {
  std::vector<int> path;  // offending Λ (empty when the whole tree is at fault)
  std::string rule;       // "coverage", "not a partition", "leaf depth", "empty cluster", "vertex range"
  std::string detail;
};

std::vector<Violation> validate_hierarchy(const HierarchyTree& t, int n);
std::string format_violation(const Violation& v);

// Reorders children of every internal node; per_node[id][ℓ] names the old
// child position that moves to position ℓ. Leaves carry empty entries.
struct PartitionPermutation {
  std::vector<std::vector<int>> per_node;

  static PartitionPermutation identity(const HierarchyTree& t);
  static PartitionPermutation random(const HierarchyTree& t, std::mt19937_64& rng);
};

HierarchyTree apply_partition_permutation(const HierarchyTree& t, const PartitionPermutation& pp);
// Moves every leaf vertex v to p(v); the tree shape is untouched.
HierarchyTree relabel_vertices(const HierarchyTree& t, const Permutation& p);

// Coarse graph with one node per cluster: A''_{ij} = sum_{p<q} A_{pq} [ID(p)=i][ID(q)=j],
// symmetrized off the diagonal; intra-cluster mass stays on the diagonal once.
Graph coarsen_graph(const Graph& g, const std::vector<int>& assignment, int num_clusters);

struct HierarchyOptions {
  int max_children = 2;  // h
  int max_levels = 0;    // 0: no cap; otherwise K <= max_levels
};

// Deterministic bottom-up heavy-edge grouping into clusters of at most h
// super-nodes, coarsening between rounds, until at most h super-nodes remain.
HierarchyTree build_hierarchy(const Graph& g, const HierarchyOptions& opts);

// Consecutive vertex ids grouped h at a time, level by level.
HierarchyTree balanced_tree(int n, int h);

// {"n": int, "root": node}; node is {"children": [...]} or {"leaf": id}.
std::string hierarchy_to_json(const HierarchyTree& t);
HierarchyTree hierarchy_from_json(const std::string& text);
HierarchyTree load_hierarchy(const std::string& path);

}  // namespace hgf
