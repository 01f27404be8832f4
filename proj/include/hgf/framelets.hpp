#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "hgf/graph.hpp"
#include "hgf/hierarchy.hpp"

namespace hgf {

// Filter pair (p, B) attached to a node with L children.
struct FilterPair {
  int L = 1;
  Eigen::VectorXd p;
  Eigen::MatrixXd B;  // M x L
};

// 1-based row of B for the child pair (l1, l2), 1 <= l1 < l2 <= L.
int pair_index(int l1, int l2, int L);

// Haar pair: p = 1/sqrt(L), each row of B is (e_l1 - e_l2)/sqrt(L).
FilterPair binary_filter_pair(int L);

struct FilterReport {
  bool unit_norm = false;     // ||p|| = 1
  bool annihilates = false;   // B p = 0
  bool idempotent = false;    // B B^T B = B
  bool full_rank = false;     // rank(B) = L - 1
  bool scaled_form = false;   // B^T B = c (I - p p^T) for some c > 0
  int rank = 0;
  double c = 0.0;             // least-squares estimate of c

  // The tight-frame conditions; `scaled_form` with c != 1 is reported but not required.
  bool passed() const { return unit_norm && annihilates && idempotent && full_rank; }
};

FilterReport check_filter_conditions(const Eigen::VectorXd& p, const Eigen::MatrixXd& B, double tol = 1e-12);

// Row indexing shared by the system matrices and coefficient vectors.
struct SystemLayout {
  int j0 = 1;
  int num_levels = 0;
  std::vector<int> level_row;        // node id -> row within Phi of its level
  std::vector<int> psi_offset;       // node id -> first row within Psi of its level, -1 for leaves
  std::vector<int> psi_rows;         // level j -> rows of Psi_j (index j - 1)
  std::vector<int> psi_column_base;  // level j -> column of the first Psi_j vector in F
  int num_scaling = 0;               // N_{j0}
  int num_vectors = 0;               // M_G

  // Column of F holding psi_(node, m), m 1-based.
  int psi_column(const HierarchyTree& t, int node, int m) const;
};

// Throws std::invalid_argument if j0 is outside [1, K].
SystemLayout make_layout(const HierarchyTree& t, int j0);

// Per-level sparse scaling matrices Phi_j (j0 <= j <= K) and framelet
// matrices Psi_j (j0 <= j < K), rows in tree order.
class FrameletSystem {
 public:
  FrameletSystem() = default;

  const HierarchyTree& tree() const { return tree_; }
  const SystemLayout& layout() const { return layout_; }
  int j0() const { return layout_.j0; }
  int num_levels() const { return layout_.num_levels; }
  int num_nodes() const { return tree_.num_vertices(); }
  int num_vectors() const { return layout_.num_vectors; }
  const SparseMatrix& phi(int j) const;
  const SparseMatrix& psi(int j) const;
  // Arithmetic operations spent building the system.
  std::int64_t op_count() const { return ops_; }

  friend FrameletSystem generate_system(const HierarchyTree& t, int j0);
  friend FrameletSystem read_system(std::istream& in);

 private:
  HierarchyTree tree_;
  SystemLayout layout_;
  std::vector<SparseMatrix> phi_;  // index j - 1; empty below j0
  std::vector<SparseMatrix> psi_;
  std::int64_t ops_ = 0;
};

// Throws std::invalid_argument if the tree fails validation or j0 is out of range.
FrameletSystem generate_system(const HierarchyTree& t, int j0);

// Largest of | ||phi|| - 1 | over scaling rows and | ||psi|| - sqrt(2 / L) | over framelet rows,
// L the parent's child count.
double norm_deviation(const FrameletSystem& s);

// n x M_G matrix: Phi_{j0} rows, then Psi_{j0}, ..., Psi_{K-1} rows, as columns.
SparseMatrix framelet_matrix(const FrameletSystem& s);

// Regenerates on the relabeled tree and compares with P F bit for bit.
bool verify_node_equivariance(const HierarchyTree& t, const HierarchyTree& relabeled,
                              const Permutation& p, int j0);
bool verify_node_equivariance(const Graph& g, const HierarchyTree& t, const Permutation& p, int j0);

struct MatchReport {
  bool passed = false;
  int scaling_matched = 0;
  int framelets_matched = 0;
  int sign_flips = 0;
};

// Scaling vectors must match exactly, framelets up to sign, each original used once.
MatchReport verify_partition_equivariance(const HierarchyTree& t, const PartitionPermutation& pp, int j0);
// Partition permutation followed by node relabeling against P F.
MatchReport verify_combined_equivariance(const HierarchyTree& t, const PartitionPermutation& pp,
                                         const Permutation& p, int j0);

// Archive: manifest lines, the hierarchy JSON, then one COO block per level matrix.
void write_system(std::ostream& out, const FrameletSystem& s, const std::string& version);
FrameletSystem read_system(std::istream& in);

}  // namespace hgf
