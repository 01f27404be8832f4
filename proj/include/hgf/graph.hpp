#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace hgf {

// Row-major sparse matrix; the CSR layout used for adjacency and framelet levels.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
// Dense n x d node signal (d = 1 for a scalar signal).
using Signal = Eigen::MatrixXd;

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct Edge {
  int src;
  int dst;
  double weight = 1.0;
};

// Immutable weighted undirected graph. Node ids are 0-based.
class Graph {
 public:
  Graph() = default;

  // Symmetrizes the edge list; parallel edges are summed, self-loops are kept once.
  static Graph from_edges(int n, std::span<const Edge> edges);
  // Takes ownership of an adjacency matrix; throws if it is not symmetric
  // with strictly positive stored entries.
  static Graph from_adjacency(SparseMatrix adjacency);

  int num_nodes() const { return static_cast<int>(adjacency_.rows()); }
  const SparseMatrix& adjacency() const { return adjacency_; }
  const Eigen::VectorXd& degrees() const { return degrees_; }
  // Undirected edges, self-loops included, each counted once.
  std::int64_t num_edges() const;
  double weight(int i, int j) const;

  friend bool operator==(const Graph& a, const Graph& b);

 private:
  explicit Graph(SparseMatrix adjacency);

  SparseMatrix adjacency_;
  Eigen::VectorXd degrees_;
};

// Bijection on {0,...,n-1}; node i moves to position mapping[i].
class Permutation {
 public:
  Permutation() = default;
  explicit Permutation(std::vector<int> mapping);

  static Permutation identity(int n);
  static Permutation random(int n, std::mt19937_64& rng);

  int size() const { return static_cast<int>(map_.size()); }
  int operator()(int i) const { return map_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& mapping() const { return map_; }
  Permutation inverse() const;

  // Rows of the result: out.row(p(i)) = x.row(i), i.e. P x.
  Signal apply(const Signal& x) const;
  Eigen::MatrixXd matrix() const;

 private:
  std::vector<int> map_;
};

Graph parse_edge_list(std::istream& in, int min_nodes = 0);
Graph load_edge_list(const std::filesystem::path& path, int min_nodes = 0);
void write_edge_list(std::ostream& out, const Graph& g);

// D^{-1/2} A D^{-1/2}; zero-degree nodes get zero rows and columns.
SparseMatrix normalized_adjacency(const Graph& g);

Signal spmm(const SparseMatrix& m, const Signal& x);

Graph permute_graph(const Graph& g, const Permutation& p);

// COO text: header "n_rows n_cols nnz", then one "row col value" line per entry.
void write_coo(std::ostream& out, const SparseMatrix& m);
SparseMatrix read_coo(std::istream& in);

}  // namespace hgf
