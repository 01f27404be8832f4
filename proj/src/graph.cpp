#include "hgf/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

namespace hgf {

ParseError::ParseError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

namespace {

Eigen::VectorXd row_sums(const SparseMatrix& a) {
  Eigen::VectorXd d = Eigen::VectorXd::Zero(a.rows());
  for (Eigen::Index i = 0; i < a.outerSize(); ++i) {
    double s = 0.0;
    for (SparseMatrix::InnerIterator it(a, i); it; ++it) s += it.value();
    d[i] = s;
  }
  return d;
}

SparseMatrix csr_from_sorted(int rows, int cols,
                             const std::vector<std::vector<std::pair<int, double>>>& entries) {
  std::vector<Eigen::Triplet<double>> trips;
  for (int i = 0; i < rows; ++i)
    for (auto [j, v] : entries[static_cast<std::size_t>(i)]) trips.emplace_back(i, j, v);
  SparseMatrix m(rows, cols);
  m.setFromTriplets(trips.begin(), trips.end());
  m.makeCompressed();
  return m;
}

}  // namespace

Graph::Graph(SparseMatrix adjacency) : adjacency_(std::move(adjacency)) {
  adjacency_.makeCompressed();
  degrees_ = row_sums(adjacency_);
}

Graph Graph::from_edges(int n, std::span<const Edge> edges) {
  if (n < 0) throw std::invalid_argument("negative node count");
  std::map<std::pair<int, int>, double> acc;
  for (const Edge& e : edges) {
    if (e.src < 0 || e.dst < 0 || e.src >= n || e.dst >= n)
      throw std::out_of_range("edge endpoint out of range");
    if (!(e.weight >= 0.0) || !std::isfinite(e.weight))
      throw std::invalid_argument("edge weight must be finite and nonnegative");
    if (e.weight == 0.0) continue;
    acc[{std::min(e.src, e.dst), std::max(e.src, e.dst)}] += e.weight;
  }
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(acc.size() * 2);
  for (const auto& [key, w] : acc) {
    trips.emplace_back(key.first, key.second, w);
    if (key.first != key.second) trips.emplace_back(key.second, key.first, w);
  }
  SparseMatrix a(n, n);
  a.setFromTriplets(trips.begin(), trips.end());
  return Graph(std::move(a));
}

Graph Graph::from_adjacency(SparseMatrix adjacency) {
  if (adjacency.rows() != adjacency.cols()) throw std::invalid_argument("adjacency must be square");
  adjacency.makeCompressed();
  for (Eigen::Index i = 0; i < adjacency.outerSize(); ++i) {
    for (SparseMatrix::InnerIterator it(adjacency, i); it; ++it) {
      if (!(it.value() > 0.0)) throw std::invalid_argument("adjacency entries must be positive");
      if (adjacency.coeff(it.col(), it.row()) != it.value())
        throw std::invalid_argument("adjacency is not symmetric");
    }
  }
  return Graph(std::move(adjacency));
}

std::int64_t Graph::num_edges() const {
  std::int64_t count = 0;
  for (Eigen::Index i = 0; i < adjacency_.outerSize(); ++i)
    for (SparseMatrix::InnerIterator it(adjacency_, i); it; ++it)
      if (it.col() >= i) ++count;
  return count;
}

double Graph::weight(int i, int j) const { return adjacency_.coeff(i, j); }

bool operator==(const Graph& a, const Graph& b) {
  if (a.num_nodes() != b.num_nodes() || a.adjacency_.nonZeros() != b.adjacency_.nonZeros())
    return false;
  const auto& x = a.adjacency_;
  const auto& y = b.adjacency_;
  return std::equal(x.outerIndexPtr(), x.outerIndexPtr() + x.outerSize() + 1, y.outerIndexPtr()) &&
         std::equal(x.innerIndexPtr(), x.innerIndexPtr() + x.nonZeros(), y.innerIndexPtr()) &&
         std::equal(x.valuePtr(), x.valuePtr() + x.nonZeros(), y.valuePtr());
}

Permutation::Permutation(std::vector<int> mapping) : map_(std::move(mapping)) {
  std::vector<int> sorted = map_;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i)
    if (sorted[i] != static_cast<int>(i)) throw std::invalid_argument("mapping is not a bijection");
}

Permutation Permutation::identity(int n) {
  std::vector<int> m(static_cast<std::size_t>(n));
  std::iota(m.begin(), m.end(), 0);
  return Permutation(std::move(m));
}

Permutation Permutation::random(int n, std::mt19937_64& rng) {
  std::vector<int> m(static_cast<std::size_t>(n));
  std::iota(m.begin(), m.end(), 0);
  std::shuffle(m.begin(), m.end(), rng);
  return Permutation(std::move(m));
}

Permutation Permutation::inverse() const {
  std::vector<int> inv(map_.size());
  for (std::size_t i = 0; i < map_.size(); ++i) inv[static_cast<std::size_t>(map_[i])] = static_cast<int>(i);
  return Permutation(std::move(inv));
}

Signal Permutation::apply(const Signal& x) const {
  if (x.rows() != size()) throw std::invalid_argument("permutation/signal size mismatch");
  Signal out(x.rows(), x.cols());
  for (int i = 0; i < size(); ++i) out.row((*this)(i)) = x.row(i);
  return out;
}

Eigen::MatrixXd Permutation::matrix() const {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(size(), size());
  for (int i = 0; i < size(); ++i) p((*this)(i), i) = 1.0;
  return p;
}

Graph parse_edge_list(std::istream& in, int min_nodes) {
  std::vector<Edge> edges;
  std::string line;
  std::size_t lineno = 0;
  long long max_id = -1;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;

    std::istringstream tokens(line);
    std::vector<std::string> parts;
    for (std::string t; tokens >> t;) parts.push_back(t);
    if (parts.size() < 2 || parts.size() > 3)
      throw ParseError(lineno, "expected 'src dst [weight]'");

    int ids[2];
    for (int k = 0; k < 2; ++k) {
      const std::string& s = parts[static_cast<std::size_t>(k)];
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), ids[k]);
      if (ec == std::errc::result_out_of_range) throw ParseError(lineno, "node id overflow: " + s);
      if (ec != std::errc() || ptr != s.data() + s.size()) throw ParseError(lineno, "bad node id: " + s);
      if (ids[k] < 0) throw ParseError(lineno, "negative node id: " + s);
      if (ids[k] == std::numeric_limits<int>::max()) throw ParseError(lineno, "node id overflow: " + s);
    }
    double w = 1.0;
    if (parts.size() == 3) {
      const std::string& s = parts[2];
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), w);
      if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(w))
        throw ParseError(lineno, "bad weight: " + s);
      if (w < 0.0) throw ParseError(lineno, "negative weight: " + s);
    }
    max_id = std::max<long long>(max_id, std::max(ids[0], ids[1]));
    edges.push_back({ids[0], ids[1], w});
  }
  const int n = static_cast<int>(std::max<long long>(max_id + 1, min_nodes));
  return Graph::from_edges(n, edges);
}

Graph load_edge_list(const std::filesystem::path& path, int min_nodes) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open edge list: " + path.string());
  return parse_edge_list(in, min_nodes);
}

void write_edge_list(std::ostream& out, const Graph& g) {
  out << std::setprecision(17);
  const auto& a = g.adjacency();
  for (Eigen::Index i = 0; i < a.outerSize(); ++i)
    for (SparseMatrix::InnerIterator it(a, i); it; ++it)
      if (it.col() >= i) out << i << ' ' << it.col() << ' ' << it.value() << '\n';
}

SparseMatrix normalized_adjacency(const Graph& g) {
  const auto& d = g.degrees();
  Eigen::VectorXd inv_sqrt(d.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) inv_sqrt[i] = d[i] > 0.0 ? 1.0 / std::sqrt(d[i]) : 0.0;
  SparseMatrix out = g.adjacency();
  for (Eigen::Index i = 0; i < out.outerSize(); ++i)
    for (SparseMatrix::InnerIterator it(out, i); it; ++it)
      it.valueRef() = inv_sqrt[i] * it.value() * inv_sqrt[it.col()];
  return out;
}

Signal spmm(const SparseMatrix& m, const Signal& x) {
  if (m.cols() != x.rows())
    throw std::invalid_argument("spmm: dimension mismatch (" + std::to_string(m.cols()) + " vs " +
                                std::to_string(x.rows()) + ")");
  // Each output entry is a left-to-right sum over the row's stored entries,
  // independent of thread count.
  Signal out(m.rows(), x.cols());
  out.noalias() = m * x;
  return out;
}

Graph permute_graph(const Graph& g, const Permutation& p) {
  if (p.size() != g.num_nodes()) throw std::invalid_argument("permutation length mismatch");
  std::vector<std::vector<std::pair<int, double>>> rows(static_cast<std::size_t>(g.num_nodes()));
  const auto& a = g.adjacency();
  for (Eigen::Index i = 0; i < a.outerSize(); ++i)
    for (SparseMatrix::InnerIterator it(a, i); it; ++it)
      rows[static_cast<std::size_t>(p(static_cast<int>(i)))].emplace_back(p(static_cast<int>(it.col())),
                                                                           it.value());
  return Graph::from_adjacency(csr_from_sorted(g.num_nodes(), g.num_nodes(), rows));
}

void write_coo(std::ostream& out, const SparseMatrix& m) {
  out << m.rows() << ' ' << m.cols() << ' ' << m.nonZeros() << '\n' << std::setprecision(17);
  for (Eigen::Index i = 0; i < m.outerSize(); ++i)
    for (SparseMatrix::InnerIterator it(m, i); it; ++it)
      out << i << ' ' << it.col() << ' ' << it.value() << '\n';
}

SparseMatrix read_coo(std::istream& in) {
  long long rows = 0, cols = 0, nnz = 0;
  if (!(in >> rows >> cols >> nnz) || rows < 0 || cols < 0 || nnz < 0)
    throw std::runtime_error("bad COO header");
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(nnz));
  for (long long k = 0; k < nnz; ++k) {
    long long i = 0, j = 0;
    double v = 0.0;
    if (!(in >> i >> j >> v)) throw std::runtime_error("truncated COO body");
    if (i < 0 || j < 0 || i >= rows || j >= cols) throw std::runtime_error("COO index out of range");
    trips.emplace_back(static_cast<int>(i), static_cast<int>(j), v);
  }
  SparseMatrix m(rows, cols);
  m.setFromTriplets(trips.begin(), trips.end());
  m.makeCompressed();
  return m;
}

}  // namespace hgf
