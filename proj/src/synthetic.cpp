#include "hgf/synthetic.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>

namespace hgf {

Eigen::MatrixXd default_distribution() {
  Eigen::MatrixXd d(4, 4);
  d << 0.1, 0.4, 0.0, 0.5,
       0.5, 0.0, 0.5, 0.0,
       0.2, 0.0, 0.5, 0.3,
       0.25, 0.25, 0.25, 0.25;
  return d;
}

void SyntheticConfig::validate() const {
  if (n < 2) throw std::invalid_argument("n must be >= 2");
  if (num_classes < 1 || num_classes > n) throw std::invalid_argument("num_classes must lie in [1, n]");
  if (num_edges < 0) throw std::invalid_argument("num_edges must be >= 0");
  const double pairs = 0.5 * static_cast<double>(n) * (n - 1);
  if (static_cast<double>(num_edges) > pairs / 2.0)
    throw std::invalid_argument("num_edges exceeds half of all node pairs");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in [0, 1]");
  if (dist.rows() != num_classes || dist.cols() != num_classes)
    throw std::invalid_argument("dist must be num_classes x num_classes");
  for (Eigen::Index c = 0; c < dist.rows(); ++c) {
    if ((dist.row(c).array() < 0.0).any() || !dist.row(c).allFinite())
      throw std::invalid_argument("dist row " + std::to_string(c) + " has a negative or non-finite entry");
    if (std::abs(dist.row(c).sum() - 1.0) > 1e-9)
      throw std::invalid_argument("dist row " + std::to_string(c) + " does not sum to 1");
  }
  if (feat_dim < 1) throw std::invalid_argument("feat_dim must be >= 1");
  if (!std::isfinite(feat_scale)) throw std::invalid_argument("feat_scale must be finite");
  for (double f : split)
    if (f < 0.0) throw std::invalid_argument("split fractions must be nonnegative");
  if (std::abs(split[0] + split[1] + split[2] - 1.0) > 1e-9)
    throw std::invalid_argument("split fractions must sum to 1");
}

Masks split_masks(int n, const std::array<double, 3>& fractions, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::llround(fractions[0] * n));
  const auto n_val = std::min(order.size() - n_train, static_cast<std::size_t>(std::llround(fractions[1] * n)));
  Masks m;
  m.train.assign(order.size(), 0);
  m.val.assign(order.size(), 0);
  m.test.assign(order.size(), 0);
  for (std::size_t k = 0; k < order.size(); ++k) {
    auto& mask = k < n_train ? m.train : (k < n_train + n_val ? m.val : m.test);
    mask[static_cast<std::size_t>(order[k])] = 1;
  }
  return m;
}

LabeledGraph generate_graph(const SyntheticConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  const int n = cfg.n;
  const int nc = cfg.num_classes;

  LabeledGraph out;
  out.num_classes = nc;
  std::vector<std::vector<int>> members;
  for (int attempt = 0; attempt < 2; ++attempt) {
    std::uniform_int_distribution<int> pick_class(0, nc - 1);
    out.labels.resize(static_cast<std::size_t>(n));
    for (int& y : out.labels) y = pick_class(rng);
    members.assign(static_cast<std::size_t>(nc), {});
    for (int i = 0; i < n; ++i) members[static_cast<std::size_t>(out.labels[static_cast<std::size_t>(i)])].push_back(i);
    if (std::none_of(members.begin(), members.end(), [](const auto& m) { return m.empty(); })) break;
    if (attempt == 1) throw std::runtime_error("a class stayed empty after resampling labels");
  }

  std::vector<std::discrete_distribution<int>> neighbor_class;
  for (int c = 0; c < nc; ++c) {
    std::vector<double> w;
    for (int k = 0; k < nc; ++k) w.push_back(cfg.dist(c, k));
    neighbor_class.emplace_back(w.begin(), w.end());
  }
  std::uniform_int_distribution<int> pick_node(0, n - 1);
  std::uniform_int_distribution<int> pick_any_class(0, nc - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::unordered_set<std::uint64_t> seen;
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(cfg.num_edges));
  const std::int64_t max_draws = 1000 * std::max<std::int64_t>(cfg.num_edges, 1000);
  std::int64_t draws = 0;
  while (static_cast<std::int64_t>(edges.size()) < cfg.num_edges) {
    if (++draws > max_draws) throw std::runtime_error("edge target not reachable with this distribution");
    const int i = pick_node(rng);
    const double r = unit(rng);
    const int c = r <= cfg.gamma ? pick_any_class(rng) : neighbor_class[static_cast<std::size_t>(out.labels[static_cast<std::size_t>(i)])](rng);
    const auto& pool = members[static_cast<std::size_t>(c)];
    const int j = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
    if (j == i) continue;
    const auto key = (static_cast<std::uint64_t>(std::min(i, j)) << 32) | static_cast<std::uint32_t>(std::max(i, j));
    if (seen.insert(key).second) edges.push_back({i, j, 1.0});
  }
  out.graph = Graph::from_edges(n, edges);
  out.masks = split_masks(n, cfg.split, rng());
  return out;
}

Signal generate_features(std::span<const int> labels, int dim, double scale, std::uint64_t seed, FeatureModel model) {
  if (dim < 1) throw std::invalid_argument("feature dimension must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> xi(0.0, 1.0);
  Signal x(static_cast<Eigen::Index>(labels.size()), dim);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double level = scale * (-0.75 + 0.5 * labels[i]);
    for (int k = 0; k < dim; ++k) {
      const double noise = xi(rng);
      x(static_cast<Eigen::Index>(i), k) = model == FeatureModel::kScaled ? level * noise : level + noise;
    }
  }
  return x;
}

Eigen::MatrixXd ccns(const LabeledGraph& g) {
  const int n = g.graph.num_nodes();
  const int nc = g.num_classes;
  if (g.labels.size() != static_cast<std::size_t>(n)) throw std::invalid_argument("labels must cover every node");
  // Unit neighbor-class histograms, summed per class.
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(nc, nc);
  Eigen::VectorXd self = Eigen::VectorXd::Zero(nc);
  std::vector<int> size(static_cast<std::size_t>(nc), 0);
  Eigen::VectorXd hist(nc);
  const auto& a = g.graph.adjacency();
  for (int i = 0; i < n; ++i) {
    hist.setZero();
    for (SparseMatrix::InnerIterator it(a, i); it; ++it) hist[g.labels[static_cast<std::size_t>(it.col())]] += 1.0;
    const int c = g.labels[static_cast<std::size_t>(i)];
    ++size[static_cast<std::size_t>(c)];
    const double norm = hist.norm();
    if (norm == 0.0) continue;
    hist /= norm;
    sums.row(c) += hist.transpose();
    self[c] += hist.squaredNorm();
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  Eigen::MatrixXd s(nc, nc);
  for (int c = 0; c < nc; ++c)
    for (int d = 0; d < nc; ++d) {
      const double nc1 = size[static_cast<std::size_t>(c)];
      const double nc2 = size[static_cast<std::size_t>(d)];
      const double dot = sums.row(c).dot(sums.row(d));
      if (c == d)
        s(c, d) = nc1 < 2 ? nan : (dot - self[c]) / (nc1 * (nc1 - 1.0));
      else
        s(c, d) = nc1 < 1 || nc2 < 1 ? nan : dot / (nc1 * nc2);
    }
  return s;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <class T>
T parse_cell(const std::string& s, std::size_t line) {
  T v{};
  std::size_t b = s.find_first_not_of(" \t\r");
  std::size_t e = s.find_last_not_of(" \t\r");
  if (b == std::string::npos) throw ParseError(line, "empty cell");
  auto [ptr, ec] = std::from_chars(s.data() + b, s.data() + e + 1, v);
  if (ec != std::errc() || ptr != s.data() + e + 1) throw ParseError(line, "bad value: " + s);
  return v;
}

bool is_content(const std::string& line) { return line.find_first_not_of(" \t\r") != std::string::npos; }

}  // namespace

void write_labels(std::ostream& out, std::span<const int> labels) {
  out << "node,label\n";
  for (std::size_t i = 0; i < labels.size(); ++i) out << i << ',' << labels[i] << '\n';
}

std::vector<int> read_labels(std::istream& in) {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line) || line.rfind("node,label", 0) != 0) throw ParseError(1, "expected header 'node,label'");
  std::vector<int> labels;
  while (std::getline(in, line)) {
    ++lineno;
    if (!is_content(line)) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 2) throw ParseError(lineno, "expected 'node,label'");
    const int node = parse_cell<int>(cells[0], lineno);
    const int label = parse_cell<int>(cells[1], lineno);
    if (node != static_cast<int>(labels.size())) throw ParseError(lineno, "nodes must be listed in order");
    if (label < 0) throw ParseError(lineno, "negative label");
    labels.push_back(label);
  }
  return labels;
}

void write_masks(std::ostream& out, const Masks& m) {
  out << "node,train,val,test\n";
  for (std::size_t i = 0; i < m.train.size(); ++i)
    out << i << ',' << int(m.train[i]) << ',' << int(m.val[i]) << ',' << int(m.test[i]) << '\n';
}

Masks read_masks(std::istream& in) {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line) || line.rfind("node,train,val,test", 0) != 0)
    throw ParseError(1, "expected header 'node,train,val,test'");
  Masks m;
  while (std::getline(in, line)) {
    ++lineno;
    if (!is_content(line)) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 4) throw ParseError(lineno, "expected 'node,train,val,test'");
    if (parse_cell<int>(cells[0], lineno) != static_cast<int>(m.train.size()))
      throw ParseError(lineno, "nodes must be listed in order");
    const int t = parse_cell<int>(cells[1], lineno), v = parse_cell<int>(cells[2], lineno),
              s = parse_cell<int>(cells[3], lineno);
    if ((t | v | s) & ~1 || t + v + s != 1) throw ParseError(lineno, "each node belongs to exactly one split");
    m.train.push_back(static_cast<char>(t));
    m.val.push_back(static_cast<char>(v));
    m.test.push_back(static_cast<char>(s));
  }
  return m;
}

void write_features(std::ostream& out, const Signal& x) {
  char buf[32];
  std::string line;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    line.clear();
    for (Eigen::Index k = 0; k < x.cols(); ++k) {
      if (k) line += ',';
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x(i, k), std::chars_format::general, 9);
      line.append(buf, ptr);
    }
    out << line << '\n';
  }
}

Signal read_features(std::istream& in) {
  std::vector<double> values;
  std::string line;
  std::size_t lineno = 0, cols = 0, rows = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!is_content(line)) continue;
    const auto cells = split_csv(line);
    if (rows == 0) cols = cells.size();
    if (cells.size() != cols) throw ParseError(lineno, "ragged feature row");
    for (const auto& c : cells) values.push_back(parse_cell<double>(c, lineno));
    ++rows;
  }
  Signal x(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t k = 0; k < cols; ++k)
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = values[i * cols + k];
  return x;
}

void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m) {
  char buf[32];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, m(i, k));
      out << (k ? "," : "") << std::string_view(buf, static_cast<std::size_t>(ptr - buf));
    }
    out << '\n';
  }
}

}  // namespace hgf
