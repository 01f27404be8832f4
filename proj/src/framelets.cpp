#include "hgf/framelets.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <Eigen/SVD>

namespace hgf {

int pair_index(int l1, int l2, int L) {
  if (!(1 <= l1 && l1 < l2 && l2 <= L))
    throw std::invalid_argument("pair_index needs 1 <= l1 < l2 <= L");
  return (2 * L - l1) * (l1 - 1) / 2 + l2 - l1;
}

FilterPair binary_filter_pair(int L) {
  if (L < 1) throw std::invalid_argument("binary_filter_pair needs L >= 1");
  const double c = 1.0 / std::sqrt(static_cast<double>(L));
  FilterPair fp;
  fp.L = L;
  fp.p = Eigen::VectorXd::Constant(L, c);
  fp.B = Eigen::MatrixXd::Zero(L * (L - 1) / 2, L);
  for (int l1 = 1; l1 <= L; ++l1)
    for (int l2 = l1 + 1; l2 <= L; ++l2) {
      const int m = pair_index(l1, l2, L) - 1;
      fp.B(m, l1 - 1) = c;
      fp.B(m, l2 - 1) = -c;
    }
  return fp;
}

FilterReport check_filter_conditions(const Eigen::VectorXd& p, const Eigen::MatrixXd& B, double tol) {
  const Eigen::Index L = p.size();
  if (B.cols() != L) throw std::invalid_argument("B must have one column per child");
  FilterReport r;
  r.unit_norm = std::abs(p.norm() - 1.0) <= tol;
  if (B.rows() == 0) {
    r.annihilates = r.idempotent = true;
    r.rank = 0;
  } else {
    r.annihilates = (B * p).cwiseAbs().maxCoeff() <= tol;
    r.idempotent = (B * B.transpose() * B - B).cwiseAbs().maxCoeff() <= tol;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(B);
    const auto& sv = svd.singularValues();
    const double cut = tol * std::max(1.0, sv.size() ? sv[0] : 0.0);
    r.rank = static_cast<int>((sv.array() > cut).count());
  }
  r.full_rank = r.rank == L - 1;

  const Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(L, L) - p * p.transpose();
  const Eigen::MatrixXd G = B.transpose() * B;
  const double qq = Q.squaredNorm();
  if (qq <= tol) {
    r.c = 1.0;
    r.scaled_form = G.size() == 0 || G.cwiseAbs().maxCoeff() <= tol;
  } else {
    r.c = (G.array() * Q.array()).sum() / qq;
    r.scaled_form = r.c > tol && (G - r.c * Q).cwiseAbs().maxCoeff() <= tol * std::max(1.0, r.c);
  }
  return r;
}

int SystemLayout::psi_column(const HierarchyTree& t, int node, int m) const {
  const int off = psi_offset[static_cast<std::size_t>(node)];
  if (off < 0) throw std::out_of_range("node carries no framelets");
  return psi_column_base[static_cast<std::size_t>(t.node(node).level - 1)] + off + m - 1;
}

SystemLayout make_layout(const HierarchyTree& t, int j0) {
  const int K = t.num_levels();
  if (j0 < 1 || j0 > K)
    throw std::invalid_argument("j0 must lie in [1, " + std::to_string(K) + "], got " + std::to_string(j0));
  SystemLayout lay;
  lay.j0 = j0;
  lay.num_levels = K;
  lay.level_row.assign(static_cast<std::size_t>(t.size()), -1);
  lay.psi_offset.assign(static_cast<std::size_t>(t.size()), -1);
  lay.psi_rows.assign(static_cast<std::size_t>(K), 0);
  lay.psi_column_base.assign(static_cast<std::size_t>(K), 0);
  for (int j = 1; j <= K; ++j) {
    const auto& ids = t.level_nodes(j);
    int psi = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      lay.level_row[static_cast<std::size_t>(ids[k])] = static_cast<int>(k);
      const int L = t.num_children(ids[k]);
      if (j >= j0 && j < K && L > 0) {
        lay.psi_offset[static_cast<std::size_t>(ids[k])] = psi;
        psi += L * (L - 1) / 2;
      }
    }
    lay.psi_rows[static_cast<std::size_t>(j - 1)] = psi;
  }
  lay.num_scaling = static_cast<int>(t.level_nodes(j0).size());
  int col = lay.num_scaling;
  for (int j = 1; j <= K; ++j) {
    lay.psi_column_base[static_cast<std::size_t>(j - 1)] = col;
    col += lay.psi_rows[static_cast<std::size_t>(j - 1)];
  }
  lay.num_vectors = col;
  return lay;
}

const SparseMatrix& FrameletSystem::phi(int j) const {
  if (j < j0() || j > num_levels()) throw std::out_of_range("no scaling matrix at level " + std::to_string(j));
  return phi_[static_cast<std::size_t>(j - 1)];
}

const SparseMatrix& FrameletSystem::psi(int j) const {
  if (j < j0() || j >= num_levels()) throw std::out_of_range("no framelet matrix at level " + std::to_string(j));
  return psi_[static_cast<std::size_t>(j - 1)];
}

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

SparseMatrix from_triplets(Eigen::Index rows, Eigen::Index cols, const Triplets& trips) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(trips.begin(), trips.end());
  m.makeCompressed();
  return m;
}

void require_valid(const HierarchyTree& t) {
  const auto violations = validate_hierarchy(t, t.num_vertices());
  if (!violations.empty())
    throw std::invalid_argument("invalid hierarchy: " + format_violation(violations.front()) +
                                (violations.size() > 1 ? " (+" + std::to_string(violations.size() - 1) + " more)" : ""));
}

}  // namespace

FrameletSystem generate_system(const HierarchyTree& t, int j0) {
  require_valid(t);
  FrameletSystem s;
  s.tree_ = t;
  s.layout_ = make_layout(t, j0);
  const int K = t.num_levels();
  const int n = t.num_vertices();
  s.phi_.resize(static_cast<std::size_t>(K));
  s.psi_.resize(static_cast<std::size_t>(K));

  {
    const auto& leaves = t.level_nodes(K);
    Triplets trips;
    for (std::size_t k = 0; k < leaves.size(); ++k) trips.emplace_back(static_cast<int>(k), t.node(leaves[k]).vertex, 1.0);
    s.phi_[static_cast<std::size_t>(K - 1)] = from_triplets(static_cast<Eigen::Index>(leaves.size()), n, trips);
  }

  std::vector<std::vector<std::pair<int, double>>> scaled;
  for (int j = K - 1; j >= j0; --j) {
    const SparseMatrix& below = s.phi_[static_cast<std::size_t>(j)];
    const auto& ids = t.level_nodes(j);
    Triplets phi_trips, psi_trips;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      const TreeNode& nd = t.node(ids[k]);
      const int L = static_cast<int>(nd.children.size());
      const double c = 1.0 / std::sqrt(static_cast<double>(L));
      scaled.assign(static_cast<std::size_t>(L), {});
      for (int l = 0; l < L; ++l) {
        const int row = s.layout_.level_row[static_cast<std::size_t>(nd.children[static_cast<std::size_t>(l)])];
        auto& dst = scaled[static_cast<std::size_t>(l)];
        for (SparseMatrix::InnerIterator it(below, row); it; ++it) {
          dst.emplace_back(static_cast<int>(it.col()), c * it.value());
          phi_trips.emplace_back(static_cast<int>(k), static_cast<int>(it.col()), dst.back().second);
        }
        s.ops_ += static_cast<std::int64_t>(dst.size());
      }
      const int base = s.layout_.psi_offset[static_cast<std::size_t>(ids[k])];
      for (int l1 = 1; l1 <= L; ++l1)
        for (int l2 = l1 + 1; l2 <= L; ++l2) {
          const int row = base + pair_index(l1, l2, L) - 1;
          for (auto [col, v] : scaled[static_cast<std::size_t>(l1 - 1)]) psi_trips.emplace_back(row, col, v);
          for (auto [col, v] : scaled[static_cast<std::size_t>(l2 - 1)]) psi_trips.emplace_back(row, col, -v);
          s.ops_ += static_cast<std::int64_t>(scaled[static_cast<std::size_t>(l1 - 1)].size() +
                                              scaled[static_cast<std::size_t>(l2 - 1)].size());
        }
    }
    s.phi_[static_cast<std::size_t>(j - 1)] = from_triplets(static_cast<Eigen::Index>(ids.size()), n, phi_trips);
    s.psi_[static_cast<std::size_t>(j - 1)] =
        from_triplets(s.layout_.psi_rows[static_cast<std::size_t>(j - 1)], n, psi_trips);
  }
  return s;
}

SparseMatrix framelet_matrix(const FrameletSystem& s) {
  Triplets trips;
  auto add = [&](const SparseMatrix& m, int col_base) {
    for (Eigen::Index r = 0; r < m.outerSize(); ++r)
      for (SparseMatrix::InnerIterator it(m, r); it; ++it)
        trips.emplace_back(static_cast<int>(it.col()), col_base + static_cast<int>(r), it.value());
  };
  add(s.phi(s.j0()), 0);
  for (int j = s.j0(); j < s.num_levels(); ++j)
    add(s.psi(j), s.layout().psi_column_base[static_cast<std::size_t>(j - 1)]);
  return from_triplets(s.num_nodes(), s.num_vectors(), trips);
}

namespace {

bool bitwise_equal(const SparseMatrix& a, const SparseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.nonZeros() != b.nonZeros()) return false;
  for (Eigen::Index r = 0; r < a.outerSize(); ++r) {
    SparseMatrix::InnerIterator x(a, r), y(b, r);
    for (; x && y; ++x, ++y)
      if (x.col() != y.col() || std::bit_cast<std::uint64_t>(x.value()) != std::bit_cast<std::uint64_t>(y.value()))
        return false;
    if (x || y) return false;
  }
  return true;
}

SparseMatrix permute_rows(const SparseMatrix& m, const Permutation& p) {
  Triplets trips;
  trips.reserve(static_cast<std::size_t>(m.nonZeros()));
  for (Eigen::Index r = 0; r < m.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(m, r); it; ++it)
      trips.emplace_back(p(static_cast<int>(r)), static_cast<int>(it.col()), it.value());
  return from_triplets(m.rows(), m.cols(), trips);
}

using RowKey = std::vector<std::pair<int, std::uint64_t>>;

// Row entries with columns remapped through `p` (if any), sorted by column.
// With `canonical`, signs are flipped so the first entry is positive.
RowKey row_key(const SparseMatrix& m, Eigen::Index r, const Permutation* p, bool canonical, bool* flipped) {
  std::vector<std::pair<int, double>> e;
  for (SparseMatrix::InnerIterator it(m, r); it; ++it)
    e.emplace_back(p ? (*p)(static_cast<int>(it.col())) : static_cast<int>(it.col()), it.value());
  std::sort(e.begin(), e.end());
  const bool flip = canonical && !e.empty() && e.front().second < 0.0;
  if (flipped) *flipped = flip;
  RowKey key;
  key.reserve(e.size());
  for (auto [c, v] : e) key.emplace_back(c, std::bit_cast<std::uint64_t>(flip ? -v : v));
  return key;
}

// Matches every row of `permuted` with a distinct row of `original`.
bool match_rows(const SparseMatrix& original, const Permutation* p, const SparseMatrix& permuted, bool up_to_sign,
                int& matched, int& flips) {
  if (original.rows() != permuted.rows()) return false;
  std::map<RowKey, std::vector<bool>> pool;
  for (Eigen::Index r = 0; r < original.rows(); ++r) {
    bool f = false;
    pool[row_key(original, r, p, up_to_sign, &f)].push_back(f);
  }
  for (Eigen::Index r = 0; r < permuted.rows(); ++r) {
    bool f = false;
    auto it = pool.find(row_key(permuted, r, nullptr, up_to_sign, &f));
    if (it == pool.end() || it->second.empty()) return false;
    if (it->second.back() != f) ++flips;
    it->second.pop_back();
    ++matched;
  }
  return true;
}

MatchReport match_systems(const FrameletSystem& a, const Permutation* p, const FrameletSystem& b) {
  MatchReport rep;
  if (a.num_levels() != b.num_levels() || a.j0() != b.j0() || a.num_nodes() != b.num_nodes()) return rep;
  for (int j = a.j0(); j <= a.num_levels(); ++j)
    if (!match_rows(a.phi(j), p, b.phi(j), false, rep.scaling_matched, rep.sign_flips)) return rep;
  for (int j = a.j0(); j < a.num_levels(); ++j)
    if (!match_rows(a.psi(j), p, b.psi(j), true, rep.framelets_matched, rep.sign_flips)) return rep;
  rep.passed = true;
  return rep;
}

}  // namespace

bool verify_node_equivariance(const HierarchyTree& t, const HierarchyTree& relabeled, const Permutation& p, int j0) {
  if (p.size() != t.num_vertices() || relabeled.num_vertices() != t.num_vertices()) return false;
  try {
    const SparseMatrix expected = permute_rows(framelet_matrix(generate_system(t, j0)), p);
    return bitwise_equal(framelet_matrix(generate_system(relabeled, j0)), expected);
  } catch (const std::invalid_argument&) {
    return false;
  }
}

bool verify_node_equivariance(const Graph& g, const HierarchyTree& t, const Permutation& p, int j0) {
  if (g.num_nodes() != t.num_vertices()) return false;
  return verify_node_equivariance(t, relabel_vertices(t, p), p, j0);
}

MatchReport verify_partition_equivariance(const HierarchyTree& t, const PartitionPermutation& pp, int j0) {
  return match_systems(generate_system(t, j0), nullptr, generate_system(apply_partition_permutation(t, pp), j0));
}

MatchReport verify_combined_equivariance(const HierarchyTree& t, const PartitionPermutation& pp,
                                         const Permutation& p, int j0) {
  const HierarchyTree moved = relabel_vertices(apply_partition_permutation(t, pp), p);
  return match_systems(generate_system(t, j0), &p, generate_system(moved, j0));
}

double norm_deviation(const FrameletSystem& s) {
  const HierarchyTree& t = s.tree();
  double worst = 0.0;
  auto row_norm = [](const SparseMatrix& m, Eigen::Index r) {
    double sq = 0.0;
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) sq += it.value() * it.value();
    return std::sqrt(sq);
  };
  for (int j = s.j0(); j <= s.num_levels(); ++j) {
    for (Eigen::Index r = 0; r < s.phi(j).rows(); ++r) worst = std::max(worst, std::abs(row_norm(s.phi(j), r) - 1.0));
    if (j == s.num_levels()) continue;
    for (int id : t.level_nodes(j)) {
      const int L = t.num_children(id);
      const double target = std::sqrt(2.0 / L);
      const int first = s.layout().psi_offset[static_cast<std::size_t>(id)];
      for (int m = 0; m < L * (L - 1) / 2; ++m)
        worst = std::max(worst, std::abs(row_norm(s.psi(j), first + m) - target));
    }
  }
  return worst;
}

void write_system(std::ostream& out, const FrameletSystem& s, const std::string& version) {
  const int K = s.num_levels();
  out << "hgf-framelets " << version << '\n';
  out << "levels " << K << "\nj0 " << s.j0() << "\nnodes " << s.num_nodes() << "\nvectors " << s.num_vectors()
      << '\n';
  out << "phi_rows";
  for (int j = s.j0(); j <= K; ++j) out << ' ' << s.phi(j).rows();
  out << "\npsi_rows";
  for (int j = s.j0(); j < K; ++j) out << ' ' << s.psi(j).rows();
  out << "\nhierarchy " << hierarchy_to_json(s.tree()) << '\n';
  for (int j = s.j0(); j <= K; ++j) {
    out << "phi " << j << '\n';
    write_coo(out, s.phi(j));
  }
  for (int j = s.j0(); j < K; ++j) {
    out << "psi " << j << '\n';
    write_coo(out, s.psi(j));
  }
}

namespace {

std::string expect_line(std::istream& in, const std::string& tag) {
  std::string line;
  while (std::getline(in, line) && line.empty()) {
  }
  if (line.rfind(tag + " ", 0) != 0 && line != tag)
    throw std::runtime_error("framelet archive: expected '" + tag + "'");
  return line.size() > tag.size() ? line.substr(tag.size() + 1) : std::string();
}

}  // namespace

FrameletSystem read_system(std::istream& in) {
  std::string header;
  if (!std::getline(in, header) || header.rfind("hgf-framelets", 0) != 0)
    throw std::runtime_error("not a framelet archive");
  const int K = std::stoi(expect_line(in, "levels"));
  const int j0 = std::stoi(expect_line(in, "j0"));
  const int n = std::stoi(expect_line(in, "nodes"));
  expect_line(in, "vectors");
  expect_line(in, "phi_rows");
  expect_line(in, "psi_rows");
  FrameletSystem s;
  s.tree_ = hierarchy_from_json(expect_line(in, "hierarchy"));
  require_valid(s.tree_);
  if (s.tree_.num_levels() != K || s.tree_.num_vertices() != n)
    throw std::runtime_error("framelet archive: manifest disagrees with hierarchy");
  s.layout_ = make_layout(s.tree_, j0);
  s.phi_.resize(static_cast<std::size_t>(K));
  s.psi_.resize(static_cast<std::size_t>(K));
  auto read_block = [&](const std::string& tag, int j, Eigen::Index rows) {
    if (std::stoi(expect_line(in, tag)) != j) throw std::runtime_error("framelet archive: level out of order");
    SparseMatrix m = read_coo(in);
    if (m.rows() != rows || m.cols() != n) throw std::runtime_error("framelet archive: block shape mismatch");
    return m;
  };
  for (int j = j0; j <= K; ++j)
    s.phi_[static_cast<std::size_t>(j - 1)] =
        read_block("phi", j, static_cast<Eigen::Index>(s.tree_.level_nodes(j).size()));
  for (int j = j0; j < K; ++j)
    s.psi_[static_cast<std::size_t>(j - 1)] = read_block("psi", j, s.layout_.psi_rows[static_cast<std::size_t>(j - 1)]);
  return s;
}

}  // namespace hgf
