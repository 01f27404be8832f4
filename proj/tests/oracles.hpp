#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hgf/graph.hpp"
#include "hgf/hierarchy.hpp"

namespace oracle {

using Dense = Eigen::MatrixXd;

inline Dense dense(const hgf::SparseMatrix& m) { return Dense(m); }

// Erdos-Renyi style graph with random positive weights.
inline hgf::Graph random_graph(int n, double avg_degree, std::mt19937_64& rng, bool weighted = true) {
  std::vector<hgf::Edge> edges;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double p = n > 1 ? std::min(1.0, avg_degree / (n - 1)) : 0.0;
  if (n <= 2000) {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (u(rng) < p) edges.push_back({i, j, weighted ? 0.5 + u(rng) : 1.0});
  } else {
    std::uniform_int_distribution<int> node(0, n - 1);
    const auto m = static_cast<long long>(avg_degree * n / 2);
    for (long long k = 0; k < m; ++k) {
      const int i = node(rng), j = node(rng);
      if (i != j) edges.push_back({i, j, weighted ? 0.5 + u(rng) : 1.0});
    }
  }
  return hgf::Graph::from_edges(n, edges);
}

// Bottom-up random grouping of a shuffled vertex order into runs of 1..h.
inline hgf::HierarchyTree random_tree(int n, int h, std::mt19937_64& rng) {
  std::vector<hgf::TreeNode> nodes(static_cast<std::size_t>(n));
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> current;
  for (int k = 0; k < n; ++k) {
    nodes[static_cast<std::size_t>(k)].vertex = order[static_cast<std::size_t>(k)];
    current.push_back(k);
  }
  std::uniform_int_distribution<int> run(1, h);
  while (current.size() > 1) {
    std::vector<int> next;
    std::size_t k = 0;
    while (k < current.size()) {
      std::size_t take = static_cast<std::size_t>(run(rng));
      // Keep shrinking: a level made only of singletons would never terminate.
      if (take == 1 && current.size() <= static_cast<std::size_t>(h)) take = current.size();
      take = std::min(take, current.size() - k);
      hgf::TreeNode nd;
      nd.children.assign(current.begin() + static_cast<std::ptrdiff_t>(k),
                         current.begin() + static_cast<std::ptrdiff_t>(k + take));
      next.push_back(static_cast<int>(nodes.size()));
      nodes.push_back(std::move(nd));
      k += take;
    }
    if (next.size() == current.size()) {
      // No progress; merge the first two.
      hgf::TreeNode& first = nodes[static_cast<std::size_t>(next[0])];
      const hgf::TreeNode second = nodes[static_cast<std::size_t>(next[1])];
      first.children.insert(first.children.end(), second.children.begin(), second.children.end());
      next.erase(next.begin() + 1);
    }
    current = std::move(next);
  }
  return hgf::HierarchyTree(std::move(nodes), current.front(), n);
}

// Tree order of level j, computed by an independent breadth-first walk.
inline std::vector<std::vector<int>> levels_by_bfs(const hgf::HierarchyTree& t) {
  std::vector<std::vector<int>> levels{{t.root()}};
  while (true) {
    std::vector<int> next;
    for (int id : levels.back())
      for (int c : t.node(id).children) next.push_back(c);
    if (next.empty()) break;
    levels.push_back(std::move(next));
  }
  return levels;
}

// Child pairs (l1, l2), 0-based, in lexicographic order.
inline std::vector<std::pair<int, int>> child_pairs(int L) {
  std::vector<std::pair<int, int>> out;
  for (int a = 0; a < L; ++a)
    for (int b = a + 1; b < L; ++b) out.emplace_back(a, b);
  return out;
}

// Dense n x M_G framelet matrix built straight from the recursive definitions.
inline Dense framelet_matrix(const hgf::HierarchyTree& t, int j0) {
  const int n = t.num_vertices();
  const auto levels = levels_by_bfs(t);
  const int K = static_cast<int>(levels.size());
  std::vector<Eigen::VectorXd> phi(static_cast<std::size_t>(t.size()));
  std::vector<std::vector<Eigen::VectorXd>> psi(static_cast<std::size_t>(t.size()));
  for (int j = K; j >= 1; --j) {
    for (int id : levels[static_cast<std::size_t>(j - 1)]) {
      const auto& nd = t.node(id);
      if (nd.children.empty()) {
        phi[static_cast<std::size_t>(id)] = Eigen::VectorXd::Unit(n, nd.vertex);
        continue;
      }
      const int L = static_cast<int>(nd.children.size());
      const double w = 1.0 / std::sqrt(static_cast<double>(L));
      Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
      for (int c : nd.children) acc += w * phi[static_cast<std::size_t>(c)];
      phi[static_cast<std::size_t>(id)] = acc;
      for (auto [a, b] : child_pairs(L))
        psi[static_cast<std::size_t>(id)].push_back(
            w * (phi[static_cast<std::size_t>(nd.children[static_cast<std::size_t>(a)])] -
                 phi[static_cast<std::size_t>(nd.children[static_cast<std::size_t>(b)])]));
    }
  }
  std::vector<Eigen::VectorXd> cols;
  for (int id : levels[static_cast<std::size_t>(j0 - 1)]) cols.push_back(phi[static_cast<std::size_t>(id)]);
  for (int j = j0; j < K; ++j)
    for (int id : levels[static_cast<std::size_t>(j - 1)])
      for (const auto& v : psi[static_cast<std::size_t>(id)]) cols.push_back(v);
  Dense F(n, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) F.col(static_cast<Eigen::Index>(k)) = cols[k];
  return F;
}

inline Dense permutation_matrix(const hgf::Permutation& p) {
  Dense P = Dense::Zero(p.size(), p.size());
  for (int i = 0; i < p.size(); ++i) P(p.mapping()[static_cast<std::size_t>(i)], i) = 1.0;
  return P;
}

inline double max_abs(const Dense& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

inline double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({1e-8, std::abs(analytic), std::abs(numeric)});
}

}  // namespace oracle
