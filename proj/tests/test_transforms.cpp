#include <cmath>

#include "doctest.h"
#include "hgf/transforms.hpp"
#include "oracles.hpp"

using namespace hgf;

namespace {

Eigen::MatrixXd stacked(const Coefficients& c) {
  Eigen::MatrixXd out(c.x.rows() + c.y.rows(), c.x.cols());
  out << c.x, c.y;
  return out;
}

Coefficients unstack(const Eigen::MatrixXd& v, int num_scaling, int j0) {
  Coefficients c;
  c.j0 = j0;
  c.x = v.topRows(num_scaling);
  c.y = v.bottomRows(v.rows() - num_scaling);
  return c;
}

int count_nonzeros(const Eigen::MatrixXd& m, double eps = 1e-12) { return static_cast<int>((m.array().abs() > eps).count()); }

}  // namespace

TEST_CASE("decompose and reconstruct agree with the dense frame matrix") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 3 + trial * 5;
    const HierarchyTree t = trial % 2 ? oracle::random_tree(n, 2 + trial % 6, rng)
                                      : build_hierarchy(oracle::random_graph(n, 3, rng), {2 + trial % 4, 0});
    for (int j0 = 1; j0 <= t.num_levels(); ++j0) {
      const oracle::Dense F = oracle::framelet_matrix(t, j0);
      const Signal f = Signal::Random(n, 1 + trial % 3);
      const Coefficients c = decompose(t, f, j0);
      CHECK(oracle::max_abs(stacked(c) - F.transpose() * f) <= 1e-10);
      const Eigen::MatrixXd v = Eigen::MatrixXd::Random(F.cols(), f.cols());
      const int num_scaling = static_cast<int>(t.level_nodes(j0).size());
      CHECK(oracle::max_abs(reconstruct(t, unstack(v, num_scaling, j0)) - F * v) <= 1e-10);
    }
  }
}

TEST_CASE("perfect reconstruction and energy preservation") {
  std::mt19937_64 rng(47);
  for (int n : {10, 100, 1000, 10000}) {
    const HierarchyTree t = build_hierarchy(oracle::random_graph(n, 6, rng), {4, 0});
    for (int j0 = 1; j0 <= t.num_levels(); ++j0) {
      const Signal f = Signal::Random(n, 2);
      const Coefficients c = decompose(t, f, j0);
      CHECK(oracle::max_abs(reconstruct(t, c) - f) <= 1e-10);
      CHECK(stacked(c).norm() == doctest::Approx(f.norm()).epsilon(1e-12));
    }
  }
}

TEST_CASE("reconstruct is linear and maps zero to zero") {
  std::mt19937_64 rng(53);
  const HierarchyTree t = oracle::random_tree(70, 5, rng);
  const Coefficients base = decompose(t, Signal::Zero(70, 1), 1);
  CHECK(oracle::max_abs(reconstruct(t, base)) == 0.0);
  Coefficients c1 = base, c2 = base, mix = base;
  c1.x.setRandom();
  c1.y.setRandom();
  c2.x.setRandom();
  c2.y.setRandom();
  mix.x = 2.5 * c1.x - 0.75 * c2.x;
  mix.y = 2.5 * c1.y - 0.75 * c2.y;
  CHECK(oracle::max_abs(reconstruct(t, mix) - (2.5 * reconstruct(t, c1) - 0.75 * reconstruct(t, c2))) <= 1e-10);
}

TEST_CASE("worked decompositions") {
  SUBCASE("constant signal on a balanced binary tree") {
    const HierarchyTree t = balanced_tree(16, 2);
    const Coefficients c = decompose(t, Signal::Constant(16, 1, 0.25), 1);
    CHECK(c.x(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(oracle::max_abs(c.y) <= 1e-15);
  }
  SUBCASE("delta at node 0 on path-8") {
    const HierarchyTree t = balanced_tree(8, 2);
    Signal d = Signal::Zero(8, 1);
    d(0, 0) = 1.0;
    const Eigen::MatrixXd v = stacked(decompose(t, d, 1));
    CHECK(count_nonzeros(v) == 4);
    const oracle::Dense F = oracle::framelet_matrix(t, 1);
    CHECK(oracle::max_abs(v - F.row(0).transpose()) <= 1e-15);
  }
}

TEST_CASE("transform errors") {
  const HierarchyTree t = balanced_tree(8, 2);
  CHECK_THROWS_AS(decompose(t, Signal::Zero(7, 1), 1), std::invalid_argument);
  CHECK_THROWS_AS(decompose(t, Signal::Zero(8, 1), 0), std::invalid_argument);
  CHECK_THROWS_AS(decompose(t, Signal::Zero(8, 1), 5), std::invalid_argument);
  Coefficients c = decompose(t, Signal::Zero(8, 1), 2);
  c.y.resize(c.y.rows() + 1, 1);
  CHECK_THROWS_AS(reconstruct(t, c), std::invalid_argument);
}

TEST_CASE("transform cost scales with n at fixed h") {
  for (int h : {2, 4, 8}) {
    std::int64_t prev_dec = 0, prev_rec = 0;
    for (int e = 10; e <= 14; ++e) {
      const int n = 1 << e;
      const HierarchyTree t = balanced_tree(n, h);
      const Coefficients c = decompose(t, Signal::Random(n, 1), 1);
      std::int64_t rec_ops = 0;
      reconstruct(t, c, &rec_ops);
      CHECK(static_cast<double>(c.ops) <= 2.0 * n * h);
      CHECK(static_cast<double>(rec_ops) <= 2.0 * n * h);
      if (prev_dec > 0) {
        const double fd = static_cast<double>(c.ops) / static_cast<double>(prev_dec);
        const double fr = static_cast<double>(rec_ops) / static_cast<double>(prev_rec);
        CHECK(fd >= 1.8);
        CHECK(fd <= 2.6);
        CHECK(fr >= 1.8);
        CHECK(fr <= 2.6);
      }
      prev_dec = c.ops;
      prev_rec = rec_ops;
    }
  }
}

TEST_CASE("project_level") {
  std::mt19937_64 rng(59);
  SUBCASE("coarsest projection fixes constants on a balanced tree") {
    const FrameletSystem s = generate_system(balanced_tree(27, 3), 1);
    CHECK(oracle::max_abs(project_level(s, 0, Signal::Ones(27, 1)) - Signal::Ones(27, 1)) <= 1e-14);
  }
  SUBCASE("resolution of identity and idempotence") {
    for (int trial = 0; trial < 10; ++trial) {
      const int n = 20 + 8 * trial;
      const FrameletSystem s = generate_system(oracle::random_tree(n, 2 + trial % 5, rng), 1);
      const Signal X = Signal::Random(n, 3);
      Signal total = project_level(s, 0, X);
      for (int j = 1; j < s.num_levels(); ++j) {
        const Signal P = project_level(s, j, X);
        total += P;
        CHECK(oracle::max_abs(project_level(s, j, P) - P) <= 1e-9);
        const oracle::Dense Psi = oracle::dense(s.psi(j));
        CHECK(oracle::max_abs(P - Psi.transpose() * (Psi * X)) <= 1e-12);
      }
      CHECK(oracle::max_abs(total - X) <= 1e-9);
    }
  }
  SUBCASE("levels out of range or a system without Phi_1") {
    const FrameletSystem s = generate_system(balanced_tree(8, 2), 1);
    CHECK_THROWS_AS(project_level(s, 4, Signal::Zero(8, 1)), std::out_of_range);
    CHECK_THROWS_AS(project_level(s, -1, Signal::Zero(8, 1)), std::out_of_range);
    CHECK_THROWS_AS(project_level(generate_system(balanced_tree(8, 2), 2), 0, Signal::Zero(8, 1)),
                    std::invalid_argument);
  }
}

TEST_CASE("sparsity report") {
  std::mt19937_64 rng(61);
  SUBCASE("delta on a balanced binary tree with four levels") {
    const HierarchyTree t = balanced_tree(8, 2);
    Signal d = Signal::Zero(8, 1);
    d(5, 0) = 1.0;
    const SparsityReport r = sparsity_report(t, d, 1);
    CHECK(r.signal_nonzeros == 1);
    CHECK(r.framelet_nonzeros == 3);
    CHECK(r.scaling_nonzeros == 1);
    CHECK(r.framelet_bound == 3);
    CHECK(r.passed());
  }
  SUBCASE("zero signal") {
    const SparsityReport r = sparsity_report(balanced_tree(16, 4), Signal::Zero(16, 1), 1);
    CHECK(r.signal_nonzeros == 0);
    CHECK(r.framelet_nonzeros == 0);
    CHECK(r.scaling_nonzeros == 0);
    CHECK(r.passed());
  }
  SUBCASE("random sparse signals on balanced trees") {
    for (int h : {2, 3, 4}) {
      const HierarchyTree t = balanced_tree(256, h);
      std::uniform_int_distribution<int> node(0, 255);
      for (int k : {1, 5, 20}) {
        for (int trial = 0; trial < 10; ++trial) {
          Signal f = Signal::Zero(256, 1);
          for (int i = 0; i < k; ++i) f(node(rng), 0) = 1.0 + trial;
          const SparsityReport r = sparsity_report(t, f, 1);
          CHECK(r.passed());
          const Eigen::MatrixXd v = stacked(decompose(t, f, 1));
          CHECK(r.framelet_nonzeros == count_nonzeros(v.bottomRows(v.rows() - 1)));
        }
      }
    }
  }
}

TEST_CASE("coefficient JSON round trip") {
  std::mt19937_64 rng(67);
  const HierarchyTree t = oracle::random_tree(30, 4, rng);
  for (int d : {1, 3}) {
    const Coefficients c = decompose(t, Signal::Random(30, d), 2);
    const Coefficients back = coefficients_from_json(t, coefficients_to_json(t, c));
    CHECK(back.j0 == 2);
    CHECK(back.x == c.x);
    CHECK(back.y == c.y);
  }
  CHECK_THROWS(coefficients_from_json(t, "[]"));
}
