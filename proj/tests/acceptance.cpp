// Acceptance suite: one PASS/FAIL line per criterion.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hgf/framelets.hpp"
#include "hgf/graph.hpp"
#include "hgf/hierarchy.hpp"
#include "hgf/pegfan.hpp"
#include "hgf/synthetic.hpp"
#include "hgf/transforms.hpp"

using namespace hgf;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string num(double v, int precision = 3) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

Graph random_graph(int n, double avg_degree, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> node(0, n - 1);
  std::uniform_real_distribution<double> w(0.5, 1.5);
  std::vector<Edge> edges;
  const auto m = static_cast<long long>(avg_degree * n / 2);
  for (long long k = 0; k < m; ++k) {
    const int i = node(rng), j = node(rng);
    if (i != j) edges.push_back({i, j, w(rng)});
  }
  return Graph::from_edges(n, edges);
}

Eigen::VectorXd random_unit(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> z;
  Eigen::VectorXd x(n);
  for (auto& v : x) v = z(rng);
  return x / x.norm();
}

Eigen::MatrixXd stacked(const Coefficients& c) {
  Eigen::MatrixXd out(c.x.rows() + c.y.rows(), c.x.cols());
  out << c.x, c.y;
  return out;
}

// 1. Tight frame on builder hierarchies.
Outcome tight_frame() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1001);
  const int sizes[] = {50, 500, 5000};
  const int hs[] = {2, 4, 8};
  double worst = 0.0;
  int systems = 0;
  for (int g = 0; g < 20; ++g) {
    const int n = sizes[g % 3];
    const int h = hs[(g / 3) % 3];
    const HierarchyTree t = build_hierarchy(random_graph(n, 6, rng), {h, 0});
    for (int j0 = 1; j0 <= t.num_levels(); ++j0) {
      const SparseMatrix F = framelet_matrix(generate_system(t, j0));
      ++systems;
      for (int k = 0; k < 20; ++k) {
        const Eigen::VectorXd x = random_unit(n, rng);
        const Eigen::VectorXd c = F.transpose() * x;
        worst = std::max(worst, (F * c - x).cwiseAbs().maxCoeff());
      }
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-9 && secs < 60.0,
          "max residual " + num(worst) + " over " + std::to_string(systems) + " systems, " + num(secs) + " s"};
}

// 2. Path-8 Haar basis against a hand-computed fixture.
Outcome path8_haar() {
  const double a = 1 / std::sqrt(8.0), b = 0.5, c = 1 / std::sqrt(2.0);
  Eigen::MatrixXd expect(8, 8);
  // clang-format off
  expect << a,  a,  b,  0,  c,  0,  0,  0,
            a,  a,  b,  0, -c,  0,  0,  0,
            a,  a, -b,  0,  0,  c,  0,  0,
            a,  a, -b,  0,  0, -c,  0,  0,
            a, -a,  0,  b,  0,  0,  c,  0,
            a, -a,  0,  b,  0,  0, -c,  0,
            a, -a,  0, -b,  0,  0,  0,  c,
            a, -a,  0, -b,  0,  0,  0, -c;
  // clang-format on
  std::vector<Edge> path;
  for (int i = 0; i < 7; ++i) path.push_back({i, i + 1, 1.0});
  const HierarchyTree t = build_hierarchy(Graph::from_edges(8, path), {2, 0});
  const FrameletSystem s = generate_system(t, 1);
  const Eigen::MatrixXd F(framelet_matrix(s));
  const double fixture = (F - expect).cwiseAbs().maxCoeff();
  const double ortho = (F.transpose() * F - Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff();

  // Each framelet is +const on its first child's subtree and -const on the second.
  bool signs = true;
  for (int col = 1; col < 8; ++col) {
    std::set<double> pos, neg;
    for (int i = 0; i < 8; ++i) {
      if (F(i, col) > 0) pos.insert(F(i, col));
      if (F(i, col) < 0) neg.insert(-F(i, col));
    }
    signs = signs && pos.size() == 1 && neg.size() == 1 && *pos.begin() == *neg.begin();
  }
  const bool pass = fixture <= 1e-15 && ortho <= 1e-15 && signs && s.num_vectors() == 8;
  return {pass, "fixture deviation " + num(fixture) + ", orthogonality " + num(ortho) +
                    (signs ? ", sign pattern ok" : ", sign pattern broken")};
}

// 3. Fast transforms against the dense frame matrix.
Outcome fast_vs_dense() {
  std::mt19937_64 rng(1003);
  std::uniform_int_distribution<int> size(5, 200), hpick(2, 8);
  double dec = 0.0, rec = 0.0, trip = 0.0;
  for (int k = 0; k < 50; ++k) {
    const int n = size(rng);
    const HierarchyTree t = build_hierarchy(random_graph(n, 4, rng), {hpick(rng), 0});
    std::uniform_int_distribution<int> level(1, t.num_levels());
    const int j0 = level(rng);
    const FrameletSystem s = generate_system(t, j0);
    const Eigen::MatrixXd F(framelet_matrix(s));
    const Signal f = Signal::Random(n, 2);
    const Coefficients c = decompose(t, f, j0);
    dec = std::max(dec, (stacked(c) - F.transpose() * f).cwiseAbs().maxCoeff());
    Coefficients r = c;
    r.x.setRandom();
    r.y.setRandom();
    rec = std::max(rec, (reconstruct(t, r) - F * stacked(r)).cwiseAbs().maxCoeff());
  }
  for (int n : {100, 1000, 10000}) {
    for (int h : {2, 4, 8}) {
      const HierarchyTree t = build_hierarchy(random_graph(n, 6, rng), {h, 0});
      for (int j0 = 1; j0 <= t.num_levels(); ++j0) {
        const Signal f = Signal::Random(n, 1);
        trip = std::max(trip, (reconstruct(t, decompose(t, f, j0)) - f).cwiseAbs().maxCoeff());
      }
    }
  }
  return {dec <= 1e-10 && rec <= 1e-10 && trip <= 1e-10,
          "decompose " + num(dec) + ", reconstruct " + num(rec) + ", round trip to n=10^4 " + num(trip)};
}

// 4. Adjusted sparsity bound.
Outcome sparsity() {
  std::mt19937_64 rng(1004);
  int violations = 0, signals = 0;
  const int ks[] = {1, 5, 20};
  for (int trial = 0; trial < 100; ++trial) {
    const int h = 2 + trial % 4;
    const int n = trial % 2 ? 1024 : 729;
    const HierarchyTree t = balanced_tree(n, h);
    std::uniform_int_distribution<int> node(0, n - 1);
    std::normal_distribution<double> value(0.0, 1.0);
    Signal f = Signal::Zero(n, 1);
    std::set<int> support;
    while (static_cast<int>(support.size()) < ks[trial % 3]) support.insert(node(rng));
    for (int i : support) f(i, 0) = value(rng);
    const SparsityReport r = sparsity_report(t, f, 1);
    ++signals;
    if (!r.passed()) ++violations;
  }
  return {violations == 0, std::to_string(violations) + " violations in " + std::to_string(signals) + " signals"};
}

// 5. Operation counts when n doubles.
Outcome complexity() {
  double lo = 1e300, hi = 0.0;
  double gen_const = 0.0, tr_const = 0.0;
  for (int h : {2, 4, 8}) {
    std::int64_t prev[3] = {0, 0, 0};
    for (int e = 10; e <= 14; ++e) {
      const int n = 1 << e;
      const HierarchyTree t = balanced_tree(n, h);
      const FrameletSystem s = generate_system(t, 1);
      const Coefficients c = decompose(t, Signal::Random(n, 1), 1);
      std::int64_t rec_ops = 0;
      reconstruct(t, c, &rec_ops);
      const std::int64_t cur[3] = {s.op_count(), c.ops, rec_ops};
      gen_const = std::max(gen_const, static_cast<double>(cur[0]) / (n * h * std::log(n) / std::log(h)));
      tr_const = std::max(tr_const, static_cast<double>(std::max(cur[1], cur[2])) / (static_cast<double>(n) * h));
      if (prev[0] > 0)
        for (int k = 0; k < 3; ++k) {
          const double f = static_cast<double>(cur[k]) / static_cast<double>(prev[k]);
          lo = std::min(lo, f);
          hi = std::max(hi, f);
        }
      std::copy(cur, cur + 3, prev);
    }
  }
  return {lo >= 1.8 && hi <= 2.6, "doubling factors in [" + num(lo, 4) + ", " + num(hi, 4) +
                                      "], generation ops / (n h log_h n) <= " + num(gen_const) +
                                      ", transform ops / (n h) <= " + num(tr_const)};
}

// 6. Node, partition and combined equivariance, plus the model.
Outcome equivariance() {
  std::mt19937_64 rng(1006);
  int node_ok = 0, part_ok = 0, comb_ok = 0, flips = 0;
  for (int k = 0; k < 50; ++k) {
    const int n = 20 + 7 * k;
    const Graph g = random_graph(n, 5, rng);
    const HierarchyTree t = build_hierarchy(g, {2 + k % 7, 0});
    std::uniform_int_distribution<int> level(1, t.num_levels());
    if (verify_node_equivariance(g, t, Permutation::random(n, rng), level(rng))) ++node_ok;
    const MatchReport pr = verify_partition_equivariance(t, PartitionPermutation::random(t, rng), level(rng));
    if (pr.passed) ++part_ok;
    flips += pr.sign_flips;
    if (verify_combined_equivariance(t, PartitionPermutation::random(t, rng), Permutation::random(n, rng), level(rng))
            .passed)
      ++comb_ok;
  }
  double model_dev = 0.0;
  for (int k = 0; k < 10; ++k) {
    const int n = 60;
    const Graph g = random_graph(n, 4, rng);
    const HierarchyTree t = build_hierarchy(g, {3, 0});
    const Signal X = Signal::Random(n, 6);
    const Permutation p = Permutation::random(n, rng);
    const ChannelKind kind = k % 3 == 0 ? ChannelKind::kA : (k % 3 == 1 ? ChannelKind::kB : ChannelKind::kC);
    const ChannelSet c = build_channels(X, g, generate_system(t, 1), kind, k % 2 == 0, 3);
    const ChannelSet pc =
        build_channels(p.apply(X), permute_graph(g, p), generate_system(relabel_vertices(t, p), 1), kind, k % 2 == 0, 3);
    PegfanConfig cfg;
    cfg.hidden = 16;
    cfg.seed = 50 + static_cast<std::uint64_t>(k);
    PegfanModel m(c.dims(), 4, cfg);
    m.params().logits.setRandom();
    model_dev = std::max(model_dev, (forward(m, pc) - p.apply(forward(m, c))).cwiseAbs().maxCoeff());
  }
  const bool pass = node_ok == 50 && part_ok == 50 && comb_ok == 50 && model_dev <= 1e-9;
  return {pass, "node " + std::to_string(node_ok) + "/50, partition " + std::to_string(part_ok) + "/50 (" +
                    std::to_string(flips) + " sign flips), combined " + std::to_string(comb_ok) +
                    "/50, model deviation " + num(model_dev)};
}

// 7. Synthetic generator and CCNS.
Outcome synthetic_ccns() {
  const auto t0 = Clock::now();
  Eigen::MatrixXd mean0 = Eigen::MatrixXd::Zero(4, 4), mean1 = Eigen::MatrixXd::Zero(4, 4);
  bool sizes_ok = true;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SyntheticConfig cfg;
    cfg.seed = seed;
    const LabeledGraph g0 = generate_graph(cfg);
    sizes_ok = sizes_ok && g0.graph.num_edges() == 45000 && g0.graph.num_nodes() == 3000;
    mean0 += ccns(g0) / 10.0;
    cfg.gamma = 1.0;
    mean1 += ccns(generate_graph(cfg)) / 10.0;
  }
  double off_lo = 1e300, off_hi = -1e300;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (i != j) {
        off_lo = std::min(off_lo, mean1(i, j));
        off_hi = std::max(off_hi, mean1(i, j));
      }
  const double secs = seconds_since(t0);
  const bool pass = sizes_ok && std::abs(mean0(0, 1) - 0.367) <= 0.05 && std::abs(mean0(0, 2) - 0.686) <= 0.05 &&
                    off_lo >= 0.88 && off_hi <= 0.94 && secs < 120.0;
  return {pass, "gamma 0: s(0,1) = " + num(mean0(0, 1)) + ", s(0,2) = " + num(mean0(0, 2)) +
                    "; gamma 1: off-diagonal in [" + num(off_lo) + ", " + num(off_hi) + "]; " + num(secs) + " s"};
}

// 8. Analytic gradients against central differences.
Outcome gradients() {
  std::mt19937_64 rng(1008);
  std::vector<Edge> edges;
  std::uniform_int_distribution<int> node(0, 11);
  for (int k = 0; k < 24; ++k) {
    const int i = node(rng), j = node(rng);
    if (i != j) edges.push_back({i, j, 1.0});
  }
  const Graph g = Graph::from_edges(12, edges);
  const FrameletSystem s = generate_system(build_hierarchy(g, {3, 0}), 1);
  const ChannelSet c = build_channels(Signal::Random(12, 5), g, s, ChannelKind::kB, false, 2);
  std::vector<int> labels(12);
  for (int i = 0; i < 12; ++i) labels[static_cast<std::size_t>(i)] = i % 3;
  PegfanConfig cfg;
  cfg.hidden = 5;
  cfg.wd_sca = 0.01;
  cfg.wd_fc1 = 0.001;
  cfg.wd_fc2 = 0.001;
  cfg.seed = 8;
  PegfanModel m(c.dims(), 3, cfg);
  m.params().logits = Eigen::VectorXd::Random(c.size());
  std::vector<char> mask(12, 1);
  mask[0] = mask[5] = 0;
  Eigen::MatrixXd keep(10, static_cast<Eigen::Index>(c.size()) * cfg.hidden);
  std::bernoulli_distribution draw(0.5);
  for (Eigen::Index i = 0; i < keep.size(); ++i) keep.data()[i] = draw(rng) ? 2.0 : 0.0;

  double worst = 0.0;
  int entries = 0;
  for (const Eigen::MatrixXd* drop : std::vector<const Eigen::MatrixXd*>{nullptr, &keep}) {
    PegfanParams grads;
    loss_and_grads(m, c, labels, mask, &grads, drop);
    PegfanModel probe = m;
    auto check = [&](double& slot, double analytic) {
      const double saved = slot, h = 1e-5;
      slot = saved + h;
      const double up = loss_and_grads(probe, c, labels, mask, nullptr, drop);
      slot = saved - h;
      const double down = loss_and_grads(probe, c, labels, mask, nullptr, drop);
      slot = saved;
      const double numeric = (up - down) / (2 * h);
      worst = std::max(worst, std::abs(analytic - numeric) /
                                  std::max({1e-8, std::abs(analytic), std::abs(numeric)}));
      ++entries;
    };
    auto& p = probe.params();
    for (std::size_t i = 0; i < p.channel_weights.size(); ++i)
      for (Eigen::Index k = 0; k < p.channel_weights[i].size(); ++k)
        check(p.channel_weights[i].data()[k], grads.channel_weights[i].data()[k]);
    for (Eigen::Index k = 0; k < p.output_weights.size(); ++k) check(p.output_weights.data()[k], grads.output_weights.data()[k]);
    for (Eigen::Index k = 0; k < p.logits.size(); ++k) check(p.logits[k], grads.logits[k]);
  }
  return {worst <= 1e-4, "max relative error " + num(worst) + " over " + std::to_string(entries) + " entries"};
}

struct TrainingSummary {
  double mean_test = 0.0;
  double seconds = 0.0;
  double mean_epochs = 0.0;
  std::vector<double> per_seed;
};

TrainingSummary synthetic_training(double gamma, FeatureModel model, int seeds, int epochs, int patience) {
  const auto t0 = Clock::now();
  TrainingSummary out;
  for (int seed = 0; seed < seeds; ++seed) {
    SyntheticConfig cfg;
    cfg.gamma = gamma;
    cfg.seed = 9000 + static_cast<std::uint64_t>(seed);
    cfg.feature_model = model;
    const LabeledGraph data = generate_graph(cfg);
    const Signal X = generate_features(data.labels, cfg.feat_dim, cfg.feat_scale, cfg.seed ^ 0x5deece66dULL, model);
    const FrameletSystem s = generate_system(build_hierarchy(data.graph, {4, 0}), 1);
    ChannelSet c = build_channels(X, data.graph, s, ChannelKind::kB, false, 3);
    c.channels.erase(c.channels.begin());
    c.tags.erase(c.tags.begin());
    PegfanConfig pc;
    pc.epochs = epochs;
    pc.patience = patience;
    pc.seed = static_cast<std::uint64_t>(seed);
    const TrainResult r = train(PegfanModel(c.dims(), data.num_classes, pc), c, data);
    const double acc = evaluate(r.best, c, data.labels, data.masks.test);
    out.per_seed.push_back(acc);
    out.mean_test += acc / seeds;
    out.mean_epochs += static_cast<double>(r.history.size()) / seeds;
  }
  out.seconds = seconds_since(t0);
  return out;
}

int env_int(const char* name, int fallback) {
  const char* v = std::getenv(name);
  return v ? std::atoi(v) : fallback;
}

// 9. Training sanity on the synthetic benchmark.
Outcome training() {
  const int seeds = env_int("HGF_ACCEPT_SEEDS", 10);
  const int epochs = env_int("HGF_ACCEPT_EPOCHS", 200);
  const int patience = env_int("HGF_ACCEPT_PATIENCE", 50);
  const TrainingSummary g0 = synthetic_training(0.0, FeatureModel::kShifted, seeds, epochs, patience);
  const TrainingSummary g1 = synthetic_training(1.0, FeatureModel::kShifted, seeds, epochs, patience);
  const double secs = g0.seconds + g1.seconds;
  const bool pass = g0.mean_test >= 0.85 && g1.mean_test < g0.mean_test && secs < 900.0;
  return {pass, "shifted features, " + std::to_string(seeds) + " seeds: gamma 0 test " + num(g0.mean_test) +
                    ", gamma 1 test " + num(g1.mean_test) + "; mean epochs " + num(g0.mean_epochs) + " / " +
                    num(g1.mean_epochs) + "; " + num(secs) + " s"};
}

// Reported only: the multiplicative feature model at gamma 0.
Outcome training_scaled_info() {
  const int seeds = env_int("HGF_ACCEPT_INFO_SEEDS", 2);
  const TrainingSummary g0 = synthetic_training(0.0, FeatureModel::kScaled, seeds, env_int("HGF_ACCEPT_EPOCHS", 200),
                                                env_int("HGF_ACCEPT_PATIENCE", 50));
  return {true, "scaled features, " + std::to_string(seeds) + " seeds: gamma 0 test " + num(g0.mean_test) + "; " +
                    num(g0.seconds) + " s"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1", tight_frame},  {"2", path8_haar},   {"3", fast_vs_dense}, {"4", sparsity}, {"5", complexity},
      {"6", equivariance}, {"7", synthetic_ccns}, {"8", gradients},   {"9", training}};
  std::set<std::string> only(argv + 1, argv + argc);
  int failures = 0;
  for (const auto& [id, run] : criteria) {
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail << std::endl;
  }
  if (only.empty() || only.count("info")) {
    const Outcome o = training_scaled_info();
    std::cout << "info (not gating): " << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
