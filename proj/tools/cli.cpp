#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hgf/framelets.hpp"
#include "hgf/graph.hpp"
#include "hgf/hierarchy.hpp"
#include "hgf/pegfan.hpp"
#include "hgf/synthetic.hpp"
#include "hgf/transforms.hpp"
#include "hgf/version.hpp"

namespace hgf {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kInputError = 2;

struct Common {
  std::string config;
  std::string summary;
  int threads = 1;
  bool deterministic = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "JSON file of option values; command-line flags take precedence");
  cmd->add_option("--summary", c.summary, "Write a machine-readable JSON summary here");
  cmd->add_option("--threads", c.threads, "Upper bound on worker threads")->check(CLI::PositiveNumber);
  cmd->add_flag("--deterministic", c.deterministic, "Fixed reduction order for bitwise-reproducible output");
}

std::string fmt(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

template <class F>
auto read_file(const std::string& path, F&& reader) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return reader(in);
}

void write_summary(const Common& c, json summary, const std::string& command) {
  if (c.summary.empty()) return;
  summary["version"] = kVersion;
  summary["command"] = command;
  summary["threads"] = c.threads;
  summary["deterministic"] = c.deterministic;
  auto out = open_out(c.summary);
  out << summary.dump(2) << '\n';
}

// Appends `--key value` for each config entry whose flag is absent from argv.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  json cfg;
  try {
    cfg = json::parse(slurp(path));
  } catch (const json::parse_error& e) {
    throw CLI::ValidationError("--config", std::string("not valid JSON: ") + e.what());
  }
  if (!cfg.is_object()) throw CLI::ValidationError("--config", "top level must be an object");
  std::set<std::string> present;
  for (const auto& a : args)
    if (a.rfind("--", 0) == 0) present.insert(a.substr(0, a.find('=')));
  for (const auto& [key, value] : cfg.items()) {
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    if (present.count(flag)) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back(flag);
      continue;
    }
    args.push_back(flag);
    auto scalar = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
    if (value.is_array()) {
      for (const auto& v : value) {
        if (v.is_array())
          for (const auto& w : v) args.push_back(scalar(w));
        else
          args.push_back(scalar(v));
      }
    } else {
      args.push_back(scalar(value));
    }
  }
  return args;
}

Eigen::VectorXd random_unit(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> z;
  Eigen::VectorXd x(n);
  for (auto& v : x) v = z(rng);
  return x / x.norm();
}

HierarchyTree hierarchy_for(const std::string& hierarchy_path, int h, int max_levels, const Graph* g) {
  if (!hierarchy_path.empty()) return load_hierarchy(hierarchy_path);
  if (!g) throw std::runtime_error("need --hierarchy or --edges");
  return build_hierarchy(*g, {h, max_levels});
}

int report_violations(const std::vector<Violation>& v, std::ostream& out) {
  for (const auto& x : v) out << "violation: " << format_violation(x) << '\n';
  return v.empty() ? kOk : kCheckFailed;
}

json violations_json(const std::vector<Violation>& v) {
  json arr = json::array();
  for (const auto& x : v) arr.push_back({{"path", x.path}, {"rule", x.rule}, {"detail", x.detail}});
  return arr;
}

// ---- hierarchy --------------------------------------------------------------

struct HierarchyArgs {
  std::string edges, out;
  int nodes = 0, h = 2, max_levels = 0;
};

int cmd_hierarchy(const HierarchyArgs& a, const Common& c, std::ostream& out) {
  const Graph g = load_edge_list(a.edges, a.nodes);
  const HierarchyTree t = build_hierarchy(g, {a.h, a.max_levels});
  const auto violations = validate_hierarchy(t, g.num_nodes());
  out << "nodes: " << g.num_nodes() << "\nlevels K: " << t.num_levels() << "\nclusters per level:";
  for (int s : t.level_sizes()) out << ' ' << s;
  out << "\nmax children: " << t.max_children() << '\n';
  const int code = report_violations(violations, out);
  if (!a.out.empty()) open_out(a.out) << hierarchy_to_json(t) << '\n';
  write_summary(c,
                {{"ok", code == kOk},
                 {"nodes", g.num_nodes()},
                 {"levels", t.num_levels()},
                 {"level_sizes", t.level_sizes()},
                 {"max_children", t.max_children()},
                 {"violations", violations_json(violations)}},
                "hierarchy");
  return code;
}

// ---- framelets --------------------------------------------------------------

struct FrameletArgs {
  std::string edges, hierarchy, out;
  int nodes = 0, h = 2, max_levels = 0, j0 = 1, trials = 5;
  std::uint64_t seed = 0;
};

int cmd_framelets(const FrameletArgs& a, const Common& c, std::ostream& out) {
  std::optional<Graph> g;
  if (!a.edges.empty()) g = load_edge_list(a.edges, a.nodes);
  const HierarchyTree t = hierarchy_for(a.hierarchy, a.h, a.max_levels, g ? &*g : nullptr);
  if (g && g->num_nodes() != t.num_vertices())
    throw std::runtime_error("graph has " + std::to_string(g->num_nodes()) + " nodes, hierarchy has " +
                             std::to_string(t.num_vertices()));
  const auto violations = validate_hierarchy(t, t.num_vertices());
  if (!violations.empty()) return report_violations(violations, out);
  if (a.j0 < 1 || a.j0 > t.num_levels())
    throw CLI::ValidationError("--j0", "must lie in [1, " + std::to_string(t.num_levels()) + "]");

  const FrameletSystem s = generate_system(t, a.j0);
  const SparseMatrix F = framelet_matrix(s);
  std::mt19937_64 rng(a.seed);
  double residual = 0.0;
  for (int k = 0; k < a.trials; ++k) {
    const Eigen::VectorXd x = random_unit(t.num_vertices(), rng);
    const Eigen::VectorXd coeffs = F.transpose() * x;
    residual = std::max(residual, (F * coeffs - x).cwiseAbs().maxCoeff());
  }
  const bool ok = residual <= 1e-9;
  out << "levels K: " << s.num_levels() << "\nj0: " << s.j0() << "\nvectors M_G: " << s.num_vectors()
      << "\nnonzeros: " << F.nonZeros() << "\ngeneration ops: " << s.op_count() << '\n';
  if (a.trials > 0) out << "tight frame residual: " << fmt(residual) << (ok ? " (pass)" : " (FAIL)") << '\n';
  if (!a.out.empty()) {
    auto f = open_out(a.out);
    write_system(f, s, kVersion);
  }
  write_summary(c,
                {{"ok", ok},
                 {"levels", s.num_levels()},
                 {"j0", s.j0()},
                 {"vectors", s.num_vectors()},
                 {"nonzeros", F.nonZeros()},
                 {"ops", s.op_count()},
                 {"tight_frame_residual", residual}},
                "framelets");
  return ok ? kOk : kCheckFailed;
}

// ---- transform --------------------------------------------------------------

struct TransformArgs {
  std::string mode, system, hierarchy, input, out;
  int j0 = 1;
};

int cmd_transform(const TransformArgs& a, const Common& c, std::ostream& out) {
  HierarchyTree t;
  int j0 = a.j0;
  if (!a.system.empty()) {
    std::ifstream in(a.system);
    if (!in) throw std::runtime_error("cannot open " + a.system);
    const FrameletSystem s = read_system(in);
    t = s.tree();
    j0 = s.j0();
  } else if (!a.hierarchy.empty()) {
    t = load_hierarchy(a.hierarchy);
  } else {
    throw CLI::ValidationError("transform", "need --system or --hierarchy");
  }
  json summary{{"mode", a.mode}, {"j0", j0}};
  std::ostringstream body;
  if (a.mode == "decompose") {
    const Signal f = read_file(a.input, read_features);
    const Coefficients coeffs = decompose(t, f, j0);
    body << coefficients_to_json(t, coeffs) << '\n';
    summary["ops"] = coeffs.ops;
    summary["columns"] = coeffs.columns();
  } else {
    const Coefficients coeffs = coefficients_from_json(t, slurp(a.input));
    std::int64_t ops = 0;
    const Signal f = reconstruct(t, coeffs, &ops);
    write_matrix_csv(body, f);
    summary["ops"] = ops;
    summary["columns"] = f.cols();
  }
  if (a.out.empty()) {
    out << body.str();
  } else {
    open_out(a.out) << body.str();
    out << a.mode << ": wrote " << a.out << " (" << summary["ops"].get<std::int64_t>() << " ops)\n";
  }
  summary["ok"] = true;
  write_summary(c, summary, "transform");
  return kOk;
}

// ---- verify -----------------------------------------------------------------

struct VerifyArgs {
  std::string edges, hierarchy;
  int nodes = 0, h = 2, max_levels = 0, j0 = 0, trials = 20;
  std::uint64_t seed = 0;
};

int cmd_verify(const VerifyArgs& a, const Common& c, std::ostream& out) {
  std::optional<Graph> g;
  if (!a.edges.empty()) g = load_edge_list(a.edges, a.nodes);
  const HierarchyTree t = hierarchy_for(a.hierarchy, a.h, a.max_levels, g ? &*g : nullptr);
  json checks = json::object();
  bool all_ok = true;
  auto record = [&](const std::string& name, bool ok, const std::string& detail) {
    out << std::left << std::setw(28) << name << (ok ? "PASS" : "FAIL") << "  " << detail << '\n';
    checks[name] = {{"ok", ok}, {"detail", detail}};
    all_ok = all_ok && ok;
  };

  const int n = t.num_vertices();
  const auto violations = validate_hierarchy(t, n);
  record("hierarchy", violations.empty(), std::to_string(violations.size()) + " violations");
  for (const auto& v : violations) out << "  " << format_violation(v) << '\n';
  if (g && g->num_nodes() != n) record("graph size", false, "graph and hierarchy disagree on n");
  if (!violations.empty()) {
    write_summary(c, {{"ok", false}, {"checks", checks}, {"violations", violations_json(violations)}}, "verify");
    return kCheckFailed;
  }

  const int K = t.num_levels();
  std::set<int> child_counts;
  for (const auto& nd : t.nodes())
    if (!nd.children.empty()) child_counts.insert(static_cast<int>(nd.children.size()));
  bool filters_ok = true;
  for (int L : child_counts) {
    const FilterPair fp = binary_filter_pair(L);
    filters_ok = filters_ok && check_filter_conditions(fp.p, fp.B).passed();
  }
  record("filter conditions", filters_ok, std::to_string(child_counts.size()) + " distinct child counts");

  std::vector<int> levels;
  if (a.j0 == 0)
    for (int j = 1; j <= K; ++j) levels.push_back(j);
  else
    levels.push_back(a.j0);
  for (int j0 : levels)
    if (j0 < 1 || j0 > K) throw CLI::ValidationError("--j0", "must lie in [1, " + std::to_string(K) + "]");

  double norm_dev = 0.0;
  for (int j0 : levels) {
    norm_dev = std::max(norm_dev, norm_deviation(generate_system(t, j0)));
  }
  record("vector norms", norm_dev <= 1e-12, "max deviation " + fmt(norm_dev));

  std::mt19937_64 rng(a.seed);
  if (a.trials > 0) {
    double residual = 0.0, round_trip = 0.0, parseval = 0.0;
    for (int j0 : levels) {
      const FrameletSystem s = generate_system(t, j0);
      const SparseMatrix F = framelet_matrix(s);
      for (int k = 0; k < a.trials; ++k) {
        const Eigen::VectorXd x = random_unit(n, rng);
        const Eigen::VectorXd coeffs = F.transpose() * x;
        residual = std::max(residual, (F * coeffs - x).cwiseAbs().maxCoeff());
        const Coefficients fast = decompose(t, x, j0);
        const Signal back = reconstruct(t, fast);
        round_trip = std::max(round_trip, (back - x).cwiseAbs().maxCoeff());
        parseval = std::max(parseval, std::abs(std::sqrt(fast.x.squaredNorm() + fast.y.squaredNorm()) - 1.0));
      }
    }
    record("tight frame", residual <= 1e-9, "max |FF^T x - x| = " + fmt(residual));
    record("perfect reconstruction", round_trip <= 1e-10, "max error " + fmt(round_trip));
    record("energy preservation", parseval <= 1e-9, "max deviation " + fmt(parseval));

    int node_ok = 0, part_ok = 0, comb_ok = 0, flips = 0;
    for (int k = 0; k < a.trials; ++k) {
      const int j0 = levels[static_cast<std::size_t>(k) % levels.size()];
      const Permutation p = Permutation::random(n, rng);
      const PartitionPermutation pp = PartitionPermutation::random(t, rng);
      node_ok += verify_node_equivariance(t, relabel_vertices(t, p), p, j0);
      const MatchReport r = verify_partition_equivariance(t, pp, j0);
      part_ok += r.passed;
      flips += r.sign_flips;
      comb_ok += verify_combined_equivariance(t, pp, p, j0).passed;
    }
    const std::string of = "/" + std::to_string(a.trials);
    record("node equivariance", node_ok == a.trials, std::to_string(node_ok) + of + " bitwise");
    record("partition equivariance", part_ok == a.trials,
           std::to_string(part_ok) + of + ", " + std::to_string(flips) + " sign flips");
    record("combined equivariance", comb_ok == a.trials, std::to_string(comb_ok) + of);

    int sparse_ok = 0, sparse_total = 0;
    std::uniform_int_distribution<int> node(0, n - 1);
    std::normal_distribution<double> z;
    for (int support : {1, 5, 20}) {
      if (support > n) continue;
      for (int k = 0; k < a.trials; ++k) {
        Signal f = Signal::Zero(n, 1);
        for (int placed = 0; placed < support;) {
          const int i = node(rng);
          if (f(i, 0) != 0.0) continue;
          double v = z(rng);
          f(i, 0) = v == 0.0 ? 1.0 : v;
          ++placed;
        }
        ++sparse_total;
        sparse_ok += sparsity_report(t, f, levels.front()).passed();
      }
    }
    record("sparsity bound", sparse_ok == sparse_total,
           std::to_string(sparse_ok) + "/" + std::to_string(sparse_total) + " signals");
  }

  const FrameletSystem s = generate_system(t, levels.front());
  const int h = std::max(2, t.max_children());
  const double scale = static_cast<double>(n) * h * std::max(1.0, std::log(static_cast<double>(n)) / std::log(h));
  const double ratio = static_cast<double>(s.op_count()) / scale;
  out << std::left << std::setw(28) << "generation ops" << s.op_count() << "  (" << fmt(ratio)
      << " x n h log_h n)\n";
  checks["generation_ops"] = {{"ops", s.op_count()}, {"ratio", ratio}};

  write_summary(c, {{"ok", all_ok}, {"checks", checks}, {"levels", K}, {"nodes", n}}, "verify");
  return all_ok ? kOk : kCheckFailed;
}

// ---- synth ------------------------------------------------------------------

struct SynthArgs {
  SyntheticConfig cfg;
  std::vector<double> dist, split;
  std::string feature_model = "scaled";
  std::string out_dir;
};

FeatureModel parse_feature_model(const std::string& s) {
  if (s == "scaled") return FeatureModel::kScaled;
  if (s == "shifted") return FeatureModel::kShifted;
  throw CLI::ValidationError("--feature-model", "must be 'scaled' or 'shifted'");
}

std::uint64_t feature_seed(std::uint64_t seed) { return seed ^ 0x5deece66dULL; }

int cmd_synth(SynthArgs a, const Common& c, std::ostream& out) {
  SyntheticConfig cfg = a.cfg;
  if (!a.dist.empty()) {
    const int k = cfg.num_classes;
    if (a.dist.size() != static_cast<std::size_t>(k) * k)
      throw CLI::ValidationError("--dist", "needs num_classes^2 values (row-major)");
    cfg.dist.resize(k, k);
    for (int r = 0; r < k; ++r)
      for (int q = 0; q < k; ++q) cfg.dist(r, q) = a.dist[static_cast<std::size_t>(r * k + q)];
  } else if (cfg.num_classes != 4) {
    throw CLI::ValidationError("--dist", "required when num_classes != 4");
  }
  if (!a.split.empty()) {
    if (a.split.size() != 3) throw CLI::ValidationError("--split", "needs three fractions");
    cfg.split = {a.split[0], a.split[1], a.split[2]};
  }
  cfg.feature_model = parse_feature_model(a.feature_model);
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw CLI::ValidationError("config", e.what());
  }

  const LabeledGraph data = generate_graph(cfg);
  const Signal x = generate_features(data.labels, cfg.feat_dim, cfg.feat_scale, feature_seed(cfg.seed),
                                     cfg.feature_model);
  const Eigen::MatrixXd s = ccns(data);

  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  {
    auto f = open_out(dir / "edges.txt");
    write_edge_list(f, data.graph);
  }
  {
    auto f = open_out(dir / "labels.csv");
    write_labels(f, data.labels);
  }
  {
    auto f = open_out(dir / "features.csv");
    write_features(f, x);
  }
  {
    auto f = open_out(dir / "masks.csv");
    write_masks(f, data.masks);
  }
  {
    auto f = open_out(dir / "ccns.csv");
    write_matrix_csv(f, s);
  }

  out << "nodes: " << cfg.n << "  edges: " << data.graph.num_edges() << "  classes: " << cfg.num_classes
      << "  gamma: " << fmt(cfg.gamma) << "\nCCNS:\n";
  out << std::fixed << std::setprecision(3);
  for (Eigen::Index r = 0; r < s.rows(); ++r) {
    for (Eigen::Index q = 0; q < s.cols(); ++q) out << std::right << std::setw(8) << s(r, q);
    out << '\n';
  }
  out << std::defaultfloat;
  json ccns_rows = json::array();
  for (Eigen::Index r = 0; r < s.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index q = 0; q < s.cols(); ++q) row.push_back(std::isfinite(s(r, q)) ? json(s(r, q)) : json());
    ccns_rows.push_back(row);
  }
  write_summary(c,
                {{"ok", true},
                 {"nodes", cfg.n},
                 {"edges", data.graph.num_edges()},
                 {"gamma", cfg.gamma},
                 {"seed", cfg.seed},
                 {"ccns", ccns_rows},
                 {"out_dir", a.out_dir}},
                "synth");
  return kOk;
}

// ---- train ------------------------------------------------------------------

struct TrainArgs {
  std::string data_dir, edges, labels, features, masks, history, attention;
  std::string kind = "b";
  int r = 3, h = 4, max_levels = 0;
  bool homophily = false;
  bool exclude_raw = false;
  PegfanConfig cfg;
};

int cmd_train(TrainArgs a, const Common& c, std::ostream& out) {
  auto path_or = [&](const std::string& explicit_path, const char* name) {
    if (!explicit_path.empty()) return explicit_path;
    if (a.data_dir.empty()) throw CLI::ValidationError("train", std::string("need --data or --") + name);
    return (fs::path(a.data_dir) / (std::string(name) == "edges" ? "edges.txt" : std::string(name) + ".csv")).string();
  };
  const ChannelKind kind = parse_channel_kind(a.kind);
  LabeledGraph data;
  data.labels = read_file(path_or(a.labels, "labels"), read_labels);
  data.graph = load_edge_list(path_or(a.edges, "edges"), static_cast<int>(data.labels.size()));
  data.masks = read_file(path_or(a.masks, "masks"), read_masks);
  const Signal x = read_file(path_or(a.features, "features"), read_features);
  const int n = data.graph.num_nodes();
  if (static_cast<int>(data.labels.size()) != n || x.rows() != n || static_cast<int>(data.masks.train.size()) != n)
    throw std::runtime_error("edges, labels, features and masks disagree on the node count");
  data.num_classes = *std::max_element(data.labels.begin(), data.labels.end()) + 1;

  const HierarchyTree t = build_hierarchy(data.graph, {a.h, a.max_levels});
  const FrameletSystem s = generate_system(t, 1);
  ChannelSet channels = build_channels(x, data.graph, s, kind, a.homophily, a.r);
  if (a.exclude_raw) {
    channels.channels.erase(channels.channels.begin());
    channels.tags.erase(channels.tags.begin());
  }
  const PegfanModel init(channels.dims(), data.num_classes, a.cfg);
  const TrainResult result = train(init, channels, data);

  const Signal probs = forward(result.best, channels);
  const double train_acc = accuracy(probs, data.labels, data.masks.train);
  const double val_acc = accuracy(probs, data.labels, data.masks.val);
  const double test_acc = accuracy(probs, data.labels, data.masks.test);
  const Eigen::VectorXd alpha = result.best.attention();

  out << "channels: " << channels.size() << " (K = " << t.num_levels() << ")\nepochs run: " << result.history.size()
      << "  best epoch: " << result.best_epoch << '\n'
      << std::fixed << std::setprecision(4) << "train acc: " << train_acc << "\nval acc: " << val_acc
      << "\ntest acc: " << test_acc << "\nattention:";
  for (int i = 0; i < channels.size(); ++i) out << ' ' << channels.tags[static_cast<std::size_t>(i)] << '=' << alpha[i];
  out << std::defaultfloat << '\n';

  if (!a.history.empty()) {
    auto f = open_out(a.history);
    f << "epoch,train_loss,val_acc\n";
    for (const auto& rec : result.history) f << rec.epoch << ',' << fmt(rec.train_loss) << ',' << fmt(rec.val_acc) << '\n';
  }
  if (!a.attention.empty()) {
    auto f = open_out(a.attention);
    f << "channel,alpha\n";
    for (int i = 0; i < channels.size(); ++i) f << channels.tags[static_cast<std::size_t>(i)] << ',' << fmt(alpha[i]) << '\n';
  }
  json att = json::object();
  for (int i = 0; i < channels.size(); ++i) att[channels.tags[static_cast<std::size_t>(i)]] = alpha[i];
  write_summary(c,
                {{"ok", true},
                 {"train_acc", train_acc},
                 {"val_acc", val_acc},
                 {"test_acc", test_acc},
                 {"best_epoch", result.best_epoch},
                 {"epochs_run", result.history.size()},
                 {"levels", t.num_levels()},
                 {"attention", att}},
                "train");
  return kOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Haar graph framelets, fast transforms, synthetic heterophilous graphs and PEGFAN training", "hgf"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Common common;

  HierarchyArgs ha;
  auto* hier = app.add_subcommand("hierarchy", "Build and validate a hierarchical clustering from an edge list");
  hier->add_option("--edges", ha.edges, "Edge list (src dst [weight])")->required()->check(CLI::ExistingFile);
  hier->add_option("--nodes", ha.nodes, "Minimum node count (isolated trailing nodes)");
  hier->add_option("--max-children", ha.h, "Maximum children per cluster")->check(CLI::Range(2, 1 << 20));
  hier->add_option("--max-levels", ha.max_levels, "Cap on K (0: none)");
  hier->add_option("--out", ha.out, "Write hierarchy JSON here");
  add_common(hier, common);

  FrameletArgs fa;
  auto* fram = app.add_subcommand("framelets", "Generate the framelet system and report its statistics");
  fram->add_option("--edges", fa.edges, "Edge list")->check(CLI::ExistingFile);
  fram->add_option("--hierarchy", fa.hierarchy, "Hierarchy JSON (built from --edges when absent)")
      ->check(CLI::ExistingFile);
  fram->add_option("--nodes", fa.nodes, "Minimum node count");
  fram->add_option("--max-children", fa.h, "Maximum children when building")->check(CLI::Range(2, 1 << 20));
  fram->add_option("--max-levels", fa.max_levels, "Cap on K when building");
  fram->add_option("--j0", fa.j0, "Coarsest scaling level");
  fram->add_option("--trials", fa.trials, "Random vectors for the tight-frame check")->check(CLI::NonNegativeNumber);
  fram->add_option("--seed", fa.seed, "RNG seed");
  fram->add_option("--out", fa.out, "Write the system archive here");
  add_common(fram, common);

  TransformArgs ta;
  auto* tran = app.add_subcommand("transform", "Fast decomposition or reconstruction");
  tran->add_option("mode", ta.mode, "decompose | reconstruct")->required()->check(CLI::IsMember({"decompose", "reconstruct"}));
  tran->add_option("--system", ta.system, "Framelet archive")->check(CLI::ExistingFile);
  tran->add_option("--hierarchy", ta.hierarchy, "Hierarchy JSON (alternative to --system)")->check(CLI::ExistingFile);
  tran->add_option("--j0", ta.j0, "Coarsest scaling level when using --hierarchy");
  tran->add_option("--input", ta.input, "Signal CSV (decompose) or coefficients JSON (reconstruct)")
      ->required()
      ->check(CLI::ExistingFile);
  tran->add_option("--out", ta.out, "Output file (stdout when absent)");
  add_common(tran, common);

  VerifyArgs va;
  auto* ver = app.add_subcommand("verify", "Run the structural and numerical property checks");
  ver->add_option("--edges", va.edges, "Edge list")->check(CLI::ExistingFile);
  ver->add_option("--hierarchy", va.hierarchy, "Hierarchy JSON (built from --edges when absent)")->check(CLI::ExistingFile);
  ver->add_option("--nodes", va.nodes, "Minimum node count");
  ver->add_option("--max-children", va.h, "Maximum children when building")->check(CLI::Range(2, 1 << 20));
  ver->add_option("--max-levels", va.max_levels, "Cap on K when building");
  ver->add_option("--j0", va.j0, "Start level (0: every level)");
  ver->add_option("--trials", va.trials, "Random trials per numerical check (0: structural only)")
      ->check(CLI::NonNegativeNumber);
  ver->add_option("--seed", va.seed, "RNG seed");
  add_common(ver, common);

  SynthArgs sa;
  auto* syn = app.add_subcommand("synth", "Generate a synthetic heterophilous dataset and its CCNS table");
  syn->add_option("--n", sa.cfg.n, "Node count");
  syn->add_option("--classes", sa.cfg.num_classes, "Class count");
  syn->add_option("--edges", sa.cfg.num_edges, "Distinct undirected edges");
  syn->add_option("--gamma", sa.cfg.gamma, "Mixing weight toward uniform neighbor classes");
  syn->add_option("--dist", sa.dist, "Neighbor-class distribution, row-major");
  syn->add_option("--feat-dim", sa.cfg.feat_dim, "Feature dimension");
  syn->add_option("--feat-scale", sa.cfg.feat_scale, "Feature scale s");
  syn->add_option("--feature-model", sa.feature_model, "scaled: s(-0.75+0.5c)xi; shifted: s(-0.75+0.5c)+xi");
  syn->add_option("--seed", sa.cfg.seed, "RNG seed");
  syn->add_option("--split", sa.split, "Train, validation and test fractions")->expected(3);
  syn->add_option("--out-dir", sa.out_dir, "Output directory")->required();
  add_common(syn, common);

  TrainArgs tr;
  auto* trn = app.add_subcommand("train", "Train PEGFAN on a dataset directory or explicit files");
  trn->add_option("--data", tr.data_dir, "Directory with edges.txt, labels.csv, features.csv, masks.csv");
  trn->add_option("--edges", tr.edges, "Edge list");
  trn->add_option("--labels", tr.labels, "Labels CSV");
  trn->add_option("--features", tr.features, "Features CSV");
  trn->add_option("--masks", tr.masks, "Masks CSV");
  trn->add_option("--kind", tr.kind, "Channel type a, b or c")->check(CLI::IsMember({"a", "b", "c"}));
  trn->add_option("--powers", tr.r, "Adjacency powers for types b and c")->check(CLI::PositiveNumber);
  trn->add_option("--max-children", tr.h, "Maximum children in the hierarchy")->check(CLI::Range(2, 1 << 20));
  trn->add_option("--max-levels", tr.max_levels, "Cap on K");
  trn->add_flag("--homophily", tr.homophily, "Use the normalized adjacency");
  trn->add_flag("--exclude-raw", tr.exclude_raw, "Drop the raw-X channel");
  trn->add_option("--hidden", tr.cfg.hidden, "Hidden width per channel")->check(CLI::PositiveNumber);
  trn->add_option("--lr-sca", tr.cfg.lr_sca, "Learning rate of the attention logits");
  trn->add_option("--lr-fc", tr.cfg.lr_fc, "Learning rate of the weights");
  trn->add_option("--wd-sca", tr.cfg.wd_sca, "Weight decay of the attention logits");
  trn->add_option("--wd-fc1", tr.cfg.wd_fc1, "Weight decay of the channel weights");
  trn->add_option("--wd-fc2", tr.cfg.wd_fc2, "Weight decay of the output weights");
  trn->add_option("--dropout", tr.cfg.dropout, "Dropout rate on the hidden layer")->check(CLI::Range(0.0, 0.99));
  trn->add_option("--epochs", tr.cfg.epochs, "Epoch budget")->check(CLI::NonNegativeNumber);
  trn->add_option("--patience", tr.cfg.patience, "Early-stopping patience")->check(CLI::NonNegativeNumber);
  trn->add_option("--seed", tr.cfg.seed, "RNG seed");
  trn->add_option("--history", tr.history, "Write epoch,train_loss,val_acc CSV here");
  trn->add_option("--attention", tr.attention, "Write channel,alpha CSV here");
  add_common(trn, common);

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = expand_config(std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }

  try {
    if (*hier) return cmd_hierarchy(ha, common, out);
    if (*fram) return cmd_framelets(fa, common, out);
    if (*tran) return cmd_transform(ta, common, out);
    if (*ver) return cmd_verify(va, common, out);
    if (*syn) return cmd_synth(sa, common, out);
    if (*trn) return cmd_train(tr, common, out);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kInputError;
}

}  // namespace hgf
