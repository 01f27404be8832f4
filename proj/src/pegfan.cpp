#include "hgf/pegfan.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "hgf/transforms.hpp"

namespace hgf {

ChannelKind parse_channel_kind(const std::string& s) {
  if (s == "a") return ChannelKind::kA;
  if (s == "b") return ChannelKind::kB;
  if (s == "c") return ChannelKind::kC;
  throw std::invalid_argument("channel kind must be a, b or c (got '" + s + "')");
}

std::vector<int> ChannelSet::dims() const {
  std::vector<int> d;
  for (const auto& ch : channels) d.push_back(static_cast<int>(ch.cols()));
  return d;
}

ChannelSet ChannelSet::gather(std::span<const int> rows) const {
  ChannelSet out;
  out.tags = tags;
  for (const auto& ch : channels) {
    Signal g(static_cast<Eigen::Index>(rows.size()), ch.cols());
    for (std::size_t k = 0; k < rows.size(); ++k) g.row(static_cast<Eigen::Index>(k)) = ch.row(rows[k]);
    out.channels.push_back(std::move(g));
  }
  return out;
}

ChannelSet build_channels(const Signal& X, const Graph& g, const FrameletSystem& s, ChannelKind kind, bool homophily,
                          int r) {
  if (X.rows() != g.num_nodes() || s.num_nodes() != g.num_nodes())
    throw std::invalid_argument("features, graph and framelet system disagree on the node count");
  if (s.j0() != 1) throw std::invalid_argument("channel construction needs a system built with j0 = 1");
  if (kind != ChannelKind::kA && r < 1) throw std::invalid_argument("power count r must be >= 1");
  const SparseMatrix op = homophily ? normalized_adjacency(g) : g.adjacency();
  const std::string a = homophily ? "Ã" : "A";

  ChannelSet c;
  c.channels.push_back(X);
  c.tags.push_back("raw-X");
  if (kind != ChannelKind::kA) {
    Signal power = X;
    for (int k = 1; k <= r; ++k) {
      power = spmm(op, power);
      c.channels.push_back(power);
      c.tags.push_back(a + "^" + std::to_string(k) + "-X");
    }
  }
  const Signal base = kind == ChannelKind::kC ? spmm(op, X) : X;
  const std::string base_tag = kind == ChannelKind::kC ? a + "X" : "X";
  for (int j = 0; j < s.num_levels(); ++j) {
    c.channels.push_back(project_level(s, j, base));
    c.tags.push_back("F" + std::to_string(j) + "-of-" + base_tag);
  }
  return c;
}

namespace {

Eigen::VectorXd softmax(const Eigen::VectorXd& a) {
  const Eigen::VectorXd e = (a.array() - a.maxCoeff()).exp();
  return e / e.sum();
}

void check_shapes(const PegfanParams& p, const ChannelSet& c) {
  if (static_cast<std::size_t>(c.size()) != p.channel_weights.size())
    throw std::invalid_argument("model expects " + std::to_string(p.channel_weights.size()) + " channels, got " +
                                std::to_string(c.size()));
  for (int i = 0; i < c.size(); ++i)
    if (c.channels[static_cast<std::size_t>(i)].cols() != p.channel_weights[static_cast<std::size_t>(i)].rows())
      throw std::invalid_argument("channel " + std::to_string(i) + " width does not match its weights");
}

struct ForwardCache {
  Eigen::VectorXd alpha;
  std::vector<Eigen::MatrixXd> unit;       // row-normalized X_i W_i
  std::vector<Eigen::VectorXd> row_norms;  // norms before normalization
  Eigen::MatrixXd hidden;                  // H1
  Eigen::MatrixXd activated;               // ReLU(H1), dropout applied
  Eigen::MatrixXd log_probs;
};

void run_forward(const PegfanParams& p, const ChannelSet& c, const Eigen::MatrixXd* keep, ForwardCache& f) {
  check_shapes(p, c);
  const Eigen::Index rows = c.rows();
  const Eigen::Index h = p.channel_weights.empty() ? 0 : p.channel_weights.front().cols();
  f.alpha = softmax(p.logits);
  f.unit.resize(static_cast<std::size_t>(c.size()));
  f.row_norms.resize(static_cast<std::size_t>(c.size()));
  f.hidden.resize(rows, h * c.size());
  for (int i = 0; i < c.size(); ++i) {
    auto& z = f.unit[static_cast<std::size_t>(i)];
    z.noalias() = c.channels[static_cast<std::size_t>(i)] * p.channel_weights[static_cast<std::size_t>(i)];
    auto& norms = f.row_norms[static_cast<std::size_t>(i)];
    norms = z.rowwise().norm();
    for (Eigen::Index r = 0; r < rows; ++r)
      if (norms[r] > 0.0) z.row(r) /= norms[r];
    f.hidden.middleCols(i * h, h) = f.alpha[i] * z;
  }
  f.activated = f.hidden.cwiseMax(0.0);
  if (keep) f.activated.array() *= keep->array();
  Eigen::MatrixXd scores = f.activated * p.output_weights;
  const Eigen::VectorXd top = scores.rowwise().maxCoeff();
  scores.colwise() -= top;
  const Eigen::VectorXd lse = scores.array().exp().rowwise().sum().log().matrix();
  scores.colwise() -= lse;
  f.log_probs = std::move(scores);
}

double decay_terms(const PegfanParams& p, const PegfanConfig& cfg) {
  double w1 = 0.0;
  for (const auto& w : p.channel_weights) w1 += w.squaredNorm();
  return cfg.wd_fc1 * w1 + cfg.wd_fc2 * p.output_weights.squaredNorm() + cfg.wd_sca * p.logits.squaredNorm();
}

// Loss and gradients over every row of `c`.
double loss_over_rows(const PegfanParams& p, const PegfanConfig& cfg, const ChannelSet& c, std::span<const int> labels,
                      const Eigen::MatrixXd* keep, PegfanParams* grads) {
  ForwardCache f;
  run_forward(p, c, keep, f);
  const Eigen::Index rows = c.rows();
  const Eigen::Index nc = p.output_weights.cols();
  double ce = 0.0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const int y = labels[static_cast<std::size_t>(r)];
    if (y < 0 || y >= nc) throw std::invalid_argument("label out of range: " + std::to_string(y));
    ce -= f.log_probs(r, y);
  }
  const double loss = ce / static_cast<double>(rows) + decay_terms(p, cfg);
  if (!grads) return loss;

  Eigen::MatrixXd d_scores = f.log_probs.array().exp();
  for (Eigen::Index r = 0; r < rows; ++r) d_scores(r, labels[static_cast<std::size_t>(r)]) -= 1.0;
  d_scores /= static_cast<double>(rows);

  grads->output_weights.noalias() = f.activated.transpose() * d_scores;
  grads->output_weights += 2.0 * cfg.wd_fc2 * p.output_weights;

  Eigen::MatrixXd d_hidden = d_scores * p.output_weights.transpose();
  d_hidden.array() *= (f.hidden.array() > 0.0).cast<double>();
  if (keep) d_hidden.array() *= keep->array();

  const Eigen::Index h = p.channel_weights.front().cols();
  Eigen::VectorXd d_alpha(c.size());
  grads->channel_weights.resize(p.channel_weights.size());
  for (int i = 0; i < c.size(); ++i) {
    const auto& unit = f.unit[static_cast<std::size_t>(i)];
    const auto& norms = f.row_norms[static_cast<std::size_t>(i)];
    const auto dh = d_hidden.middleCols(i * h, h);
    d_alpha[i] = (dh.array() * unit.array()).sum();
    Eigen::MatrixXd d_unit = f.alpha[i] * dh;
    const Eigen::VectorXd proj = (d_unit.array() * unit.array()).rowwise().sum();
    for (Eigen::Index r = 0; r < rows; ++r) {
      if (norms[r] > 0.0)
        d_unit.row(r) = (d_unit.row(r) - proj[r] * unit.row(r)) / norms[r];
      else
        d_unit.row(r).setZero();
    }
    auto& g = grads->channel_weights[static_cast<std::size_t>(i)];
    g.noalias() = c.channels[static_cast<std::size_t>(i)].transpose() * d_unit;
    g += 2.0 * cfg.wd_fc1 * p.channel_weights[static_cast<std::size_t>(i)];
  }
  grads->logits = f.alpha.cwiseProduct(d_alpha - Eigen::VectorXd::Constant(c.size(), f.alpha.dot(d_alpha))) +
                  2.0 * cfg.wd_sca * p.logits;
  return loss;
}

std::vector<int> selected_rows(std::span<const char> mask) {
  std::vector<int> rows;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) rows.push_back(static_cast<int>(i));
  return rows;
}

std::vector<int> pick(std::span<const int> labels, const std::vector<int>& rows) {
  std::vector<int> out;
  out.reserve(rows.size());
  for (int r : rows) out.push_back(labels[static_cast<std::size_t>(r)]);
  return out;
}

}  // namespace

PegfanModel::PegfanModel(std::span<const int> channel_dims, int num_classes, const PegfanConfig& cfg) : cfg_(cfg) {
  if (channel_dims.empty()) throw std::invalid_argument("model needs at least one channel");
  if (cfg.hidden < 1 || num_classes < 1) throw std::invalid_argument("hidden width and class count must be >= 1");
  if (!(cfg.dropout >= 0.0 && cfg.dropout < 1.0)) throw std::invalid_argument("dropout must lie in [0, 1)");
  std::mt19937_64 rng(cfg.seed);
  auto glorot = [&](Eigen::Index rows, Eigen::Index cols) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> u(-limit, limit);
    Eigen::MatrixXd w(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) w(i, j) = u(rng);
    return w;
  };
  for (int d : channel_dims) params_.channel_weights.push_back(glorot(d, cfg.hidden));
  params_.logits = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(channel_dims.size()));
  params_.output_weights = glorot(static_cast<Eigen::Index>(channel_dims.size()) * cfg.hidden, num_classes);
}

Eigen::VectorXd PegfanModel::attention() const { return softmax(params_.logits); }

Signal forward(const PegfanModel& m, const ChannelSet& c) {
  ForwardCache f;
  run_forward(m.params(), c, nullptr, f);
  return f.log_probs.array().exp();
}

double loss_and_grads(const PegfanModel& m, const ChannelSet& c, std::span<const int> labels,
                      std::span<const char> mask, PegfanParams* grads, const Eigen::MatrixXd* dropout_keep) {
  if (labels.size() != static_cast<std::size_t>(c.rows()) || mask.size() != labels.size())
    throw std::invalid_argument("labels and mask must cover every node");
  const auto rows = selected_rows(mask);
  if (rows.empty()) throw std::invalid_argument("mask selects no nodes");
  if (dropout_keep && dropout_keep->rows() != static_cast<Eigen::Index>(rows.size()))
    throw std::invalid_argument("dropout multiplier must have one row per masked node");
  const auto y = pick(labels, rows);
  return loss_over_rows(m.params(), m.config(), c.gather(rows), y, dropout_keep, grads);
}

double accuracy(const Signal& probs, std::span<const int> labels, std::span<const char> mask) {
  if (labels.size() != static_cast<std::size_t>(probs.rows()) || mask.size() != labels.size())
    throw std::invalid_argument("labels and mask must cover every row");
  int total = 0, hits = 0;
  for (Eigen::Index r = 0; r < probs.rows(); ++r) {
    if (!mask[static_cast<std::size_t>(r)]) continue;
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < probs.cols(); ++k)
      if (probs(r, k) > probs(r, best)) best = k;
    ++total;
    hits += best == labels[static_cast<std::size_t>(r)];
  }
  if (total == 0) throw std::invalid_argument("mask selects no nodes");
  return static_cast<double>(hits) / total;
}

double evaluate(const PegfanModel& m, const ChannelSet& c, std::span<const int> labels, std::span<const char> mask) {
  const auto rows = selected_rows(mask);
  if (rows.empty()) throw std::invalid_argument("mask selects no nodes");
  const Signal probs = forward(m, c.gather(rows));
  const auto y = pick(labels, rows);
  return accuracy(probs, y, std::vector<char>(rows.size(), 1));
}

namespace {

struct AdamSlot {
  Eigen::MatrixXd m, v;
};

void adam_step(Eigen::MatrixXd& theta, const Eigen::MatrixXd& g, AdamSlot& s, double lr, int t) {
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  if (s.m.size() == 0) {
    s.m = Eigen::MatrixXd::Zero(theta.rows(), theta.cols());
    s.v = Eigen::MatrixXd::Zero(theta.rows(), theta.cols());
  }
  s.m = b1 * s.m + (1.0 - b1) * g;
  s.v = b2 * s.v + (1.0 - b2) * g.cwiseAbs2();
  const double c1 = 1.0 - std::pow(b1, t);
  const double c2 = 1.0 - std::pow(b2, t);
  theta.array() -= lr * (s.m.array() / c1) / ((s.v.array() / c2).sqrt() + eps);
}

}  // namespace

TrainResult train(const PegfanModel& init, const ChannelSet& c, const LabeledGraph& data,
                  const EpochObserver& observer) {
  const PegfanConfig& cfg = init.config();
  const auto train_rows = selected_rows(data.masks.train);
  const auto val_rows = selected_rows(data.masks.val);
  if (train_rows.empty() || val_rows.empty()) throw std::invalid_argument("training needs train and validation nodes");
  if (data.labels.size() != static_cast<std::size_t>(c.rows()))
    throw std::invalid_argument("labels must cover every node");
  const ChannelSet train_set = c.gather(train_rows);
  const ChannelSet val_set = c.gather(val_rows);
  const auto train_y = pick(data.labels, train_rows);
  const auto val_y = pick(data.labels, val_rows);
  const std::vector<char> all_val(val_rows.size(), 1);

  TrainResult out;
  out.best = init;
  PegfanModel model = init;
  PegfanParams grads;
  std::vector<AdamSlot> slots(model.params().channel_weights.size() + 2);
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::bernoulli_distribution keep_draw(1.0 - cfg.dropout);
  const Eigen::Index width = static_cast<Eigen::Index>(model.num_channels()) * cfg.hidden;
  Eigen::MatrixXd keep;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    rec.val_acc = accuracy(forward(model, val_set), val_y, all_val);
    if (rec.val_acc > out.best_val_acc || out.best_epoch < 0) {
      out.best_val_acc = rec.val_acc;
      out.best_epoch = epoch;
      out.best = model;
    } else if (epoch - out.best_epoch >= cfg.patience) {
      break;
    }

    const Eigen::MatrixXd* keep_ptr = nullptr;
    if (cfg.dropout > 0.0) {
      keep.resize(static_cast<Eigen::Index>(train_rows.size()), width);
      const double scale = 1.0 / (1.0 - cfg.dropout);
      for (Eigen::Index j = 0; j < keep.cols(); ++j)
        for (Eigen::Index i = 0; i < keep.rows(); ++i) keep(i, j) = keep_draw(rng) ? scale : 0.0;
      keep_ptr = &keep;
    }
    rec.train_loss = loss_over_rows(model.params(), cfg, train_set, train_y, keep_ptr, &grads);
    if (!std::isfinite(rec.train_loss))
      throw std::runtime_error("training diverged at epoch " + std::to_string(epoch) + " (non-finite loss)");

    auto& p = model.params();
    const int t = epoch + 1;
    for (std::size_t i = 0; i < p.channel_weights.size(); ++i)
      adam_step(p.channel_weights[i], grads.channel_weights[i], slots[i], cfg.lr_fc, t);
    adam_step(p.output_weights, grads.output_weights, slots[p.channel_weights.size()], cfg.lr_fc, t);
    Eigen::MatrixXd logits = p.logits;
    adam_step(logits, grads.logits, slots[p.channel_weights.size() + 1], cfg.lr_sca, t);
    p.logits = logits;

    out.history.push_back(rec);
    if (observer) observer(rec, model);
  }
  return out;
}

}  // namespace hgf
