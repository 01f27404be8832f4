#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hgf/framelets.hpp"
#include "hgf/graph.hpp"
#include "hgf/synthetic.hpp"

namespace hgf {

enum class ChannelKind { kA, kB, kC };

ChannelKind parse_channel_kind(const std::string& s);  // "a", "b" or "c"

struct ChannelSet {
  std::vector<Signal> channels;
  std::vector<std::string> tags;

  int size() const { return static_cast<int>(channels.size()); }
  Eigen::Index rows() const { return channels.empty() ? 0 : channels.front().rows(); }
  std::vector<int> dims() const;
  // Rows listed in `rows`, in that order.
  ChannelSet gather(std::span<const int> rows) const;
};

// a: X, F_0 X .. F_{K-1} X
// b: X, A X .. A^r X, F_0 X .. F_{K-1} X
// c: X, A X .. A^r X, F_0(A X) .. F_{K-1}(A X)
// With `homophily` the normalized adjacency replaces A. `s` must use j0 = 1.
ChannelSet build_channels(const Signal& X, const Graph& g, const FrameletSystem& s, ChannelKind kind, bool homophily,
                          int r);

struct PegfanConfig {
  int hidden = 64;
  double lr_sca = 0.04;
  double lr_fc = 0.01;
  double wd_sca = 0.0;
  double wd_fc1 = 0.0;
  double wd_fc2 = 0.0;
  double dropout = 0.5;
  int epochs = 1000;
  int patience = 100;
  std::uint64_t seed = 0;
};

struct PegfanParams {
  std::vector<Eigen::MatrixXd> channel_weights;  // W_i: d_i x hidden
  Eigen::VectorXd logits;                        // attention logits, alpha = softmax(logits)
  Eigen::MatrixXd output_weights;                // W: (n_C * hidden) x n_c
};

class PegfanModel {
 public:
  PegfanModel() = default;
  // Glorot-uniform weights from cfg.seed, zero logits.
  PegfanModel(std::span<const int> channel_dims, int num_classes, const PegfanConfig& cfg);

  const PegfanConfig& config() const { return cfg_; }
  PegfanParams& params() { return params_; }
  const PegfanParams& params() const { return params_; }
  int num_channels() const { return static_cast<int>(params_.channel_weights.size()); }
  int num_classes() const { return static_cast<int>(params_.output_weights.cols()); }
  Eigen::VectorXd attention() const;

 private:
  PegfanConfig cfg_;
  PegfanParams params_;
};

// Class probabilities, one row per node; no dropout.
Signal forward(const PegfanModel& m, const ChannelSet& c);

// Mean cross entropy over masked nodes plus the three weight-decay terms.
// `dropout_keep`, if given, is the (rows-in-mask) x (n_C * hidden) inverted-dropout multiplier.
double loss_and_grads(const PegfanModel& m, const ChannelSet& c, std::span<const int> labels,
                      std::span<const char> mask, PegfanParams* grads, const Eigen::MatrixXd* dropout_keep = nullptr);

// Argmax accuracy over masked nodes; ties go to the smallest class id.
double accuracy(const Signal& probs, std::span<const int> labels, std::span<const char> mask);
double evaluate(const PegfanModel& m, const ChannelSet& c, std::span<const int> labels, std::span<const char> mask);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_acc = 0.0;  // of the parameters before this epoch's update
};

struct TrainResult {
  PegfanModel best;
  int best_epoch = -1;
  double best_val_acc = 0.0;
  std::vector<EpochRecord> history;
};

using EpochObserver = std::function<void(const EpochRecord&, const PegfanModel&)>;

// Adam with two groups (logits: lr_sca; weights: lr_fc), early stopping on validation accuracy.
TrainResult train(const PegfanModel& init, const ChannelSet& c, const LabeledGraph& data,
                  const EpochObserver& observer = {});

}  // namespace hgf
