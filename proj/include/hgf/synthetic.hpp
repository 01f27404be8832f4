#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "hgf/graph.hpp"

namespace hgf {

// How class c shapes a feature entry with standard normal noise xi.
enum class FeatureModel {
  kScaled,   // scale * (-0.75 + 0.5 c) * xi
  kShifted,  // scale * (-0.75 + 0.5 c) + xi
};

// Table of neighbor-class distributions; row c is D_c.
Eigen::MatrixXd default_distribution();

struct SyntheticConfig {
  int n = 3000;
  int num_classes = 4;
  std::int64_t num_edges = 45000;
  double gamma = 0.0;
  Eigen::MatrixXd dist = default_distribution();
  int feat_dim = 700;
  double feat_scale = 6.0;
  FeatureModel feature_model = FeatureModel::kScaled;
  std::uint64_t seed = 0;
  std::array<double, 3> split{0.48, 0.32, 0.20};

  // Throws std::invalid_argument naming the first bad field.
  void validate() const;
};

struct Masks {
  std::vector<char> train, val, test;
};

struct LabeledGraph {
  Graph graph;
  std::vector<int> labels;
  int num_classes = 0;
  Masks masks;
};

// Label-driven edge sampler; exactly cfg.num_edges distinct undirected edges, no self-loops.
LabeledGraph generate_graph(const SyntheticConfig& cfg);

Signal generate_features(std::span<const int> labels, int dim, double scale, std::uint64_t seed,
                         FeatureModel model = FeatureModel::kScaled);

// Random split of n nodes into train/val/test by the given fractions.
Masks split_masks(int n, const std::array<double, 3>& fractions, std::uint64_t seed);

// Cross-class neighborhood similarity; NaN where a class (or a diagonal pair) is empty.
Eigen::MatrixXd ccns(const LabeledGraph& g);

void write_labels(std::ostream& out, std::span<const int> labels);
std::vector<int> read_labels(std::istream& in);
void write_masks(std::ostream& out, const Masks& m);
Masks read_masks(std::istream& in);
void write_features(std::ostream& out, const Signal& x);
Signal read_features(std::istream& in);
void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m);

}  // namespace hgf
